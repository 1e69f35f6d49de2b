#pragma once

#include "figlex/common.hpp"
#include "figlex/corpus.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace figlex {

class Matcher;

/// Dense token vectors, row-major, indices 0..size()-1.
class EmbeddingSpace {
public:
  explicit EmbeddingSpace(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  std::optional<std::size_t> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  /// Vector of a token; throws when out of vocabulary.
  std::span<const float> vector(std::string_view token) const;

  /// Appends a token; throws on duplicates, dimension mismatch or non-finite values.
  void add(std::string token, std::span<const float> values);

  friend bool operator==(const EmbeddingSpace&, const EmbeddingSpace&) = default;

private:
  std::size_t dim_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
};

struct TrainParams {
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::uint64_t min_count = 5;
  std::size_t epochs = 5;
  double initial_lr = 0.025;
  std::uint64_t seed = 1;

  /// Throws unless every field is positive and dim >= 2.
  void validate() const;
};

struct TrainResult {
  EmbeddingSpace space;
  /// Mean negative-sampling loss per (center, context) pair, one per epoch.
  std::vector<double> epoch_loss;
};

/// Skip-gram with negative sampling, single-threaded and bitwise
/// deterministic for a given seed. No frequent-token subsampling.
TrainResult train_sgns_sentences(const std::vector<TokenSeq>& sentences, const TrainParams& params);

/// Trains on the posts of a corpus after idiom rewriting.
EmbeddingSpace train_sgns(const Corpus& corpus, const Matcher& matcher, const TrainParams& params);

/// Plain-text format: "<vocab_size> <dim>" header, then "token v1 .. vdim" rows.
EmbeddingSpace load_vectors(const std::string& path);
EmbeddingSpace parse_vectors(std::istream& in);
void save_vectors(const EmbeddingSpace& space, const std::string& path);

/// Cosine similarity clamped to [-1, 1]. Throws on dimension mismatch or zero vectors.
template <class T, class U>
double cosine(std::span<const T> u, std::span<const U> v) {
  if (u.size() != v.size()) throw Error("cosine: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i], b = v[i];
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0) throw Error("cosine: zero vector");
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  return cosine(std::span<const double>(u), std::span<const double>(v));
}

struct Neighbor {
  std::string token;
  double cosine = 0.0;
};

struct NeighborList {
  std::string anchor;
  std::vector<Neighbor> neighbors;  // descending cosine, ties by token

  std::vector<std::string> tokens() const;
};

/// Top-k tokens by cosine to `token`, excluding the token itself.
/// Throws when the token is unknown or k exceeds size() - 1.
NeighborList nearest_neighbors(const EmbeddingSpace& space, std::string_view token, std::size_t k);

/// Mean of the in-vocabulary, non-stopword token vectors.
std::vector<double> sentence_embedding(const EmbeddingSpace& space, const TokenSeq& tokens,
                                       const Stopwords& stopwords = default_stopwords());

/// Maps a token sequence (an idiom definition, a post) to a feature vector.
class SentenceEmbedder {
public:
  virtual ~SentenceEmbedder() = default;
  virtual std::size_t dim() const = 0;
  /// Throws Error when the sequence cannot be embedded.
  virtual std::vector<double> embed(const TokenSeq& tokens) const = 0;
};

/// Default provider: sentence_embedding over a word space.
class BagOfVectorsEmbedder : public SentenceEmbedder {
public:
  explicit BagOfVectorsEmbedder(const EmbeddingSpace& space, Stopwords stopwords = default_stopwords())
      : space_(space), stopwords_(std::move(stopwords)) {}

  std::size_t dim() const override { return space_.dim(); }
  std::vector<double> embed(const TokenSeq& tokens) const override {
    return sentence_embedding(space_, tokens, stopwords_);
  }

private:
  const EmbeddingSpace& space_;
  Stopwords stopwords_;
};

/// Externally computed sentence vectors stored in the vector-file format,
/// keyed by the sentence tokens joined with underscores.
class PrecomputedEmbedder : public SentenceEmbedder {
public:
  explicit PrecomputedEmbedder(EmbeddingSpace vectors) : vectors_(std::move(vectors)) {}

  static std::string key(const TokenSeq& tokens) { return join(tokens, "_"); }

  std::size_t dim() const override { return vectors_.dim(); }
  std::vector<double> embed(const TokenSeq& tokens) const override;

private:
  EmbeddingSpace vectors_;
};

} // namespace figlex
