#include "figlex/embeddings.hpp"

#include "figlex/matcher.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace figlex {

std::optional<std::size_t> EmbeddingSpace::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingSpace::vector(std::string_view token) const {
  const auto i = find(token);
  if (!i) throw Error("token '" + std::string(token) + "' not in embedding space");
  return row(*i);
}

void EmbeddingSpace::add(std::string token, std::span<const float> values) {
  if (values.size() != dim_) throw Error("vector for '" + token + "' has wrong dimension");
  if (!std::all_of(values.begin(), values.end(), [](float x) { return std::isfinite(x); })) {
    throw Error("vector for '" + token + "' is not finite");
  }
  if (!index_.emplace(token, words_.size()).second) throw Error("duplicate token '" + token + "'");
  words_.push_back(std::move(token));
  data_.insert(data_.end(), values.begin(), values.end());
}

void TrainParams::validate() const {
  if (dim < 2) throw Error("train params: dim must be at least 2");
  if (window == 0 || negatives == 0 || min_count == 0 || epochs == 0) {
    throw Error("train params: window, negatives, min_count and epochs must be positive");
  }
  if (!(initial_lr > 0.0)) throw Error("train params: initial_lr must be positive");
}

namespace {

// -log(sigmoid(x)), stable for large |x|.
double neg_log_sigmoid(double x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

float sigmoid(float x) {
  return 1.0f / (1.0f + std::exp(-x));
}

} // namespace

TrainResult train_sgns_sentences(const std::vector<TokenSeq>& sentences, const TrainParams& params) {
  params.validate();

  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& s : sentences) {
    for (const auto& t : s) ++freq[t];
  }
  std::vector<std::pair<std::string, std::uint64_t>> vocab;
  for (auto& [tok, n] : freq) {
    if (n >= params.min_count) vocab.emplace_back(tok, n);
  }
  if (vocab.empty()) throw Error("train_sgns: no token reaches min_count " + std::to_string(params.min_count));
  std::sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::unordered_map<std::string, std::uint32_t> ids;
  for (std::size_t i = 0; i < vocab.size(); ++i) ids.emplace(vocab[i].first, static_cast<std::uint32_t>(i));

  std::vector<std::vector<std::uint32_t>> corpus_ids;
  std::uint64_t train_words = 0;
  for (const auto& s : sentences) {
    std::vector<std::uint32_t> row;
    for (const auto& t : s) {
      if (auto it = ids.find(t); it != ids.end()) row.push_back(it->second);
    }
    train_words += row.size();
    if (row.size() > 1) corpus_ids.push_back(std::move(row));
  }

  // Negative-sampling distribution: unigram counts raised to 3/4.
  std::vector<double> cumulative(vocab.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab[i].second), 0.75);
    cumulative[i] = acc;
  }
  Rng rng(params.seed);
  auto sample_negative = [&] {
    const double r = rng.uniform01() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return static_cast<std::uint32_t>(std::min<std::size_t>(it - cumulative.begin(), vocab.size() - 1));
  };

  const std::size_t dim = params.dim;
  std::vector<float> input(vocab.size() * dim);
  std::vector<float> output(vocab.size() * dim, 0.0f);
  for (auto& x : input) x = static_cast<float>((rng.uniform01() - 0.5) / static_cast<double>(dim));

  const double total = static_cast<double>(params.epochs) * static_cast<double>(train_words) + 1.0;
  double processed = 0.0;
  std::vector<float> grad(dim);
  std::vector<double> epoch_loss;

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    double loss = 0.0;
    std::uint64_t pairs = 0;
    for (const auto& row : corpus_ids) {
      for (std::size_t pos = 0; pos < row.size(); ++pos) {
        const float lr = static_cast<float>(params.initial_lr * std::max(1e-4, 1.0 - processed / total));
        processed += 1.0;
        const std::size_t reach = params.window - rng.uniform_index(params.window);
        const std::size_t lo = pos >= reach ? pos - reach : 0;
        const std::size_t hi = std::min(row.size() - 1, pos + reach);
        float* in = input.data() + static_cast<std::size_t>(row[pos]) * dim;
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          std::fill(grad.begin(), grad.end(), 0.0f);
          for (std::size_t d = 0; d <= params.negatives; ++d) {
            std::uint32_t target;
            float label;
            if (d == 0) {
              target = row[c];
              label = 1.0f;
            } else {
              target = sample_negative();
              if (target == row[c]) continue;
              label = 0.0f;
            }
            float* out = output.data() + static_cast<std::size_t>(target) * dim;
            float f = 0.0f;
            for (std::size_t k = 0; k < dim; ++k) f += in[k] * out[k];
            loss += label > 0.5f ? neg_log_sigmoid(f) : neg_log_sigmoid(-f);
            const float g = (label - sigmoid(f)) * lr;
            for (std::size_t k = 0; k < dim; ++k) grad[k] += g * out[k];
            for (std::size_t k = 0; k < dim; ++k) out[k] += g * in[k];
          }
          for (std::size_t k = 0; k < dim; ++k) in[k] += grad[k];
          ++pairs;
        }
      }
    }
    epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }

  TrainResult result{EmbeddingSpace(dim), std::move(epoch_loss)};
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    result.space.add(vocab[i].first, std::span<const float>(input.data() + i * dim, dim));
  }
  return result;
}

EmbeddingSpace train_sgns(const Corpus& corpus, const Matcher& matcher, const TrainParams& params) {
  if (corpus.empty()) throw Error("train_sgns: empty corpus");
  std::vector<TokenSeq> sentences;
  sentences.reserve(corpus.size());
  for (const auto& p : corpus.posts()) sentences.push_back(matcher.rewrite(p.tokens));
  return train_sgns_sentences(sentences, params).space;
}

EmbeddingSpace parse_vectors(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("vector file: missing header");
  std::istringstream header(line);
  std::size_t count = 0, dim = 0;
  if (!(header >> count >> dim) || dim == 0) throw Error("vector file: bad header '" + line + "'");

  EmbeddingSpace space(dim);
  std::vector<float> values(dim);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    if (row > count) throw Error("vector file row " + std::to_string(row) + ": more rows than header declares");
    const char* p = line.data();
    const char* end = p + line.size();
    const char* sp = std::find(p, end, ' ');
    std::string token(p, sp);
    std::size_t got = 0;
    p = sp;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      float v = 0.0f;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw Error("vector file row " + std::to_string(row) + ": bad number");
      }
      if (got < dim) values[got] = v;
      ++got;
      p = next;
    }
    if (got != dim) {
      throw Error("vector file row " + std::to_string(row) + ": expected " + std::to_string(dim) +
                  " values, got " + std::to_string(got));
    }
    try {
      space.add(std::move(token), values);
    } catch (const Error& e) {
      throw Error("vector file row " + std::to_string(row) + ": " + e.what());
    }
  }
  if (row != count) {
    throw Error("vector file: header declares " + std::to_string(count) + " rows, found " + std::to_string(row));
  }
  return space;
}

EmbeddingSpace load_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vector file " + path);
  return parse_vectors(in);
}

void save_vectors(const EmbeddingSpace& space, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write vector file " + path);
  out << space.size() << ' ' << space.dim() << '\n';
  std::string line;
  for (std::size_t i = 0; i < space.size(); ++i) {
    line = space.words()[i];
    for (float v : space.row(i)) {
      line += ' ';
      line += v == 0.0f ? std::string("0") : fmt::format("{}", v);
    }
    out << line << '\n';
  }
}

std::vector<std::string> NeighborList::tokens() const {
  std::vector<std::string> out;
  out.reserve(neighbors.size());
  for (const auto& n : neighbors) out.push_back(n.token);
  return out;
}

NeighborList nearest_neighbors(const EmbeddingSpace& space, std::string_view token, std::size_t k) {
  const auto anchor = space.find(token);
  if (!anchor) throw Error("nearest_neighbors: '" + std::string(token) + "' not in vocabulary");
  if (k + 1 > space.size()) {
    throw Error("nearest_neighbors: k=" + std::to_string(k) + " exceeds vocabulary size - 1");
  }
  NeighborList list{std::string(token), {}};
  if (k == 0) return list;
  const auto a = space.row(*anchor);
  std::vector<Neighbor> all;
  all.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (i == *anchor) continue;
    const auto r = space.row(i);
    if (std::all_of(r.begin(), r.end(), [](float x) { return x == 0.0f; })) continue;
    all.push_back({space.words()[i], cosine(a, r)});
  }
  auto better = [](const Neighbor& x, const Neighbor& y) {
    return x.cosine != y.cosine ? x.cosine > y.cosine : x.token < y.token;
  };
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), better);
  all.resize(take);
  list.neighbors = std::move(all);
  return list;
}

std::vector<double> sentence_embedding(const EmbeddingSpace& space, const TokenSeq& tokens,
                                       const Stopwords& stopwords) {
  std::vector<double> mean(space.dim(), 0.0);
  std::size_t n = 0;
  for (const auto& t : tokens) {
    if (stopwords.count(t)) continue;
    const auto i = space.find(t);
    if (!i) continue;
    const auto r = space.row(*i);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += r[k];
    ++n;
  }
  if (n == 0) throw Error("sentence_embedding: no in-vocabulary content token in '" + join(tokens, " ") + "'");
  for (auto& x : mean) x /= static_cast<double>(n);
  return mean;
}

std::vector<double> PrecomputedEmbedder::embed(const TokenSeq& tokens) const {
  const auto k = key(tokens);
  const auto i = vectors_.find(k);
  if (!i) throw Error("no precomputed vector for '" + k + "'");
  const auto r = vectors_.row(*i);
  return {r.begin(), r.end()};
}

} // namespace figlex
