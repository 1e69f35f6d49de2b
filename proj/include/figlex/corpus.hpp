#pragma once

#include "figlex/common.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace figlex {

/// Lowercase tokens, no empties.
using TokenSeq = std::vector<std::string>;

/// Per-group tallies, indexed by GroupLabels position.
using GroupPair = std::array<std::uint64_t, 2>;

/// The two author-group labels declared for a run. The first label is
/// "group a" in every two-sample statistic (positive log-odds favor it).
struct GroupLabels {
  std::array<std::string, 2> names;

  /// Index of label, or -1 when it is not declared.
  int index_of(std::string_view label) const;
  const std::string& operator[](std::size_t i) const { return names[i]; }
};

/// Parses "M,F" style lists; exactly two distinct nonempty labels.
GroupLabels parse_group_labels(std::string_view spec);

struct Post {
  std::string author_id;
  std::string group;
  std::optional<std::string> subreddit;
  std::string text;
  TokenSeq tokens;
  std::size_t token_count = 0;
};

struct CorpusTotals {
  GroupPair tokens{};
  GroupPair posts{};
};

/// Immutable once built; all helpers return new corpora.
class Corpus {
public:
  explicit Corpus(GroupLabels labels) : labels_(std::move(labels)) {}
  Corpus(GroupLabels labels, std::vector<Post> posts);

  const GroupLabels& labels() const { return labels_; }
  const std::vector<Post>& posts() const { return posts_; }
  const CorpusTotals& totals() const { return totals_; }
  std::size_t size() const { return posts_.size(); }
  bool empty() const { return posts_.empty(); }

  /// Group index of a post (0 or 1).
  std::size_t group_of(const Post& post) const;

  /// Copy holding only the posts at the given indices, in index order.
  Corpus subset(std::span<const std::size_t> indices) const;

private:
  GroupLabels labels_;
  std::vector<Post> posts_;
  CorpusTotals totals_;
};

/// Lowercases, drops URLs, splits on anything that is not an ASCII letter or
/// digit. Apostrophes survive only between two alphanumerics ("one's").
TokenSeq tokenize(std::string_view text);

/// Reads the JSON-lines corpus format. Lines starting with '#' and blank lines
/// are skipped. Errors carry the 1-based line number.
Corpus load_corpus(const std::string& path, const GroupLabels& labels);
Corpus parse_corpus(std::istream& in, const GroupLabels& labels);

/// Randomly drops whole posts from the larger-token group until it is no
/// larger than the smaller group by more than one post.
Corpus balance_groups(const Corpus& corpus, std::uint64_t seed);

/// Post indices of one group split into two halves with near-equal token totals.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
random_half_indices(const Corpus& corpus, std::size_t group, std::uint64_t seed);

std::pair<Corpus, Corpus> random_halves(const Corpus& corpus, std::string_view group,
                                        std::uint64_t seed);

} // namespace figlex
