#pragma once

#include "figlex/corpus.hpp"
#include "figlex/lexicon.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace figlex {

struct Match {
  std::string canonical;
  std::size_t start = 0;  // [start, end) token offsets
  std::size_t end = 0;
  TokenSeq surface;
};

/// Per-group occurrence tallies. Idiom counts are cumulative over all
/// variants of an entry. Token counts are taken over idiom-rewritten streams,
/// so every matched span contributes one idiom token.
struct GroupCounts {
  GroupLabels labels;
  std::map<std::string, GroupPair> idiom_counts;    // canonical key
  std::map<std::string, GroupPair> surface_counts;  // surface text
  std::map<std::string, GroupPair> token_counts;
  GroupPair group_totals{};                         // sum of token_counts per group

  std::uint64_t idiom_total(std::size_t group) const;
  std::uint64_t surface_total(const std::string& surface) const;

  /// Counts of one group as a token -> count map (for log-odds scoring).
  std::map<std::string, double> token_column(std::size_t group) const;

  /// Elementwise sum; labels must agree.
  void merge(const GroupCounts& other);
};

/// Token-level trie over every surface form in a lexicon. Immutable after
/// construction and safe to share across threads.
class Matcher {
public:
  /// Throws when two entries share a surface form.
  explicit Matcher(const Lexicon& lexicon);

  std::size_t pattern_count() const { return patterns_.size(); }
  const std::vector<std::string>& canonicals() const { return canonicals_; }

  /// Leftmost-longest, non-overlapping matches in token order.
  std::vector<Match> find_matches(const TokenSeq& tokens) const;

  /// Replaces every matched span with its single idiom token.
  TokenSeq rewrite(const TokenSeq& tokens) const;

private:
  struct Pattern {
    TokenSeq surface;
    std::string canonical;
  };
  struct Node {
    std::unordered_map<std::uint32_t, std::uint32_t> next;
    std::int32_t pattern = -1;
  };

  /// Length and pattern id of the longest pattern starting at pos, if any.
  std::pair<std::size_t, std::int32_t> longest_at(const TokenSeq& tokens, std::size_t pos) const;

  std::unordered_map<std::string, std::uint32_t> token_ids_;
  std::vector<Node> nodes_;
  std::vector<Pattern> patterns_;
  std::vector<std::string> canonicals_;
  std::vector<std::string> idiom_tokens_;  // parallel to patterns_
};

inline Matcher build_matcher(const Lexicon& lexicon) { return Matcher(lexicon); }

inline std::vector<Match> find_matches(const Matcher& m, const TokenSeq& tokens) {
  return m.find_matches(tokens);
}

inline TokenSeq rewrite_with_idiom_tokens(const Matcher& m, const TokenSeq& tokens) {
  return m.rewrite(tokens);
}

/// Counts idiom, surface and (rewritten) token occurrences per group.
/// Shards posts over max_threads() workers and merges.
GroupCounts count_usages(const Matcher& matcher, const Corpus& corpus);

void write_idiom_counts_csv(const GroupCounts& counts, const std::string& path);
void write_token_counts_csv(const GroupCounts& counts, const std::string& path);

} // namespace figlex
