#pragma once

#include "figlex/common.hpp"
#include "figlex/corpus.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace figlex {

class EmbeddingSpace;
struct GroupCounts;

enum class SlotKind { possessive, objective };

/// One realization of an idiom, e.g. "picked a fight" for "pick a fight".
struct SurfaceForm {
  TokenSeq tokens;
  std::string parent;  // canonical key
  std::uint64_t corpus_count = 0;

  std::string text() const { return join(tokens, " "); }
  friend bool operator<(const SurfaceForm& a, const SurfaceForm& b) { return a.tokens < b.tokens; }
  friend bool operator==(const SurfaceForm& a, const SurfaceForm& b) { return a.tokens == b.tokens; }
};

struct IdiomEntry {
  TokenSeq canonical;
  TokenSeq definition;
  std::optional<std::size_t> verb_index;
  std::optional<std::size_t> slot_index;
  std::optional<SlotKind> slot_kind;
  std::vector<SurfaceForm> variants;  // sorted, unique, always includes canonical
  std::optional<double> literality;

  /// Canonical tokens joined by single spaces; the idiom's identity everywhere.
  std::string key() const { return join(canonical, " "); }
};

/// Canonical key -> entry, iterated in key order.
class Lexicon {
public:
  using Map = std::map<std::string, IdiomEntry>;

  Lexicon() = default;

  /// Adds an entry; throws on duplicate canonical forms.
  void add(IdiomEntry entry);

  const Map& entries() const { return entries_; }
  const IdiomEntry& at(const std::string& key) const;
  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::size_t variant_count() const;

  /// Throws when two entries share a surface form.
  void check_collisions() const;

  Map::iterator begin() { return entries_.begin(); }
  Map::iterator end() { return entries_.end(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

private:
  Map entries_;
};

/// Builds and validates an entry from raw strings. Slot kind is inferred from
/// the slot token ("one's"/"someone's" possessive, "someone" objective) when
/// not given. Variants are expanded.
IdiomEntry make_entry(std::string_view canonical, std::string_view definition,
                      std::optional<std::size_t> verb_index = std::nullopt,
                      std::optional<std::size_t> slot_index = std::nullopt,
                      std::optional<SlotKind> slot_kind = std::nullopt);

/// JSON-lines lexicon. A "variants" array, when present, replaces automatic
/// expansion (this is how pruned lexicons round-trip).
Lexicon load_lexicon(const std::string& path);
Lexicon parse_lexicon(std::istream& in);
void save_lexicon(const Lexicon& lexicon, const std::string& path);

/// Lemma plus third-person singular, past, past participle and gerund.
std::set<std::string> inflect_verb(const std::string& lemma);

/// Personal pronouns substituted for an indefinite slot.
const std::vector<std::string>& slot_pronouns(SlotKind kind);

/// Cartesian product of verb forms and pronoun substitutions. Sorted, unique.
std::vector<SurfaceForm> expand_entry(const IdiomEntry& entry);

/// Drops variants whose combined-corpus count does not exceed min_count; the
/// canonical form is always kept. min_count == 0 disables pruning. Fills
/// corpus_count on every surviving variant.
Lexicon prune_variants(const Lexicon& lexicon, const GroupCounts& counts,
                       std::uint64_t min_count = 50);

/// "__idiom__" + canonical tokens joined by underscores.
std::string idiom_token(const IdiomEntry& entry);
std::string idiom_token(const std::string& canonical_key);

/// Mean cosine between the idiom token vector and each in-vocabulary,
/// non-stopword constituent.
double literality_score(const IdiomEntry& entry, const EmbeddingSpace& space,
                        const Stopwords& stopwords = default_stopwords());

struct LiteralityRecord {
  std::string canonical;
  double score = 0.0;
  bool removed = false;
};

struct LiteralityFilterResult {
  Lexicon kept;
  std::vector<LiteralityRecord> report;  // every input entry, key order
};

/// Removes entries whose literality exceeds threshold (strictly).
LiteralityFilterResult filter_literal(const Lexicon& lexicon, const EmbeddingSpace& space,
                                      double threshold = 0.25,
                                      const Stopwords& stopwords = default_stopwords());

} // namespace figlex
