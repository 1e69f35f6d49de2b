#pragma once

#include "figlex/corpus.hpp"
#include "figlex/lexicon.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace figlex {

class Matcher;
struct GroupCounts;

/// Probability mass over an ordered, duplicate-free support.
struct Distribution {
  std::vector<std::string> support;
  std::vector<double> probs;
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> effect_size;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// Normalized idiom counts of one group over every canonical in `counts`.
Distribution usage_distribution(const GroupCounts& counts, std::size_t group);
Distribution usage_distribution(const GroupCounts& counts, std::string_view group);

/// Jensen-Shannon divergence in bits, 0*log(0) taken as 0.
double jsd(const Distribution& p, const Distribution& q);
double jsd(std::span<const double> p, std::span<const double> q);

struct DivergenceResult {
  double cross_jsd = 0.0;
  std::array<double, 2> baseline_mean{};
  std::array<double, 2> baseline_sd{};
  double pooled_mean = 0.0;
  double pooled_sd = 0.0;
  /// (exceedances + 1) / (samples + 1) over the pooled within-group samples.
  double p_empirical = 1.0;
  std::array<double, 2> p_empirical_group{};
  /// (cross - pooled_mean) / pooled_sd and its upper normal tail.
  double z = 0.0;
  double p_normal = 1.0;
  std::size_t n_splits = 0;
  std::array<std::vector<double>, 2> baseline;

  TestResult as_test() const;
};

/// Cross-group idiom-usage JSD against a baseline of within-group random
/// halves. Split s of group g uses seed derive_seed(seed, g, s).
DivergenceResult divergence_gap_test(const Corpus& corpus, const Matcher& matcher,
                                     std::size_t n_splits = 500, std::uint64_t seed = 1);
DivergenceResult divergence_gap_test(const Corpus& corpus, const Lexicon& lexicon,
                                     std::size_t n_splits = 500, std::uint64_t seed = 1);

using TokenCounts = std::map<std::string, double>;

struct GScoreRecord {
  double delta = 0.0;  // log-odds difference, natural log
  double sigma = 0.0;
  double z = 0.0;      // delta / sigma
};

struct GScoreTable {
  std::map<std::string, GScoreRecord> records;
  TokenCounts prior;

  const GScoreRecord* find(const std::string& token) const;
};

/// Log-odds ratio with an informative Dirichlet prior. Positive scores favor
/// corpus a. Every token seen in a or b is scored; each needs positive prior mass.
GScoreTable log_odds_dirichlet(const TokenCounts& counts_a, const TokenCounts& counts_b,
                               const TokenCounts& prior);

/// Mean z-score over the distinct words of a token sequence that the table
/// scores. Throws when none is scored.
double mean_word_score(const TokenSeq& words, const GScoreTable& table);

/// Mean word score over the canonical form's word set.
double gscore_surface(const IdiomEntry& entry, const GScoreTable& table);
/// Mean word score over the definition's word set.
double gscore_definition(const IdiomEntry& entry, const GScoreTable& table);

/// 1-based ranks, ties share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman's rho (statistic) with a two-sided t-approximation p-value.
TestResult spearman(std::span<const double> x, std::span<const double> y);

/// Rank-sum statistic (sum of x ranks, statistic) and a two-sided p-value.
/// Uses exact enumeration when the pooled size is at most 12, otherwise the
/// tie- and continuity-corrected normal approximation. effect_size holds the
/// signed normal z.
TestResult wilcoxon_ranksum(std::span<const double> x, std::span<const double> y);
TestResult wilcoxon_ranksum_exact(std::span<const double> x, std::span<const double> y);
TestResult wilcoxon_ranksum_normal(std::span<const double> x, std::span<const double> y);

/// (mean(x) - mean(y)) / pooled sd with n-1 denominators.
double cohens_d(std::span<const double> x, std::span<const double> y);

/// Mean over depths 1..depth of |prefix_k(a) ∩ prefix_k(b)| / k.
double sim_rbo(std::span<const std::string> list_a, std::span<const std::string> list_b,
               std::size_t depth = 100);

struct DensityCurve {
  std::vector<double> x;
  std::vector<double> density;
  double bandwidth = 0.0;
};

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5); falls back to sd when the IQR is 0.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian KDE sampled on `points` evenly spaced values over
/// [min - 3h, max + 3h].
DensityCurve kde(std::span<const double> values, std::optional<double> bandwidth = std::nullopt,
                 std::size_t points = 256);

double mean(std::span<const double> values);
/// Sample variance (n - 1 denominator).
double variance(std::span<const double> values);
double pearson(std::span<const double> x, std::span<const double> y);

} // namespace figlex
