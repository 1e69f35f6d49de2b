#include "figlex/stats.hpp"

#include "figlex/matcher.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_set>

namespace figlex {

double mean(std::span<const double> values) {
  if (values.empty()) throw Error("mean of empty series");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  if (values.size() < 2) throw Error("variance needs at least 2 values");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("pearson: need equal lengths >= 2");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("pearson: constant series");
  return sxy / std::sqrt(sxx * syy);
}

Distribution usage_distribution(const GroupCounts& counts, std::size_t group) {
  Distribution d;
  const double total = static_cast<double>(counts.idiom_total(group));
  if (total <= 0.0) throw Error("usage_distribution: group " + counts.labels[group] + " has no idiom usages");
  for (const auto& [key, c] : counts.idiom_counts) {
    d.support.push_back(key);
    d.probs.push_back(static_cast<double>(c[group]) / total);
  }
  return d;
}

Distribution usage_distribution(const GroupCounts& counts, std::string_view group) {
  const int g = counts.labels.index_of(group);
  if (g < 0) throw Error("usage_distribution: unknown group " + std::string(group));
  return usage_distribution(counts, static_cast<std::size_t>(g));
}

double jsd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error("jsd: support size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) total += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) total += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return std::clamp(total, 0.0, 1.0);
}

double jsd(const Distribution& p, const Distribution& q) {
  if (p.support != q.support) throw Error("jsd: distributions have different supports");
  return jsd(std::span<const double>(p.probs), std::span<const double>(q.probs));
}

TestResult DivergenceResult::as_test() const {
  TestResult t;
  t.statistic = cross_jsd;
  t.p_value = p_empirical;
  t.effect_size = z;
  t.n_a = baseline[0].size();
  t.n_b = baseline[1].size();
  return t;
}

namespace {

double upper_normal_tail(double z) {
  if (std::isinf(z)) return z > 0 ? 0.0 : 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), z));
}

std::vector<double> normalize(const std::vector<std::uint64_t>& counts, const char* what) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (total <= 0.0) throw Error(std::string("divergence test: ") + what + " has no idiom usages");
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / total;
  return p;
}

} // namespace

DivergenceResult divergence_gap_test(const Corpus& corpus, const Matcher& matcher,
                                     std::size_t n_splits, std::uint64_t seed) {
  if (n_splits < 2) throw Error("divergence test: n_splits must be at least 2");
  const auto& support = matcher.canonicals();
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < support.size(); ++i) slot.emplace(support[i], i);

  // Idiom occurrences of every post, as support indices.
  std::vector<std::vector<std::size_t>> hits(corpus.size());
  std::array<std::vector<std::uint64_t>, 2> group_counts{std::vector<std::uint64_t>(support.size(), 0),
                                                         std::vector<std::uint64_t>(support.size(), 0)};
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& post = corpus.posts()[i];
    for (const auto& m : matcher.find_matches(post.tokens)) {
      const auto s = slot.at(m.canonical);
      hits[i].push_back(s);
      group_counts[corpus.group_of(post)][s] += 1;
    }
  }

  DivergenceResult r;
  r.n_splits = n_splits;
  r.cross_jsd = jsd(normalize(group_counts[0], corpus.labels()[0].c_str()),
                    normalize(group_counts[1], corpus.labels()[1].c_str()));

  std::vector<double> samples(2 * n_splits);
  parallel_for(2 * n_splits, [&](std::size_t job) {
    const std::size_t g = job / n_splits;
    const std::size_t s = job % n_splits;
    const auto [ha, hb] = random_half_indices(corpus, g, derive_seed(seed, g, s));
    std::vector<std::uint64_t> ca(support.size(), 0), cb(support.size(), 0);
    for (auto i : ha) for (auto k : hits[i]) ca[k] += 1;
    for (auto i : hb) for (auto k : hits[i]) cb[k] += 1;
    samples[job] = jsd(normalize(ca, "a random half"), normalize(cb, "a random half"));
  });

  std::size_t pooled_exceed = 0;
  for (std::size_t g = 0; g < 2; ++g) {
    r.baseline[g].assign(samples.begin() + static_cast<std::ptrdiff_t>(g * n_splits),
                         samples.begin() + static_cast<std::ptrdiff_t>((g + 1) * n_splits));
    r.baseline_mean[g] = mean(r.baseline[g]);
    r.baseline_sd[g] = std::sqrt(variance(r.baseline[g]));
    const auto exceed = static_cast<std::size_t>(
        std::count_if(r.baseline[g].begin(), r.baseline[g].end(), [&](double v) { return v >= r.cross_jsd; }));
    r.p_empirical_group[g] = static_cast<double>(exceed + 1) / static_cast<double>(n_splits + 1);
    pooled_exceed += exceed;
  }
  r.p_empirical = static_cast<double>(pooled_exceed + 1) / static_cast<double>(samples.size() + 1);
  r.pooled_mean = mean(samples);
  r.pooled_sd = std::sqrt(variance(samples));
  if (r.pooled_sd > 0.0) {
    r.z = (r.cross_jsd - r.pooled_mean) / r.pooled_sd;
  } else {
    r.z = r.cross_jsd == r.pooled_mean ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(),
                                                              r.cross_jsd - r.pooled_mean);
  }
  r.p_normal = upper_normal_tail(r.z);
  return r;
}

DivergenceResult divergence_gap_test(const Corpus& corpus, const Lexicon& lexicon,
                                     std::size_t n_splits, std::uint64_t seed) {
  return divergence_gap_test(corpus, Matcher(lexicon), n_splits, seed);
}

const GScoreRecord* GScoreTable::find(const std::string& token) const {
  auto it = records.find(token);
  return it == records.end() ? nullptr : &it->second;
}

GScoreTable log_odds_dirichlet(const TokenCounts& counts_a, const TokenCounts& counts_b,
                               const TokenCounts& prior) {
  auto sum = [](const TokenCounts& c) {
    double s = 0.0;
    for (const auto& [k, v] : c) s += v;
    return s;
  };
  const double n_a = sum(counts_a);
  const double n_b = sum(counts_b);
  const double alpha0 = sum(prior);
  if (!(alpha0 > 0.0)) throw Error("log_odds_dirichlet: nonpositive prior mass");

  std::set<std::string> tokens;
  for (const auto& [k, v] : counts_a) tokens.insert(k);
  for (const auto& [k, v] : counts_b) tokens.insert(k);

  auto lookup = [](const TokenCounts& c, const std::string& k) {
    auto it = c.find(k);
    return it == c.end() ? 0.0 : it->second;
  };

  GScoreTable table;
  table.prior = prior;
  for (const auto& w : tokens) {
    const double alpha = lookup(prior, w);
    if (!(alpha > 0.0)) throw Error("log_odds_dirichlet: nonpositive prior mass for '" + w + "'");
    const double ya = lookup(counts_a, w);
    const double yb = lookup(counts_b, w);
    const double rest_a = n_a + alpha0 - ya - alpha;
    const double rest_b = n_b + alpha0 - yb - alpha;
    if (!(rest_a > 0.0) || !(rest_b > 0.0)) {
      throw Error("log_odds_dirichlet: token '" + w + "' holds all mass; odds undefined");
    }
    GScoreRecord rec;
    rec.delta = std::log((ya + alpha) / rest_a) - std::log((yb + alpha) / rest_b);
    rec.sigma = std::sqrt(1.0 / (ya + alpha) + 1.0 / (yb + alpha));
    rec.z = rec.delta / rec.sigma;
    table.records.emplace(w, rec);
  }
  return table;
}

double mean_word_score(const TokenSeq& words, const GScoreTable& table) {
  std::set<std::string> distinct(words.begin(), words.end());
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& w : distinct) {
    if (const auto* rec = table.find(w)) {
      sum += rec->z;
      ++n;
    }
  }
  if (n == 0) throw Error("no scored word in '" + join(words, " ") + "'");
  return sum / static_cast<double>(n);
}

double gscore_surface(const IdiomEntry& entry, const GScoreTable& table) {
  return mean_word_score(entry.canonical, table);
}

double gscore_definition(const IdiomEntry& entry, const GScoreTable& table) {
  return mean_word_score(entry.definition, table);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

TestResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("spearman: length mismatch");
  if (x.size() < 3) throw Error("spearman: need at least 3 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  TestResult t;
  try {
    t.statistic = pearson(rx, ry);
  } catch (const Error&) {
    throw Error("spearman: constant series");
  }
  t.n_a = t.n_b = x.size();
  const double df = static_cast<double>(x.size() - 2);
  const double rho = t.statistic;
  if (std::abs(rho) >= 1.0) {
    t.p_value = 0.0;
  } else {
    const double tstat = rho * std::sqrt(df / (1.0 - rho * rho));
    boost::math::students_t_distribution<double> dist(df);
    t.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(tstat))));
  }
  return t;
}

namespace {

struct RankSumSetup {
  std::vector<double> ranks;  // pooled: x first, then y
  double w = 0.0;             // sum of x ranks
  double expected = 0.0;
  std::size_t nx = 0, ny = 0;
};

RankSumSetup rank_sum_setup(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw Error("wilcoxon_ranksum: empty sample");
  RankSumSetup s;
  s.nx = x.size();
  s.ny = y.size();
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  s.ranks = average_ranks(pooled);
  for (std::size_t i = 0; i < s.nx; ++i) s.w += s.ranks[i];
  s.expected = static_cast<double>(s.nx) * static_cast<double>(s.nx + s.ny + 1) / 2.0;
  return s;
}

} // namespace

TestResult wilcoxon_ranksum_exact(std::span<const double> x, std::span<const double> y) {
  const auto s = rank_sum_setup(x, y);
  const std::size_t n = s.nx + s.ny;
  if (n > 20) throw Error("wilcoxon_ranksum_exact: pooled size above 20");
  const double observed = std::abs(s.w - s.expected);
  std::uint64_t extreme = 0, total = 0;
  // Every subset of size nx of the pooled ranks, as a bitmask.
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != s.nx) continue;
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) w += s.ranks[i];
    }
    ++total;
    if (std::abs(w - s.expected) >= observed - 1e-9) ++extreme;
  }
  TestResult t;
  t.statistic = s.w;
  t.p_value = static_cast<double>(extreme) / static_cast<double>(total);
  t.n_a = s.nx;
  t.n_b = s.ny;
  t.effect_size = wilcoxon_ranksum_normal(x, y).effect_size;
  return t;
}

TestResult wilcoxon_ranksum_normal(std::span<const double> x, std::span<const double> y) {
  const auto s = rank_sum_setup(x, y);
  const double n = static_cast<double>(s.nx + s.ny);
  const double nx = static_cast<double>(s.nx), ny = static_cast<double>(s.ny);

  std::vector<double> sorted = s.ranks;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double var = n > 1.0 ? nx * ny / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0))) : 0.0;

  TestResult t;
  t.statistic = s.w;
  t.n_a = s.nx;
  t.n_b = s.ny;
  const double diff = s.w - s.expected;
  if (var <= 0.0) {
    t.p_value = 1.0;
    t.effect_size = 0.0;
    return t;
  }
  const double sd = std::sqrt(var);
  const double z = std::max(0.0, std::abs(diff) - 0.5) / sd;
  t.effect_size = std::copysign(z, diff);
  t.p_value = std::min(1.0, 2.0 * upper_normal_tail(z));
  return t;
}

TestResult wilcoxon_ranksum(std::span<const double> x, std::span<const double> y) {
  if (x.size() + y.size() <= 12) return wilcoxon_ranksum_exact(x, y);
  return wilcoxon_ranksum_normal(x, y);
}

double cohens_d(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) throw Error("cohens_d: each sample needs at least 2 values");
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  const double pooled = std::sqrt(((nx - 1.0) * variance(x) + (ny - 1.0) * variance(y)) / (nx + ny - 2.0));
  if (pooled == 0.0) throw Error("cohens_d: zero pooled standard deviation");
  return (mean(x) - mean(y)) / pooled;
}

double sim_rbo(std::span<const std::string> list_a, std::span<const std::string> list_b,
               std::size_t depth) {
  if (depth == 0) throw Error("sim_rbo: depth must be positive");
  if (list_a.size() < depth || list_b.size() < depth) {
    throw Error("sim_rbo: list shorter than depth " + std::to_string(depth));
  }
  std::unordered_set<std::string> seen_a, seen_b;
  double overlap = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < depth; ++k) {
    const auto& a = list_a[k];
    const auto& b = list_b[k];
    if (!seen_a.insert(a).second || !seen_b.insert(b).second) {
      throw Error("sim_rbo: duplicate entry in ranked list");
    }
    if (a == b) {
      overlap += 1.0;
    } else {
      if (seen_b.count(a)) overlap += 1.0;
      if (seen_a.count(b)) overlap += 1.0;
    }
    sum += overlap / static_cast<double>(k + 1);
  }
  return sum / static_cast<double>(depth);
}

double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2) throw Error("bandwidth: need at least 2 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double sd = std::sqrt(variance(values));
  const double iqr = quantile(0.75) - quantile(0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  if (!(spread > 0.0)) throw Error("bandwidth: zero variance");
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

DensityCurve kde(std::span<const double> values, std::optional<double> bandwidth, std::size_t points) {
  if (values.size() < 2) throw Error("kde: need at least 2 values");
  if (points < 2) throw Error("kde: need at least 2 grid points");
  DensityCurve curve;
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) throw Error("kde: bandwidth must be positive");
    curve.bandwidth = *bandwidth;
  } else {
    curve.bandwidth = silverman_bandwidth(values);
  }
  const double h = curve.bandwidth;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn - 3.0 * h;
  const double hi = *mx + 3.0 * h;
  const double step = (hi - lo) / static_cast<double>(points - 1);
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * M_PI));
  curve.x.resize(points);
  curve.density.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? hi : lo + step * static_cast<double>(i);
    double s = 0.0;
    for (double v : values) {
      const double u = (x - v) / h;
      s += std::exp(-0.5 * u * u);
    }
    curve.x[i] = x;
    curve.density[i] = s * norm;
  }
  return curve;
}

} // namespace figlex
