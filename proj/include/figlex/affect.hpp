#pragma once

#include "figlex/corpus.hpp"
#include "figlex/embeddings.hpp"
#include "figlex/lexicon.hpp"

#include <Eigen/Dense>

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace figlex {

class Matcher;
struct GroupCounts;

enum class VadDimension { valence = 0, arousal = 1, dominance = 2 };

inline constexpr std::array<VadDimension, 3> kVadDimensions{VadDimension::valence, VadDimension::arousal,
                                                           VadDimension::dominance};

/// "V", "A" or "D".
const char* dimension_code(VadDimension d);
VadDimension parse_dimension(std::string_view code);

using VadTriple = std::array<double, 3>;

/// Word -> (valence, arousal, dominance), each in [0, 1].
struct VadLexicon {
  std::map<std::string, VadTriple> entries;
};

/// CSV with header word,valence,arousal,dominance.
VadLexicon load_vad_lexicon(const std::string& path);
VadLexicon parse_vad_lexicon(std::istream& in);

struct BetaFitOptions {
  std::size_t max_iterations = 500;
  double tolerance = 1e-6;     // max-norm of the mean log-likelihood gradient
  double clamp_epsilon = 1e-4; // targets clamped into [eps, 1 - eps]
};

struct BetaFitTrace {
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  /// Mean log-likelihood after the start point and every accepted step.
  std::vector<double> log_likelihood;
};

/// Beta regression with logit mean link.
struct VadModel {
  VadDimension dimension = VadDimension::valence;
  std::vector<double> coefficients;  // intercept first
  double precision = 1.0;            // phi
  BetaFitTrace trace;

  std::size_t feature_dim() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }
};

using VadModels = std::array<VadModel, 3>;

/// Maximum-likelihood fit by gradient ascent with backtracking (Armijo)
/// line search and Barzilai-Borwein trial steps, over (coefficients, log phi).
/// Features are standardized internally; returned coefficients are on the
/// raw feature scale. Throws when the fit does not converge.
VadModel fit_beta_regression(const Eigen::MatrixXd& features, std::span<const double> targets,
                             VadDimension dimension = VadDimension::valence,
                             const BetaFitOptions& options = {});

/// Total beta log-likelihood at params = [intercept, coefficients..., log phi].
double beta_log_likelihood(const Eigen::VectorXd& params, const Eigen::MatrixXd& features,
                           const Eigen::VectorXd& targets);
Eigen::VectorXd beta_log_likelihood_gradient(const Eigen::VectorXd& params, const Eigen::MatrixXd& features,
                                             const Eigen::VectorXd& targets);

/// Inverse logit of the linear predictor, kept strictly inside (0, 1).
double predict_beta(const VadModel& model, std::span<const double> feature);

struct VadTrainingReport {
  VadModels models;
  std::size_t n_train = 0;
  std::size_t n_holdout = 0;
  std::size_t n_skipped = 0;             // lexicon words the embedder could not represent
  std::array<double, 3> holdout_pearson{};  // NaN when no holdout
};

/// Embeds every lexicon word, holds out `holdout` random words for a Pearson
/// check and fits one model per dimension on the rest.
VadTrainingReport fit_vad_models(const VadLexicon& lexicon, const SentenceEmbedder& embedder,
                                 std::size_t holdout, std::uint64_t seed,
                                 const BetaFitOptions& options = {});

void save_vad_models(const VadModels& models, const std::string& path);
VadModels load_vad_models(const std::string& path);

/// canonical -> predicted (v, a, d) of the idiom's definition.
using VadScores = std::map<std::string, VadTriple>;

VadScores score_definitions(const Lexicon& lexicon, const SentenceEmbedder& embedder, const VadModels& models);

struct UsageSeries {
  VadDimension dimension = VadDimension::valence;
  std::string group;
  std::vector<double> values;
};

using UsageTriple = std::array<UsageSeries, 3>;

/// Each idiom's score repeated once per occurrence in the group.
UsageTriple usage_vad_series(const GroupCounts& counts, const VadScores& scores, std::size_t group);

struct VadComparisonRow {
  VadDimension dimension = VadDimension::valence;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double p_value = 1.0;
  double cohens_d = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;

  /// "**" for p < .001, "*" for p < .01, otherwise empty.
  std::string stars() const;
};

std::array<VadComparisonRow, 3> compare_vad(const UsageTriple& a, const UsageTriple& b);

struct LiteralBaseline {
  std::array<UsageTriple, 2> series;
  std::array<std::vector<std::size_t>, 2> sampled;  // post indices
  std::array<std::size_t, 2> available{};
};

/// Samples n idiom-free, embeddable posts per group and scores them.
LiteralBaseline literal_baseline(const Corpus& corpus, const Matcher& matcher, const SentenceEmbedder& embedder,
                                 const VadModels& models, std::size_t n, std::uint64_t seed);

} // namespace figlex
