#include "figlex/affect.hpp"

#include "figlex/matcher.hpp"
#include "figlex/stats.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace figlex {

const char* dimension_code(VadDimension d) {
  switch (d) {
    case VadDimension::valence: return "V";
    case VadDimension::arousal: return "A";
    case VadDimension::dominance: return "D";
  }
  return "?";
}

VadDimension parse_dimension(std::string_view code) {
  if (code == "V") return VadDimension::valence;
  if (code == "A") return VadDimension::arousal;
  if (code == "D") return VadDimension::dominance;
  throw Error("unknown VAD dimension '" + std::string(code) + "'");
}

VadLexicon parse_vad_lexicon(std::istream& in) {
  VadLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header) {
      header = false;
      if (cells.size() != 4 || cells[0] != "word") {
        throw Error("VAD lexicon: header must be word,valence,arousal,dominance");
      }
      continue;
    }
    const auto where = "VAD lexicon line " + std::to_string(line_no) + ": ";
    if (cells.size() != 4) throw Error(where + "expected 4 columns");
    VadTriple v{};
    for (std::size_t k = 0; k < 3; ++k) {
      try {
        std::size_t used = 0;
        v[k] = std::stod(cells[k + 1], &used);
        if (used != cells[k + 1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(where + "bad number '" + cells[k + 1] + "'");
      }
      if (!(v[k] >= 0.0 && v[k] <= 1.0)) throw Error(where + "value outside [0, 1]");
    }
    const auto toks = tokenize(cells[0]);
    if (toks.size() != 1) continue;  // multiword or empty entries cannot be single-token features
    lex.entries[toks.front()] = v;
  }
  return lex;
}

VadLexicon load_vad_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open VAD lexicon " + path);
  return parse_vad_lexicon(in);
}

namespace {

using boost::math::digamma;

double inv_logit(double eta) {
  return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

// Log-likelihood and gradient for a design matrix whose first column is the
// intercept; params = [beta..., log phi].
double ll_and_grad(const Eigen::VectorXd& params, const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                   Eigen::VectorXd* grad) {
  const Eigen::Index p = design.cols();
  const double phi = std::exp(params(p));
  const Eigen::VectorXd eta = design * params.head(p);
  double ll = 0.0;
  Eigen::VectorXd d_eta(design.rows());
  double d_logphi = 0.0;
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    const double mu = std::clamp(inv_logit(eta(i)), 1e-12, 1.0 - 1e-12);
    const double a = mu * phi, b = (1.0 - mu) * phi;
    const double ly = std::log(y(i)), l1y = std::log1p(-y(i));
    ll += std::lgamma(phi) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * ly + (b - 1.0) * l1y;
    if (grad) {
      const double da = digamma(a), db = digamma(b);
      d_eta(i) = phi * mu * (1.0 - mu) * ((ly - l1y) - (da - db));
      d_logphi += phi * (digamma(phi) - mu * da - (1.0 - mu) * db + mu * ly + (1.0 - mu) * l1y);
    }
  }
  if (grad) {
    grad->resize(p + 1);
    grad->head(p) = design.transpose() * d_eta;
    (*grad)(p) = d_logphi;
  }
  return ll;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& features) {
  Eigen::MatrixXd design(features.rows(), features.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(features.cols()) = features;
  return design;
}

} // namespace

double beta_log_likelihood(const Eigen::VectorXd& params, const Eigen::MatrixXd& features,
                           const Eigen::VectorXd& targets) {
  return ll_and_grad(params, with_intercept(features), targets, nullptr);
}

Eigen::VectorXd beta_log_likelihood_gradient(const Eigen::VectorXd& params, const Eigen::MatrixXd& features,
                                             const Eigen::VectorXd& targets) {
  Eigen::VectorXd g;
  ll_and_grad(params, with_intercept(features), targets, &g);
  return g;
}

VadModel fit_beta_regression(const Eigen::MatrixXd& features, std::span<const double> targets,
                             VadDimension dimension, const BetaFitOptions& options) {
  const Eigen::Index n = features.rows();
  const Eigen::Index p = features.cols();
  if (static_cast<Eigen::Index>(targets.size()) != n) throw Error("beta regression: row count mismatch");
  if (n < p + 2) throw Error("beta regression: need at least dim + 2 rows");
  if (!features.allFinite()) throw Error("beta regression: non-finite features");

  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(targets[i])) throw Error("beta regression: non-finite target");
    y(i) = std::clamp(targets[i], options.clamp_epsilon, 1.0 - options.clamp_epsilon);
  }

  // Standardize non-constant columns; constant columns are absorbed by the intercept.
  std::vector<Eigen::Index> active;
  Eigen::VectorXd centers = Eigen::VectorXd::Zero(p), scales = Eigen::VectorXd::Ones(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double m = features.col(j).mean();
    const double sd = std::sqrt((features.col(j).array() - m).square().sum() / static_cast<double>(n));
    centers(j) = m;
    if (sd > 1e-12 * std::max(1.0, std::abs(m))) {
      scales(j) = sd;
      active.push_back(j);
    }
  }
  const auto q = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd design(n, q + 1);
  design.col(0).setOnes();
  for (Eigen::Index k = 0; k < q; ++k) {
    const auto j = active[k];
    design.col(k + 1) = (features.col(j).array() - centers(j)) / scales(j);
  }

  // Start: least squares on logit(y), precision from the residual dispersion.
  Eigen::VectorXd logit_y = (y.array() / (1.0 - y.array())).log();
  Eigen::VectorXd theta(q + 2);
  theta.head(q + 1) = design.colPivHouseholderQr().solve(logit_y);
  {
    double disp = 0.0;
    const Eigen::VectorXd eta = design * theta.head(q + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = inv_logit(eta(i));
      disp += (y(i) - mu) * (y(i) - mu) / (mu * (1.0 - mu));
    }
    disp /= static_cast<double>(n);
    theta(q + 1) = std::log(std::clamp(1.0 / std::max(disp, 1e-12) - 1.0, 0.5, 1e6));
  }

  const double scale = 1.0 / static_cast<double>(n);
  auto objective = [&](const Eigen::VectorXd& t, Eigen::VectorXd* g) {
    const double v = ll_and_grad(t, design, y, g) * scale;
    if (g) *g *= scale;
    return v;
  };

  VadModel model;
  model.dimension = dimension;
  Eigen::VectorXd grad;
  double value = objective(theta, &grad);
  model.trace.log_likelihood.push_back(value);
  Eigen::VectorXd prev_theta, prev_grad;
  double step = 1.0;
  bool converged = false;
  std::size_t iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < options.tolerance) {
      converged = true;
      break;
    }
    if (iter > 0) {
      const Eigen::VectorXd s = theta - prev_theta;
      const Eigen::VectorXd dg = grad - prev_grad;
      const double sy = s.dot(dg);
      if (sy < 0.0) step = std::clamp(s.squaredNorm() / -sy, 1e-10, 1e10);
    }
    const double slope = grad.squaredNorm();
    Eigen::VectorXd candidate, cand_grad;
    double cand_value = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int halvings = 0; halvings < 80; ++halvings) {
      candidate = theta + step * grad;
      cand_value = objective(candidate, &cand_grad);
      if (std::isfinite(cand_value) && cand_value >= value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    prev_theta = std::move(theta);
    prev_grad = std::move(grad);
    theta = std::move(candidate);
    grad = std::move(cand_grad);
    value = cand_value;
    model.trace.log_likelihood.push_back(value);
  }
  if (!converged && grad.lpNorm<Eigen::Infinity>() < options.tolerance) converged = true;
  model.trace.iterations = iter;
  model.trace.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  if (!converged) {
    throw Error("beta regression did not converge after " + std::to_string(iter) +
                " iterations (gradient max-norm " + format_number(model.trace.gradient_norm) + ")");
  }

  model.coefficients.assign(static_cast<std::size_t>(p) + 1, 0.0);
  double intercept = theta(0);
  for (Eigen::Index k = 0; k < q; ++k) {
    const auto j = active[k];
    const double b = theta(k + 1) / scales(j);
    model.coefficients[static_cast<std::size_t>(j) + 1] = b;
    intercept -= b * centers(j);
  }
  model.coefficients[0] = intercept;
  model.precision = std::exp(theta(q + 1));
  return model;
}

double predict_beta(const VadModel& model, std::span<const double> feature) {
  if (feature.size() != model.feature_dim()) {
    throw Error("predict_beta: feature has dimension " + std::to_string(feature.size()) + ", model expects " +
                std::to_string(model.feature_dim()));
  }
  double eta = model.coefficients[0];
  for (std::size_t j = 0; j < feature.size(); ++j) eta += model.coefficients[j + 1] * feature[j];
  const double mu = inv_logit(eta);
  return std::clamp(mu, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

VadTrainingReport fit_vad_models(const VadLexicon& lexicon, const SentenceEmbedder& embedder,
                                 std::size_t holdout, std::uint64_t seed, const BetaFitOptions& options) {
  VadTrainingReport report;
  std::vector<std::vector<double>> feats;
  std::vector<VadTriple> targets;
  for (const auto& [word, vad] : lexicon.entries) {
    try {
      feats.push_back(embedder.embed(TokenSeq{word}));
      targets.push_back(vad);
    } catch (const Error&) {
      ++report.n_skipped;
    }
  }
  std::vector<std::size_t> order(feats.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  holdout = std::min(holdout, order.size());
  const std::vector<std::size_t> held(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(holdout), order.end());
  std::sort(train.begin(), train.end());
  report.n_train = train.size();
  report.n_holdout = held.size();

  const auto dim = static_cast<Eigen::Index>(embedder.dim());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(train.size()), dim);
  for (std::size_t r = 0; r < train.size(); ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) x(static_cast<Eigen::Index>(r), c) = feats[train[r]][c];
  }
  // The three dimensions are independent fits; run them side by side.
  parallel_for(kVadDimensions.size(), [&](std::size_t k) {
    const auto d = kVadDimensions[k];
    std::vector<double> y(train.size());
    for (std::size_t r = 0; r < train.size(); ++r) y[r] = targets[train[r]][k];
    report.models[k] = fit_beta_regression(x, y, d, options);
  });
  for (std::size_t k = 0; k < kVadDimensions.size(); ++k) {
    if (held.size() >= 2) {
      std::vector<double> pred, truth;
      for (auto i : held) {
        pred.push_back(predict_beta(report.models[k], feats[i]));
        truth.push_back(targets[i][k]);
      }
      try {
        report.holdout_pearson[k] = pearson(pred, truth);
      } catch (const Error&) {
        report.holdout_pearson[k] = std::numeric_limits<double>::quiet_NaN();
      }
    } else {
      report.holdout_pearson[k] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return report;
}

void save_vad_models(const VadModels& models, const std::string& path) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& m : models) {
    nlohmann::ordered_json j;
    j["dimension"] = dimension_code(m.dimension);
    j["link"] = "logit";
    j["regularization"] = "none";
    j["feature_dim"] = m.feature_dim();
    j["coefficients"] = m.coefficients;
    j["precision"] = m.precision;
    j["iterations"] = m.trace.iterations;
    j["gradient_norm"] = m.trace.gradient_norm;
    doc.push_back(j);
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << doc.dump(2) << '\n';
}

VadModels load_vad_models(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("malformed model file " + path + ": " + e.what());
  }
  if (!doc.is_array() || doc.size() != 3) throw Error("model file must hold three models");
  VadModels models;
  for (const auto& j : doc) {
    VadModel m;
    m.dimension = parse_dimension(j.at("dimension").get<std::string>());
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.precision = j.at("precision").get<double>();
    if (m.coefficients.empty() || !(m.precision > 0.0)) throw Error("invalid model in " + path);
    models[static_cast<std::size_t>(m.dimension)] = std::move(m);
  }
  return models;
}

VadScores score_definitions(const Lexicon& lexicon, const SentenceEmbedder& embedder, const VadModels& models) {
  VadScores scores;
  std::vector<std::string> failed;
  for (const auto& [key, entry] : lexicon) {
    std::vector<double> f;
    try {
      f = embedder.embed(entry.definition);
    } catch (const Error&) {
      failed.push_back(key);
      continue;
    }
    VadTriple v{};
    for (std::size_t k = 0; k < 3; ++k) v[k] = predict_beta(models[k], f);
    scores.emplace(key, v);
  }
  if (!failed.empty()) throw Error("cannot embed definitions of: " + join(failed, ", "));
  return scores;
}

UsageTriple usage_vad_series(const GroupCounts& counts, const VadScores& scores, std::size_t group) {
  UsageTriple out;
  for (auto d : kVadDimensions) {
    auto& s = out[static_cast<std::size_t>(d)];
    s.dimension = d;
    s.group = counts.labels[group];
  }
  for (const auto& [key, c] : counts.idiom_counts) {
    const auto n = c[group];
    if (n == 0) continue;
    auto it = scores.find(key);
    if (it == scores.end()) throw Error("usage_vad_series: no VAD scores for '" + key + "'");
    for (std::size_t k = 0; k < 3; ++k) out[k].values.insert(out[k].values.end(), n, it->second[k]);
  }
  return out;
}

std::string VadComparisonRow::stars() const {
  if (p_value < 0.001) return "**";
  if (p_value < 0.01) return "*";
  return "";
}

std::array<VadComparisonRow, 3> compare_vad(const UsageTriple& a, const UsageTriple& b) {
  std::array<VadComparisonRow, 3> rows;
  for (std::size_t k = 0; k < 3; ++k) {
    if (a[k].dimension != b[k].dimension) throw Error("compare_vad: dimension mismatch");
    auto& r = rows[k];
    r.dimension = a[k].dimension;
    r.n_a = a[k].values.size();
    r.n_b = b[k].values.size();
    r.mean_a = mean(a[k].values);
    r.mean_b = mean(b[k].values);
    r.p_value = wilcoxon_ranksum(a[k].values, b[k].values).p_value;
    r.cohens_d = cohens_d(a[k].values, b[k].values);
  }
  return rows;
}

LiteralBaseline literal_baseline(const Corpus& corpus, const Matcher& matcher, const SentenceEmbedder& embedder,
                                 const VadModels& models, std::size_t n, std::uint64_t seed) {
  LiteralBaseline out;
  for (std::size_t g = 0; g < 2; ++g) {
    for (auto d : kVadDimensions) {
      auto& s = out.series[g][static_cast<std::size_t>(d)];
      s.dimension = d;
      s.group = corpus.labels()[g];
    }
    std::vector<std::size_t> candidates;
    std::vector<std::vector<double>> features;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& post = corpus.posts()[i];
      if (corpus.group_of(post) != g || !matcher.find_matches(post.tokens).empty()) continue;
      try {
        features.push_back(embedder.embed(post.tokens));
        candidates.push_back(i);
      } catch (const Error&) {
      }
    }
    out.available[g] = candidates.size();
    if (candidates.size() < n) {
      throw Error("literal baseline: group " + corpus.labels()[g] + " has only " +
                  std::to_string(candidates.size()) + " idiom-free posts, " + std::to_string(n) + " requested");
    }
    std::vector<std::size_t> pick(candidates.size());
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
    Rng rng(derive_seed(seed, g));
    rng.shuffle(pick);
    pick.resize(n);
    std::sort(pick.begin(), pick.end());
    for (auto c : pick) {
      out.sampled[g].push_back(candidates[c]);
      for (std::size_t k = 0; k < 3; ++k) out.series[g][k].values.push_back(predict_beta(models[k], features[c]));
    }
  }
  return out;
}

} // namespace figlex
