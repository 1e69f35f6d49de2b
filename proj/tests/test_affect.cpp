#include "figlex/affect.hpp"
#include "figlex/matcher.hpp"
#include "figlex/stats.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace figlex;
using figlex::testing::make_post;
using figlex::testing::synthetic;

#ifndef FIGLEX_TEST_DATA
#error "FIGLEX_TEST_DATA must point at tests/data"
#endif

namespace {

VadModel constant_model(double intercept, std::size_t dim) {
  VadModel m;
  m.coefficients.assign(dim + 1, 0.0);
  m.coefficients[0] = intercept;
  return m;
}

UsageTriple triple(const std::string& group, std::vector<double> v, std::vector<double> a, std::vector<double> d) {
  UsageTriple t;
  std::vector<double>* src[] = {&v, &a, &d};
  for (std::size_t k = 0; k < 3; ++k) {
    t[k].dimension = kVadDimensions[k];
    t[k].group = group;
    t[k].values = *src[k];
  }
  return t;
}

} // namespace

TEST_CASE("VAD lexicon parsing") {
  const auto lex = load_vad_lexicon(std::string(FIGLEX_TEST_DATA) + "/vad50.csv");
  CHECK(lex.entries.size() == 50);
  CHECK(lex.entries.count("ice") == 0);
  CHECK(lex.entries.at("fabulous")[0] == 1.0);
  CHECK(lex.entries.at("weak")[2] == 0.0);

  std::istringstream bad_header("w,v,a,d\nx,0.1,0.2,0.3\n");
  CHECK_THROWS_AS(parse_vad_lexicon(bad_header), Error);
  std::istringstream out_of_range("word,valence,arousal,dominance\nx,1.2,0.2,0.3\n");
  CHECK_THROWS_WITH_AS(parse_vad_lexicon(out_of_range), doctest::Contains("line 2"), Error);
  CHECK(parse_dimension("D") == VadDimension::dominance);
  CHECK_THROWS_AS(parse_dimension("Q"), Error);
}

TEST_CASE("prediction through the logit link") {
  CHECK(predict_beta(constant_model(0.0, 2), std::vector<double>{0.3, -4.0}) == 0.5);
  CHECK(predict_beta(constant_model(std::log(3.0), 0), std::vector<double>{}) == doctest::Approx(0.75).epsilon(1e-15));
  const double hi = predict_beta(constant_model(20.0, 0), std::vector<double>{});
  CHECK(hi > 0.999999);
  CHECK(hi < 1.0);
  const double top = predict_beta(constant_model(800.0, 0), std::vector<double>{});
  CHECK(top < 1.0);
  const double bottom = predict_beta(constant_model(-800.0, 0), std::vector<double>{});
  CHECK(bottom > 0.0);
  CHECK_THROWS_AS(predict_beta(constant_model(0.0, 2), std::vector<double>{1.0}), Error);
}

TEST_CASE("beta regression fitting") {
  SUBCASE("intercept-only fit at one half") {
    // Targets identical to 0.5 have no finite precision estimate (the
    // likelihood grows without bound in phi), so the targets straddle 0.5.
    Eigen::MatrixXd x(40, 0);
    std::vector<double> spread;
    for (int i = 0; i < 40; ++i) spread.push_back(i % 2 ? 0.4 : 0.6);
    const auto m = fit_beta_regression(x, spread);
    CHECK(std::abs(m.coefficients[0]) < 1e-4);
    CHECK(m.feature_dim() == 0);
    CHECK(m.precision > 0.0);
  }
  SUBCASE("analytic gradient matches central differences") {
    const auto s = synthetic(200, {0.3, -0.7, 0.4}, 20.0, 5);
    const Eigen::Map<const Eigen::VectorXd> y(s.y.data(), static_cast<Eigen::Index>(s.y.size()));
    std::mt19937_64 engine(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd params(4);
      for (Eigen::Index j = 0; j < 4; ++j) params(j) = u(engine);
      params(3) = 1.0 + 2.0 * std::abs(u(engine));
      const auto g = beta_log_likelihood_gradient(params, s.x, y);
      const double h = 1e-5;
      for (Eigen::Index j = 0; j < 4; ++j) {
        Eigen::VectorXd up = params, dn = params;
        up(j) += h;
        dn(j) -= h;
        const double fd = (beta_log_likelihood(up, s.x, y) - beta_log_likelihood(dn, s.x, y)) / (2.0 * h);
        CHECK(std::abs(fd - g(j)) / std::max(1.0, std::abs(g(j))) < 1e-4);
      }
    }
  }
  SUBCASE("accepted steps never lower the likelihood") {
    const auto s = synthetic(500, {-0.2, 0.5, 0.9, -0.4}, 30.0, 8);
    const auto m = fit_beta_regression(s.x, s.y);
    const auto& ll = m.trace.log_likelihood;
    REQUIRE(ll.size() >= 2);
    for (std::size_t i = 1; i < ll.size(); ++i) CHECK(ll[i] >= ll[i - 1]);
    CHECK(m.trace.gradient_norm < 1e-6);
  }
  SUBCASE("targets at 0 and 1 are clamped, not fatal") {
    const auto s = synthetic(300, {0.0, 1.0}, 10.0, 3);
    auto y = s.y;
    y[0] = 0.0;
    y[1] = 1.0;
    const auto m = fit_beta_regression(s.x, y);
    CHECK(std::isfinite(m.coefficients[1]));
  }
  SUBCASE("too few rows") {
    Eigen::MatrixXd x(3, 4);
    x.setRandom();
    CHECK_THROWS_AS(fit_beta_regression(x, std::vector<double>{0.2, 0.4, 0.6}), Error);
  }
  SUBCASE("constant feature columns are tolerated") {
    auto s = synthetic(300, {0.2, 0.6}, 25.0, 4);
    Eigen::MatrixXd x(s.x.rows(), 2);
    x.col(0) = s.x.col(0);
    x.col(1).setConstant(3.0);
    const auto m = fit_beta_regression(x, s.y);
    CHECK(m.coefficients[2] == 0.0);
    CHECK(std::abs(m.coefficients[1] - 0.6) < 0.15);
  }
}

TEST_CASE("held-out fit quality on a synthetic word-affect task") {
  const std::vector<double> beta{0.1, 0.6, -0.5, 0.4, 0.3, -0.2, 0.5, -0.6, 0.2, 0.3, -0.4};
  const auto s = synthetic(6000, beta, 50.0, 21);
  const Eigen::MatrixXd train = s.x.topRows(5000);
  const std::vector<double> y_train(s.y.begin(), s.y.begin() + 5000);
  const auto m = fit_beta_regression(train, y_train);
  std::vector<double> pred, truth;
  for (Eigen::Index i = 5000; i < 6000; ++i) {
    std::vector<double> f(s.x.cols());
    for (Eigen::Index j = 0; j < s.x.cols(); ++j) f[static_cast<std::size_t>(j)] = s.x(i, j);
    pred.push_back(predict_beta(m, f));
    truth.push_back(s.y[static_cast<std::size_t>(i)]);
  }
  CHECK(pearson(pred, truth) >= 0.7);
}

TEST_CASE("fit_vad_models on the 50-word fixture") {
  const auto lex = load_vad_lexicon(std::string(FIGLEX_TEST_DATA) + "/vad50.csv");
  // Toy space: each word's vector is its own rating plus a little jitter.
  EmbeddingSpace space(3);
  Rng rng(6);
  for (const auto& [w, v] : lex.entries) {
    const std::vector<float> f{static_cast<float>(v[0] + 0.02 * rng.normal()),
                               static_cast<float>(v[1] + 0.02 * rng.normal()),
                               static_cast<float>(v[2] + 0.02 * rng.normal())};
    space.add(w, f);
  }
  const BagOfVectorsEmbedder embed(space);
  const auto report = fit_vad_models(lex, embed, 10, 3);
  CHECK(report.n_train == 40);
  CHECK(report.n_holdout == 10);
  CHECK(report.n_skipped == 0);
  for (double r : report.holdout_pearson) CHECK(r > 0.8);

  testing::TempDir dir("vad");
  save_vad_models(report.models, (dir / "m.json").string());
  const auto back = load_vad_models((dir / "m.json").string());
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(back[k].coefficients == report.models[k].coefficients);
    CHECK(back[k].precision == report.models[k].precision);
  }

  SUBCASE("definition scoring") {
    Lexicon idioms;
    idioms.add(make_entry("on cloud nine", "joy"));
    idioms.add(make_entry("over the moon", "joy"));
    idioms.add(make_entry("down in the dumps", "gloomy and lonely"));
    const auto scores = score_definitions(idioms, embed, report.models);
    CHECK(scores.at("on cloud nine") == scores.at("over the moon"));
    const auto f = embed.embed({"joy"});
    CHECK(scores.at("on cloud nine")[0] == predict_beta(report.models[0], f));
    CHECK(scores.at("on cloud nine")[0] > scores.at("down in the dumps")[0]);

    idioms.add(make_entry("beat around the bush", "unknown words only"));
    CHECK_THROWS_WITH_AS(score_definitions(idioms, embed, report.models), doctest::Contains("beat around the bush"),
                         Error);
  }
}

TEST_CASE("usage series") {
  GroupCounts c;
  c.labels = parse_group_labels("F,M");
  c.idiom_counts["one"] = {3, 0};
  VadScores scores{{"one", {0.9, 0.1, 0.2}}, {"two", {0.2, 0.3, 0.4}}, {"three", {0.8, 0.3, 0.4}}};
  const auto s = usage_vad_series(c, scores, 0);
  CHECK(s[0].values == std::vector<double>{0.9, 0.9, 0.9});
  CHECK(s[0].group == "F");

  GroupCounts empty;
  empty.labels = c.labels;
  for (const auto& series : usage_vad_series(empty, scores, 1)) CHECK(series.values.empty());

  GroupCounts two;
  two.labels = c.labels;
  two.idiom_counts["two"] = {2, 0};
  two.idiom_counts["three"] = {1, 0};
  auto v = usage_vad_series(two, scores, 0)[0].values;
  std::sort(v.begin(), v.end());
  CHECK(v == std::vector<double>{0.2, 0.2, 0.8});

  two.idiom_counts["missing"] = {1, 0};
  CHECK_THROWS_AS(usage_vad_series(two, scores, 0), Error);
}

TEST_CASE("VAD comparison") {
  const auto a = triple("F", {0.1, 0.4, 0.5, 0.9}, {0.2, 0.3, 0.6, 0.7}, {0.3, 0.5, 0.55, 0.8});
  const auto rows = compare_vad(a, a);
  for (const auto& r : rows) {
    CHECK(r.cohens_d == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK(r.stars().empty());
  }
  auto b = a;
  for (auto& s : b) {
    s.group = "M";
    for (auto& x : s.values) x += 0.1;
  }
  for (const auto& r : compare_vad(a, b)) {
    CHECK(r.cohens_d < 0.0);
    CHECK(r.mean_b == doctest::Approx(r.mean_a + 0.1));
  }
  VadComparisonRow star;
  star.p_value = 0.0005;
  CHECK(star.stars() == "**");
  star.p_value = 0.005;
  CHECK(star.stars() == "*");
  star.p_value = 0.01;
  CHECK(star.stars().empty());
}

TEST_CASE("literal baseline") {
  const auto labels = parse_group_labels("F,M");
  Lexicon lex;
  lex.add(make_entry("break the ice", "x", 0));
  const Matcher matcher(lex);
  EmbeddingSpace space(2);
  space.add("calm", std::vector<float>{1.0f, 0.0f});
  space.add("angry", std::vector<float>{0.0f, 1.0f});
  const BagOfVectorsEmbedder embed(space);
  VadModels models;
  for (std::size_t k = 0; k < 3; ++k) {
    models[k] = constant_model(0.0, 2);
    models[k].coefficients[1] = 1.0;
    models[k].dimension = kVadDimensions[k];
  }

  std::vector<Post> posts;
  for (int i = 0; i < 10; ++i) {
    posts.push_back(make_post("F", i % 2 ? "calm day" : "we break the ice calmly"));
    posts.push_back(make_post("M", i % 3 ? "angry day" : "unknown words"));
  }
  const Corpus corpus(labels, posts);
  const auto r = literal_baseline(corpus, matcher, embed, models, 4, 1);
  CHECK(r.available[0] == 5);
  CHECK(r.available[1] == 6);
  for (std::size_t g = 0; g < 2; ++g) {
    CHECK(r.sampled[g].size() == 4);
    for (auto i : r.sampled[g]) CHECK(matcher.find_matches(corpus.posts()[i].tokens).empty());
  }
  CHECK(r.series[0][0].values.front() == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(literal_baseline(corpus, matcher, embed, models, 0, 1).series[0][0].values.empty());
  CHECK(literal_baseline(corpus, matcher, embed, models, 4, 1).sampled == r.sampled);

  std::vector<Post> all_idioms{make_post("F", "break the ice"), make_post("M", "broke the ice")};
  CHECK_THROWS_AS(literal_baseline(Corpus(labels, all_idioms), matcher, embed, models, 1, 1), Error);
}
