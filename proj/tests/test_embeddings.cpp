#include "figlex/embeddings.hpp"
#include "figlex/matcher.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace figlex;

namespace {

EmbeddingSpace parse(const std::string& text) {
  std::istringstream in(text);
  return parse_vectors(in);
}

TrainParams small_params(std::uint64_t seed) {
  TrainParams p;
  p.dim = 16;
  p.window = 3;
  p.negatives = 4;
  p.min_count = 1;
  p.epochs = 5;
  p.seed = seed;
  return p;
}

} // namespace

TEST_CASE("vector file parsing") {
  const auto s = parse("2 3\nfoo 1 0 0\nbar 0 1 0.5\n");
  CHECK(s.size() == 2);
  CHECK(s.dim() == 3);
  CHECK(s.vector("bar")[2] == 0.5f);
  CHECK_THROWS_WITH_AS(parse("2 3\nfoo 1 0 0\nbar 0 1\n"), doctest::Contains("row 2"), Error);
  CHECK_THROWS_AS(parse("2 3\nfoo 1 0 0\nfoo 0 1 0\n"), Error);
  CHECK_THROWS_AS(parse("3 3\nfoo 1 0 0\n"), Error);
  CHECK_THROWS_AS(parse("x y\n"), Error);
}

TEST_CASE("cosine") {
  const std::vector<double> u{1, 0}, v{1, 1}, w{0, 3}, par{2, 0};
  CHECK(cosine(u, par) == 1.0);
  CHECK(cosine(u, w) == 0.0);
  CHECK(cosine(u, v) == doctest::Approx(0.70710678118).epsilon(1e-10));
  CHECK_THROWS_AS(cosine(u, std::vector<double>{0, 0}), Error);
  CHECK_THROWS_AS(cosine(u, std::vector<double>{1, 2, 3}), Error);
}

TEST_CASE("nearest neighbors") {
  const auto s = parse("3 2\nanchor 1 0\nnear 1 0.2\nfar 0 1\n");
  CHECK(nearest_neighbors(s, "anchor", 0).neighbors.empty());
  const auto n = nearest_neighbors(s, "anchor", 2);
  REQUIRE(n.neighbors.size() == 2);
  CHECK(n.tokens() == std::vector<std::string>{"near", "far"});
  CHECK(n.neighbors[1].cosine == doctest::Approx(0.0));
  CHECK_THROWS_AS(nearest_neighbors(s, "anchor", 3), Error);
  CHECK_THROWS_AS(nearest_neighbors(s, "missing", 1), Error);

  const auto tie = parse("3 2\na 1 0\nz 1 1\nm 1 -1\n");
  CHECK(nearest_neighbors(tie, "a", 2).tokens() == std::vector<std::string>{"m", "z"});
}

TEST_CASE("sentence embedding") {
  const auto s = parse("3 2\nx 1 0\ny 0 1\nz 4 4\n");
  CHECK(sentence_embedding(s, {"x"}) == std::vector<double>{1, 0});
  CHECK(sentence_embedding(s, {"x", "y"}) == std::vector<double>{0.5, 0.5});
  CHECK(sentence_embedding(s, {"y", "x"}) == sentence_embedding(s, {"x", "y"}));
  CHECK(sentence_embedding(s, {"the", "x", "unknown"}) == std::vector<double>{1, 0});
  CHECK_THROWS_AS(sentence_embedding(s, {"the", "unknown"}), Error);

  const BagOfVectorsEmbedder bag(s);
  CHECK(bag.embed({"x", "y"}) == std::vector<double>{0.5, 0.5});
  const PrecomputedEmbedder pre(parse("1 2\nvery_happy 0.25 0.75\n"));
  CHECK(pre.embed({"very", "happy"}) == std::vector<double>{0.25, 0.75});
  CHECK_THROWS_AS(pre.embed({"sad"}), Error);
}

TEST_CASE("training params are validated") {
  TrainParams p;
  p.dim = 1;
  CHECK_THROWS_AS(p.validate(), Error);
  p = TrainParams{};
  p.initial_lr = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("sgns training") {
  const auto sentences = testing::shared_context_sentences(3);

  SUBCASE("vocabulary respects min_count") {
    auto p = small_params(1);
    std::vector<TokenSeq> s = sentences;
    s.push_back({"rare", "x1"});
    p.min_count = 2;
    const auto r = train_sgns_sentences(s, p);
    CHECK_FALSE(r.space.contains("rare"));
    CHECK(r.space.contains("aa"));
    p.min_count = 1;
    CHECK(train_sgns_sentences(s, p).space.contains("rare"));
  }
  SUBCASE("bitwise reproducible") {
    const auto a = train_sgns_sentences(sentences, small_params(9));
    const auto b = train_sgns_sentences(sentences, small_params(9));
    CHECK(a.space == b.space);
    CHECK(a.epoch_loss == b.epoch_loss);
    CHECK_FALSE(train_sgns_sentences(sentences, small_params(10)).space == a.space);
  }
  SUBCASE("shared contexts pull vectors together") {
    const auto r = train_sgns_sentences(sentences, small_params(4));
    const auto& s = r.space;
    CHECK(cosine(s.vector("aa"), s.vector("bb")) > cosine(s.vector("aa"), s.vector("cc")));
    REQUIRE(r.epoch_loss.size() == 5);
    CHECK(r.epoch_loss.back() < r.epoch_loss.front());
  }
  SUBCASE("save then load preserves the space") {
    const auto r = train_sgns_sentences(sentences, small_params(5));
    testing::TempDir dir("vec");
    save_vectors(r.space, (dir / "s.vec").string());
    const auto back = load_vectors((dir / "s.vec").string());
    CHECK(back == r.space);
    CHECK(std::abs(cosine(back.vector("aa"), back.vector("x1")) - cosine(r.space.vector("aa"), r.space.vector("x1"))) <
          1e-5);
  }
  SUBCASE("corpus training rewrites idioms into single tokens") {
    std::vector<Post> posts;
    for (int i = 0; i < 50; ++i) posts.push_back(testing::make_post(i % 2 ? "F" : "M", "we broke the ice today"));
    Lexicon lex;
    lex.add(make_entry("break the ice", "x", 0));
    auto p = small_params(1);
    const auto space = train_sgns(Corpus(parse_group_labels("F,M"), posts), Matcher(lex), p);
    CHECK(space.contains("__idiom__break_the_ice"));
    CHECK_FALSE(space.contains("broke"));
  }
  SUBCASE("nothing reaches min_count") {
    auto p = small_params(1);
    p.min_count = 100000;
    CHECK_THROWS_AS(train_sgns_sentences(sentences, p), Error);
  }
}
