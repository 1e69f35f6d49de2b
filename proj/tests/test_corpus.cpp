#include "figlex/common.hpp"
#include "figlex/corpus.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

using namespace figlex;
using figlex::testing::make_post;

namespace {

const GroupLabels kMF = parse_group_labels("M,F");

Corpus parse(const std::string& text, const GroupLabels& labels = kMF) {
  std::istringstream in(text);
  return parse_corpus(in, labels);
}

std::vector<Post> fixed_length_posts(const std::string& group, std::size_t n, std::size_t len) {
  std::vector<Post> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    for (std::size_t k = 0; k < len; ++k) text += "w" + std::to_string(k) + " ";
    out.push_back(make_post(group, text, group + std::to_string(i)));
  }
  return out;
}

} // namespace

TEST_CASE("rng is reproducible and derive_seed separates streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2, 0) != derive_seed(1, 2, 1));
  CHECK(derive_seed(5, 6, 7) == derive_seed(5, 6, 7));

  Rng r(3);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) ++seen[r.uniform_index(7)];
  for (int c : seen) CHECK(c > 800);
  CHECK_THROWS_AS(r.uniform_index(0), Error);
}

TEST_CASE("format_number round-trips") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("default stopwords cover function words only") {
  const auto& sw = default_stopwords();
  for (const char* w : {"the", "a", "one's", "someone", "to", "of"}) CHECK(sw.count(w) == 1);
  for (const char* w : {"fight", "pride", "moon", "fence"}) CHECK(sw.count(w) == 0);
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 7) throw Error("boom"); }), Error);
}

TEST_CASE("tokenize") {
  CHECK(tokenize("Pick a FIGHT!") == TokenSeq{"pick", "a", "fight"});
  CHECK(tokenize("don't give up \xE2\x80\x94 see https://x.y") == TokenSeq{"don't", "give", "up", "see"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("she swallowed her pride \xE2\x80\x99" "cause") == TokenSeq{"she", "swallowed", "her", "pride", "cause"});
  CHECK(tokenize("it\xE2\x80\x99s fine") == TokenSeq{"it's", "fine"});
  CHECK(tokenize("'quoted' words'") == TokenSeq{"quoted", "words"});
  CHECK(tokenize("see www.example.com now") == TokenSeq{"see", "now"});
}

TEST_CASE("parse_corpus") {
  SUBCASE("one line") {
    const auto c = parse(R"({"author_id":"a1","group":"F","text":"over the moon"})" "\n");
    REQUIRE(c.size() == 1);
    CHECK(c.posts()[0].token_count == 3);
    CHECK(c.totals().tokens == GroupPair{0, 3});
    CHECK(c.totals().posts == GroupPair{0, 1});
  }
  SUBCASE("empty input") {
    const auto c = parse("");
    CHECK(c.empty());
    CHECK(c.totals().tokens == GroupPair{0, 0});
    CHECK(c.totals().posts == GroupPair{0, 0});
  }
  SUBCASE("unknown group") {
    CHECK_THROWS_WITH_AS(parse(R"({"author_id":"a","group":"X","text":"hi"})"),
                         doctest::Contains("unknown group X"), Error);
  }
  SUBCASE("malformed line names its number") {
    CHECK_THROWS_WITH_AS(parse("\n{\"group\":\"M\"}\n"), doctest::Contains("corpus line 2"), Error);
  }
  SUBCASE("optional subreddit, comments and blank lines") {
    const auto c = parse("# header\n\n"
                         R"({"author_id":"a","group":"M","text":"x y","subreddit":"AskMen"})" "\n");
    REQUIRE(c.size() == 1);
    CHECK(c.posts()[0].subreddit == std::optional<std::string>("AskMen"));
  }
}

TEST_CASE("group labels") {
  const auto g = parse_group_labels("F,M");
  CHECK(g[0] == "F");
  CHECK(g.index_of("M") == 1);
  CHECK(g.index_of("X") == -1);
  CHECK_THROWS_AS(parse_group_labels("F"), Error);
  CHECK_THROWS_AS(parse_group_labels("F,F"), Error);
}

TEST_CASE("balance_groups") {
  SUBCASE("already balanced is a no-op") {
    auto posts = fixed_length_posts("M", 3, 4);
    auto f = fixed_length_posts("F", 2, 6);
    posts.insert(posts.end(), f.begin(), f.end());
    const Corpus c(kMF, posts);
    const auto b = balance_groups(c, 1);
    CHECK(b.size() == c.size());
    CHECK(b.totals().tokens == c.totals().tokens);
  }
  SUBCASE("downsamples the larger group to the smaller total") {
    auto posts = fixed_length_posts("M", 10, 10);
    auto f = fixed_length_posts("F", 6, 10);
    posts.insert(posts.end(), f.begin(), f.end());
    const Corpus c(kMF, posts);
    const auto b = balance_groups(c, 9);
    CHECK(b.totals().tokens == GroupPair{60, 60});
    CHECK(b.totals().posts == GroupPair{6, 6});

    const auto again = balance_groups(c, 9);
    std::vector<std::string> ids1, ids2;
    for (const auto& p : b.posts()) ids1.push_back(p.author_id);
    for (const auto& p : again.posts()) ids2.push_back(p.author_id);
    CHECK(ids1 == ids2);
  }
  SUBCASE("never overshoots below the target") {
    std::vector<Post> posts;
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      std::string text;
      const auto len = 1 + rng.uniform_index(20);
      for (std::size_t k = 0; k < len; ++k) text += "x ";
      posts.push_back(make_post(i % 3 == 0 ? "F" : "M", text));
    }
    const Corpus c(kMF, posts);
    const auto b = balance_groups(c, 2);
    CHECK(b.totals().tokens[0] >= b.totals().tokens[1]);
    CHECK(b.totals().tokens[0] - b.totals().tokens[1] < 20);
  }
}

TEST_CASE("random halves partition a group") {
  const Corpus c(kMF, fixed_length_posts("M", 10, 3));
  const auto [a, b] = random_half_indices(c, 0, 7);
  std::set<std::size_t> all(a.begin(), a.end());
  for (auto i : b) CHECK(all.insert(i).second);
  CHECK(all.size() == 10);
  CHECK(random_half_indices(c, 0, 7) == std::make_pair(a, b));

  const Corpus big(kMF, fixed_length_posts("F", 1000, 5));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto [h1, h2] = random_halves(big, "F", seed);
    const auto t1 = h1.totals().tokens[1], t2 = h2.totals().tokens[1];
    CHECK((t1 > t2 ? t1 - t2 : t2 - t1) <= 5);
  }
  CHECK_THROWS_AS(random_half_indices(c, 1, 1), Error);
}
