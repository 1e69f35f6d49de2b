#include "figlex/pipeline.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

using namespace figlex;
namespace fs = std::filesystem;

namespace {

const fs::path kGolden = fs::path(FIGLEX_TEST_DATA) / "golden";

using Row = std::map<std::string, std::string>;

// Reads a header-first CSV whose fields never contain commas.
std::vector<Row> read_rows(const fs::path& p) {
  std::istringstream in(testing::read_file(p));
  std::string line;
  std::vector<std::string> header;
  std::vector<Row> rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (std::getline(in, line)) header = split(line);
  while (std::getline(in, line)) {
    const auto cells = split(line);
    Row r;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) r[header[i]] = cells[i];
    rows.push_back(std::move(r));
  }
  return rows;
}

RunConfig planted_config(const testing::TempDir& dir, const std::vector<Post>& posts) {
  testing::write_file(dir / "corpus.jsonl", testing::corpus_jsonl(posts));
  testing::write_file(dir / "lexicon.jsonl", testing::planted_lexicon_jsonl());
  testing::write_file(dir / "vad.csv", testing::planted_vad_csv());
  RunConfig c;
  c.corpus = (dir / "corpus.jsonl").string();
  c.lexicon = (dir / "lexicon.jsonl").string();
  c.vad_lexicon = (dir / "vad.csv").string();
  c.out = (dir / "out").string();
  c.groups = "A,B";
  c.seed = 3;
  c.min_count = 5;
  c.literality_threshold = 1.0;
  c.rbo_depth = 10;
  c.n_splits = 50;
  c.vad_holdout = 20;
  c.train.dim = 16;
  c.train.window = 4;
  c.train.negatives = 4;
  c.train.min_count = 5;
  c.train.epochs = 5;
  return c;
}

} // namespace

TEST_CASE("config files") {
  testing::TempDir dir("config");
  testing::write_file(dir / "run.conf",
                      "# comment\ncorpus = posts.jsonl\nseed = 42   # trailing\n\nliterality_threshold=0.5\n"
                      "balance = false\ndim = 64\nout = results\n");
  const auto c = load_config((dir / "run.conf").string());
  CHECK(c.corpus == (dir / "posts.jsonl").string());
  CHECK(c.out == "results");
  CHECK(c.seed == 42);
  CHECK(c.literality_threshold == 0.5);
  CHECK_FALSE(c.balance);
  CHECK(c.train.dim == 64);

  RunConfig r;
  CHECK_THROWS_WITH_AS(r.set("colour", "red"), doctest::Contains("colour"), Error);
  CHECK_THROWS_AS(r.set("seed", "-3"), Error);
  CHECK_THROWS_AS(r.set("balance", "maybe"), Error);
  testing::write_file(dir / "bad.conf", "seed: 4\n");
  CHECK_THROWS_AS(load_config((dir / "bad.conf").string()), Error);
  CHECK_THROWS_AS(load_config((dir / "missing.conf").string()), Error);
  for (const auto& k : RunConfig::keys()) CHECK(k.find('-') == std::string::npos);
}

TEST_CASE("prepare matches the hand-traced golden run") {
  testing::TempDir dir("golden");
  auto c = load_config((kGolden / "figlex.conf").string());
  c.out = (dir / "out").string();
  std::ostringstream err;
  REQUIRE(cmd_prepare(c, err) == 0);
  CHECK(err.str().empty());

  CHECK(testing::read_file(dir / "out" / "counts.csv") == testing::read_file(kGolden / "expected_counts.csv"));

  // Literality depends on the trained vectors, so it is checked for range
  // only and dropped before comparing against the golden lexicon.
  std::istringstream got(testing::read_file(dir / "out" / "lexicon.filtered.jsonl"));
  std::istringstream want(testing::read_file(kGolden / "expected_lexicon.jsonl"));
  std::string g, w;
  std::size_t lines = 0;
  while (std::getline(want, w)) {
    REQUIRE(std::getline(got, g));
    auto j = nlohmann::ordered_json::parse(g);
    REQUIRE(j.contains("literality"));
    const double lit = j["literality"];
    CHECK(lit >= -1.0);
    CHECK(lit <= 1.0);
    j.erase("literality");
    CHECK(j.dump() == w);
    ++lines;
  }
  CHECK(lines == 4);
  CHECK_FALSE(std::getline(got, g));

  std::string status;
  for (const auto& r : read_rows(dir / "out" / "literality.csv")) status += r.at("canonical") + "," + r.at("status") + "\n";
  CHECK(status == testing::read_file(kGolden / "expected_status.csv"));
}

TEST_CASE("prepare fails cleanly") {
  testing::TempDir dir("fail");
  auto c = load_config((kGolden / "figlex.conf").string());
  c.out = (dir / "out").string();

  SUBCASE("missing corpus") {
    c.corpus = (dir / "nope.jsonl").string();
    std::ostringstream err;
    CHECK(cmd_prepare(c, err) == 1);
    CHECK(err.str().find("nope.jsonl") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out"));
  }
  SUBCASE("nothing survives the literality filter") {
    c.literality_threshold = -2.0;
    std::ostringstream err;
    CHECK(cmd_prepare(c, err) != 0);
    CHECK_FALSE(fs::exists(dir / "out" / "counts.csv"));
  }
  SUBCASE("analyze without prepare") {
    std::ostringstream err;
    CHECK(cmd_analyze(c, err) != 0);
    CHECK_FALSE(err.str().empty());
  }
}

TEST_CASE("planted signal through prepare, analyze and report") {
  testing::TempDir dir("planted");
  testing::PlantedSpec spec;
  spec.shift_context = true;
  const auto c = planted_config(dir, testing::planted_posts(spec));
  std::ostringstream err;
  REQUIRE_MESSAGE(cmd_prepare(c, err) == 0, err.str());
  REQUIRE_MESSAGE(cmd_analyze(c, err) == 0, err.str());
  const fs::path out = c.out;

  std::map<std::string, double> gscore;
  for (const auto& r : read_rows(out / "idioms.csv")) gscore[r.at("canonical")] = std::stod(r.at("gscore"));
  REQUIRE(gscore.size() == testing::planted_idioms().size());
  CHECK(gscore.at("spill the beans") > 0.0);
  const auto top = std::max_element(gscore.begin(), gscore.end(),
                                    [](const auto& a, const auto& b) { return a.second < b.second; });
  CHECK(top->first == "spill the beans");

  const auto simrbo = read_rows(out / "simrbo.csv");
  REQUIRE_FALSE(simrbo.empty());
  CHECK(simrbo.front().at("canonical") == "break the ice");

  const auto div = nlohmann::json::parse(testing::read_file(out / "divergence.json"));
  CHECK(div["cross_jsd"].get<double>() > 0.0);

  SUBCASE("csv and json reports carry the same values") {
    REQUIRE(cmd_report(c, "json", err) == 0);
    REQUIRE(cmd_report(c, "csv", err) == 0);
    CHECK(cmd_report(c, "yaml", err) == 2);
    const auto doc = nlohmann::json::parse(testing::read_file(out / "report.json"));
    const auto rows = read_rows(out / "report.csv");
    REQUIRE_FALSE(rows.empty());
    std::size_t idiom_rows = 0;
    for (const auto& r : rows) {
      if (r.at("section") != "idioms") continue;
      ++idiom_rows;
      const auto& idioms = doc["idioms"];
      const auto it = std::find_if(idioms.begin(), idioms.end(),
                                   [&](const auto& j) { return j["canonical"] == r.at("key"); });
      REQUIRE(it != idioms.end());
      const auto& v = (*it)[r.at("field")];
      if (v.is_number()) {
        CHECK(std::stod(r.at("value")) == doctest::Approx(v.get<double>()).epsilon(1e-12));
      } else if (v.is_string()) {
        CHECK(r.at("value") == v.get<std::string>());
      }
    }
    CHECK(idiom_rows > 0);
  }
}

TEST_CASE("identical groups show no affect difference") {
  testing::TempDir dir("identical");
  testing::PlantedSpec spec;
  spec.planted_b = spec.planted_a;
  auto posts = testing::planted_posts(spec);
  std::vector<Post> mirrored;
  for (const auto& p : posts) {
    if (p.group != "A") continue;
    mirrored.push_back(p);
    auto copy = p;
    copy.group = "B";
    mirrored.push_back(copy);
  }
  const auto c = planted_config(dir, mirrored);
  std::ostringstream err;
  REQUIRE_MESSAGE(cmd_prepare(c, err) == 0, err.str());
  REQUIRE_MESSAGE(cmd_analyze(c, err) == 0, err.str());
  const fs::path out = c.out;

  for (const auto& r : read_rows(out / "vad_comparison.csv")) CHECK(std::abs(std::stod(r.at("cohens_d"))) < 0.05);
  for (const auto& r : read_rows(out / "literal_baseline.csv")) {
    CHECK(std::abs(std::stod(r.at("cohens_d"))) < 0.05);
  }
  const auto div = nlohmann::json::parse(testing::read_file(out / "divergence.json"));
  CHECK(div["cross_jsd"].get<double>() == 0.0);
  for (const auto& r : read_rows(out / "idioms.csv")) CHECK(std::abs(std::stod(r.at("gscore"))) < 1e-9);
}

TEST_CASE("runs are reproducible byte for byte") {
  testing::TempDir dir("repro");
  auto c = load_config((kGolden / "figlex.conf").string());
  std::ostringstream err;
  c.out = (dir / "one").string();
  REQUIRE(cmd_prepare(c, err) == 0);
  c.out = (dir / "two").string();
  REQUIRE(cmd_prepare(c, err) == 0);
  for (const auto& entry : fs::directory_iterator(dir / "one")) {
    const auto name = entry.path().filename().string();
    CHECK_MESSAGE(testing::read_file(entry.path()) == testing::read_file(dir / "two" / name), name);
  }
}
