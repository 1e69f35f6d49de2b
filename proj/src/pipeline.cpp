#include "figlex/pipeline.hpp"

#include "figlex/affect.hpp"
#include "figlex/corpus.hpp"
#include "figlex/lexicon.hpp"
#include "figlex/matcher.hpp"
#include "figlex/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace figlex {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Stage seeds are derived from the master seed so stages stay independent.
enum SeedStream : std::uint64_t {
  kSeedBalance = 1,
  kSeedCombinedSpace = 2,
  kSeedGroupSpace = 3,
  kSeedDivergence = 4,
  kSeedVadHoldout = 5,
  kSeedLiteral = 6,
};

template <class T>
T parse_unsigned(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value.front() == '-') throw std::invalid_argument("negative");
    const auto v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return static_cast<T>(v);
  } catch (const std::exception&) {
    throw Error("config: " + key + " expects a nonnegative integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error("config: " + key + " expects a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error("config: " + key + " expects true or false, got '" + value + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_input_path_key(const std::string& key) {
  return key == "corpus" || key == "lexicon" || key == "vad_lexicon" || key == "stopwords" ||
         key == "definition_vectors";
}

} // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k{
      "corpus", "lexicon", "vad_lexicon", "out", "groups", "seed", "min_count", "literality_threshold",
      "rbo_depth", "n_splits", "balance", "dim", "window", "negatives", "train_min_count", "epochs",
      "initial_lr", "vad_holdout", "literal_sample", "stopwords", "definition_vectors"};
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "corpus") corpus = value;
  else if (key == "lexicon") lexicon = value;
  else if (key == "vad_lexicon") vad_lexicon = value;
  else if (key == "out") out = value;
  else if (key == "groups") groups = value;
  else if (key == "seed") seed = parse_unsigned<std::uint64_t>(key, value);
  else if (key == "min_count") min_count = parse_unsigned<std::uint64_t>(key, value);
  else if (key == "literality_threshold") literality_threshold = parse_real(key, value);
  else if (key == "rbo_depth") rbo_depth = parse_unsigned<std::size_t>(key, value);
  else if (key == "n_splits") n_splits = parse_unsigned<std::size_t>(key, value);
  else if (key == "balance") balance = parse_bool(key, value);
  else if (key == "dim") train.dim = parse_unsigned<std::size_t>(key, value);
  else if (key == "window") train.window = parse_unsigned<std::size_t>(key, value);
  else if (key == "negatives") train.negatives = parse_unsigned<std::size_t>(key, value);
  else if (key == "train_min_count") train.min_count = parse_unsigned<std::uint64_t>(key, value);
  else if (key == "epochs") train.epochs = parse_unsigned<std::size_t>(key, value);
  else if (key == "initial_lr") train.initial_lr = parse_real(key, value);
  else if (key == "vad_holdout") vad_holdout = parse_unsigned<std::size_t>(key, value);
  else if (key == "literal_sample") literal_sample = parse_unsigned<std::size_t>(key, value);
  else if (key == "stopwords") stopwords = value;
  else if (key == "definition_vectors") definition_vectors = value;
  else throw Error("config: unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  return {
      {"corpus", corpus},
      {"lexicon", lexicon},
      {"vad_lexicon", vad_lexicon},
      {"out", out},
      {"groups", groups},
      {"seed", std::to_string(seed)},
      {"min_count", std::to_string(min_count)},
      {"literality_threshold", format_number(literality_threshold)},
      {"rbo_depth", std::to_string(rbo_depth)},
      {"n_splits", std::to_string(n_splits)},
      {"balance", balance ? "true" : "false"},
      {"dim", std::to_string(train.dim)},
      {"window", std::to_string(train.window)},
      {"negatives", std::to_string(train.negatives)},
      {"train_min_count", std::to_string(train.min_count)},
      {"epochs", std::to_string(train.epochs)},
      {"initial_lr", format_number(train.initial_lr)},
      {"vad_holdout", std::to_string(vad_holdout)},
      {"literal_sample", std::to_string(literal_sample)},
      {"stopwords", stopwords},
      {"definition_vectors", definition_vectors},
  };
}

void RunConfig::validate() const {
  if (!(literality_threshold > 0.0)) throw Error("config: literality_threshold must be positive");
  if (rbo_depth == 0) throw Error("config: rbo_depth must be positive");
  if (n_splits < 2) throw Error("config: n_splits must be at least 2");
  if (out.empty()) throw Error("config: out must be set");
  parse_group_labels(groups);
  train.validate();
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    // Input paths are relative to the config file, so a config can ship
    // next to its data; the output directory stays relative to the caller.
    if (is_input_path_key(key) && !value.empty() && fs::path(value).is_relative()) {
      value = (fs::path(path).parent_path() / value).lexically_normal().string();
    }
    try {
      base.set(key, value);
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

namespace {

constexpr const char* kFilteredLexicon = "lexicon.filtered.jsonl";
constexpr const char* kCombinedSpace = "combined.vec";

struct StageFailure : Error {
  StageFailure(std::string stage, const std::string& what) : Error(what), stage(std::move(stage)) {}
  std::string stage;
};

template <class F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what());
  }
}

Stopwords stopwords_for(const RunConfig& config) {
  return config.stopwords.empty() ? default_stopwords() : load_stopwords(config.stopwords);
}

Corpus load_run_corpus(const RunConfig& config) {
  auto corpus = load_corpus(config.corpus, parse_group_labels(config.groups));
  if (config.balance) corpus = balance_groups(corpus, derive_seed(config.seed, kSeedBalance));
  return corpus;
}

TrainParams combined_params(const RunConfig& config) {
  TrainParams p = config.train;
  p.seed = derive_seed(config.seed, kSeedCombinedSpace);
  return p;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::string na_or(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("NA");
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw Error(std::string(what) + " path not configured");
  if (!fs::is_regular_file(path)) throw Error(std::string(what) + " not found: " + path);
}

} // namespace

int cmd_prepare(const RunConfig& config, std::ostream& err) {
  try {
    stage("validate config", [&] {
      config.validate();
      require_file(config.corpus, "corpus");
      require_file(config.lexicon, "lexicon");
      if (!config.stopwords.empty()) require_file(config.stopwords, "stopword list");
    });
    const auto stopwords = stage("load stopwords", [&] { return stopwords_for(config); });
    const auto corpus = stage("load corpus", [&] { return load_run_corpus(config); });
    const auto lexicon = stage("load lexicon", [&] { return load_lexicon(config.lexicon); });
    const auto raw_counts = stage("count variants", [&] { return count_usages(Matcher(lexicon), corpus); });
    const auto pruned = stage("prune variants", [&] { return prune_variants(lexicon, raw_counts, config.min_count); });
    const auto space = stage("train combined space", [&] {
      return train_sgns(corpus, Matcher(pruned), combined_params(config));
    });

    struct LiteralityRow {
      std::string canonical;
      std::optional<double> score;
      std::string status;
    };
    std::vector<LiteralityRow> literality_rows;
    const auto filtered = stage("literality filter", [&] {
      Lexicon scorable;
      std::map<std::string, LiteralityRow> rows;
      for (const auto& [key, entry] : pruned) {
        if (!space.contains(idiom_token(entry))) {
          rows[key] = {key, std::nullopt, "unattested"};
          continue;
        }
        try {
          literality_score(entry, space, stopwords);
        } catch (const Error&) {
          rows[key] = {key, std::nullopt, "unscorable"};
          continue;
        }
        scorable.add(entry);
      }
      auto result = filter_literal(scorable, space, config.literality_threshold, stopwords);
      for (const auto& r : result.report) rows[r.canonical] = {r.canonical, r.score, r.removed ? "removed" : "kept"};
      for (auto& [k, r] : rows) literality_rows.push_back(std::move(r));
      if (result.kept.empty()) throw Error("no idiom survived filtering");
      return std::move(result.kept);
    });
    const auto counts = stage("final counts", [&] { return count_usages(Matcher(filtered), corpus); });

    stage("write outputs", [&] {
      const fs::path out(config.out);
      fs::create_directories(out);
      save_lexicon(filtered, (out / kFilteredLexicon).string());
      write_idiom_counts_csv(counts, (out / "counts.csv").string());
      write_token_counts_csv(counts, (out / "token_counts.csv").string());
      save_vectors(space, (out / kCombinedSpace).string());
      {
        auto f = open_out(out / "variant_counts.csv");
        f << "surface,canonical,count,kept\n";
        for (const auto& [key, entry] : lexicon) {
          const auto& kept_entry = pruned.at(key);
          for (const auto& v : entry.variants) {
            const bool kept = std::find(kept_entry.variants.begin(), kept_entry.variants.end(), v) !=
                              kept_entry.variants.end();
            f << v.text() << ',' << key << ',' << raw_counts.surface_total(v.text()) << ','
              << (kept ? "true" : "false") << '\n';
          }
        }
      }
      {
        auto f = open_out(out / "literality.csv");
        f << "canonical,literality,status\n";
        for (const auto& r : literality_rows) f << r.canonical << ',' << na_or(r.score) << ',' << r.status << '\n';
      }
      ordered_json meta;
      meta["groups"] = corpus.labels().names;
      meta["posts"] = corpus.totals().posts;
      meta["tokens"] = corpus.totals().tokens;
      meta["idioms_loaded"] = lexicon.size();
      meta["variants_loaded"] = lexicon.variant_count();
      meta["variants_after_pruning"] = pruned.variant_count();
      meta["idioms_after_filtering"] = filtered.size();
      meta["variants_after_filtering"] = filtered.variant_count();
      meta["idiom_instances"] = {counts.idiom_total(0), counts.idiom_total(1)};
      meta["combined_space"] = {{"vocab", space.size()}, {"dim", space.dim()}};
      ordered_json cfg;
      for (const auto& [k, v] : config.entries()) {
        if (k != "out") cfg[k] = v;  // bundles stay byte-identical wherever they are written
      }
      meta["config"] = cfg;
      write_text(out / "prepare.json", meta.dump(2) + "\n");
    });
  } catch (const StageFailure& e) {
    err << "figlex prepare: stage '" << e.stage << "' failed: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

namespace {

void write_comparison_csv(const fs::path& path, const GroupLabels& labels,
                          const std::array<VadComparisonRow, 3>& rows) {
  auto f = open_out(path);
  f << "dimension,mean_" << labels[0] << ",mean_" << labels[1] << ",cohens_d,p_value,significance,n_"
    << labels[0] << ",n_" << labels[1] << '\n';
  for (const auto& r : rows) {
    f << dimension_code(r.dimension) << ',' << format_number(r.mean_a) << ',' << format_number(r.mean_b) << ','
      << format_number(r.cohens_d) << ',' << format_number(r.p_value) << ',' << r.stars() << ',' << r.n_a << ','
      << r.n_b << '\n';
  }
}

ordered_json test_json(const TestResult& t) {
  ordered_json j;
  j["statistic"] = t.statistic;
  j["p_value"] = t.p_value;
  j["n"] = t.n_a;
  return j;
}

} // namespace

int cmd_analyze(const RunConfig& config, std::ostream& err) {
  const fs::path out(config.out);
  std::optional<Corpus> corpus;
  std::optional<Lexicon> lexicon;
  std::optional<EmbeddingSpace> space;
  Stopwords stopwords;
  try {
    stage("load inputs", [&] {
      config.validate();
      require_file(config.corpus, "corpus");
      require_file((out / kFilteredLexicon).string(), "prepared lexicon (run prepare first)");
      require_file((out / kCombinedSpace).string(), "combined space (run prepare first)");
      stopwords = stopwords_for(config);
      corpus = load_run_corpus(config);
      lexicon = load_lexicon((out / kFilteredLexicon).string());
      space = load_vectors((out / kCombinedSpace).string());
    });
  } catch (const StageFailure& e) {
    err << "figlex analyze: stage '" << e.stage << "' failed: " << e.what() << '\n';
    return 1;
  }

  const auto& labels = corpus->labels();
  const Matcher matcher(*lexicon);
  const auto counts = count_usages(matcher, *corpus);

  ordered_json stages;
  bool all_ok = true;
  auto run_stage = [&](const std::string& name, const std::function<void()>& body) {
    const auto marker = out / (name + ".FAILED");
    std::error_code ec;
    fs::remove(marker, ec);
    try {
      body();
      stages[name] = "ok";
    } catch (const std::exception& e) {
      all_ok = false;
      stages[name] = std::string("failed: ") + e.what();
      write_text(marker, std::string(e.what()) + "\n");
      err << "figlex analyze: stage '" << name << "' failed: " << e.what() << '\n';
    }
  };

  run_stage("divergence", [&] {
    const auto r = divergence_gap_test(*corpus, matcher, config.n_splits, derive_seed(config.seed, kSeedDivergence));
    ordered_json j;
    j["cross_jsd"] = r.cross_jsd;
    j["baseline_mean"] = {{labels[0], r.baseline_mean[0]}, {labels[1], r.baseline_mean[1]}};
    j["baseline_sd"] = {{labels[0], r.baseline_sd[0]}, {labels[1], r.baseline_sd[1]}};
    j["pooled_mean"] = r.pooled_mean;
    j["pooled_sd"] = r.pooled_sd;
    j["p_empirical"] = r.p_empirical;
    j["p_empirical_by_group"] = {{labels[0], r.p_empirical_group[0]}, {labels[1], r.p_empirical_group[1]}};
    j["z"] = r.z;
    j["p_normal"] = r.p_normal;
    j["n_splits"] = r.n_splits;
    j["log_base"] = 2;
    write_text(out / "divergence.json", j.dump(2) + "\n");
    auto f = open_out(out / "divergence_baseline.csv");
    f << "group,split,jsd\n";
    for (std::size_t g = 0; g < 2; ++g) {
      for (std::size_t s = 0; s < r.baseline[g].size(); ++s) {
        f << labels[g] << ',' << s << ',' << format_number(r.baseline[g][s]) << '\n';
      }
    }
  });

  run_stage("gscore", [&] {
    const auto col_a = counts.token_column(0);
    const auto col_b = counts.token_column(1);
    TokenCounts prior = col_a;
    for (const auto& [tok, c] : col_b) prior[tok] += c;
    const auto table = log_odds_dirichlet(col_a, col_b, prior);
    {
      auto f = open_out(out / "gscore_tokens.csv");
      f << "token,delta,sigma,z\n";
      for (const auto& [tok, r] : table.records) {
        f << tok << ',' << format_number(r.delta) << ',' << format_number(r.sigma) << ',' << format_number(r.z) << '\n';
      }
    }
    std::vector<double> g_idiom, g_surface, g_definition_x, g_definition;
    std::vector<double> g_idiom_s;
    auto f = open_out(out / "idioms.csv");
    f << "canonical,gscore,gscore_surface,gscore_definition,count_" << labels[0] << ",count_" << labels[1] << '\n';
    for (const auto& [key, entry] : *lexicon) {
      std::optional<double> gi, gs, gd;
      if (const auto* rec = table.find(idiom_token(entry))) gi = rec->z;
      try { gs = gscore_surface(entry, table); } catch (const Error&) {}
      try { gd = gscore_definition(entry, table); } catch (const Error&) {}
      const auto& c = counts.idiom_counts.at(key);
      f << key << ',' << na_or(gi) << ',' << na_or(gs) << ',' << na_or(gd) << ',' << c[0] << ',' << c[1] << '\n';
      if (gi && gs) {
        g_idiom_s.push_back(*gi);
        g_surface.push_back(*gs);
      }
      if (gi && gd) {
        g_definition_x.push_back(*gi);
        g_definition.push_back(*gd);
      }
    }
    f.close();
    ordered_json j;
    j["statistic"] = "spearman";
    // A constant series (e.g. two identical groups, every gScore 0) has no
    // rank correlation; record it as null rather than failing the stage.
    auto correlate = [](const std::vector<double>& x, const std::vector<double>& y) {
      try {
        return test_json(spearman(x, y));
      } catch (const Error& e) {
        return ordered_json{{"statistic", nullptr}, {"p_value", nullptr}, {"n", x.size()}, {"note", e.what()}};
      }
    };
    j["surface"] = correlate(g_idiom_s, g_surface);
    j["definition"] = correlate(g_definition_x, g_definition);
    write_text(out / "spearman.json", j.dump(2) + "\n");
  });

  run_stage("affect", [&] {
    require_file(config.vad_lexicon, "VAD lexicon");
    const auto vad = load_vad_lexicon(config.vad_lexicon);
    const BagOfVectorsEmbedder words(*space, stopwords);
    std::unique_ptr<SentenceEmbedder> precomputed;
    if (!config.definition_vectors.empty()) {
      precomputed = std::make_unique<PrecomputedEmbedder>(load_vectors(config.definition_vectors));
    }
    const SentenceEmbedder& embedder = precomputed ? *precomputed : static_cast<const SentenceEmbedder&>(words);

    const auto holdout = std::min(config.vad_holdout, vad.entries.size() / 5);
    const auto fit = fit_vad_models(vad, embedder, holdout, derive_seed(config.seed, kSeedVadHoldout));
    save_vad_models(fit.models, (out / "vad_models.json").string());
    {
      ordered_json j;
      j["n_train"] = fit.n_train;
      j["n_holdout"] = fit.n_holdout;
      j["n_skipped"] = fit.n_skipped;
      ordered_json pr;
      for (auto d : kVadDimensions) {
        const double v = fit.holdout_pearson[static_cast<std::size_t>(d)];
        pr[dimension_code(d)] = std::isnan(v) ? ordered_json(nullptr) : ordered_json(v);
      }
      j["holdout_pearson"] = pr;
      write_text(out / "vad_fit.json", j.dump(2) + "\n");
    }

    const auto scores = score_definitions(*lexicon, embedder, fit.models);
    {
      auto f = open_out(out / "vad_scores.csv");
      f << "canonical,V,A,D\n";
      for (const auto& [key, v] : scores) {
        f << key << ',' << format_number(v[0]) << ',' << format_number(v[1]) << ',' << format_number(v[2]) << '\n';
      }
    }
    const auto series_a = usage_vad_series(counts, scores, 0);
    const auto series_b = usage_vad_series(counts, scores, 1);
    write_comparison_csv(out / "vad_comparison.csv", labels, compare_vad(series_a, series_b));
    {
      auto f = open_out(out / "kde.csv");
      f << "dimension,group,x,density\n";
      for (auto d : kVadDimensions) {
        const auto k = static_cast<std::size_t>(d);
        for (const auto* s : {&series_a[k], &series_b[k]}) {
          const auto curve = kde(s->values);
          for (std::size_t i = 0; i < curve.x.size(); ++i) {
            f << dimension_code(d) << ',' << s->group << ',' << format_number(curve.x[i]) << ','
              << format_number(curve.density[i]) << '\n';
          }
        }
      }
    }
    const auto literal_seed = derive_seed(config.seed, kSeedLiteral);
    std::size_t n = config.literal_sample;
    if (n == 0) {
      const auto probe = literal_baseline(*corpus, matcher, embedder, fit.models, 0, literal_seed);
      n = std::min(probe.available[0], probe.available[1]);
    }
    const auto literal = literal_baseline(*corpus, matcher, embedder, fit.models, n, literal_seed);
    write_comparison_csv(out / "literal_baseline.csv", labels, compare_vad(literal.series[0], literal.series[1]));
  });

  run_stage("context", [&] {
    std::array<EmbeddingSpace, 2> spaces;
    for (std::size_t g = 0; g < 2; ++g) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < corpus->size(); ++i) {
        if (corpus->group_of(corpus->posts()[i]) == g) idx.push_back(i);
      }
      TrainParams p = config.train;
      p.seed = derive_seed(config.seed, kSeedGroupSpace, g);
      spaces[g] = train_sgns(corpus->subset(idx), matcher, p);
      save_vectors(spaces[g], (out / ("space_" + labels[g] + ".vec")).string());
    }
    struct Row {
      std::string canonical;
      double score;
      std::array<NeighborList, 2> lists;
    };
    std::vector<Row> rows;
    for (const auto& [key, entry] : *lexicon) {
      const auto tok = idiom_token(entry);
      if (!spaces[0].contains(tok) || !spaces[1].contains(tok)) continue;
      Row r{key, 0.0, {nearest_neighbors(spaces[0], tok, config.rbo_depth),
                       nearest_neighbors(spaces[1], tok, config.rbo_depth)}};
      r.score = sim_rbo(r.lists[0].tokens(), r.lists[1].tokens(), config.rbo_depth);
      rows.push_back(std::move(r));
    }
    if (rows.empty()) throw Error("no idiom is present in both group spaces");
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return a.score != b.score ? a.score < b.score : a.canonical < b.canonical;
    });
    auto f = open_out(out / "simrbo.csv");
    f << "rank,canonical,simrbo,count_" << labels[0] << ",count_" << labels[1] << '\n';
    auto nb = open_out(out / "neighbors.csv");
    nb << "canonical,group,rank,token,cosine\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& c = counts.idiom_counts.at(rows[i].canonical);
      f << i + 1 << ',' << rows[i].canonical << ',' << format_number(rows[i].score) << ',' << c[0] << ',' << c[1]
        << '\n';
      for (std::size_t g = 0; g < 2; ++g) {
        const auto& list = rows[i].lists[g].neighbors;
        for (std::size_t k = 0; k < list.size(); ++k) {
          nb << rows[i].canonical << ',' << labels[g] << ',' << k + 1 << ',' << list[k].token << ','
             << format_number(list[k].cosine) << '\n';
        }
      }
    }
  });

  ordered_json meta;
  ordered_json cfg;
  for (const auto& [k, v] : config.entries()) {
    if (k != "out") cfg[k] = v;  // bundles stay byte-identical wherever they are written
  }
  meta["config"] = cfg;
  meta["groups"] = labels.names;
  meta["seeds"] = {
      {"balance", derive_seed(config.seed, kSeedBalance)},
      {"combined_space", derive_seed(config.seed, kSeedCombinedSpace)},
      {"group_space_" + labels[0], derive_seed(config.seed, kSeedGroupSpace, 0)},
      {"group_space_" + labels[1], derive_seed(config.seed, kSeedGroupSpace, 1)},
      {"divergence", derive_seed(config.seed, kSeedDivergence)},
      {"vad_holdout", derive_seed(config.seed, kSeedVadHoldout)},
      {"literal_baseline", derive_seed(config.seed, kSeedLiteral)},
  };
  meta["jsd_log_base"] = 2;
  meta["divergence_p_value"] =
      "empirical (exceedances + 1) / (samples + 1) over pooled within-group halves; z under a normal fit";
  meta["gscore"] = "z-score of log-odds ratio with informative Dirichlet prior (prior = combined counts); "
                   "positive favors " + labels[0];
  meta["beta_regression"] = {{"link", "logit"}, {"regularization", "none"}};
  meta["idiom_instances"] = {{labels[0], counts.idiom_total(0)}, {labels[1], counts.idiom_total(1)}};
  meta["stages"] = stages;
  try {
    write_text(out / "run_metadata.json", meta.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "figlex analyze: " << e.what() << '\n';
    return 1;
  }
  return all_ok ? 0 : 1;
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error("missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing analyze artifact " + path.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw Error("empty artifact " + path.string());
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
  }
  return t;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing analyze artifact " + path.string());
  return nlohmann::json::parse(in);
}

double to_number(const std::string& s) {
  if (s == "NA" || s == "nan") return std::nan("");
  return std::stod(s);
}

// One flat record per reported number; both export formats are generated
// from this list, so they carry identical values.
struct ReportValue {
  std::string section;
  std::string key;
  std::string field;
  double value;
};

} // namespace

namespace {

// Counts and sample sizes are whole numbers in the source tables.
ordered_json report_number(std::string_view field, double v) {
  if (field.starts_with("count_") || field.starts_with("n_")) return static_cast<std::int64_t>(std::llround(v));
  return v;
}

} // namespace

int cmd_report(const RunConfig& config, const std::string& format, std::ostream& err) {
  if (format != "csv" && format != "json") {
    err << "figlex report: unknown format '" << format << "' (expected csv or json)\n";
    return 2;
  }
  const fs::path out(config.out);
  try {
    const auto labels = parse_group_labels(config.groups);
    std::vector<ReportValue> values;
    ordered_json doc;
    doc["format_version"] = 1;
    doc["groups"] = labels.names;

    {
      const auto d = read_json(out / "divergence.json");
      ordered_json j;
      for (const char* k : {"cross_jsd", "pooled_mean", "pooled_sd", "p_empirical", "z", "p_normal"}) {
        const double v = d.at(k).get<double>();
        j[k] = v;
        values.push_back({"divergence", "all", k, v});
      }
      ordered_json bm;
      for (const auto& g : labels.names) {
        const double v = d.at("baseline_mean").at(g).get<double>();
        bm[g] = v;
        values.push_back({"divergence", g, "baseline_mean", v});
      }
      j["baseline_mean"] = bm;
      j["n_splits"] = d.at("n_splits");
      j["log_base"] = d.at("log_base");
      doc["divergence"] = j;
    }
    {
      const auto s = read_json(out / "spearman.json");
      ordered_json j;
      for (const char* k : {"surface", "definition"}) {
        const auto& sk = s.at(k);
        if (sk.at("statistic").is_null()) {
          j[k] = {{"rho", nullptr}, {"p_value", nullptr}, {"n", sk.at("n")}};
          continue;
        }
        const double rho = sk.at("statistic").get<double>();
        const double p = sk.at("p_value").get<double>();
        j[k] = {{"rho", rho}, {"p_value", p}, {"n", sk.at("n")}};
        values.push_back({"spearman", k, "rho", rho});
        values.push_back({"spearman", k, "p_value", p});
      }
      doc["spearman"] = j;
    }
    {
      const auto t = read_csv(out / "idioms.csv");
      const auto ci = t.column("canonical"), gi = t.column("gscore"), gs = t.column("gscore_surface"),
                 gd = t.column("gscore_definition"), ca = t.column("count_" + labels[0]),
                 cb = t.column("count_" + labels[1]);
      auto fig1 = ordered_json::array();
      auto idioms = ordered_json::array();
      for (const auto& r : t.rows) {
        const double total = to_number(r[ca]) + to_number(r[cb]);
        const double g = to_number(r[gi]);
        ordered_json row{{"canonical", r[ci]}};
        auto put = [&](const char* name, double v) {
          if (std::isnan(v)) {
            row[name] = nullptr;
          } else {
            row[name] = report_number(name, v);
            values.push_back({"idioms", r[ci], name, v});
          }
        };
        put("gscore", g);
        put("gscore_surface", to_number(r[gs]));
        put("gscore_definition", to_number(r[gd]));
        put(("count_" + labels[0]).c_str(), to_number(r[ca]));
        put(("count_" + labels[1]).c_str(), to_number(r[cb]));
        idioms.push_back(row);
        if (total > 0 && !std::isnan(g)) {
          const double lc = std::log10(total);
          fig1.push_back({{"canonical", r[ci]}, {"log10_count", lc}, {"gscore", g}});
          values.push_back({"figure1", r[ci], "log10_count", lc});
          values.push_back({"figure1", r[ci], "gscore", g});
        }
      }
      doc["idioms"] = idioms;
      doc["figure1"] = fig1;
    }
    {
      const auto t = read_csv(out / "vad_scores.csv");
      auto rows = ordered_json::array();
      for (const auto& r : t.rows) {
        ordered_json row{{"canonical", r[0]}};
        for (std::size_t k = 1; k <= 3; ++k) {
          const double v = to_number(r[k]);
          row[t.header[k]] = v;
          values.push_back({"table2", r[0], t.header[k], v});
        }
        rows.push_back(row);
      }
      doc["table2"] = rows;
    }
    for (const auto& [file, section] : {std::pair{"vad_comparison.csv", "table3"},
                                        std::pair{"literal_baseline.csv", "literal_baseline"}}) {
      const auto t = read_csv(out / file);
      auto rows = ordered_json::array();
      for (const auto& r : t.rows) {
        ordered_json row{{"dimension", r[0]}};
        for (std::size_t k = 1; k < t.header.size(); ++k) {
          if (t.header[k] == "significance") {
            row["significance"] = k < r.size() ? r[k] : std::string();
            continue;
          }
          const double v = to_number(r[k]);
          if (std::isnan(v)) {
            row[t.header[k]] = nullptr;
            continue;
          }
          row[t.header[k]] = report_number(t.header[k], v);
          values.push_back({section, r[0], t.header[k], v});
        }
        rows.push_back(row);
      }
      doc[section] = rows;
    }
    {
      const auto t = read_csv(out / "kde.csv");
      std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> curves;
      std::vector<std::pair<std::string, std::string>> order;
      for (const auto& r : t.rows) {
        const auto id = std::pair{r[0], r[1]};
        if (!curves.count(id)) order.push_back(id);
        curves[id].first.push_back(to_number(r[2]));
        curves[id].second.push_back(to_number(r[3]));
      }
      auto fig2 = ordered_json::array();
      for (const auto& id : order) {
        const auto& [xs, ds] = curves[id];
        fig2.push_back({{"dimension", id.first}, {"group", id.second}, {"x", xs}, {"density", ds}});
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const auto key = id.first + "/" + id.second + "/" + std::to_string(i);
          values.push_back({"figure2", key, "x", xs[i]});
          values.push_back({"figure2", key, "density", ds[i]});
        }
      }
      doc["figure2"] = fig2;
    }
    {
      const auto t = read_csv(out / "simrbo.csv");
      auto rows = ordered_json::array();
      for (const auto& r : t.rows) {
        const double v = to_number(r[2]);
        rows.push_back({{"rank", std::stoi(r[0])}, {"canonical", r[1]}, {"simrbo", v}});
        values.push_back({"simrbo", r[1], "simrbo", v});
      }
      doc["simrbo"] = rows;
    }

    if (format == "json") {
      write_text(out / "report.json", doc.dump(2) + "\n");
    } else {
      auto f = open_out(out / "report.csv");
      f << "section,key,field,value\n";
      for (const auto& v : values) {
        f << v.section << ',' << v.key << ',' << v.field << ',' << format_number(v.value) << '\n';
      }
    }
  } catch (const std::exception& e) {
    err << "figlex report: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

} // namespace figlex
