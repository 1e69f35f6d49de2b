// figlex: command-line driver for the idiom-usage comparison pipeline.
//
//   figlex prepare --config run.conf
//   figlex analyze --config run.conf
//   figlex report  --config run.conf --format json
//
// Every config key can be given as a flag (underscores become dashes);
// flags override the config file.

#include "figlex/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <string>

namespace {

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compare two author groups' idiom usage: matching, association, divergence, affect and context."};
  app.require_subcommand(1);

  std::string config_path;
  std::string format = "json";
  std::map<std::string, std::string> overrides;

  auto* prepare = app.add_subcommand("prepare", "match, prune, train the combined space, filter literal idioms");
  auto* analyze = app.add_subcommand("analyze", "divergence, gScores, affect comparison, per-group spaces");
  auto* report = app.add_subcommand("report", "consolidate analyze outputs into one csv or json export");
  report->add_option("--format", format, "csv or json")->capture_default_str();

  for (auto* sub : {prepare, analyze, report}) {
    sub->add_option("--config", config_path, "key = value config file");
    for (const auto& key : figlex::RunConfig::keys()) {
      sub->add_option_function<std::string>(
          flag_name(key), [&overrides, key](const std::string& v) { overrides[key] = v; }, "override '" + key + "'");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version come through here with a zero exit code.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  figlex::RunConfig config;
  try {
    if (!config_path.empty()) config = figlex::load_config(config_path, config);
    for (const auto& [k, v] : overrides) config.set(k, v);
  } catch (const std::exception& e) {
    std::cerr << "figlex: " << e.what() << '\n';
    return 2;
  }

  if (*prepare) return figlex::cmd_prepare(config, std::cerr);
  if (*analyze) return figlex::cmd_analyze(config, std::cerr);
  return figlex::cmd_report(config, format, std::cerr);
}
