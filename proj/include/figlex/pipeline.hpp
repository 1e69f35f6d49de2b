#pragma once

#include "figlex/embeddings.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace figlex {

/// Everything a run needs. Loaded from `key = value` text; every key can be
/// overridden on the command line as --key-with-dashes.
struct RunConfig {
  std::string corpus;
  std::string lexicon;
  std::string vad_lexicon;
  std::string out = "figlex-out";
  std::string groups = "F,M";  // first label is "group a": positive gScores favor it
  std::uint64_t seed = 1;
  std::uint64_t min_count = 50;
  double literality_threshold = 0.25;
  std::size_t rbo_depth = 100;
  std::size_t n_splits = 500;
  bool balance = true;
  TrainParams train;
  std::size_t vad_holdout = 1000;
  std::size_t literal_sample = 0;  // 0: as many as the smaller group allows
  std::string stopwords;           // optional override of the built-in list
  std::string definition_vectors;  // optional precomputed sentence vectors

  /// Applies one setting; throws Error on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  /// Every key and its current value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  /// Throws unless thresholds are positive and train params valid.
  void validate() const;

  static const std::vector<std::string>& keys();
};

/// Reads `key = value` lines; '#' starts a comment.
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Exit codes: 0 success, 1 stage failure, 2 usage error.
int cmd_prepare(const RunConfig& config, std::ostream& err);
int cmd_analyze(const RunConfig& config, std::ostream& err);
int cmd_report(const RunConfig& config, const std::string& format, std::ostream& err);

} // namespace figlex
