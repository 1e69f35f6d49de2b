#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace figlex {

/// Base exception for every recoverable failure in the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Deterministic random source. Only the raw engine output is used so that
/// results do not depend on the standard library's distribution algorithms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Uniform real in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal deviate (Box-Muller, no caching).
  double normal();

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

private:
  std::mt19937_64 engine_;
};

/// splitmix64-style mixing, used to derive independent per-task seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// Worker cap: FIGLEX_THREADS when set and positive, otherwise hardware concurrency.
std::size_t max_threads();

/// Runs fn(i) for i in [0, n) over up to max_threads() workers.
/// fn must be safe to call concurrently for distinct i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Shortest decimal form that round-trips the double.
std::string format_number(double x);

std::string join(std::span<const std::string> parts, std::string_view sep);

/// Function-word list used to drop constituents from literality and
/// bag-of-vectors averages.
using Stopwords = std::unordered_set<std::string>;

const Stopwords& default_stopwords();

/// One word per line; blank lines and '#' comments ignored.
Stopwords load_stopwords(const std::string& path);

} // namespace figlex
