#include "figlex/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>

namespace figlex {

int GroupLabels::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == label) return static_cast<int>(i);
  }
  return -1;
}

GroupLabels parse_group_labels(std::string_view spec) {
  const auto comma = spec.find(',');
  if (comma == std::string_view::npos || spec.find(',', comma + 1) != std::string_view::npos) {
    throw Error("group labels must be two comma-separated names, got '" + std::string(spec) + "'");
  }
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return std::string(s);
  };
  GroupLabels labels{{trim(spec.substr(0, comma)), trim(spec.substr(comma + 1))}};
  if (labels.names[0].empty() || labels.names[1].empty() || labels.names[0] == labels.names[1]) {
    throw Error("group labels must be two distinct nonempty names");
  }
  return labels;
}

Corpus::Corpus(GroupLabels labels, std::vector<Post> posts)
    : labels_(std::move(labels)), posts_(std::move(posts)) {
  for (const auto& p : posts_) {
    const int g = labels_.index_of(p.group);
    if (g < 0) throw Error("unknown group " + p.group);
    totals_.tokens[g] += p.token_count;
    totals_.posts[g] += 1;
  }
}

std::size_t Corpus::group_of(const Post& post) const {
  return static_cast<std::size_t>(labels_.index_of(post.group));
}

Corpus Corpus::subset(std::span<const std::size_t> indices) const {
  std::vector<Post> kept;
  kept.reserve(indices.size());
  for (auto i : indices) kept.push_back(posts_.at(i));
  return Corpus(labels_, std::move(kept));
}

namespace {

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

char lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool starts_url(std::string_view s, std::size_t i) {
  const auto rest = s.substr(i);
  return rest.starts_with("http://") || rest.starts_with("https://") ||
         rest.starts_with("www.");
}

} // namespace

TokenSeq tokenize(std::string_view text) {
  std::string s(text.size(), '\0');
  std::transform(text.begin(), text.end(), s.begin(), lower);

  // U+2019 right single quotation mark is folded into a plain apostrophe.
  std::string norm;
  norm.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
        static_cast<unsigned char>(s[i + 1]) == 0x80 && static_cast<unsigned char>(s[i + 2]) == 0x99) {
      norm += '\'';
      i += 2;
    } else {
      norm += s[i];
    }
  }

  TokenSeq tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < norm.size(); ++i) {
    const char c = norm[i];
    if (current.empty() && (i == 0 || !is_alnum(norm[i - 1])) && starts_url(norm, i)) {
      while (i < norm.size() && !std::isspace(static_cast<unsigned char>(norm[i]))) ++i;
      continue;
    }
    if (is_alnum(c)) {
      current += c;
    } else if (c == '\'' && !current.empty() && i + 1 < norm.size() && is_alnum(norm[i + 1])) {
      current += c;
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Corpus parse_corpus(std::istream& in, const GroupLabels& labels) {
  std::vector<Post> posts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("corpus line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
    auto field = [&](const char* key) -> std::string {
      if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
        throw Error("corpus line " + std::to_string(line_no) + ": missing string field '" + key + "'");
      }
      return j[key].get<std::string>();
    };
    Post p;
    p.author_id = field("author_id");
    p.group = field("group");
    p.text = field("text");
    if (j.contains("subreddit") && j["subreddit"].is_string()) {
      p.subreddit = j["subreddit"].get<std::string>();
    }
    if (labels.index_of(p.group) < 0) {
      throw Error("corpus line " + std::to_string(line_no) + ": unknown group " + p.group);
    }
    p.tokens = tokenize(p.text);
    p.token_count = p.tokens.size();
    posts.push_back(std::move(p));
  }
  return Corpus(labels, std::move(posts));
}

Corpus load_corpus(const std::string& path, const GroupLabels& labels) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path);
  return parse_corpus(in, labels);
}

Corpus balance_groups(const Corpus& corpus, std::uint64_t seed) {
  const auto& totals = corpus.totals();
  if (totals.posts[0] == 0 || totals.posts[1] == 0) {
    throw Error("balance_groups: both groups need posts");
  }
  if (totals.tokens[0] == totals.tokens[1]) return corpus;

  const std::size_t larger = totals.tokens[0] > totals.tokens[1] ? 0 : 1;
  const std::uint64_t target = totals.tokens[1 - larger];
  std::uint64_t current = totals.tokens[larger];

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.group_of(corpus.posts()[i]) == larger) candidates.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(candidates);

  std::vector<bool> removed(corpus.size(), false);
  for (auto i : candidates) {
    if (current == target) break;
    const auto len = corpus.posts()[i].token_count;
    if (len <= current && current - len >= target) {
      removed[i] = true;
      current -= len;
    }
  }

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!removed[i]) keep.push_back(i);
  }
  return corpus.subset(keep);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
random_half_indices(const Corpus& corpus, std::size_t group, std::uint64_t seed) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.group_of(corpus.posts()[i]) == group) members.push_back(i);
  }
  if (members.size() < 2) {
    throw Error("random_halves: group " + corpus.labels()[group] + " has fewer than 2 posts");
  }
  Rng rng(seed);
  rng.shuffle(members);

  std::array<std::vector<std::size_t>, 2> halves;
  std::array<std::uint64_t, 2> load{0, 0};
  for (auto i : members) {
    std::size_t dest = 0;
    if (load[1] < load[0] || (load[1] == load[0] && halves[1].size() < halves[0].size())) dest = 1;
    halves[dest].push_back(i);
    load[dest] += corpus.posts()[i].token_count;
  }
  std::sort(halves[0].begin(), halves[0].end());
  std::sort(halves[1].begin(), halves[1].end());
  return {std::move(halves[0]), std::move(halves[1])};
}

std::pair<Corpus, Corpus> random_halves(const Corpus& corpus, std::string_view group,
                                        std::uint64_t seed) {
  const int g = corpus.labels().index_of(group);
  if (g < 0) throw Error("random_halves: unknown group " + std::string(group));
  auto [a, b] = random_half_indices(corpus, static_cast<std::size_t>(g), seed);
  return {corpus.subset(a), corpus.subset(b)};
}

} // namespace figlex
