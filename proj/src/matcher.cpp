#include "figlex/matcher.hpp"

#include <fstream>

namespace figlex {

std::uint64_t GroupCounts::idiom_total(std::size_t group) const {
  std::uint64_t n = 0;
  for (const auto& [k, c] : idiom_counts) n += c[group];
  return n;
}

std::uint64_t GroupCounts::surface_total(const std::string& surface) const {
  auto it = surface_counts.find(surface);
  return it == surface_counts.end() ? 0 : it->second[0] + it->second[1];
}

std::map<std::string, double> GroupCounts::token_column(std::size_t group) const {
  std::map<std::string, double> col;
  for (const auto& [tok, c] : token_counts) {
    if (c[group] > 0) col.emplace(tok, static_cast<double>(c[group]));
  }
  return col;
}

void GroupCounts::merge(const GroupCounts& other) {
  if (labels.names != other.labels.names) throw Error("cannot merge counts with different group labels");
  auto add = [](std::map<std::string, GroupPair>& into, const std::map<std::string, GroupPair>& from) {
    for (const auto& [k, c] : from) {
      auto& dst = into[k];
      dst[0] += c[0];
      dst[1] += c[1];
    }
  };
  add(idiom_counts, other.idiom_counts);
  add(surface_counts, other.surface_counts);
  add(token_counts, other.token_counts);
  group_totals[0] += other.group_totals[0];
  group_totals[1] += other.group_totals[1];
}

Matcher::Matcher(const Lexicon& lexicon) {
  lexicon.check_collisions();
  nodes_.emplace_back();
  for (const auto& [key, entry] : lexicon) {
    canonicals_.push_back(key);
    const auto tok = idiom_token(key);
    for (const auto& form : entry.variants) {
      std::uint32_t node = 0;
      for (const auto& t : form.tokens) {
        auto [id_it, unused] = token_ids_.emplace(t, static_cast<std::uint32_t>(token_ids_.size()));
        const auto id = id_it->second;
        auto child = nodes_[node].next.find(id);
        if (child == nodes_[node].next.end()) {
          nodes_.emplace_back();
          const auto fresh = static_cast<std::uint32_t>(nodes_.size() - 1);
          nodes_[node].next.emplace(id, fresh);
          node = fresh;
        } else {
          node = child->second;
        }
      }
      if (nodes_[node].pattern >= 0) {
        const auto& other = patterns_[nodes_[node].pattern].canonical;
        throw Error("surface form '" + form.text() + "' shared by '" + other + "' and '" + key + "'");
      }
      nodes_[node].pattern = static_cast<std::int32_t>(patterns_.size());
      patterns_.push_back({form.tokens, key});
      idiom_tokens_.push_back(tok);
    }
  }
}

std::pair<std::size_t, std::int32_t> Matcher::longest_at(const TokenSeq& tokens, std::size_t pos) const {
  std::size_t best_len = 0;
  std::int32_t best = -1;
  std::uint32_t node = 0;
  for (std::size_t i = pos; i < tokens.size(); ++i) {
    auto id = token_ids_.find(tokens[i]);
    if (id == token_ids_.end()) break;
    auto child = nodes_[node].next.find(id->second);
    if (child == nodes_[node].next.end()) break;
    node = child->second;
    if (nodes_[node].pattern >= 0) {
      best_len = i - pos + 1;
      best = nodes_[node].pattern;
    }
  }
  return {best_len, best};
}

std::vector<Match> Matcher::find_matches(const TokenSeq& tokens) const {
  std::vector<Match> out;
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    const auto [len, pat] = longest_at(tokens, pos);
    if (pat < 0) {
      ++pos;
      continue;
    }
    Match m;
    m.canonical = patterns_[pat].canonical;
    m.start = pos;
    m.end = pos + len;
    m.surface.assign(tokens.begin() + static_cast<std::ptrdiff_t>(pos),
                     tokens.begin() + static_cast<std::ptrdiff_t>(pos + len));
    out.push_back(std::move(m));
    pos += len;
  }
  return out;
}

TokenSeq Matcher::rewrite(const TokenSeq& tokens) const {
  TokenSeq out;
  out.reserve(tokens.size());
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    const auto [len, pat] = longest_at(tokens, pos);
    if (pat < 0) {
      out.push_back(tokens[pos]);
      ++pos;
    } else {
      out.push_back(idiom_tokens_[pat]);
      pos += len;
    }
  }
  return out;
}

GroupCounts count_usages(const Matcher& matcher, const Corpus& corpus) {
  GroupCounts base;
  base.labels = corpus.labels();
  for (const auto& c : matcher.canonicals()) base.idiom_counts[c] = GroupPair{0, 0};

  const std::size_t shards = std::max<std::size_t>(1, std::min(max_threads(), corpus.size()));
  std::vector<GroupCounts> partial(shards, GroupCounts{corpus.labels(), {}, {}, {}, {}});
  parallel_for(shards, [&](std::size_t s) {
    auto& counts = partial[s];
    for (std::size_t i = s; i < corpus.size(); i += shards) {
      const auto& post = corpus.posts()[i];
      const auto g = corpus.group_of(post);
      for (const auto& m : matcher.find_matches(post.tokens)) {
        counts.idiom_counts[m.canonical][g] += 1;
        counts.surface_counts[join(m.surface, " ")][g] += 1;
      }
      const auto rewritten = matcher.rewrite(post.tokens);
      for (const auto& t : rewritten) counts.token_counts[t][g] += 1;
      counts.group_totals[g] += rewritten.size();
    }
  });
  for (const auto& p : partial) base.merge(p);
  return base;
}

void write_idiom_counts_csv(const GroupCounts& counts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "canonical,group,count\n";
  for (const auto& [key, c] : counts.idiom_counts) {
    for (std::size_t g = 0; g < 2; ++g) out << key << ',' << counts.labels[g] << ',' << c[g] << '\n';
  }
}

void write_token_counts_csv(const GroupCounts& counts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "token,group,count\n";
  for (const auto& [tok, c] : counts.token_counts) {
    for (std::size_t g = 0; g < 2; ++g) {
      if (c[g] > 0) out << tok << ',' << counts.labels[g] << ',' << c[g] << '\n';
    }
  }
}

} // namespace figlex
