#include "figlex/lexicon.hpp"

#include "figlex/embeddings.hpp"
#include "figlex/matcher.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace figlex {

void Lexicon::add(IdiomEntry entry) {
  const auto key = entry.key();
  if (key.empty()) throw Error("lexicon entry with empty canonical form");
  if (!entries_.emplace(key, std::move(entry)).second) {
    throw Error("duplicate canonical idiom '" + key + "'");
  }
}

const IdiomEntry& Lexicon::at(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error("idiom '" + key + "' not in lexicon");
  return it->second;
}

std::size_t Lexicon::variant_count() const {
  std::size_t n = 0;
  for (const auto& [key, e] : entries_) n += e.variants.size();
  return n;
}

void Lexicon::check_collisions() const {
  std::map<TokenSeq, std::string> owner;
  for (const auto& [key, e] : entries_) {
    for (const auto& v : e.variants) {
      auto [it, inserted] = owner.emplace(v.tokens, key);
      if (!inserted && it->second != key) {
        throw Error("surface form '" + v.text() + "' shared by '" + it->second + "' and '" + key + "'");
      }
    }
  }
}

namespace {

// lemma -> every non-lemma form (third person, past, participle, gerund).
const std::unordered_map<std::string, std::vector<std::string>>& irregular_verbs() {
  static const auto table = [] {
    static const char* rows[] = {
        "be is am are was were been being",
        "have has had having",
        "do does did done doing",
        "go goes went gone going",
        "bear bears bore borne born bearing",
        "beat beats beaten beating",
        "become becomes became becoming",
        "begin begins began begun beginning",
        "bend bends bent bending",
        "bet bets betting",
        "bite bites bit bitten biting",
        "bleed bleeds bled bleeding",
        "blow blows blew blown blowing",
        "break breaks broke broken breaking",
        "bring brings brought bringing",
        "build builds built building",
        "burn burns burned burnt burning",
        "burst bursts bursting",
        "buy buys bought buying",
        "catch catches caught catching",
        "choose chooses chose chosen choosing",
        "cling clings clung clinging",
        "come comes came coming",
        "cost costs costing",
        "cut cuts cutting",
        "deal deals dealt dealing",
        "dig digs dug digging",
        "draw draws drew drawn drawing",
        "drink drinks drank drunk drinking",
        "drive drives drove driven driving",
        "eat eats ate eaten eating",
        "fall falls fell fallen falling",
        "feed feeds fed feeding",
        "feel feels felt feeling",
        "fight fights fought fighting",
        "find finds found finding",
        "fly flies flew flown flying",
        "forget forgets forgot forgotten forgetting",
        "forgive forgives forgave forgiven forgiving",
        "freeze freezes froze frozen freezing",
        "get gets got gotten getting",
        "give gives gave given giving",
        "grind grinds ground grinding",
        "grow grows grew grown growing",
        "hang hangs hung hanged hanging",
        "hear hears heard hearing",
        "hide hides hid hidden hiding",
        "hit hits hitting",
        "hold holds held holding",
        "hurt hurts hurting",
        "keep keeps kept keeping",
        "know knows knew known knowing",
        "lay lays laid laying",
        "lead leads led leading",
        "leave leaves left leaving",
        "lend lends lent lending",
        "let lets letting",
        "lie lies lay lain lying",
        "light lights lit lighted lighting",
        "lose loses lost losing",
        "make makes made making",
        "mean means meant meaning",
        "meet meets met meeting",
        "pay pays paid paying",
        "put puts putting",
        "quit quits quitting",
        "read reads reading",
        "ride rides rode ridden riding",
        "ring rings rang rung ringing",
        "rise rises rose risen rising",
        "run runs ran running",
        "say says said saying",
        "see sees saw seen seeing",
        "seek seeks sought seeking",
        "sell sells sold selling",
        "send sends sent sending",
        "set sets setting",
        "shake shakes shook shaken shaking",
        "shed sheds shedding",
        "shine shines shone shining",
        "shoot shoots shot shooting",
        "shut shuts shutting",
        "sing sings sang sung singing",
        "sink sinks sank sunk sinking",
        "sit sits sat sitting",
        "sleep sleeps slept sleeping",
        "slide slides slid sliding",
        "speak speaks spoke spoken speaking",
        "spend spends spent spending",
        "spill spills spilled spilt spilling",
        "spin spins spun spinning",
        "spit spits spat spitting",
        "split splits splitting",
        "spread spreads spreading",
        "stand stands stood standing",
        "steal steals stole stolen stealing",
        "stick sticks stuck sticking",
        "sting stings stung stinging",
        "stink stinks stank stunk stinking",
        "strike strikes struck striking",
        "swear swears swore sworn swearing",
        "sweep sweeps swept sweeping",
        "swim swims swam swum swimming",
        "swing swings swung swinging",
        "take takes took taken taking",
        "teach teaches taught teaching",
        "tear tears tore torn tearing",
        "tell tells told telling",
        "think thinks thought thinking",
        "throw throws threw thrown throwing",
        "wake wakes woke woken waking",
        "wear wears wore worn wearing",
        "weep weeps wept weeping",
        "win wins won winning",
        "wring wrings wrung wringing",
        "write writes wrote written writing",
    };
    std::unordered_map<std::string, std::vector<std::string>> t;
    for (const char* row : rows) {
      std::istringstream in(row);
      std::string lemma, form;
      in >> lemma;
      auto& forms = t[lemma];
      while (in >> form) forms.push_back(form);
    }
    return t;
  }();
  return table;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// Single-syllable consonant-vowel-consonant verbs double their final consonant.
bool doubles_final(const std::string& w) {
  const std::size_t n = w.size();
  if (n < 3) return false;
  const char last = w[n - 1];
  if (is_vowel(last) || last == 'w' || last == 'x' || last == 'y') return false;
  if (!is_vowel(w[n - 2]) || is_vowel(w[n - 3])) return false;
  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  return groups == 1;
}

bool consonant_y(const std::string& w) {
  return w.size() >= 2 && w.back() == 'y' && !is_vowel(w[w.size() - 2]);
}

std::string third_person(const std::string& w) {
  if (w.ends_with("s") || w.ends_with("x") || w.ends_with("z") || w.ends_with("ch") ||
      w.ends_with("sh")) {
    return w + "es";
  }
  if (w.size() >= 2 && w.back() == 'o' && !is_vowel(w[w.size() - 2])) return w + "es";
  if (consonant_y(w)) return w.substr(0, w.size() - 1) + "ies";
  return w + "s";
}

std::string past_tense(const std::string& w) {
  if (w.back() == 'e') return w + "d";
  if (consonant_y(w)) return w.substr(0, w.size() - 1) + "ied";
  if (doubles_final(w)) return w + w.back() + "ed";
  return w + "ed";
}

std::string gerund(const std::string& w) {
  if (w.ends_with("ie")) return w.substr(0, w.size() - 2) + "ying";
  if (w.size() > 2 && w.back() == 'e' && !w.ends_with("ee") && !w.ends_with("ye") &&
      !w.ends_with("oe")) {
    return w.substr(0, w.size() - 1) + "ing";
  }
  if (doubles_final(w)) return w + w.back() + "ing";
  return w + "ing";
}

bool is_lower_alpha(const std::string& w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

} // namespace

std::set<std::string> inflect_verb(const std::string& lemma) {
  std::set<std::string> forms{lemma};
  if (lemma.empty()) return forms;
  const auto& table = irregular_verbs();
  if (auto it = table.find(lemma); it != table.end()) {
    forms.insert(it->second.begin(), it->second.end());
    return forms;
  }
  forms.insert(third_person(lemma));
  forms.insert(past_tense(lemma));
  forms.insert(gerund(lemma));
  return forms;
}

const std::vector<std::string>& slot_pronouns(SlotKind kind) {
  static const std::vector<std::string> possessive{"my", "your", "his", "her", "its", "our", "their"};
  static const std::vector<std::string> objective{"me", "you", "him", "her", "it", "us", "them"};
  return kind == SlotKind::possessive ? possessive : objective;
}

std::vector<SurfaceForm> expand_entry(const IdiomEntry& entry) {
  const auto key = entry.key();
  std::vector<std::string> verb_forms;
  if (entry.verb_index) {
    const auto f = inflect_verb(entry.canonical[*entry.verb_index]);
    verb_forms.assign(f.begin(), f.end());
  }
  std::vector<std::string> slot_forms;
  if (entry.slot_index) {
    slot_forms.push_back(entry.canonical[*entry.slot_index]);
    for (const auto& p : slot_pronouns(entry.slot_kind.value_or(SlotKind::possessive))) {
      if (p != slot_forms.front()) slot_forms.push_back(p);
    }
  }
  if (verb_forms.empty()) verb_forms.push_back("");
  if (slot_forms.empty()) slot_forms.push_back("");

  std::set<SurfaceForm> out;
  for (const auto& v : verb_forms) {
    for (const auto& s : slot_forms) {
      SurfaceForm form{entry.canonical, key, 0};
      if (entry.verb_index) form.tokens[*entry.verb_index] = v;
      if (entry.slot_index) form.tokens[*entry.slot_index] = s;
      out.insert(std::move(form));
    }
  }
  return {out.begin(), out.end()};
}

IdiomEntry make_entry(std::string_view canonical, std::string_view definition,
                      std::optional<std::size_t> verb_index,
                      std::optional<std::size_t> slot_index, std::optional<SlotKind> slot_kind) {
  IdiomEntry e;
  e.canonical = tokenize(canonical);
  e.definition = tokenize(definition);
  if (e.canonical.empty()) throw Error("idiom with empty canonical form");
  const auto key = e.key();
  if (verb_index) {
    if (*verb_index >= e.canonical.size()) {
      throw Error("verb_index " + std::to_string(*verb_index) + " out of range for '" + key + "'");
    }
    if (!is_lower_alpha(e.canonical[*verb_index])) {
      throw Error("verb token '" + e.canonical[*verb_index] + "' in '" + key + "' is not alphabetic");
    }
  }
  if (slot_index) {
    if (*slot_index >= e.canonical.size()) {
      throw Error("slot_index " + std::to_string(*slot_index) + " out of range for '" + key + "'");
    }
    if (verb_index && *verb_index == *slot_index) {
      throw Error("verb_index and slot_index coincide in '" + key + "'");
    }
    if (!slot_kind) {
      const auto& tok = e.canonical[*slot_index];
      if (tok == "one's" || tok == "someone's") {
        slot_kind = SlotKind::possessive;
      } else if (tok == "someone") {
        slot_kind = SlotKind::objective;
      } else {
        throw Error("cannot infer slot kind for token '" + tok + "' in '" + key + "'");
      }
    }
    e.slot_kind = slot_kind;
  }
  e.verb_index = verb_index;
  e.slot_index = slot_index;
  e.variants = expand_entry(e);
  return e;
}

namespace {

std::optional<std::size_t> optional_index(const nlohmann::json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 0) {
    throw Error("lexicon line " + std::to_string(line) + ": " + key + " must be a nonnegative integer");
  }
  return static_cast<std::size_t>(j[key].get<long long>());
}

} // namespace

Lexicon parse_lexicon(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto where = "lexicon line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(where + "malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("canonical") || !j["canonical"].is_string() ||
        !j.contains("definition") || !j["definition"].is_string()) {
      throw Error(where + "canonical and definition strings are required");
    }
    std::optional<SlotKind> kind;
    if (j.contains("slot_kind") && !j["slot_kind"].is_null()) {
      const auto k = j["slot_kind"].get<std::string>();
      if (k == "possessive") {
        kind = SlotKind::possessive;
      } else if (k == "objective") {
        kind = SlotKind::objective;
      } else {
        throw Error(where + "unknown slot_kind '" + k + "'");
      }
    }
    IdiomEntry entry;
    try {
      entry = make_entry(j["canonical"].get<std::string>(), j["definition"].get<std::string>(),
                         optional_index(j, "verb_index", line_no),
                         optional_index(j, "slot_index", line_no), kind);
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
    if (j.contains("variants")) {
      std::set<SurfaceForm> forms{SurfaceForm{entry.canonical, entry.key(), 0}};
      for (const auto& v : j["variants"]) {
        auto toks = tokenize(v.get<std::string>());
        if (toks.empty()) throw Error(where + "empty variant");
        forms.insert(SurfaceForm{std::move(toks), entry.key(), 0});
      }
      entry.variants.assign(forms.begin(), forms.end());
    }
    if (j.contains("literality") && j["literality"].is_number()) {
      entry.literality = j["literality"].get<double>();
    }
    try {
      lex.add(std::move(entry));
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
  }
  lex.check_collisions();
  return lex;
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon file " + path);
  return parse_lexicon(in);
}

void save_lexicon(const Lexicon& lexicon, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write lexicon file " + path);
  for (const auto& [key, e] : lexicon) {
    nlohmann::ordered_json j;
    j["canonical"] = key;
    j["definition"] = join(e.definition, " ");
    if (e.verb_index) j["verb_index"] = *e.verb_index;
    if (e.slot_index) {
      j["slot_index"] = *e.slot_index;
      j["slot_kind"] = e.slot_kind == SlotKind::objective ? "objective" : "possessive";
    }
    auto variants = nlohmann::ordered_json::array();
    for (const auto& v : e.variants) variants.push_back(v.text());
    j["variants"] = variants;
    if (e.literality) j["literality"] = *e.literality;
    out << j.dump() << '\n';
  }
}

Lexicon prune_variants(const Lexicon& lexicon, const GroupCounts& counts, std::uint64_t min_count) {
  Lexicon out;
  for (const auto& [key, e] : lexicon) {
    IdiomEntry kept = e;
    kept.variants.clear();
    for (auto v : e.variants) {
      v.corpus_count = counts.surface_total(v.text());
      if (min_count == 0 || v.corpus_count > min_count || v.tokens == e.canonical) {
        kept.variants.push_back(std::move(v));
      }
    }
    out.add(std::move(kept));
  }
  return out;
}

std::string idiom_token(const std::string& canonical_key) {
  std::string tok = "__idiom__";
  for (char c : canonical_key) tok += (c == ' ' ? '_' : c);
  return tok;
}

std::string idiom_token(const IdiomEntry& entry) {
  return idiom_token(entry.key());
}

double literality_score(const IdiomEntry& entry, const EmbeddingSpace& space,
                        const Stopwords& stopwords) {
  const auto tok = idiom_token(entry);
  const auto idiom = space.find(tok);
  if (!idiom) throw Error("idiom token " + tok + " not in embedding space");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& w : entry.canonical) {
    if (stopwords.count(w)) continue;
    const auto idx = space.find(w);
    if (!idx) continue;
    sum += cosine(space.row(*idiom), space.row(*idx));
    ++n;
  }
  if (n == 0) throw Error("no in-vocabulary content constituent for '" + entry.key() + "'");
  return sum / static_cast<double>(n);
}

LiteralityFilterResult filter_literal(const Lexicon& lexicon, const EmbeddingSpace& space,
                                      double threshold, const Stopwords& stopwords) {
  LiteralityFilterResult result;
  for (const auto& [key, e] : lexicon) {
    const double score = literality_score(e, space, stopwords);
    const bool removed = score > threshold;
    result.report.push_back({key, score, removed});
    if (!removed) {
      IdiomEntry kept = e;
      kept.literality = score;
      result.kept.add(std::move(kept));
    }
  }
  return result;
}

} // namespace figlex
