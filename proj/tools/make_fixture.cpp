// make_fixture: writes the small synthetic corpus shipped in data/fixture.
//
// Posts are drawn from six topics, each with its own word list and affect
// profile. Idioms are attached to topics and each group has its own idiom
// preferences, so the fixture carries real (if tiny) group differences in
// usage, association and affect. Output is a pure function of the seed.
//
//   make_fixture <out-dir> [seed]

#include "figlex/common.hpp"
#include "figlex/lexicon.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct Topic {
  const char* name;
  double v, a, d;  // affect centre of the topic's words
  std::vector<std::string> words;
};

struct IdiomSpec {
  const char* canonical;
  const char* definition;
  int verb_index;   // -1: none
  int slot_index;   // -1: none
  std::size_t topic;
  double weight_f;  // relative preference of each group
  double weight_m;
};

std::vector<Topic> topics() {
  return {
      {"celebrate", 0.86, 0.62, 0.66,
       {"party", "birthday", "cake", "friends", "laugh", "dance", "music", "gift", "smile", "cheer",
        "happy", "wonderful", "fun", "holiday", "wedding", "song", "joy", "celebrate", "great", "love",
        "festival", "bright", "sunny", "game", "win", "hug", "treat", "sweet", "glad", "pride", "eyes", "fight", "cloud"}},
      {"conflict", 0.18, 0.80, 0.62,
       {"argument", "angry", "shout", "quarrel", "enemy", "attack", "rage", "insult", "blame", "scold",
        "yell", "furious", "rival", "threat", "punch", "conflict", "hostile", "battle", "defend", "revenge",
        "bitter", "hate", "provoke", "stubborn", "rude", "annoyed", "complain", "demand", "refuse", "argue"}},
      {"loss", 0.14, 0.30, 0.24,
       {"cry", "lonely", "grief", "funeral", "miss", "tears", "sad", "lost", "sorrow", "regret",
        "hurt", "broken", "empty", "alone", "mourn", "pain", "sorry", "weak", "tired", "quiet",
        "gloomy", "hopeless", "weep", "goodbye", "apology", "shame", "humble", "forgive", "proud", "heart", "death"}},
      {"work", 0.55, 0.42, 0.72,
       {"office", "meeting", "project", "deadline", "manager", "salary", "contract", "client", "plan", "budget",
        "report", "team", "career", "schedule", "task", "profit", "market", "deal", "invest", "money",
        "price", "expensive", "cost", "pay", "trade", "road", "travel", "drive", "nine", "point"}},
      {"home", 0.72, 0.20, 0.52,
       {"kitchen", "garden", "tea", "blanket", "sofa", "cook", "bake", "dinner", "beans", "soup",
        "ice", "window", "warm", "cozy", "relax", "nap", "book", "cat", "dog", "bed",
        "rest", "calm", "peaceful", "clean", "fresh", "bread", "milk", "coffee", "chair", "arm", "feet", "cold", "skin"}},
      {"danger", 0.15, 0.76, 0.20,
       {"scared", "afraid", "panic", "danger", "nervous", "terror", "storm", "dark", "scream", "risk",
        "escape", "hide", "warning", "accident", "emergency", "worried", "anxious", "threatening", "fear", "trap",
        "helpless", "trembling", "crash", "fire", "ghost", "alarm", "frightened", "shaking", "run", "leg", "bullet"}},
  };
}

// Constituents such as "fight", "pride" or "beans" occur literally in a topic
// other than the idiom's own. "hit the road" is the exception: it shares a
// topic with "road" and "travel", so it behaves like a literal phrase.
std::vector<IdiomSpec> idioms() {
  return {
      {"pick a fight", "start an argument or quarrel with someone on purpose", 0, -1, 1, 0.6, 1.8},
      {"lose one's temper", "become suddenly angry and shout", 0, 1, 1, 0.7, 1.6},
      {"add fuel to the fire", "make an angry conflict worse", 0, -1, 1, 1.0, 1.0},
      {"swallow one's pride", "humble yourself and forgive or apologize despite shame", 0, 1, 2, 1.8, 0.7},
      {"cry one's eyes out", "weep with sorrow and tears for a long time", 0, 1, 2, 1.9, 0.6},
      {"down in the dumps", "sad gloomy and hopeless", -1, -1, 2, 1.4, 0.9},
      {"bite the bullet", "accept a painful cost and pay it", 0, -1, 3, 0.7, 1.6},
      {"hit the road", "travel or drive away on the road", 0, -1, 3, 1.0, 1.1},
      {"cost an arm and a leg", "expensive and a high price to pay", 0, -1, 3, 1.0, 1.2},
      {"spill the beans", "tell friends the secret plan too early", 0, -1, 0, 1.2, 0.9},
      {"break the ice", "make friends relax and laugh at a party", 0, -1, 0, 1.3, 1.0},
      {"on cloud nine", "happy and full of joy", -1, -1, 0, 1.3, 0.8},
      {"scare someone to death", "make someone terribly afraid and frightened", 0, 1, 5, 1.5, 0.8},
      {"jump out of one's skin", "be suddenly frightened and scared", 0, 3, 5, 1.6, 0.7},
      {"get cold feet", "become nervous and afraid before a risk", 0, -1, 5, 1.4, 0.9},
      {"walk on eggshells", "be careful and nervous to avoid conflict", 0, -1, 5, 1.2, 0.9},
  };
}

const std::vector<std::string> kFiller{"the", "a", "i", "to", "and", "it", "was", "my", "we", "so",
                                        "of", "in", "that", "this", "is", "at", "with", "for", "just", "really"};

// Topic preferences: the second group leans to work and conflict,
// the first to home and loss.
constexpr std::array<double, 6> kTopicF{1.0, 0.8, 1.3, 0.8, 1.3, 1.2};
constexpr std::array<double, 6> kTopicM{1.0, 1.3, 0.8, 1.3, 0.8, 1.0};

template <class W>
std::size_t pick_weighted(figlex::Rng& rng, const W& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform01() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

std::string two_decimals(double x) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_fixture <out-dir> [seed]\n";
    return 2;
  }
  const std::filesystem::path out(argv[1]);
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 20240611;
  std::filesystem::create_directories(out);
  figlex::Rng rng(seed);

  const auto tops = topics();
  const auto specs = idioms();

  std::vector<figlex::IdiomEntry> entries;
  {
    std::ofstream lex(out / "lexicon.jsonl");
    for (const auto& s : specs) {
      nlohmann::ordered_json j;
      j["canonical"] = s.canonical;
      j["definition"] = s.definition;
      if (s.verb_index >= 0) j["verb_index"] = s.verb_index;
      if (s.slot_index >= 0) j["slot_index"] = s.slot_index;
      lex << j.dump() << '\n';
      entries.push_back(figlex::make_entry(
          s.canonical, s.definition,
          s.verb_index >= 0 ? std::optional<std::size_t>(s.verb_index) : std::nullopt,
          s.slot_index >= 0 ? std::optional<std::size_t>(s.slot_index) : std::nullopt));
    }
  }

  {
    // Every topic word gets a rating near its topic's centre.
    std::ofstream vad(out / "vad.csv");
    vad << "word,valence,arousal,dominance\n";
    std::vector<std::pair<std::string, std::array<double, 3>>> rows;
    for (const auto& t : tops) {
      for (const auto& w : t.words) {
        rows.push_back({w, {clamp01(t.v + 0.07 * rng.normal()), clamp01(t.a + 0.07 * rng.normal()),
                            clamp01(t.d + 0.07 * rng.normal())}});
      }
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [w, r] : rows) {
      vad << w << ',' << two_decimals(r[0]) << ',' << two_decimals(r[1]) << ',' << two_decimals(r[2]) << '\n';
    }
  }

  {
    std::ofstream corpus(out / "corpus.jsonl");
    const std::size_t per_group = 1000;
    for (std::size_t g = 0; g < 2; ++g) {
      const char* label = g == 0 ? "F" : "M";
      const auto& topic_w = g == 0 ? kTopicF : kTopicM;
      for (std::size_t i = 0; i < per_group; ++i) {
        const std::size_t t = pick_weighted(rng, topic_w);
        const std::size_t len = 10 + rng.uniform_index(14);
        std::vector<std::string> words;
        for (std::size_t k = 0; k < len; ++k) {
          const double u = rng.uniform01();
          if (u < 0.3) {
            words.push_back(kFiller[rng.uniform_index(kFiller.size())]);
          } else if (u < 0.9) {
            words.push_back(tops[t].words[rng.uniform_index(tops[t].words.size())]);
          } else {
            const auto& other = tops[rng.uniform_index(tops.size())];
            words.push_back(other.words[rng.uniform_index(other.words.size())]);
          }
        }
        if (rng.uniform01() < 0.45) {
          std::vector<double> w(specs.size(), 0.0);
          for (std::size_t k = 0; k < specs.size(); ++k) {
            if (specs[k].topic == t) w[k] = g == 0 ? specs[k].weight_f : specs[k].weight_m;
          }
          if (std::any_of(w.begin(), w.end(), [](double x) { return x > 0; })) {
            const auto& e = entries[pick_weighted(rng, w)];
            // Canonical form half of the time, otherwise any variant.
            const auto& form = rng.uniform01() < 0.5 ? e.canonical
                                                     : e.variants[rng.uniform_index(e.variants.size())].tokens;
            const std::size_t at = rng.uniform_index(words.size() + 1);
            words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), form.begin(), form.end());
          }
        }
        std::string text;
        for (const auto& w : words) {
          if (!text.empty()) text += ' ';
          text += w;
        }
        nlohmann::ordered_json j;
        j["author_id"] = std::string(1, static_cast<char>(g == 0 ? 'f' : 'm')) + std::to_string(i % 400);
        j["group"] = label;
        j["subreddit"] = tops[t].name;
        j["text"] = text;
        corpus << j.dump() << '\n';
      }
    }
  }

  {
    std::ofstream conf(out / "figlex.conf");
    conf << "# Shipped fixture run. Paths are relative to this file.\n"
            "corpus = corpus.jsonl\n"
            "lexicon = lexicon.jsonl\n"
            "vad_lexicon = vad.csv\n"
            "groups = F,M\n"
            "seed = 7\n"
            "min_count = 5\n"
            "# Cosines in a corpus this small run high; the paper-scale default is 0.25.\n"
            "literality_threshold = 0.75\n"
            "rbo_depth = 20\n"
            "n_splits = 500\n"
            "dim = 32\n"
            "window = 5\n"
            "negatives = 5\n"
            "train_min_count = 5\n"
            "epochs = 20\n";
  }
  return 0;
}
