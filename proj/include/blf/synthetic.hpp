#pragma once
// Seeded synthetic world for end-to-end runs: agents take noisy gradient
// steps toward planted wells, post belief statements whose proposition mix
// depends on their position, and retweet accounts of their own side. The
// generator emits every input the pipeline reads (tweets, parses, bot
// scores, statement embeddings) plus the planted truth.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "core.hpp"
#include "corpus.hpp"

namespace blf {

struct SyntheticParams {
  int agents = 500;
  int windows = 12;
  int statements_per_window = 10;
  int propositions = 12;
  double kappa = 2.0;  // concentration of a corner well's proposition mix
  // well 0 mixes all propositions evenly; wells 1..4 sit at 0, 90, 180 and
  // 270 degrees of the proposition ring
  std::array<double, 5> well_weight{0.5, 0.15, 0.1, 0.15, 0.1};
  std::array<Stance, 5> well_stance{Stance::Believer, Stance::Believer, Stance::Believer, Stance::Skeptic,
                                    Stance::Skeptic};
  std::array<double, 5> switch_probability{0.01, 0.04, 0.09, 0.04, 0.09};
  double step = 0.7;  // fraction of the remaining way to the target well per window
  int embed_dim = 16;
  double embed_radius = 2.0;
  double embed_noise = 0.07;
  int retweets_per_agent = 6;
  double hub_share = 0.8;  // retweets going to the side's hub account
  int side_accounts = 5;
  int bots = 5;
  std::int64_t origin = 1578268800;  // 2020-01-06T00:00:00Z
  std::uint64_t seed = 20200106;
};

struct SyntheticTruth {
  std::vector<std::string> agents;
  std::vector<Stance> stance;                  // per agent
  std::vector<std::vector<int>> well;          // agent x window target well
  std::map<std::string, int> proposition_of;   // statement id -> proposition
};

struct SyntheticWorld {
  std::vector<Tweet> tweets;
  std::vector<DepSentence> parses;
  EmbeddingFile embeddings;
  std::vector<BotScore> bot_scores;
  UserStances gold;
  std::vector<std::string> believer_seeds, skeptic_seeds;
  SyntheticTruth truth;
};

namespace synth_detail {

struct Template {
  const char* subject;
  const char* verb_form;
  const char* verb_lemma;
  const char* object;
};

// one sentence pattern per proposition: SUBJ VERB climate OBJ .
inline const std::array<Template, 12>& templates() {
  static const std::array<Template, 12> t{{{"Scientists", "confirm", "confirm", "warming"},
                                           {"Emissions", "drive", "drive", "change"},
                                           {"Models", "predict", "predict", "disasters"},
                                           {"Activists", "exaggerate", "exaggerate", "risks"},
                                           {"Politicians", "ignore", "ignore", "policy"},
                                           {"Farmers", "fear", "fear", "impacts"},
                                           {"Journalists", "hype", "hype", "coverage"},
                                           {"Glaciers", "reveal", "reveal", "collapse"},
                                           {"Oceans", "absorb", "absorb", "heat"},
                                           {"Economists", "doubt", "doubt", "costs"},
                                           {"Skeptics", "dispute", "dispute", "science"},
                                           {"Governments", "fund", "fund", "action"}}};
  return t;
}

inline DepSentence sentence_for(const std::string& tweet_id, int proposition) {
  const auto& t = templates()[static_cast<std::size_t>(proposition) % templates().size()];
  DepSentence s;
  s.tweet_id = tweet_id;
  s.tokens = {{1, t.subject, text::lower(t.subject), "NOUN", 2, "nsubj", "Number=Plur", true},
              {2, t.verb_form, t.verb_lemma, "VERB", 0, "root", "_", true},
              {3, "climate", "climate", "NOUN", 4, "compound", "Number=Sing", true},
              {4, t.object, t.object, "NOUN", 2, "obj", "_", false},
              {5, ".", ".", "PUNCT", 2, "punct", "_", true}};
  return s;
}

inline std::string sentence_text(int proposition) {
  const auto& t = templates()[static_cast<std::size_t>(proposition) % templates().size()];
  return std::string(t.subject) + " " + t.verb_form + " climate " + t.object + ".";
}

inline std::string padded(const char* prefix, long v, int width) {
  auto s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return prefix + s;
}

}  // namespace synth_detail

/// Proposition mix of each well over the proposition ring.
inline std::vector<std::vector<double>> well_mixes(const SyntheticParams& p) {
  const double pi = std::acos(-1.0);
  std::vector<std::vector<double>> mix(5, std::vector<double>(static_cast<std::size_t>(p.propositions)));
  for (int w = 0; w < 5; ++w) {
    double z = 0.0;
    for (int j = 0; j < p.propositions; ++j) {
      const double angle = 2 * pi * j / p.propositions;
      const double v = w == 0 ? 1.0 : std::exp(p.kappa * std::cos(angle - (w - 1) * pi / 2));
      mix[static_cast<std::size_t>(w)][static_cast<std::size_t>(j)] = v;
      z += v;
    }
    for (auto& v : mix[static_cast<std::size_t>(w)]) v /= z;
  }
  return mix;
}

inline SyntheticWorld generate_world(const SyntheticParams& p) {
  if (p.agents < 1 || p.windows < 1 || p.statements_per_window < 1 || p.propositions < 3)
    throw ConfigError("synthetic world needs agents, windows, statements and >= 3 propositions");
  SyntheticWorld world;
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, p.embed_noise);
  const auto mixes = well_mixes(p);
  const std::int64_t week = 7 * 86400;
  const double pi = std::acos(-1.0);

  // wells are dealt by quota, not drawn, so the planted layout does not
  // wobble with the seed
  std::vector<int> initial_well;
  {
    double total = 0.0;
    for (double w : p.well_weight) total += w;
    for (int w = 0; w < 5; ++w) {
      const auto quota = std::lround(p.well_weight[static_cast<std::size_t>(w)] / total * p.agents);
      initial_well.insert(initial_well.end(), static_cast<std::size_t>(quota), w);
    }
    initial_well.resize(static_cast<std::size_t>(p.agents), 0);
    std::shuffle(initial_well.begin(), initial_well.end(), rng);
  }
  long tweet_no = 0;
  const auto next_id = [&] { return synth_detail::padded("t", ++tweet_no, 7); };

  // proposition centroids on a ring in the first two embedding dimensions
  std::vector<std::vector<double>> centroid(static_cast<std::size_t>(p.propositions),
                                            std::vector<double>(static_cast<std::size_t>(p.embed_dim), 0.0));
  for (int j = 0; j < p.propositions; ++j) {
    centroid[static_cast<std::size_t>(j)][0] = p.embed_radius * std::cos(2 * pi * j / p.propositions);
    centroid[static_cast<std::size_t>(j)][1] = p.embed_radius * std::sin(2 * pi * j / p.propositions);
  }
  world.embeddings.dim = p.embed_dim;

  for (int s = 0; s < p.side_accounts; ++s) {
    world.believer_seeds.push_back(synth_detail::padded("b_acct", s, 2));
    world.skeptic_seeds.push_back(synth_detail::padded("s_acct", s, 2));
  }

  for (int a = 0; a < p.agents; ++a) {
    const auto user = synth_detail::padded("u", a, 4);
    int target = initial_well[static_cast<std::size_t>(a)];
    const Stance stance = p.well_stance[static_cast<std::size_t>(target)];
    world.truth.agents.push_back(user);
    world.truth.stance.push_back(stance);
    world.truth.well.emplace_back();
    world.gold[user] = stance;
    world.bot_scores.push_back({user, 0.05 + 0.3 * unit(rng)});

    std::array<double, 5> omega{};
    omega[static_cast<std::size_t>(target)] = 1.0;
    for (int t = 0; t < p.windows; ++t) {
      if (t > 0 && unit(rng) < p.switch_probability[static_cast<std::size_t>(target)]) {
        std::vector<int> options;
        for (int w = 0; w < 5; ++w)
          if (w != target && p.well_stance[static_cast<std::size_t>(w)] == stance) options.push_back(w);
        if (!options.empty())
          target = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
      }
      if (t > 0)
        for (int w = 0; w < 5; ++w)
          omega[static_cast<std::size_t>(w)] += p.step * ((w == target ? 1.0 : 0.0) - omega[static_cast<std::size_t>(w)]);
      world.truth.well.back().push_back(target);

      std::vector<double> q(static_cast<std::size_t>(p.propositions), 0.0);
      for (int w = 0; w < 5; ++w)
        for (int j = 0; j < p.propositions; ++j)
          q[static_cast<std::size_t>(j)] += omega[static_cast<std::size_t>(w)] * mixes[static_cast<std::size_t>(w)][static_cast<std::size_t>(j)];
      std::discrete_distribution<int> pick_prop(q.begin(), q.end());
      const std::int64_t start = p.origin + t * week;
      for (int k = 0; k < p.statements_per_window; ++k) {
        // the first statement opens the window so the agent has full history
        const std::int64_t ts =
            k == 0 && t == 0 ? start : start + std::uniform_int_distribution<std::int64_t>(1, week - 1)(rng);
        const int prop = pick_prop(rng);
        const auto id = next_id();
        world.tweets.push_back({id, user, ts, synth_detail::sentence_text(prop), std::nullopt, "en"});
        world.parses.push_back(synth_detail::sentence_for(id, prop));
        const auto sid = id + ":0:0";
        world.truth.proposition_of[sid] = prop;
        auto v = centroid[static_cast<std::size_t>(prop)];
        for (auto& x : v) x += noise(rng);
        world.embeddings.ids.push_back(sid);
        world.embeddings.vectors.push_back(std::move(v));
      }
    }
    const auto& side = stance == Stance::Believer ? world.believer_seeds : world.skeptic_seeds;
    for (int r = 0; r < p.retweets_per_agent; ++r) {
      const std::string acct =
          unit(rng) < p.hub_share ? side.front()
                                  : side[std::uniform_int_distribution<std::size_t>(0, side.size() - 1)(rng)];
      const std::int64_t ts =
          p.origin + std::uniform_int_distribution<std::int64_t>(0, p.windows * week - 1)(rng);
      world.tweets.push_back({next_id(), user, ts, "RT @" + acct + ": the climate thread", acct, "en"});
    }
  }

  // bots retweet both sides indiscriminately and must be filtered out
  for (int b = 0; b < p.bots; ++b) {
    const auto user = synth_detail::padded("bot", b, 2);
    world.bot_scores.push_back({user, 0.9 + 0.05 * unit(rng)});
    for (int r = 0; r < 120; ++r) {
      const auto& side = r % 2 ? world.believer_seeds : world.skeptic_seeds;
      const auto& acct = side[static_cast<std::size_t>(r) % side.size()];
      const std::int64_t ts =
          p.origin + std::uniform_int_distribution<std::int64_t>(0, p.windows * week - 1)(rng);
      world.tweets.push_back({next_id(), user, ts, "RT @" + acct + ": climate", acct, "en"});
    }
  }
  return world;
}

struct SyntheticFiles {
  std::string tweets = "tweets.jsonl";
  std::string parses = "parses.conllu";
  std::string embeddings = "embeddings.tsv";
  std::string bot_scores = "bot_scores.csv";
  std::string gold = "gold_labels.csv";
  std::string config = "synthetic.ini";
};

/// Writes the world's input files and a matching run config into `dir`.
inline void write_world(const SyntheticWorld& w, const std::filesystem::path& dir, const SyntheticFiles& f = {}) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open(f.tweets);
    for (const auto& t : w.tweets) out << to_json_line(t) << '\n';
  }
  {
    auto out = open(f.parses);
    for (const auto& s : w.parses) write_conllu(out, s);
  }
  {
    auto out = open(f.embeddings);
    write_embeddings(out, w.embeddings);
  }
  {
    auto out = open(f.bot_scores);
    out << "user_id,score\n";
    for (const auto& b : w.bot_scores) out << b.user_id << ',' << format_double(b.score) << '\n';
  }
  {
    auto out = open(f.gold);
    out << "user_id,stance\n";
    for (const auto& [u, s] : w.gold) out << u << ',' << to_string(s) << '\n';
  }
  {
    auto out = open(f.config);
    out << "# synthetic world\n"
        << "[input]\n"
        << "tweets = " << f.tweets << '\n'
        << "parses = " << f.parses << '\n'
        << "embeddings = " << f.embeddings << '\n'
        << "bot_scores = " << f.bot_scores << '\n'
        << "gold_labels = " << f.gold << '\n'
        << "believer_seeds = " << text::join(w.believer_seeds, ",") << '\n'
        << "skeptic_seeds = " << text::join(w.skeptic_seeds, ",") << '\n'
        << "\n[pairs]\n"
        << "homogeneous_per_stance = 2000\n"
        << "heterogeneous = 6000\n";
  }
}

}  // namespace blf
