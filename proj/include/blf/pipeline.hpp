#pragma once
// File-level pipeline stages. Each stage reads its inputs (configured files
// and upstream artifacts in the run directory), writes its outputs there and
// records them in the run manifest; a stage whose manifest entry still
// matches is skipped.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "belief_clusters.hpp"
#include "config.hpp"
#include "core.hpp"
#include "corpus.hpp"
#include "hypotheses.hpp"
#include "landscape.hpp"
#include "manifest.hpp"
#include "pair_sampler.hpp"
#include "render.hpp"
#include "stance.hpp"
#include "subject_catalog.hpp"
#include "svo.hpp"
#include "trajectory.hpp"

namespace blf {

namespace fs = std::filesystem;

/// An upstream artifact is missing; the message names the stage to run.
struct MissingArtifact : ConfigError {
  MissingArtifact(const std::string& file, const std::string& stage)
      : ConfigError("missing " + file + "; run the '" + stage + "' stage first"), stage_name(stage) {}
  std::string stage_name;
};

namespace pipeline_io {

inline std::ofstream create(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

inline std::ifstream open(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot read " + p.string());
  return in;
}

inline void write_json(const fs::path& p, const nlohmann::json& j) { create(p) << j.dump(2) << '\n'; }

inline nlohmann::json read_json(const fs::path& p) {
  auto j = nlohmann::json::parse(read_file(p), nullptr, false);
  if (j.is_discarded()) throw DataError("malformed JSON in " + p.string());
  return j;
}

inline std::vector<Tweet> read_corpus(const fs::path& p) {
  CorpusFilter all;
  all.lang.clear();
  all.terms.clear();
  return load_corpus(p.string(), all).tweets;
}

inline void write_statements(const fs::path& p, const std::vector<BeliefStatement>& ss) {
  auto out = create(p);
  for (const auto& s : ss) out << to_json(s).dump() << '\n';
}

inline std::vector<BeliefStatement> read_statements(const fs::path& p) {
  auto in = open(p);
  std::vector<BeliefStatement> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError(p.string() + ":" + std::to_string(line_no) + ": malformed statement");
    try {
      out.push_back(statement_from_json(j));
    } catch (const nlohmann::json::exception&) {
      throw DataError(p.string() + ":" + std::to_string(line_no) + ": incomplete statement");
    }
  }
  return out;
}

struct StanceRow {
  Stance stance = Stance::Unclustered;
  int cluster = kNoise;
};

inline void write_user_stances(const fs::path& p, const std::map<std::string, StanceRow>& rows) {
  auto out = create(p);
  out << "user_id,stance,cluster_id\n";
  for (const auto& [u, r] : rows)
    out << u << ',' << to_string(r.stance) << ',' << (r.cluster == kNoise ? std::string("NOISE") : std::to_string(r.cluster))
        << '\n';
}

inline UserStances read_user_stances(const fs::path& p) {
  auto in = open(p);
  UserStances out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const auto cols = text::split(line, ',');
    if (cols.size() != 3) throw DataError(p.string() + ":" + std::to_string(line_no) + ": expected 3 columns");
    const auto s = parse_stance(cols[1]);
    if (!s) throw DataError(p.string() + ":" + std::to_string(line_no) + ": bad stance '" + cols[1] + "'");
    out[cols[0]] = *s;
  }
  return out;
}

inline std::string statement_text(const BeliefStatement& s) {
  return s.subject + " " + (s.negated ? "not " : "") + s.verb + (s.object.empty() ? "" : " " + s.object);
}

}  // namespace pipeline_io

class Pipeline {
 public:
  Pipeline(Config cfg, fs::path dir, std::uint64_t seed, std::ostream* log = nullptr, bool force = false)
      : cfg_(std::move(cfg)), dir_(std::move(dir)), seed_(seed), log_(log), force_(force),
        manifest_((fs::create_directories(dir_), dir_)) {
    config_hash_ = sha256_hex(cfg_.canonical());
  }

  static const std::vector<std::string>& stages() {
    static const std::vector<std::string> s = {"ingest",  "extract",      "stance",    "catalog",  "pairs",
                                               "cluster", "trajectories", "landscape", "evaluate", "render"};
    return s;
  }

  /// Stages `pipeline` runs; pairs feed the secondary component and are
  /// produced on request only.
  static const std::vector<std::string>& pipeline_stages() {
    static const std::vector<std::string> s = {"ingest",       "extract",   "stance",   "catalog", "cluster",
                                               "trajectories", "landscape", "evaluate", "render"};
    return s;
  }

  void run(const std::string& stage) {
    if (stage == "ingest") ingest();
    else if (stage == "extract") extract();
    else if (stage == "stance") stance();
    else if (stage == "catalog") catalog();
    else if (stage == "pairs") pairs();
    else if (stage == "cluster") cluster();
    else if (stage == "trajectories") trajectories();
    else if (stage == "landscape") landscape();
    else if (stage == "evaluate") evaluate();
    else if (stage == "render") render();
    else throw ConfigError("unknown stage '" + stage + "'");
  }

  void run_all() {
    for (const auto& s : pipeline_stages()) run(s);
  }

  const fs::path& dir() const { return dir_; }
  const Warnings& warnings() const { return warnings_; }
  /// Stages skipped because the manifest showed them up to date.
  const std::vector<std::string>& skipped() const { return skipped_; }

  /// Window-size labels of the configured half-life sweep ("7", "14", ...).
  std::vector<std::string> window_labels() const {
    std::vector<std::string> out;
    const auto days = static_cast<double>(cfg_.integer("trajectories.window_days"));
    for (double h : halflives()) out.push_back(format_double(h * days));
    return out;
  }

 private:
  Config cfg_;
  fs::path dir_;
  std::uint64_t seed_;
  std::ostream* log_;
  bool force_;
  Manifest manifest_;
  std::string config_hash_;
  Warnings warnings_;
  std::vector<std::string> skipped_;

  fs::path at(const std::string& name) const { return dir_ / name; }

  std::string artifact(const std::string& name, const std::string& producer) const {
    const auto p = at(name);
    if (!fs::exists(p)) throw MissingArtifact(name, producer);
    return p.string();
  }

  std::string input(const std::string& key) const {
    const auto p = cfg_.require_path(key);
    if (!fs::exists(p)) throw DataError("input file for '" + key + "' not found: " + p);
    return p;
  }

  std::optional<std::string> optional_input(const std::string& key) const {
    if (!cfg_.has(key)) return std::nullopt;
    return input(key);
  }

  std::uint64_t stage_seed(const std::string& stage) const {
    const auto& s = stages();
    return derive_seed(seed_, static_cast<std::uint64_t>(std::find(s.begin(), s.end(), stage) - s.begin()));
  }

  bool fresh(const std::string& stage, const std::vector<std::string>& inputs) {
    if (!force_ && manifest_.up_to_date(stage, config_hash_, seed_, inputs)) {
      say(stage + ": up to date");
      skipped_.push_back(stage);
      return false;
    }
    return true;
  }

  void done(const std::string& stage, const std::vector<std::string>& inputs, const std::vector<std::string>& outputs,
            const std::string& summary, const Warnings& w = {}) {
    manifest_.record(stage, config_hash_, seed_, inputs, outputs);
    say(stage + ": " + summary);
    for (const auto& m : w.messages) say("  warning: " + m);
    warnings_.append(w);
  }

  void say(const std::string& line) const {
    if (log_) *log_ << line << '\n';
  }

  std::vector<double> halflives() const {
    auto hs = cfg_.reals("trajectories.halflives");
    if (hs.empty()) throw ConfigError("trajectories.halflives is empty");
    return hs;
  }

  // -------------------------------------------------------------------------

  void ingest() {
    const auto tweets = input("input.tweets");
    const std::vector<std::string> inputs{tweets};
    if (!fresh("ingest", inputs)) return;
    CorpusFilter f;
    f.lang = cfg_.str("ingest.lang");
    f.terms = cfg_.list("ingest.terms");
    if (cfg_.has("ingest.begin")) f.interval.begin = cfg_.integer("ingest.begin");
    if (cfg_.has("ingest.end")) f.interval.end = cfg_.integer("ingest.end");
    auto in = pipeline_io::open(tweets);
    auto out = pipeline_io::create(at("corpus.jsonl"));
    const auto c = load_corpus(in, f, [&](Tweet&& t) { out << to_json_line(t) << '\n'; });
    out.close();
    pipeline_io::write_json(at("ingest_summary.json"),
                            {{"total", c.total},
                             {"accepted", c.accepted},
                             {"malformed", c.malformed},
                             {"wrong_lang", c.wrong_lang},
                             {"no_term", c.no_term},
                             {"out_of_interval", c.out_of_interval},
                             {"duplicate_id", c.duplicate_id}});
    Warnings w;
    if (c.malformed) w.add(std::to_string(c.malformed) + " malformed records skipped");
    done("ingest", inputs, {"corpus.jsonl", "ingest_summary.json"},
         std::to_string(c.accepted) + " of " + std::to_string(c.total) + " tweets accepted", w);
  }

  void extract() {
    const auto corpus = artifact("corpus.jsonl", "ingest");
    const auto parses = input("input.parses");
    const std::vector<std::string> inputs{corpus, parses};
    if (!fresh("extract", inputs)) return;
    const auto tweets = pipeline_io::read_corpus(corpus);
    std::map<std::string, const Tweet*> by_id;
    for (const auto& t : tweets) by_id[t.tweet_id] = &t;
    const auto pl = load_parses(parses);
    const auto ex = extract_corpus(pl.sentences, by_id);
    pipeline_io::write_statements(at("statements.jsonl"), ex.statements);
    std::map<std::string, std::size_t> rejected;
    for (const auto& r : pl.rejected) ++rejected[r.rule];
    pipeline_io::write_json(at("extract_summary.json"), {{"parse_blocks", pl.total_blocks},
                                                         {"rejected_parses", rejected},
                                                         {"sentences", ex.sentences},
                                                         {"orphan_sentences", ex.orphan_sentences},
                                                         {"statements", ex.statements.size()},
                                                         {"failures", ex.diagnostics.counts}});
    Warnings w;
    if (!pl.rejected.empty()) w.add(std::to_string(pl.rejected.size()) + " malformed parses rejected");
    done("extract", inputs, {"statements.jsonl", "extract_summary.json"},
         std::to_string(ex.statements.size()) + " statements from " + std::to_string(ex.sentences) + " sentences", w);
  }

  void stance() {
    const auto corpus = artifact("corpus.jsonl", "ingest");
    std::vector<std::string> inputs{corpus};
    const auto bots = optional_input("input.bot_scores");
    const auto gold_path = optional_input("input.gold_labels");
    const auto imported = optional_input("input.user_clusters");
    for (const auto& o : {bots, gold_path, imported})
      if (o) inputs.push_back(*o);
    if (!fresh("stance", inputs)) return;
    Warnings w;

    auto tweets = pipeline_io::read_corpus(corpus);
    std::set<std::string> users;
    for (const auto& t : tweets) users.insert(t.user_id);
    BotPartition part;
    if (bots) {
      std::size_t malformed = 0;
      const auto scores = parse_bot_scores(load_two_column_csv(*bots), &malformed);
      if (malformed) w.add(std::to_string(malformed) + " malformed bot scores skipped");
      part = partition_bots(users, scores, cfg_.real("bots.threshold"), cfg_.boolean("bots.unscored_is_human"));
      w.append(part.warnings);
    } else {
      part.humans = users;
    }
    tweets.erase(std::remove_if(tweets.begin(), tweets.end(), [&](const Tweet& t) { return !part.is_human(t.user_id); }),
                 tweets.end());

    UserStances gold;
    if (gold_path) {
      std::size_t malformed = 0;
      gold = parse_gold_labels(load_two_column_csv(*gold_path), &malformed);
      if (malformed) w.add(std::to_string(malformed) + " malformed gold labels skipped");
    }

    UserClustering clusters;
    std::optional<AffiliationMatrix> matrix;
    AffiliationParams ap;
    ap.min_tweets = cfg_.integer("stance.min_tweets");
    ap.min_retweets = cfg_.integer("stance.min_retweets");
    ap.binary = cfg_.boolean("stance.binary");
    if (imported) {
      clusters = import_user_clusters(load_two_column_csv(*imported));
    } else {
      matrix = build_affiliation(tweets, ap);
      AffiliationClusterParams cp;
      cp.density.min_samples = static_cast<int>(cfg_.integer("stance.min_samples"));
      cp.density.min_cluster_size = static_cast<int>(cfg_.integer("stance.min_cluster_size"));
      cp.density.eps = cfg_.real("stance.eps");
      cp.density.eps_fraction = cfg_.real("stance.eps_fraction");
      clusters = cluster_affiliation(*matrix, cp);
    }
    w.append(clusters.warnings);

    NamingRule rule;
    const auto naming = cfg_.str("stance.naming");
    if (naming == "gold") {
      if (gold.empty()) throw ConfigError("stance.naming = gold needs input.gold_labels");
      rule.kind = NamingRule::Kind::Gold;
      rule.gold = gold;
    } else if (naming == "seeds") {
      rule.kind = NamingRule::Kind::Seeds;
      for (const auto& s : cfg_.list("input.believer_seeds")) rule.believer_seeds.insert(s);
      for (const auto& s : cfg_.list("input.skeptic_seeds")) rule.skeptic_seeds.insert(s);
      if (rule.believer_seeds.empty() || rule.skeptic_seeds.empty())
        throw ConfigError("stance.naming = seeds needs input.believer_seeds and input.skeptic_seeds");
      if (!matrix) matrix = build_affiliation(tweets, ap);
    } else {
      throw ConfigError("stance.naming must be 'seeds' or 'gold'");
    }
    const auto result = assign_stances(clusters, rule, matrix ? &*matrix : nullptr);
    w.append(result.warnings);

    std::map<std::string, pipeline_io::StanceRow> rows;
    for (const auto& u : part.humans) rows[u] = {};
    for (const auto& a : result.assignments) rows[a.user_id] = {a.stance, a.cluster_id};
    pipeline_io::write_user_stances(at("user_stances.csv"), rows);

    std::map<std::string, long> counts{{"believer", 0}, {"skeptic", 0}, {"unclustered", 0}};
    for (const auto& [u, r] : rows) ++counts[std::string(to_string(r.stance))];
    nlohmann::json summary{{"users", users.size()},
                           {"bots", part.bots.size()},
                           {"eligible", clusters.cluster_of.size()},
                           {"clusters", clusters.num_clusters},
                           {"stances", counts}};
    if (!gold.empty()) {
      nlohmann::json purity = nlohmann::json::object();
      for (const auto& [id, members] : members_by_cluster(clusters)) {
        const auto p = cluster_purity(members, gold);
        if (p) purity[std::to_string(id)] = *p;
      }
      summary["purity_by_cluster"] = purity;
    }
    pipeline_io::write_json(at("stance_summary.json"), summary);
    done("stance", inputs, {"user_stances.csv", "stance_summary.json"},
         std::to_string(counts["believer"]) + " believers, " + std::to_string(counts["skeptic"]) + " skeptics, " +
             std::to_string(counts["unclustered"]) + " unclustered",
         w);
  }

  void catalog() {
    const auto statements = artifact("statements.jsonl", "extract");
    const auto stances = artifact("user_stances.csv", "stance");
    std::vector<std::string> inputs{statements, stances};
    const auto alias_path = optional_input("input.aliases");
    if (alias_path) inputs.push_back(*alias_path);
    if (!fresh("catalog", inputs)) return;
    AliasTable aliases;
    if (alias_path)
      for (const auto& [a, c] : load_two_column_csv(*alias_path).rows) aliases[normalize_subject(a)] = normalize_subject(c);
    const auto ss = pipeline_io::read_statements(statements);
    const auto us = pipeline_io::read_user_stances(stances);
    const auto built = build_catalog(ss, us, aliases);
    const auto ranked = rank_subjects(built.entries);
    const auto top_k = cfg_.integer("catalog.top_k");
    if (top_k < 1) throw ConfigError("catalog.top_k must be >= 1");
    const auto focal = focal_set(ss, ranked, static_cast<std::size_t>(top_k), aliases);
    {
      auto out = pipeline_io::create(at("subjects.csv"));
      out << "position,key,canonical,count_believer,count_skeptic,rank_believer,rank_skeptic,mean_rank\n";
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& e = ranked[i];
        out << i + 1 << ",\"" << e.key << "\",\"" << e.canonical << "\"," << e.count_believer << ','
            << e.count_skeptic << ',' << e.rank_believer << ',' << e.rank_skeptic << ',' << format_double(e.mean_rank)
            << '\n';
      }
    }
    pipeline_io::write_statements(at("focal_statements.jsonl"), focal.statements);
    {
      auto out = pipeline_io::create(at("sentences.tsv"));
      for (const auto& s : focal.statements) out << s.statement_id << '\t' << pipeline_io::statement_text(s) << '\n';
    }
    pipeline_io::write_json(at("catalog_summary.json"), {{"subjects", ranked.size()},
                                                         {"excluded_sentinel", built.excluded_sentinel},
                                                         {"excluded_unclustered", built.excluded_unclustered},
                                                         {"focal_statements", focal.coverage},
                                                         {"coverage_fraction", focal.coverage_fraction},
                                                         {"focal_subjects", focal.subjects}});
    done("catalog", inputs, {"subjects.csv", "focal_statements.jsonl", "sentences.tsv", "catalog_summary.json"},
         std::to_string(focal.coverage) + " focal statements over " + std::to_string(focal.subjects.size()) +
             " subjects",
         focal.warnings);
  }

  std::vector<PoolItem> pool_for(const std::vector<BeliefStatement>& focal, const UserStances& us,
                                 const EmbeddingFile* emb, Warnings& w) const {
    std::map<std::string, std::size_t> index;
    if (emb) index = emb->index();
    std::vector<PoolItem> pool;
    std::size_t missing = 0;
    for (const auto& s : focal) {
      const auto st = us.find(s.user_id);
      if (st == us.end() || st->second == Stance::Unclustered) continue;
      PoolItem item{s.statement_id, st->second, {}};
      if (emb) {
        const auto it = index.find(s.statement_id);
        if (it == index.end()) { ++missing; continue; }
        item.vec = emb->vectors[it->second];
      }
      pool.push_back(std::move(item));
    }
    if (missing) w.add(std::to_string(missing) + " focal statements have no embedding");
    return pool;
  }

  void pairs() {
    const auto focal = artifact("focal_statements.jsonl", "catalog");
    const auto stances = artifact("user_stances.csv", "stance");
    std::vector<std::string> inputs{focal, stances};
    const auto strategy = cfg_.str("pairs.strategy");
    const auto emb_path = strategy == "random" ? optional_input("input.embeddings") : input("input.embeddings");
    if (emb_path) inputs.push_back(*emb_path);
    if (!fresh("pairs", inputs)) return;
    Warnings w;
    std::optional<EmbeddingFile> emb;
    if (emb_path) emb = read_embeddings(*emb_path);
    else w.add("no embeddings configured; base similarities are 0");
    const auto pool = pool_for(pipeline_io::read_statements(focal), pipeline_io::read_user_stances(stances),
                               emb ? &*emb : nullptr, w);
    const auto sim_name = cfg_.str("pairs.similarity");
    SimilarityStrategy sim;
    if (sim_name == "invert") sim = SimilarityStrategy::Invert;
    else if (sim_name == "min") sim = SimilarityStrategy::Min;
    else throw ConfigError("pairs.similarity must be 'invert' or 'min'");
    const auto seed = stage_seed("pairs");
    PairSample sample;
    if (strategy == "random") {
      RandomSampling p;
      p.cutoff = cfg_.real("pairs.cutoff");
      p.homogeneous_per_stance = static_cast<std::uint64_t>(cfg_.integer("pairs.homogeneous_per_stance"));
      p.heterogeneous = static_cast<std::uint64_t>(cfg_.integer("pairs.heterogeneous"));
      p.strategy = sim;
      p.seed = seed;
      sample = sample_random(pool, p);
    } else if (strategy == "knn") {
      KnnSampling p;
      p.k = static_cast<int>(cfg_.integer("pairs.knn_k"));
      p.homogeneous_per_stance = static_cast<std::uint64_t>(cfg_.integer("pairs.homogeneous_per_stance"));
      p.strategy = sim;
      p.seed = seed;
      sample = sample_knn(pool, p);
    } else if (strategy == "cluster") {
      Matrix rows(static_cast<Eigen::Index>(pool.size()), emb->dim);
      for (std::size_t i = 0; i < pool.size(); ++i)
        for (int k = 0; k < emb->dim; ++k)
          rows(static_cast<Eigen::Index>(i), k) = pool[i].vec[static_cast<std::size_t>(k)];
      const auto dc = density_cluster(PcaModel::fit(rows, 2).transform(rows), cluster_density());
      ClusterSampling p;
      p.purity_cutoff = cfg_.real("pairs.purity_cutoff");
      p.fraction = cfg_.real("pairs.fraction");
      p.strategy = sim;
      p.seed = seed;
      sample = sample_cluster(pool, dc.labels, p);
    } else {
      throw ConfigError("pairs.strategy must be 'random', 'knn' or 'cluster'");
    }
    w.append(sample.warnings);
    {
      auto out = pipeline_io::create(at("pairs.tsv"));
      write_pairs(out, sample.pairs);
    }
    long homogeneous = 0;
    for (const auto& p : sample.pairs) homogeneous += p.homogeneous;
    pipeline_io::write_json(at("pairs_summary.json"), {{"strategy", strategy},
                                                       {"pool", pool.size()},
                                                       {"pairs", sample.pairs.size()},
                                                       {"homogeneous", homogeneous}});
    done("pairs", inputs, {"pairs.tsv", "pairs_summary.json"}, std::to_string(sample.pairs.size()) + " pairs", w);
  }

  DensityParams cluster_density() const {
    DensityParams d;
    d.min_samples = static_cast<int>(cfg_.integer("cluster.min_samples"));
    d.min_cluster_size = static_cast<int>(cfg_.integer("cluster.min_cluster_size"));
    d.eps = cfg_.real("cluster.eps");
    d.eps_fraction = cfg_.real("cluster.eps_fraction");
    return d;
  }

  void cluster() {
    const auto focal = artifact("focal_statements.jsonl", "catalog");
    const auto stances = artifact("user_stances.csv", "stance");
    std::vector<std::string> inputs{focal, stances};
    const auto coords_path = optional_input("input.statement_coordinates");
    const auto emb_path = coords_path ? std::nullopt : std::optional(input("input.embeddings"));
    inputs.push_back(coords_path ? *coords_path : *emb_path);
    if (!fresh("cluster", inputs)) return;
    Warnings w;
    const auto ss = pipeline_io::read_statements(focal);
    std::set<std::string> wanted;
    for (const auto& s : ss) wanted.insert(s.statement_id);

    Coordinates2D coords;
    if (coords_path) {
      auto in = pipeline_io::open(*coords_path);
      coords = read_coordinates(in);
    } else {
      const auto emb = read_embeddings(*emb_path);
      EmbeddingFile kept;
      kept.dim = emb.dim;
      for (std::size_t i = 0; i < emb.ids.size(); ++i)
        if (wanted.count(emb.ids[i])) {
          kept.ids.push_back(emb.ids[i]);
          kept.vectors.push_back(emb.vectors[i]);
        }
      ProjectionParams pp;
      pp.neighbors = static_cast<int>(cfg_.integer("cluster.neighbors"));
      pp.min_dist = cfg_.real("cluster.min_dist");
      pp.seed = stage_seed("cluster");
      coords = project_embeddings(kept, pp);
    }
    std::set<std::string> have(coords.ids.begin(), coords.ids.end());
    std::size_t missing = 0;
    for (const auto& id : wanted) missing += !have.count(id);
    if (missing) w.add(std::to_string(missing) + " focal statements have no embedding; left out");

    BeliefClusterParams bp;
    bp.density = cluster_density();
    const auto set = cluster_projection(coords, bp, &w);
    {
      auto out = pipeline_io::create(at("belief_clusters.csv"));
      out << "statement_id,cluster,x,y\n";
      for (std::size_t i = 0; i < set.ids.size(); ++i)
        out << set.ids[i] << ',' << set.labels[i] << ',' << format_double(coords.xy(static_cast<Eigen::Index>(i), 0))
            << ',' << format_double(coords.xy(static_cast<Eigen::Index>(i), 1)) << '\n';
    }
    const auto us = pipeline_io::read_user_stances(stances);
    UserStances statement_stance;
    for (const auto& s : ss) {
      const auto it = us.find(s.user_id);
      statement_stance[s.statement_id] = it == us.end() ? Stance::Unclustered : it->second;
    }
    const auto m = cluster_metrics(set, statement_stance);
    const auto side = [](const StanceClusterMetrics& s) {
      nlohmann::json j{{"clusters", s.num_clusters}, {"coverage", s.coverage}};
      j["purity"] = s.purity ? nlohmann::json(*s.purity) : nlohmann::json(nullptr);
      return j;
    };
    pipeline_io::write_json(at("cluster_summary.json"), {{"statements", set.ids.size()},
                                                         {"clusters", set.num_clusters},
                                                         {"coverage", set.coverage},
                                                         {"eps", 0},
                                                         {"believer", side(m.believer)},
                                                         {"skeptic", side(m.skeptic)}});
    done("cluster", inputs, {"belief_clusters.csv", "cluster_summary.json"},
         std::to_string(set.num_clusters) + " belief clusters, coverage " + format_double(set.coverage), w);
  }

  void trajectories() {
    const auto focal = artifact("focal_statements.jsonl", "catalog");
    const auto clusters = artifact("belief_clusters.csv", "cluster");
    const std::vector<std::string> inputs{focal, clusters};
    if (!fresh("trajectories", inputs)) return;
    std::map<std::string, int> cluster_of;
    int dims = 0;
    {
      auto in = pipeline_io::open(clusters);
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        const auto cols = text::split(line, ',');
        if (cols.size() != 4) throw DataError("belief_clusters.csv: expected 4 columns");
        const int c = std::stoi(cols[1]);
        cluster_of[cols[0]] = c;
        dims = std::max(dims, c + 1);
      }
    }
    std::vector<TimedStatement> ts;
    for (const auto& s : pipeline_io::read_statements(focal)) {
      const auto it = cluster_of.find(s.statement_id);
      ts.push_back({s.user_id, s.timestamp, it == cluster_of.end() ? kNoise : it->second});
    }
    DecayParams dp;
    dp.window_days = cfg_.integer("trajectories.window_days");
    dp.min_history_days = cfg_.integer("trajectories.min_history_days");
    if (cfg_.has("trajectories.origin")) dp.origin = cfg_.integer("trajectories.origin");
    const auto sweep = build_trajectory_sweep(ts, dp, halflives());
    std::vector<std::string> outputs;
    nlohmann::json counts = nlohmann::json::object();
    const auto labels = window_labels();
    const auto hs = halflives();
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const auto name = "trajectories_w" + labels[i] + ".csv";
      auto out = pipeline_io::create(at(name));
      write_trajectories(out, sweep.at(hs[i]));
      outputs.push_back(name);
      counts[labels[i]] = sweep.at(hs[i]).size();
    }
    pipeline_io::write_json(at("trajectories_summary.json"),
                            {{"dims", dims}, {"halflives", hs}, {"windows", labels}, {"vectors", counts}});
    outputs.push_back("trajectories_summary.json");
    done("trajectories", inputs, outputs,
         std::to_string(hs.size()) + " half-lives over " + std::to_string(dims) + " belief clusters");
  }

  void landscape() {
    const auto summary = artifact("trajectories_summary.json", "trajectories");
    const auto stances = artifact("user_stances.csv", "stance");
    std::vector<std::string> inputs{summary, stances};
    const auto labels = window_labels();
    for (const auto& l : labels) inputs.push_back(artifact("trajectories_w" + l + ".csv", "trajectories"));
    std::vector<std::string> imported;
    if (cfg_.has("input.landscape_coordinates")) {
      for (const auto& l : labels) {
        auto p = cfg_.path("input.landscape_coordinates");
        const auto pos = p.find("{w}");
        if (pos != std::string::npos) p.replace(pos, 3, l);
        if (!fs::exists(p)) throw DataError("landscape coordinates not found: " + p);
        imported.push_back(p);
        inputs.push_back(p);
      }
    }
    if (!fresh("landscape", inputs)) return;
    Warnings w;
    const int dims = pipeline_io::read_json(summary).at("dims").get<int>();
    const auto us = pipeline_io::read_user_stances(stances);
    std::vector<std::string> outputs;
    nlohmann::json js = nlohmann::json::object();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto& l = labels[i];
      std::vector<LandscapePoint> points;
      if (!imported.empty()) {
        auto in = pipeline_io::open(imported[i]);
        points = read_landscape_coordinates(in, &us);
      } else {
        auto in = pipeline_io::open(at("trajectories_w" + l + ".csv"));
        const auto vs = read_trajectories(in);
        if (vs.empty()) throw DataError("no belief vectors for window size " + l + "; nothing to project");
        LandscapeProjection lp;
        lp.train_fraction = cfg_.real("landscape.train_fraction");
        lp.neighbors = static_cast<int>(cfg_.integer("landscape.neighbors"));
        lp.min_dist = cfg_.real("landscape.min_dist");
        lp.seed = derive_seed(stage_seed("landscape"), i);
        points = project_vectors(vs, lp, dims, &us);
      }
      KdeParams kp;
      kp.n_grid = static_cast<int>(cfg_.integer("landscape.n_grid"));
      kp.margin_bandwidths = cfg_.real("landscape.margin");
      const auto grid = kde2d(points, kp, &w);
      const auto peaks = find_maxima(grid);
      const auto attractors = threshold_attractors(peaks, cfg_.real("evaluate.magnitude_cutoff"), &w);
      const auto base = "landscape_w" + l;
      {
        auto out = pipeline_io::create(at(base + "_points.csv"));
        write_points_csv(out, points);
      }
      {
        auto out = pipeline_io::create(at(base + "_grid.csv"));
        write_grid_csv(out, grid);
      }
      {
        auto out = pipeline_io::create(at(base + "_attractors.csv"));
        write_attractors_csv(out, attractors);
      }
      for (const auto* suffix : {"_points.csv", "_grid.csv", "_attractors.csv"}) outputs.push_back(base + suffix);
      js[l] = {{"points", points.size()}, {"h_x", grid.h_x}, {"h_y", grid.h_y},
               {"peaks", peaks.size()},   {"attractors", attractors.size()}};
    }
    pipeline_io::write_json(at("landscape_summary.json"), js);
    outputs.push_back("landscape_summary.json");
    done("landscape", inputs, outputs, std::to_string(labels.size()) + " landscapes", w);
  }

  struct LandscapeFiles {
    std::vector<LandscapePoint> points;
    DensityGrid grid;
    std::vector<Attractor> attractors;
  };

  std::vector<std::string> landscape_inputs() const {
    std::vector<std::string> inputs;
    for (const auto& l : window_labels())
      for (const auto* suffix : {"_points.csv", "_grid.csv", "_attractors.csv"})
        inputs.push_back(artifact("landscape_w" + l + suffix, "landscape"));
    return inputs;
  }

  LandscapeFiles read_landscape(const std::string& label) const {
    LandscapeFiles f;
    const auto base = "landscape_w" + label;
    {
      auto in = pipeline_io::open(at(base + "_points.csv"));
      f.points = read_points_csv(in);
    }
    {
      auto in = pipeline_io::open(at(base + "_grid.csv"));
      f.grid = read_grid_csv(in);
    }
    {
      auto in = pipeline_io::open(at(base + "_attractors.csv"));
      f.attractors = read_attractors_csv(in);
    }
    return f;
  }

  void evaluate() {
    const auto inputs = landscape_inputs();
    if (!fresh("evaluate", inputs)) return;
    Warnings w;
    EvaluationParams ep;
    ep.magnitude_cutoff = cfg_.real("evaluate.magnitude_cutoff");
    ep.min_periods = cfg_.integer("evaluate.min_periods");
    ep.fixed_k = static_cast<int>(cfg_.integer("evaluate.fixed_k"));
    ep.k_neighbors = static_cast<int>(cfg_.integer("evaluate.k_neighbors"));
    ep.include_gap_transitions = cfg_.boolean("evaluate.include_gaps");
    ReportTable table;
    std::vector<std::string> outputs;
    nlohmann::json js = nlohmann::json::object();
    const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    for (const auto& l : window_labels()) {
      const auto f = read_landscape(l);
      const auto ev = evaluate_landscape(f.points, f.grid, ep);
      for (const auto& m : ev.warnings.messages) w.add("window " + l + ": " + m);
      add_report_column(table, l, ev);
      {
        auto out = pipeline_io::create(at("stability_w" + l + ".csv"));
        write_stability_csv(out, ev.h1);
      }
      {
        auto out = pipeline_io::create(at("events_w" + l + ".csv"));
        write_events_csv(out, ev.events);
      }
      {
        auto out = pipeline_io::create(at("histograms_w" + l + ".csv"));
        out << "histogram,lo,hi,count\n";
        write_histogram_csv(out, "stability", ev.h1.histogram);
        if (ev.h4) {
          write_histogram_csv(out, "believer_homophily", ev.h4->believer.histogram);
          write_histogram_csv(out, "skeptic_homophily", ev.h4->skeptic.histogram);
        }
        for (std::size_t r = 0; r < ev.h3.histogram.size(); ++r)
          out << "h3_rank," << r + 1 << ',' << r + 1 << ',' << ev.h3.histogram[r] << '\n';
      }
      for (const auto* prefix : {"stability_w", "events_w", "histograms_w"}) outputs.push_back(prefix + l + ".csv");

      nlohmann::json j;
      j["attractors"] = ev.attractors.size();
      j["h1"] = {{"users", ev.h1.records.size()}, {"mean", opt(ev.h1.mean)}};
      if (ev.h2) {
        const auto& r = *ev.h2;
        j["h2"] = {{"n_obs", r.n_obs},         {"n_moved", r.n_moved},         {"diverged", r.diverged},
                   {"intercept", r.intercept}, {"beta_distance", r.beta_distance}, {"beta_strength", r.beta_strength},
                   {"se_distance", r.se_distance}, {"se_strength", r.se_strength}, {"p_distance", r.p_distance},
                   {"p_strength", r.p_strength}, {"gradient_norm", r.fit.gradient_norm}};
      } else {
        j["h2"] = nullptr;
      }
      j["h3"] = {{"k", ev.h3.k},
                 {"comparable", ev.h3.comparable},
                 {"included", ev.h3.included},
                 {"excluded", ev.h3.excluded},
                 {"fraction_rank_le5", opt(ev.h3.fraction_rank_le5)}};
      if (ev.h4) {
        j["h4"] = {{"radius", ev.h4->radius},
                   {"believer_mean", opt(ev.h4->believer.mean)},
                   {"skeptic_mean", opt(ev.h4->skeptic.mean)},
                   {"believer_points", ev.h4->believer.fractions.size()},
                   {"skeptic_points", ev.h4->skeptic.fractions.size()},
                   {"excluded_no_neighbors", ev.h4->excluded_no_neighbors},
                   {"excluded_unclustered", ev.h4->excluded_unclustered}};
      } else {
        j["h4"] = nullptr;
      }
      js[l] = j;
    }
    {
      auto out = pipeline_io::create(at("report.csv"));
      write_report_csv(out, table);
    }
    const auto& rows = report_rows();
    const auto mean_d = row_mean(table, rows[2]), mean_s = row_mean(table, rows[4]);
    {
      auto out = pipeline_io::create(at("report.txt"));
      write_report_text(out, table);
      out << "\nMean beta over window sizes: distance " << format_cell(mean_d) << ", strength "
          << format_cell(mean_s) << '\n';
    }
    js["mean_beta_distance"] = opt(mean_d);
    js["mean_beta_strength"] = opt(mean_s);
    pipeline_io::write_json(at("evaluate_summary.json"), js);
    for (const auto* o : {"report.csv", "report.txt", "evaluate_summary.json"}) outputs.push_back(o);
    done("evaluate", inputs, outputs, "report over " + std::to_string(window_labels().size()) + " window sizes", w);
  }

  void render() {
    const auto inputs = landscape_inputs();
    if (!fresh("render", inputs)) return;
    Warnings w;
    RenderParams rp;
    rp.sample_fraction = cfg_.real("render.sample_fraction");
    rp.width = static_cast<int>(cfg_.integer("render.width"));
    rp.height = static_cast<int>(cfg_.integer("render.height"));
    rp.levels = static_cast<int>(cfg_.integer("render.levels"));
    rp.seed = stage_seed("render");
    std::vector<std::string> outputs;
    for (const auto& l : window_labels()) {
      const auto f = read_landscape(l);
      const auto r = render_landscape(&f.grid, f.points, f.attractors, rp);
      for (const auto& m : r.warnings.messages) w.add("window " + l + ": " + m);
      pipeline_io::create(at("landscape_w" + l + ".svg")) << r.svg;
      pipeline_io::create(at("landscape_w" + l + "_drawn.csv")) << r.csv;
      outputs.push_back("landscape_w" + l + ".svg");
      outputs.push_back("landscape_w" + l + "_drawn.csv");
    }
    done("render", inputs, outputs, std::to_string(outputs.size() / 2) + " figures", w);
  }
};

}  // namespace blf
