#pragma once
// Training-pair generation for encoder fine-tuning (random, knn and
// cluster-based sampling with min / invert similarity targets) and the
// [0, 3] model-selection objective.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "core.hpp"
#include "corpus.hpp"

namespace blf {

enum class SimilarityStrategy { Min, Invert };

struct SentencePair {
  std::string a_id;
  std::string b_id;
  bool homogeneous = true;
  double base_sim = 0.0;
  double target_sim = 0.0;
};

/// Homogeneous pairs keep the untuned similarity; heterogeneous pairs get -1
/// (min) or have positive similarities negated (invert).
inline double target_similarity(const SentencePair& p, SimilarityStrategy s) {
  if (p.homogeneous) return p.base_sim;
  if (s == SimilarityStrategy::Min) return -1.0;
  return p.base_sim > 0 ? -p.base_sim : p.base_sim;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

/// A statement with a known author stance and an untuned embedding.
struct PoolItem {
  std::string id;
  Stance stance = Stance::Believer;
  std::vector<double> vec;
};

struct PairSample {
  std::vector<SentencePair> pairs;
  Warnings warnings;
};

namespace pairs_detail {

/// k distinct values from [0, n), ascending (Floyd's algorithm).
inline std::vector<std::uint64_t> choose_distinct(std::uint64_t n, std::uint64_t k,
                                                  std::mt19937_64& rng) {
  k = std::min(k, n);
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = n - k; j < n; ++j) {
    const auto t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

/// Maps a linear index to the unordered pair (i < j) of an n-set.
inline std::pair<std::size_t, std::size_t> unrank_pair(std::uint64_t r, std::uint64_t n) {
  // row i holds n-1-i pairs
  std::uint64_t i = 0;
  std::uint64_t lo = 0, hi = n - 1;
  // largest i with offset(i) <= r, offset(i) = i*(2n-i-1)/2
  const auto offset = [n](std::uint64_t i) { return i * (2 * n - i - 1) / 2; };
  while (lo < hi) {
    const auto mid = (lo + hi + 1) / 2;
    if (offset(mid) <= r) lo = mid;
    else hi = mid - 1;
  }
  i = lo;
  const auto j = i + 1 + (r - offset(i));
  return {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
}

inline SentencePair make_pair(const PoolItem& a, const PoolItem& b, SimilarityStrategy s) {
  SentencePair p{a.id, b.id, a.stance == b.stance, cosine(a.vec, b.vec), 0.0};
  p.target_sim = target_similarity(p, s);
  return p;
}

inline void sample_within(const std::vector<const PoolItem*>& group, std::uint64_t count,
                          SimilarityStrategy s, std::mt19937_64& rng, PairSample& out,
                          const std::string& label) {
  const std::uint64_t n = group.size();
  const std::uint64_t total = n < 2 ? 0 : n * (n - 1) / 2;
  if (total < count)
    out.warnings.add(label + ": requested " + std::to_string(count) + " pairs, only " +
                     std::to_string(total) + " available");
  for (auto r : choose_distinct(total, count, rng)) {
    const auto [i, j] = unrank_pair(r, n);
    out.pairs.push_back(make_pair(*group[i], *group[j], s));
  }
}

inline void sample_across(const std::vector<const PoolItem*>& a,
                          const std::vector<const PoolItem*>& b, std::uint64_t count,
                          SimilarityStrategy s, std::mt19937_64& rng, PairSample& out,
                          const std::string& label) {
  const std::uint64_t total = static_cast<std::uint64_t>(a.size()) * b.size();
  if (total < count)
    out.warnings.add(label + ": requested " + std::to_string(count) + " pairs, only " +
                     std::to_string(total) + " available");
  for (auto r : choose_distinct(total, count, rng))
    out.pairs.push_back(make_pair(*a[r / b.size()], *b[r % b.size()], s));
}

inline std::pair<std::vector<const PoolItem*>, std::vector<const PoolItem*>> split_by_stance(
    const std::vector<PoolItem>& pool) {
  std::vector<const PoolItem*> b, s;
  for (const auto& it : pool) {
    if (it.stance == Stance::Believer) b.push_back(&it);
    else if (it.stance == Stance::Skeptic) s.push_back(&it);
  }
  return {b, s};
}

}  // namespace pairs_detail

struct RandomSampling {
  double cutoff = 0.0;  // <= 0 makes every heterogeneous candidate eligible
  std::uint64_t homogeneous_per_stance = 500000;
  std::uint64_t heterogeneous = 1500000;
  SimilarityStrategy strategy = SimilarityStrategy::Invert;
  std::uint64_t seed = 1;
  std::uint64_t enumerate_limit = 4000000;  // cross pairs enumerated exhaustively up to this
};

inline PairSample sample_random(const std::vector<PoolItem>& pool, const RandomSampling& p) {
  using namespace pairs_detail;
  PairSample out;
  std::mt19937_64 rng(p.seed);
  const auto [believers, skeptics] = split_by_stance(pool);
  sample_within(believers, p.homogeneous_per_stance, p.strategy, rng, out, "believer pairs");
  sample_within(skeptics, p.homogeneous_per_stance, p.strategy, rng, out, "skeptic pairs");

  const std::uint64_t cross = static_cast<std::uint64_t>(believers.size()) * skeptics.size();
  if (p.cutoff <= 0.0) {
    sample_across(believers, skeptics, p.heterogeneous, p.strategy, rng, out, "heterogeneous pairs");
    return out;
  }
  const auto eligible = [&](std::uint64_t r) {
    return cosine(believers[r / skeptics.size()]->vec, skeptics[r % skeptics.size()]->vec) >= p.cutoff;
  };
  std::vector<std::uint64_t> picked;
  if (cross <= p.enumerate_limit) {
    std::vector<std::uint64_t> cand;
    for (std::uint64_t r = 0; r < cross; ++r)
      if (eligible(r)) cand.push_back(r);
    for (auto k : choose_distinct(cand.size(), p.heterogeneous, rng)) picked.push_back(cand[k]);
  } else {
    std::unordered_set<std::uint64_t> seen;
    std::uniform_int_distribution<std::uint64_t> draw(0, cross - 1);
    const std::uint64_t max_attempts = 50 * p.heterogeneous + 1000;
    for (std::uint64_t a = 0; a < max_attempts && picked.size() < p.heterogeneous; ++a) {
      const auto r = draw(rng);
      if (seen.insert(r).second && eligible(r)) picked.push_back(r);
    }
    std::sort(picked.begin(), picked.end());
  }
  if (picked.size() < p.heterogeneous)
    out.warnings.add("heterogeneous pairs: requested " + std::to_string(p.heterogeneous) +
                     ", only " + std::to_string(picked.size()) + " meet cutoff");
  for (auto r : picked)
    out.pairs.push_back(make_pair(*believers[r / skeptics.size()], *skeptics[r % skeptics.size()],
                                  p.strategy));
  return out;
}

struct KnnSampling {
  int k = 10;
  std::uint64_t homogeneous_per_stance = 500000;
  SimilarityStrategy strategy = SimilarityStrategy::Invert;
  std::uint64_t seed = 1;
};

/// Every skeptic statement is paired with its k most cosine-similar
/// believer statements.
inline PairSample sample_knn(const std::vector<PoolItem>& pool, const KnnSampling& p) {
  using namespace pairs_detail;
  if (p.k < 1) throw ConfigError("knn sampling needs k >= 1");
  PairSample out;
  std::mt19937_64 rng(p.seed);
  const auto [believers, skeptics] = split_by_stance(pool);
  sample_within(believers, p.homogeneous_per_stance, p.strategy, rng, out, "believer pairs");
  sample_within(skeptics, p.homogeneous_per_stance, p.strategy, rng, out, "skeptic pairs");
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(p.k), believers.size());
  if (k < static_cast<std::size_t>(p.k))
    out.warnings.add("knn: only " + std::to_string(believers.size()) + " believer statements; using all");
  std::vector<std::pair<double, std::size_t>> sims(believers.size());
  for (const auto* s : skeptics) {
    for (std::size_t j = 0; j < believers.size(); ++j) sims[j] = {-cosine(s->vec, believers[j]->vec), j};
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end());
    for (std::size_t q = 0; q < k; ++q)
      out.pairs.push_back(make_pair(*believers[sims[q].second], *s, p.strategy));
  }
  return out;
}

struct ClusterSampling {
  double purity_cutoff = 0.9;
  double fraction = 0.001;
  SimilarityStrategy strategy = SimilarityStrategy::Invert;
  std::uint64_t seed = 1;
};

/// Within each untuned-embedding cluster whose stance purity reaches the
/// cutoff, samples `fraction` of all member pairs split evenly over
/// believer, skeptic and heterogeneous pair types (rebalanced over the types
/// a cluster actually has). `labels` is parallel to `pool`.
inline PairSample sample_cluster(const std::vector<PoolItem>& pool, const std::vector<int>& labels,
                                 const ClusterSampling& p) {
  using namespace pairs_detail;
  if (labels.size() != pool.size()) throw DataError("cluster labels do not match the pool");
  PairSample out;
  std::mt19937_64 rng(p.seed);
  std::map<int, std::vector<PoolItem>> clusters;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (labels[i] != kNoise) clusters[labels[i]].push_back(pool[i]);
  bool any = false;
  for (const auto& [id, members] : clusters) {
    const auto [b, s] = split_by_stance(members);
    const double purity = static_cast<double>(std::max(b.size(), s.size())) / members.size();
    if (purity < p.purity_cutoff) continue;
    any = true;
    const std::uint64_t n = members.size();
    const auto want = static_cast<std::uint64_t>(std::llround(p.fraction * (n * (n - 1) / 2.0)));
    const std::uint64_t nb = b.size(), ns = s.size();
    std::array<std::uint64_t, 3> avail{nb * (nb ? nb - 1 : 0) / 2, ns * (ns ? ns - 1 : 0) / 2, nb * ns};
    std::array<std::uint64_t, 3> quota{0, 0, 0};
    std::uint64_t left = want;
    // water-filling: equal shares, overflow moves to types with room
    while (left > 0) {
      std::vector<int> open;
      for (int t = 0; t < 3; ++t)
        if (quota[static_cast<std::size_t>(t)] < avail[static_cast<std::size_t>(t)]) open.push_back(t);
      if (open.empty()) break;
      const auto share = std::max<std::uint64_t>(1, left / open.size());
      for (int t : open) {
        auto& q = quota[static_cast<std::size_t>(t)];
        const auto add = std::min({share, left, avail[static_cast<std::size_t>(t)] - q});
        q += add;
        left -= add;
        if (left == 0) break;
      }
    }
    if (avail[0] == 0 || avail[1] == 0 || avail[2] == 0)
      out.warnings.add("cluster " + std::to_string(id) + ": pair types missing; rebalanced");
    sample_within(b, quota[0], p.strategy, rng, out, "cluster believer pairs");
    sample_within(s, quota[1], p.strategy, rng, out, "cluster skeptic pairs");
    sample_across(b, s, quota[2], p.strategy, rng, out, "cluster heterogeneous pairs");
  }
  if (!any) out.warnings.add("no cluster reaches purity cutoff; no pairs sampled");
  return out;
}

// ---------------------------------------------------------------------------
// pair file: a_id <TAB> b_id <TAB> target_sim

inline void write_pairs(std::ostream& out, const std::vector<SentencePair>& pairs) {
  for (const auto& p : pairs) out << p.a_id << '\t' << p.b_id << '\t' << format_double(p.target_sim) << '\n';
}

struct PairRecord {
  std::string a_id, b_id;
  double target_sim = 0.0;
};

inline std::vector<PairRecord> read_pairs(std::istream& in) {
  std::vector<PairRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = text::split(line, '\t');
    double v = 0;
    if (cols.size() != 3)
      throw DataError("pair file line " + std::to_string(line_no) + ": expected 3 columns");
    const auto [ptr, ec] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), v);
    if (ec != std::errc() || ptr != cols[2].data() + cols[2].size() || v < -1 || v > 1)
      throw DataError("pair file line " + std::to_string(line_no) + ": bad similarity");
    out.push_back({cols[0], cols[1], v});
  }
  return out;
}

// ---------------------------------------------------------------------------
// model selection

struct DispositionMeasures {
  double num_clusters = 0;
  double coverage = 0;
  std::optional<double> purity;  // absent when the stance has no clusters
};

struct CandidateMeasures {
  std::string name;
  DispositionMeasures believer;
  DispositionMeasures skeptic;
};

struct CandidateScore {
  std::string name;
  std::array<double, 3> normalized{};  // clusters, coverage, purity (disposition-averaged)
  double objective = 0.0;
};

struct ObjectiveResult {
  std::vector<CandidateScore> ranked;  // descending objective, ties by name
  Warnings warnings;
};

/// Each raw measure is divided by its maximum across candidates within the
/// same disposition; the two dispositions are averaged per measure and the
/// three measures summed, giving a score in [0, 3].
inline ObjectiveResult model_objective(const std::vector<CandidateMeasures>& cands) {
  if (cands.empty()) throw ConfigError("model_objective needs at least one candidate");
  ObjectiveResult out;
  using Get = double (*)(const DispositionMeasures&);
  const std::array<Get, 3> get{
      [](const DispositionMeasures& d) { return d.num_clusters; },
      [](const DispositionMeasures& d) { return d.coverage; },
      [](const DispositionMeasures& d) { return d.purity.value_or(0.0); }};
  const std::array<const char*, 3> names{"num_clusters", "coverage", "purity"};
  for (const auto& c : cands) out.ranked.push_back({c.name, {}, 0.0});
  for (std::size_t m = 0; m < 3; ++m) {
    for (int disp = 0; disp < 2; ++disp) {
      const auto pick = [&](const CandidateMeasures& c) -> const DispositionMeasures& {
        return disp == 0 ? c.believer : c.skeptic;
      };
      double mx = 0;
      for (const auto& c : cands) mx = std::max(mx, get[m](pick(c)));
      if (mx <= 0)
        out.warnings.add(std::string(names[m]) + (disp == 0 ? " (believer)" : " (skeptic)") +
                         " is zero for every candidate; normalized term set to 0");
      for (std::size_t i = 0; i < cands.size(); ++i) {
        const double term = mx > 0 ? get[m](pick(cands[i])) / mx : 0.0;
        out.ranked[i].normalized[m] += term / 2.0;
      }
    }
  }
  for (auto& s : out.ranked) s.objective = s.normalized[0] + s.normalized[1] + s.normalized[2];
  std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const auto& a, const auto& b) {
    if (a.objective != b.objective) return a.objective > b.objective;
    return a.name < b.name;
  });
  return out;
}

}  // namespace blf
