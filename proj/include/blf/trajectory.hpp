#pragma once
// Decay-weighted longitudinal belief vectors. Each user's statements are
// bucketed into calendar-aligned windows; the observed vector of a window is
// the normalized cluster histogram and the belief vector is the
// exponentially weighted average of all observed windows so far.

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"

namespace blf {

using SparseVector = std::map<int, double>;  // cluster id -> weight

/// alpha = 1 - exp(-ln 2 / halflife): an observation `halflife` windows old
/// carries half the weight of the newest one.
inline double decay_alpha(double halflife) {
  if (!(halflife > 0) || !std::isfinite(halflife))
    throw ConfigError("halflife must be a positive finite number");
  return -std::expm1(-std::log(2.0) / halflife);
}

/// Normalized cluster histogram of one window; nullopt when every statement
/// is noise (or there are none).
inline std::optional<SparseVector> observed_vector(const std::vector<int>& cluster_ids) {
  SparseVector v;
  long n = 0;
  for (int c : cluster_ids) {
    if (c == kNoise) continue;
    v[c] += 1.0;
    ++n;
  }
  if (n == 0) return std::nullopt;
  for (auto& [c, w] : v) w /= static_cast<double>(n);
  return v;
}

struct Observation {
  long t = 0;
  SparseVector x;
};

/// Decay-weighted mean kept in normalized form: each new observation moves
/// the mean by (x - y) / D with D the decayed weight total, so a constant
/// input stays exactly constant.
struct DecayFold {
  SparseVector y;
  double den = 0.0;
  long last_t = 0;
  bool started = false;

  void add(long t, const SparseVector& x, double keep) {
    den = (started ? den * std::pow(keep, static_cast<double>(t - last_t)) : 0.0) + 1.0;
    for (auto& [c, v] : y) {
      const auto it = x.find(c);
      v += ((it == x.end() ? 0.0 : it->second) - v) / den;
    }
    for (const auto& [c, v] : x)
      if (!y.count(c)) y[c] = v / den;
    last_t = t;
    started = true;
  }
};

/// y_t from the observations at or before t (ascending t). Windows without
/// observations drop out of both numerator and normalizer; weights decay
/// geometrically with age measured in windows.
inline std::optional<SparseVector> belief_vector(const std::vector<Observation>& history, double alpha,
                                                 long t) {
  DecayFold fold;
  for (const auto& obs : history) {
    if (obs.t > t) break;
    fold.add(obs.t, obs.x, 1.0 - alpha);
  }
  if (!fold.started) return std::nullopt;
  return fold.y;
}

struct BeliefVector {
  std::string user_id;
  long t = 0;
  SparseVector vector;
  long support = 0;  // statements (non-noise) in the emitting window
};

struct DecayParams {
  double halflife = 1.0;  // in windows
  long window_days = 7;
  long min_history_days = 7;
  std::optional<std::int64_t> origin;  // bucket 0 start; defaults to first timestamp's UTC day

  double alpha() const { return decay_alpha(halflife); }
  std::int64_t window_seconds() const { return window_days * 86400; }
};

/// Timed, clustered statement of one user.
struct TimedStatement {
  std::string user_id;
  std::int64_t timestamp = 0;
  int cluster = kNoise;
};

inline std::int64_t default_origin(const std::vector<TimedStatement>& statements) {
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  for (const auto& s : statements) lo = std::min(lo, s.timestamp);
  if (statements.empty()) return 0;
  const std::int64_t day = 86400;
  return lo >= 0 ? lo / day * day : -((-lo + day - 1) / day) * day;
}

inline long bucket_of(std::int64_t ts, std::int64_t origin, std::int64_t width) {
  const auto d = ts - origin;
  return static_cast<long>(d >= 0 ? d / width : -((-d + width - 1) / width));
}

/// Folds every user's history into belief vectors, one per window in which
/// the user has a non-noise statement, once the user has been active for
/// `min_history_days` by the end of that window. Output sorted by (user, t).
inline std::vector<BeliefVector> build_trajectories(const std::vector<TimedStatement>& statements,
                                                    const DecayParams& p) {
  if (p.window_days < 1) throw ConfigError("window_days must be >= 1");
  const double keep = 1.0 - p.alpha();
  const auto origin = p.origin.value_or(default_origin(statements));
  const auto width = p.window_seconds();

  struct UserHistory {
    std::int64_t first_ts = std::numeric_limits<std::int64_t>::max();
    std::map<long, std::vector<int>> buckets;
  };
  std::map<std::string, UserHistory> users;
  for (const auto& s : statements) {
    auto& u = users[s.user_id];
    u.first_ts = std::min(u.first_ts, s.timestamp);
    u.buckets[bucket_of(s.timestamp, origin, width)].push_back(s.cluster);
  }

  std::vector<BeliefVector> out;
  for (const auto& [user, hist] : users) {
    DecayFold fold;
    for (const auto& [t, clusters] : hist.buckets) {
      const auto x = observed_vector(clusters);
      if (!x) continue;
      fold.add(t, *x, keep);
      const std::int64_t window_end = origin + static_cast<std::int64_t>(t + 1) * width;
      if (window_end - hist.first_ts < p.min_history_days * 86400) continue;
      BeliefVector bv{user, t, fold.y, 0};
      bv.support = static_cast<long>(std::count_if(clusters.begin(), clusters.end(),
                                                   [](int c) { return c != kNoise; }));
      out.push_back(std::move(bv));
    }
  }
  return out;
}

/// One trajectory set per half-life, sharing the same bucketing.
inline std::map<double, std::vector<BeliefVector>> build_trajectory_sweep(
    const std::vector<TimedStatement>& statements, DecayParams p, const std::vector<double>& halflives) {
  if (!p.origin) p.origin = default_origin(statements);
  std::map<double, std::vector<BeliefVector>> out;
  for (double h : halflives) {
    p.halflife = h;
    out[h] = build_trajectories(statements, p);
  }
  return out;
}

inline void write_trajectories(std::ostream& out, const std::vector<BeliefVector>& vs) {
  out << "user_id,t,support,vector\n";
  for (const auto& v : vs) {
    out << v.user_id << ',' << v.t << ',' << v.support << ',';
    bool first = true;
    for (const auto& [c, w] : v.vector) {
      if (!first) out << ' ';
      first = false;
      char buf[32];
      const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, w);
      out << c << ':' << std::string_view(buf, static_cast<std::size_t>(p - buf));
    }
    out << '\n';
  }
}

inline std::vector<BeliefVector> read_trajectories(std::istream& in) {
  std::vector<BeliefVector> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("user_id", 0) == 0) continue;
    if (line.empty()) continue;
    const auto cols = text::split(line, ',');
    if (cols.size() != 4) throw DataError("trajectory line " + std::to_string(line_no) + ": expected 4 columns");
    BeliefVector v;
    v.user_id = cols[0];
    v.t = std::stol(cols[1]);
    v.support = std::stol(cols[2]);
    for (const auto& kv : text::split(cols[3], ' ')) {
      if (kv.empty()) continue;
      const auto colon = kv.find(':');
      if (colon == std::string::npos) throw DataError("trajectory line " + std::to_string(line_no) + ": bad entry");
      double w = 0;
      std::from_chars(kv.data() + colon + 1, kv.data() + kv.size(), w);
      v.vector[std::stoi(kv.substr(0, colon))] = w;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace blf
