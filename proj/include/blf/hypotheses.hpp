#pragma once
// Hypothesis tests over a belief landscape: attractor stability (H1),
// logistic regression of moves on attractor distance and strength (H2),
// distance ranks of move destinations (H3) and neighbourhood stance
// homophily (H4), plus the summary table across configurations.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "core.hpp"
#include "density.hpp"
#include "landscape.hpp"

namespace blf {

struct Histogram {
  double lo = 0.0, hi = 1.0;
  std::vector<long> counts;

  Histogram(double lo_, double hi_, int bins) : lo(lo_), hi(hi_), counts(static_cast<std::size_t>(bins), 0) {}
  void add(double v) {
    const auto bins = static_cast<long>(counts.size());
    auto b = static_cast<long>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
    b = std::clamp(b, 0L, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  long total() const {
    long n = 0;
    for (long c : counts) n += c;
    return n;
  }
};

struct AttractorAssignment {
  std::string user_id;
  long t = 0;
  int attractor = 0;
  double distance = 0.0;
};

/// Nearest attractor for every point, sorted by (user, t).
inline std::vector<AttractorAssignment> assign_attractors(const std::vector<LandscapePoint>& points,
                                                          const std::vector<Attractor>& attractors) {
  std::vector<AttractorAssignment> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const auto n = nearest_attractor(p, attractors);
    out.push_back({p.user_id, p.t, n.id, n.distance});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.user_id, a.t) < std::tie(b.user_id, b.t);
  });
  return out;
}

// ---------------------------------------------------------------------------
// H1

struct StabilityRecord {
  std::string user_id;
  long periods = 0;
  long distinct_attractors = 0;
  double stability = 0.0;
};

inline double stability(long distinct, long periods) {
  if (periods < 1) throw DataError("stability needs at least one period");
  return 1.0 - static_cast<double>(distinct) / static_cast<double>(periods);
}

struct StabilityResult {
  std::vector<StabilityRecord> records;
  std::optional<double> mean;
  Histogram histogram{0.0, 1.0, 10};
  Warnings warnings;
};

/// One record per user seen in more than `min_periods` windows.
inline StabilityResult h1_stability(const std::vector<AttractorAssignment>& assignments, long min_periods = 10) {
  StabilityResult out;
  std::map<std::string, std::pair<long, std::set<int>>> per_user;
  for (const auto& a : assignments) {
    auto& u = per_user[a.user_id];
    ++u.first;
    u.second.insert(a.attractor);
  }
  double sum = 0.0;
  for (const auto& [user, u] : per_user) {
    if (u.first <= min_periods) continue;
    const auto distinct = static_cast<long>(u.second.size());
    StabilityRecord r{user, u.first, distinct, stability(distinct, u.first)};
    sum += r.stability;
    out.histogram.add(r.stability);
    out.records.push_back(std::move(r));
  }
  if (out.records.empty())
    out.warnings.add("no user appears in more than " + std::to_string(min_periods) + " periods");
  else
    out.mean = sum / static_cast<double>(out.records.size());
  return out;
}

// ---------------------------------------------------------------------------
// transitions and H2

struct TransitionEvent {
  std::string user_id;
  long from_t = 0, to_t = 0;
  int from_attractor = 0, to_attractor = 0;
  double from_distance = 0.0;
  double from_strength = 0.0;
  bool moved = false;
  bool gap = false;  // windows not adjacent in calendar time
};

/// Consecutive emitted windows of each user. `assignments` must be sorted
/// by (user, t) as produced by assign_attractors.
inline std::vector<TransitionEvent> transition_events(const std::vector<AttractorAssignment>& assignments,
                                                      const std::vector<Attractor>& attractors,
                                                      bool include_gaps = true) {
  std::map<int, double> strength;
  for (const auto& a : attractors) strength[a.id] = a.magnitude;
  std::vector<TransitionEvent> out;
  for (std::size_t i = 1; i < assignments.size(); ++i) {
    const auto& a = assignments[i - 1];
    const auto& b = assignments[i];
    if (a.user_id != b.user_id) continue;
    TransitionEvent e{a.user_id, a.t, b.t, a.attractor, b.attractor, a.distance, strength.at(a.attractor),
                      a.attractor != b.attractor, b.t - a.t > 1};
    if (e.gap && !include_gaps) continue;
    out.push_back(std::move(e));
  }
  return out;
}

struct LogisticFit {
  Vector beta;
  Vector se;
  Vector p_value;
  double loglik = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

namespace logistic_detail {

inline double sigmoid(double eta) {
  return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

// log(1 + exp(eta)) without overflow
inline double log1pexp(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

}  // namespace logistic_detail

inline double logistic_loglik(const Matrix& X, const Vector& y, const Vector& beta) {
  const Vector eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) ll += y(i) * eta(i) - logistic_detail::log1pexp(eta(i));
  return ll;
}

/// Gradient of the log-likelihood: X^T (y - p).
inline Vector logistic_gradient(const Matrix& X, const Vector& y, const Vector& beta) {
  const Vector eta = X * beta;
  Vector r(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) r(i) = y(i) - logistic_detail::sigmoid(eta(i));
  return X.transpose() * r;
}

/// Newton / iteratively reweighted least squares with Wald standard errors.
inline LogisticFit fit_logistic(const Matrix& X, const Vector& y, double tol = 1e-8, int max_iter = 100) {
  LogisticFit f;
  const auto k = X.cols();
  f.beta = Vector::Zero(k);
  for (f.iterations = 0; f.iterations < max_iter; ++f.iterations) {
    const Vector g = logistic_gradient(X, y, f.beta);
    f.gradient_norm = g.norm();
    if (f.gradient_norm < tol) {
      f.converged = true;
      break;
    }
    const Vector eta = X * f.beta;
    Vector w(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double p = logistic_detail::sigmoid(eta(i));
      w(i) = p * (1 - p);
    }
    const Matrix info = X.transpose() * w.asDiagonal() * X;
    Eigen::LDLT<Matrix> ldlt(info);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
      f.diverged = true;
      break;
    }
    Vector step = ldlt.solve(g);
    // step halving keeps the likelihood monotone far from the optimum
    const double ll0 = logistic_loglik(X, y, f.beta);
    double scale = 1.0;
    while (scale > 1e-6 && logistic_loglik(X, y, f.beta + scale * step) < ll0 - 1e-12) scale /= 2;
    f.beta += scale * step;
    if (f.beta.cwiseAbs().maxCoeff() > 50.0) {
      f.diverged = true;
      break;
    }
  }
  f.loglik = logistic_loglik(X, y, f.beta);
  if (!f.converged) f.diverged = true;
  if (f.diverged) return f;
  const Vector eta = X * f.beta;
  Vector w(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double p = logistic_detail::sigmoid(eta(i));
    w(i) = p * (1 - p);
  }
  const Matrix cov = (X.transpose() * w.asDiagonal() * X).inverse();
  f.se = cov.diagonal().cwiseSqrt();
  f.p_value.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) f.p_value(j) = std::erfc(std::abs(f.beta(j) / f.se(j)) / std::sqrt(2.0));
  return f;
}

struct RegressionResult {
  double intercept = 0.0;
  double beta_distance = 0.0, beta_strength = 0.0;
  double se_distance = 0.0, se_strength = 0.0;
  double p_distance = 1.0, p_strength = 1.0;
  long n_obs = 0;
  long n_moved = 0;
  bool diverged = false;
  LogisticFit fit;
};

inline std::vector<double> zscore(const std::vector<double>& v, const std::string& name) {
  const double sd = sample_sd(v);
  if (!(sd > 0)) throw DataError("covariate '" + name + "' is constant; cannot standardize");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  std::vector<double> z(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - mean) / sd;
  return z;
}

/// P(moved) ~ intercept + b_d z(distance) + b_s z(strength).
inline RegressionResult h2_regression(const std::vector<TransitionEvent>& events) {
  RegressionResult r;
  r.n_obs = static_cast<long>(events.size());
  if (events.size() < 2) throw DataError("regression needs at least two transition events");
  std::vector<double> d, s;
  for (const auto& e : events) {
    d.push_back(e.from_distance);
    s.push_back(e.from_strength);
    r.n_moved += e.moved;
  }
  if (r.n_moved == 0 || r.n_moved == r.n_obs)
    throw DataError("regression needs both moved and stayed outcomes");
  const auto zd = zscore(d, "distance");
  const auto zs = zscore(s, "strength");
  Matrix X(r.n_obs, 3);
  Vector y(r.n_obs);
  for (Eigen::Index i = 0; i < r.n_obs; ++i) {
    const auto u = static_cast<std::size_t>(i);
    X(i, 0) = 1.0;
    X(i, 1) = zd[u];
    X(i, 2) = zs[u];
    y(i) = events[u].moved ? 1.0 : 0.0;
  }
  r.fit = fit_logistic(X, y);
  r.diverged = r.fit.diverged;
  if (r.diverged) return r;
  r.intercept = r.fit.beta(0);
  r.beta_distance = r.fit.beta(1);
  r.beta_strength = r.fit.beta(2);
  r.se_distance = r.fit.se(1);
  r.se_strength = r.fit.se(2);
  r.p_distance = r.fit.p_value(1);
  r.p_strength = r.fit.p_value(2);
  return r;
}

// ---------------------------------------------------------------------------
// H3

struct Move {
  int from = 0;
  int to = 0;
};

struct RankResult {
  int k = 0;                 // attractors actually used
  bool comparable = true;    // false when fewer than fixed_k were available
  std::vector<long> histogram;  // index r-1 counts destinations of rank r
  long included = 0;
  long excluded = 0;         // origin or destination outside the top k
  std::optional<double> fraction_rank_le5;
  Warnings warnings;
};

/// Ranks of move destinations among the other top-k attractors by distance
/// from the origin attractor (1 = nearest; ties by attractor rank).
inline RankResult h3_rank_moves(const std::vector<Move>& moves, std::vector<Attractor> attractors, int fixed_k = 20) {
  RankResult out;
  std::sort(attractors.begin(), attractors.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  if (static_cast<int>(attractors.size()) < fixed_k) {
    out.comparable = false;
    out.warnings.add("only " + std::to_string(attractors.size()) + " attractors; fewer than " +
                     std::to_string(fixed_k) + ", results not comparable");
  } else {
    attractors.resize(static_cast<std::size_t>(fixed_k));
  }
  out.k = static_cast<int>(attractors.size());
  out.histogram.assign(static_cast<std::size_t>(std::max(out.k - 1, 0)), 0);
  std::map<int, std::size_t> pos;
  for (std::size_t i = 0; i < attractors.size(); ++i) pos[attractors[i].id] = i;
  // rank_of[o][d]: rank of destination d seen from origin o
  const auto k = attractors.size();
  std::vector<std::vector<int>> rank_of(k, std::vector<int>(k, 0));
  for (std::size_t o = 0; o < k; ++o) {
    std::vector<std::size_t> others;
    for (std::size_t d = 0; d < k; ++d)
      if (d != o) others.push_back(d);
    std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
      const double da = std::hypot(attractors[a].x - attractors[o].x, attractors[a].y - attractors[o].y);
      const double db = std::hypot(attractors[b].x - attractors[o].x, attractors[b].y - attractors[o].y);
      return da < db;
    });
    for (std::size_t r = 0; r < others.size(); ++r) rank_of[o][others[r]] = static_cast<int>(r) + 1;
  }
  long le5 = 0;
  for (const auto& m : moves) {
    const auto o = pos.find(m.from);
    const auto d = pos.find(m.to);
    if (o == pos.end() || d == pos.end() || m.from == m.to) {
      ++out.excluded;
      continue;
    }
    const int r = rank_of[o->second][d->second];
    ++out.histogram[static_cast<std::size_t>(r - 1)];
    ++out.included;
    if (r <= 5) ++le5;
  }
  if (out.included > 0) out.fraction_rank_le5 = static_cast<double>(le5) / static_cast<double>(out.included);
  if (out.excluded > 0)
    out.warnings.add(std::to_string(out.excluded) + " moves excluded (attractor outside the top " +
                     std::to_string(out.k) + ")");
  return out;
}

/// H3 over landscape points: every point is re-assigned to the nearest of
/// the top-k ranked peaks (no magnitude cutoff) and the moves between
/// consecutive windows are ranked.
inline RankResult h3_transition_ranks(const std::vector<LandscapePoint>& points,
                                      const std::vector<Attractor>& ranked_peaks, int fixed_k = 20) {
  if (ranked_peaks.empty()) {
    RankResult r;
    r.comparable = false;
    r.warnings.add("no density peaks; rank analysis skipped");
    return r;
  }
  std::vector<Attractor> top = ranked_peaks;
  std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  if (static_cast<int>(top.size()) > fixed_k) top.resize(static_cast<std::size_t>(fixed_k));
  const auto assigned = assign_attractors(points, top);
  std::vector<Move> moves;
  for (std::size_t i = 1; i < assigned.size(); ++i)
    if (assigned[i].user_id == assigned[i - 1].user_id && assigned[i].attractor != assigned[i - 1].attractor)
      moves.push_back({assigned[i - 1].attractor, assigned[i].attractor});
  return h3_rank_moves(moves, top, fixed_k);
}

// ---------------------------------------------------------------------------
// H4

/// Mean distance users travel between consecutive emitted windows.
inline std::optional<double> mean_displacement(const std::vector<LandscapePoint>& points) {
  std::vector<const LandscapePoint*> sorted;
  for (const auto& p : points) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return std::tie(a->user_id, a->t) < std::tie(b->user_id, b->t); });
  double sum = 0.0;
  long n = 0;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->user_id != sorted[i - 1]->user_id) continue;
    sum += std::hypot(sorted[i]->x - sorted[i - 1]->x, sorted[i]->y - sorted[i - 1]->y);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

struct StanceHomophily {
  std::vector<double> fractions;  // one per included (user, window)
  std::optional<double> mean;
  Histogram histogram{0.0, 1.0, 10};
};

struct HomophilyResult {
  double radius = 0.0;
  StanceHomophily believer;
  StanceHomophily skeptic;
  long excluded_no_neighbors = 0;
  long excluded_unclustered = 0;
  Warnings warnings;
};

/// For each stanced point: up to k nearest same-window stanced points within
/// `radius` (default: the population mean displacement), and the fraction of
/// them sharing the point's stance.
inline HomophilyResult h4_homophily(const std::vector<LandscapePoint>& points, int k_neighbors = 20,
                                    std::optional<double> radius = std::nullopt) {
  HomophilyResult out;
  if (!radius) radius = mean_displacement(points);
  if (!radius) throw DataError("homophily radius undefined: no user appears in two windows");
  out.radius = *radius;
  std::map<long, std::vector<const LandscapePoint*>> by_window;
  std::set<Stance> present;
  for (const auto& p : points) {
    if (p.stance == Stance::Unclustered) {
      ++out.excluded_unclustered;
      continue;
    }
    by_window[p.t].push_back(&p);
    present.insert(p.stance);
  }
  if (present.size() < 2) out.warnings.add("fewer than two stances present");
  for (auto& [t, pts] : by_window) {
    std::sort(pts.begin(), pts.end(), [](const auto* a, const auto* b) {
      return std::tie(a->x, a->y, a->user_id) < std::tie(b->x, b->y, b->user_id);
    });
    std::vector<std::pair<double, const LandscapePoint*>> cand;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto* p = pts[i];
      cand.clear();
      // points are sorted by x, so only a window of indices can be in range
      const auto scan = [&](std::size_t j) {
        const double d = std::hypot(pts[j]->x - p->x, pts[j]->y - p->y);
        if (d <= *radius) cand.emplace_back(d, pts[j]);
      };
      for (std::size_t j = i; j-- > 0 && p->x - pts[j]->x <= *radius;) scan(j);
      for (std::size_t j = i + 1; j < pts.size() && pts[j]->x - p->x <= *radius; ++j) scan(j);
      if (cand.empty()) {
        ++out.excluded_no_neighbors;
        continue;
      }
      const auto keep = std::min(cand.size(), static_cast<std::size_t>(k_neighbors));
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(),
                        [](const auto& a, const auto& b) {
                          return std::tie(a.first, a.second->user_id) < std::tie(b.first, b.second->user_id);
                        });
      long same = 0;
      for (std::size_t j = 0; j < keep; ++j) same += cand[j].second->stance == p->stance;
      const double frac = static_cast<double>(same) / static_cast<double>(keep);
      auto& s = p->stance == Stance::Believer ? out.believer : out.skeptic;
      s.fractions.push_back(frac);
      s.histogram.add(frac);
    }
  }
  for (auto* s : {&out.believer, &out.skeptic}) {
    if (s->fractions.empty()) continue;
    double sum = 0.0;
    for (double f : s->fractions) sum += f;
    s->mean = sum / static_cast<double>(s->fractions.size());
  }
  if (out.excluded_no_neighbors > 0)
    out.warnings.add(std::to_string(out.excluded_no_neighbors) + " points without neighbours in radius");
  return out;
}

// ---------------------------------------------------------------------------
// one configuration, end to end

struct EvaluationParams {
  double magnitude_cutoff = 0.2;
  long min_periods = 10;
  int fixed_k = 20;
  int k_neighbors = 20;
  bool include_gap_transitions = true;
};

struct Evaluation {
  std::vector<Attractor> attractors;
  std::vector<AttractorAssignment> assignments;
  StabilityResult h1;
  std::vector<TransitionEvent> events;
  std::optional<RegressionResult> h2;
  RankResult h3;
  std::optional<HomophilyResult> h4;
  Warnings warnings;
};

inline Evaluation evaluate_landscape(const std::vector<LandscapePoint>& points, const DensityGrid& grid,
                                     const EvaluationParams& p = {}) {
  Evaluation ev;
  const auto peaks = find_maxima(grid);
  ev.attractors = threshold_attractors(peaks, p.magnitude_cutoff, &ev.warnings);
  if (!ev.attractors.empty()) {
    ev.assignments = assign_attractors(points, ev.attractors);
    ev.h1 = h1_stability(ev.assignments, p.min_periods);
    ev.warnings.append(ev.h1.warnings);
    ev.events = transition_events(ev.assignments, ev.attractors, p.include_gap_transitions);
    try {
      ev.h2 = h2_regression(ev.events);
      if (ev.h2->diverged) ev.warnings.add("H2 regression diverged (separation)");
    } catch (const DataError& e) {
      ev.warnings.add(std::string("H2 skipped: ") + e.what());
    }
  } else {
    ev.warnings.add("no attractors; H1 and H2 skipped");
  }
  ev.h3 = h3_transition_ranks(points, threshold_attractors(peaks, -std::numeric_limits<double>::infinity()),
                              p.fixed_k);
  ev.warnings.append(ev.h3.warnings);
  try {
    ev.h4 = h4_homophily(points, p.k_neighbors);
    ev.warnings.append(ev.h4->warnings);
  } catch (const DataError& e) {
    ev.warnings.add(std::string("H4 skipped: ") + e.what());
  }
  return ev;
}

// ---------------------------------------------------------------------------
// summary table

struct ReportTable {
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::map<std::pair<std::string, std::string>, double> cells;  // (row, column)

  void set(const std::string& row, const std::string& col, std::optional<double> v) {
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
    if (v) cells[{row, col}] = *v;
  }
  std::optional<double> get(const std::string& row, const std::string& col) const {
    const auto it = cells.find({row, col});
    if (it == cells.end()) return std::nullopt;
    return it->second;
  }
};

inline const std::vector<std::string>& report_rows() {
  static const std::vector<std::string> rows = {
      "Attractors (> cutoff)", "H1 Stability (mean)",     "H2 Distance (beta)",
      "H2 Distance (p)",       "H2 Strength (beta)",      "H2 Strength (p)",
      "H2 Transitions (n)",    "H3 Rank <= 5 (fraction)", "Believer homophily (mean)",
      "Skeptic homophily (mean)"};
  return rows;
}

/// Adds one column (e.g. a window size in days) for an evaluated
/// configuration. Statistics that could not be computed stay absent.
inline void add_report_column(ReportTable& table, const std::string& column, const Evaluation& ev) {
  const auto& r = report_rows();
  table.set(r[0], column, static_cast<double>(ev.attractors.size()));
  table.set(r[1], column, ev.h1.mean);
  const bool h2 = ev.h2 && !ev.h2->diverged;
  table.set(r[2], column, h2 ? std::optional(ev.h2->beta_distance) : std::nullopt);
  table.set(r[3], column, h2 ? std::optional(ev.h2->p_distance) : std::nullopt);
  table.set(r[4], column, h2 ? std::optional(ev.h2->beta_strength) : std::nullopt);
  table.set(r[5], column, h2 ? std::optional(ev.h2->p_strength) : std::nullopt);
  table.set(r[6], column, ev.h2 ? std::optional(static_cast<double>(ev.h2->n_obs)) : std::nullopt);
  table.set(r[7], column, ev.h3.fraction_rank_le5);
  table.set(r[8], column, ev.h4 ? ev.h4->believer.mean : std::nullopt);
  table.set(r[9], column, ev.h4 ? ev.h4->skeptic.mean : std::nullopt);
}

/// Mean of a row over the columns where it is present.
inline std::optional<double> row_mean(const ReportTable& t, const std::string& row) {
  double sum = 0.0;
  long n = 0;
  for (const auto& c : t.columns)
    if (const auto v = t.get(row, c)) {
      sum += *v;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

inline std::string format_cell(std::optional<double> v) {
  if (!v) return "NA";
  std::ostringstream s;
  if (*v == std::round(*v) && std::abs(*v) >= 1) s << std::llround(*v);  // counts
  else if (std::abs(*v) != 0 && std::abs(*v) < 1e-3) s << std::scientific << std::setprecision(2) << *v;
  else s << std::fixed << std::setprecision(3) << *v;
  return s.str();
}

inline void write_report_csv(std::ostream& out, const ReportTable& t) {
  out << "statistic";
  for (const auto& c : t.columns) out << ',' << c;
  out << '\n';
  for (const auto& r : t.rows) {
    out << '"' << r << '"';
    for (const auto& c : t.columns) {
      const auto v = t.get(r, c);
      out << ',';
      if (v) out << format_double(*v);
      else out << "NA";
    }
    out << '\n';
  }
}

inline void write_report_text(std::ostream& out, const ReportTable& t, const std::string& header = "Window size (days)") {
  std::size_t w0 = header.size();
  for (const auto& r : t.rows) w0 = std::max(w0, r.size());
  std::vector<std::size_t> widths;
  for (const auto& c : t.columns) {
    std::size_t w = c.size();
    for (const auto& r : t.rows) w = std::max(w, format_cell(t.get(r, c)).size());
    widths.push_back(w);
  }
  out << std::left << std::setw(static_cast<int>(w0)) << header;
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    out << "  " << std::right << std::setw(static_cast<int>(widths[j])) << t.columns[j];
  out << '\n';
  for (const auto& r : t.rows) {
    out << std::left << std::setw(static_cast<int>(w0)) << r;
    for (std::size_t j = 0; j < t.columns.size(); ++j)
      out << "  " << std::right << std::setw(static_cast<int>(widths[j])) << format_cell(t.get(r, t.columns[j]));
    out << '\n';
  }
}

inline void write_stability_csv(std::ostream& out, const StabilityResult& r) {
  out << "user_id,periods,distinct_attractors,stability\n";
  for (const auto& s : r.records)
    out << s.user_id << ',' << s.periods << ',' << s.distinct_attractors << ',' << format_double(s.stability) << '\n';
}

inline void write_events_csv(std::ostream& out, const std::vector<TransitionEvent>& events) {
  out << "user_id,from_t,to_t,from_attractor,to_attractor,from_distance,from_strength,moved,gap\n";
  for (const auto& e : events)
    out << e.user_id << ',' << e.from_t << ',' << e.to_t << ',' << e.from_attractor << ',' << e.to_attractor << ','
        << format_double(e.from_distance) << ',' << format_double(e.from_strength) << ',' << e.moved << ','
        << e.gap << '\n';
}

inline void write_histogram_csv(std::ostream& out, const std::string& name, const Histogram& h) {
  const auto bins = h.counts.size();
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = h.lo + (h.hi - h.lo) * static_cast<double>(b) / static_cast<double>(bins);
    const double hi = h.lo + (h.hi - h.lo) * static_cast<double>(b + 1) / static_cast<double>(bins);
    out << name << ',' << format_double(lo) << ',' << format_double(hi) << ',' << h.counts[b] << '\n';
  }
}

}  // namespace blf
