#pragma once
// The belief landscape: 2D projection of belief vectors, bivariate Gaussian
// kernel density on a regular grid, peak detection by the discrete
// second-difference sign test, and attractor assignment.

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "core.hpp"
#include "density.hpp"
#include "trajectory.hpp"

namespace blf {

struct LandscapePoint {
  std::string user_id;
  long t = 0;
  double x = 0.0;
  double y = 0.0;
  Stance stance = Stance::Unclustered;
};

struct LandscapeProjection {
  double train_fraction = 0.3;
  // reference manifold-learning grid, recorded with each run
  int neighbors = 500;
  double min_dist = 0.3;
  std::uint64_t seed = 1;
};

/// Dense matrix of belief vectors over cluster dimensions 0..dims-1.
inline Matrix dense_vectors(const std::vector<BeliefVector>& vs, int dims) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(vs.size()), dims);
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (const auto& [c, w] : vs[i].vector) {
      if (c < 0 || c >= dims) throw DataError("belief vector cluster id out of range");
      m(static_cast<Eigen::Index>(i), c) = w;
    }
  return m;
}

inline int vector_dims(const std::vector<BeliefVector>& vs) {
  int d = 0;
  for (const auto& v : vs)
    if (!v.vector.empty()) d = std::max(d, v.vector.rbegin()->first + 1);
  return d;
}

/// Principal-component projection fit on a seeded random `train_fraction`
/// of the vectors and applied to all of them.
inline std::vector<LandscapePoint> project_vectors(const std::vector<BeliefVector>& vs,
                                                   const LandscapeProjection& p, int dims = 0,
                                                   const UserStances* stances = nullptr) {
  if (vs.empty()) throw DataError("no belief vectors to project");
  if (!(p.train_fraction > 0 && p.train_fraction <= 1))
    throw ConfigError("train_fraction must lie in (0, 1]");
  if (dims == 0) dims = vector_dims(vs);
  if (dims < 2) throw ConfigError("belief vectors need >= 2 dimensions to project to the plane");
  const Matrix all = dense_vectors(vs, dims);
  std::vector<Eigen::Index> idx(vs.size());
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const auto n_train = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(p.train_fraction * static_cast<double>(vs.size()))));
  if (n_train < vs.size()) {
    std::mt19937_64 rng(p.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(n_train);
    std::sort(idx.begin(), idx.end());
  }
  Matrix train(static_cast<Eigen::Index>(idx.size()), dims);
  for (std::size_t r = 0; r < idx.size(); ++r) train.row(static_cast<Eigen::Index>(r)) = all.row(idx[r]);
  const Matrix xy = PcaModel::fit(train, 2).transform(all);
  std::vector<LandscapePoint> out(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    auto& pt = out[i];
    pt.user_id = vs[i].user_id;
    pt.t = vs[i].t;
    pt.x = xy(static_cast<Eigen::Index>(i), 0);
    pt.y = xy(static_cast<Eigen::Index>(i), 1);
    if (stances) {
      const auto it = stances->find(pt.user_id);
      if (it != stances->end()) pt.stance = it->second;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// bandwidth and density

/// Quantile with linear interpolation between order statistics (the
/// default definition in R and numpy).
inline double quantile_linear(std::vector<double> v, double q) {
  if (v.empty()) throw DataError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct BandwidthParts {
  double sd = 0.0;
  double iqr = 0.0;
  std::size_t n = 0;
};

inline BandwidthParts bandwidth_parts(const std::vector<double>& samples) {
  return {sample_sd(samples), quantile_linear(samples, 0.75) - quantile_linear(samples, 0.25),
          samples.size()};
}

/// h = 4 * 1.06 * min(sd, IQR / 1.34) * n^(-1/5). Throws on a degenerate
/// sample (zero spread by either measure).
inline double bandwidth(const std::vector<double>& samples) {
  if (samples.size() < 2) throw DataError("bandwidth needs at least two samples");
  const auto p = bandwidth_parts(samples);
  if (!(p.sd > 0) || !(p.iqr > 0))
    throw DataError("degenerate sample: standard deviation or inter-quartile range is zero");
  return 4.0 * 1.06 * std::min(p.sd, p.iqr / 1.34) * std::pow(static_cast<double>(p.n), -0.2);
}

/// As `bandwidth`, but when exactly one spread measure is zero the other is
/// used (with a warning). Still throws when both are zero.
inline double bandwidth_with_fallback(const std::vector<double>& samples, Warnings& w,
                                      const std::string& axis) {
  if (samples.size() < 2) throw DataError("bandwidth needs at least two samples");
  const auto p = bandwidth_parts(samples);
  double spread = 0.0;
  if (p.sd > 0 && p.iqr > 0) spread = std::min(p.sd, p.iqr / 1.34);
  else if (p.sd > 0) {
    spread = p.sd;
    w.add(axis + " axis: zero inter-quartile range, bandwidth from standard deviation");
  } else if (p.iqr > 0) {
    spread = p.iqr / 1.34;
    w.add(axis + " axis: zero standard deviation, bandwidth from inter-quartile range");
  } else {
    throw DataError("degenerate " + axis + " axis: all samples equal");
  }
  return 4.0 * 1.06 * spread * std::pow(static_cast<double>(p.n), -0.2);
}

struct DensityGrid {
  int n_grid = 100;
  std::vector<double> gx, gy;  // cell centres
  double h_x = 0.0, h_y = 0.0;
  Matrix values;               // values(i, j) at (gx[i], gy[j])
  std::size_t n_samples = 0;

  double x_min() const { return gx.front(); }
  double x_max() const { return gx.back(); }
  double y_min() const { return gy.front(); }
  double y_max() const { return gy.back(); }
};

struct KdeParams {
  int n_grid = 100;
  double margin_bandwidths = 1.0;  // grid extends this many bandwidths past the data
  std::optional<std::array<double, 4>> limits;  // x_lo, x_hi, y_lo, y_hi overrides the margin
  std::optional<double> h_x, h_y;               // bandwidth overrides
};

namespace landscape_detail {

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = (lo + hi) / 2;
    return v;
  }
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace landscape_detail

/// Bivariate product-Gaussian kernel density on an n_grid x n_grid lattice:
///   f(x, y) = sum_s phi((x - x_s)/h_x) phi((y - y_s)/h_y) / (n h_x h_y)
/// with n the number of samples. Samples are put in canonical order first so
/// the surface is bit-for-bit independent of input order.
inline DensityGrid kde2d(const std::vector<std::pair<double, double>>& points, const KdeParams& p = {},
                         Warnings* warnings = nullptr) {
  using namespace landscape_detail;
  if (points.size() < 2) throw DataError("kde2d needs at least two points");
  if (p.n_grid < 2) throw ConfigError("n_grid must be >= 2");
  auto pts = points;
  std::sort(pts.begin(), pts.end());
  std::vector<double> xs(pts.size()), ys(pts.size());
  for (std::size_t s = 0; s < pts.size(); ++s) {
    xs[s] = pts[s].first;
    ys[s] = pts[s].second;
  }
  Warnings local;
  Warnings& w = warnings ? *warnings : local;
  DensityGrid g;
  g.n_grid = p.n_grid;
  g.n_samples = pts.size();
  g.h_x = p.h_x.value_or(0.0) > 0 ? *p.h_x : bandwidth_with_fallback(xs, w, "x");
  g.h_y = p.h_y.value_or(0.0) > 0 ? *p.h_y : bandwidth_with_fallback(ys, w, "y");
  if (p.limits) {
    const auto& l = *p.limits;
    g.gx = linspace(l[0], l[1], p.n_grid);
    g.gy = linspace(l[2], l[3], p.n_grid);
  } else {
    const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
    const auto [ylo, yhi] = std::minmax_element(ys.begin(), ys.end());
    g.gx = linspace(*xlo - p.margin_bandwidths * g.h_x, *xhi + p.margin_bandwidths * g.h_x, p.n_grid);
    g.gy = linspace(*ylo - p.margin_bandwidths * g.h_y, *yhi + p.margin_bandwidths * g.h_y, p.n_grid);
  }
  const auto n = static_cast<Eigen::Index>(pts.size());
  const Eigen::Index m = p.n_grid;
  Matrix ax(m, n), ay(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index s = 0; s < n; ++s) {
      const double u = (g.gx[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(s)]) / g.h_x;
      const double v = (g.gy[static_cast<std::size_t>(i)] - ys[static_cast<std::size_t>(s)]) / g.h_y;
      ax(i, s) = kInvSqrt2Pi * std::exp(-0.5 * u * u);
      ay(i, s) = kInvSqrt2Pi * std::exp(-0.5 * v * v);
    }
  g.values.noalias() = ax * ay.transpose();
  g.values /= static_cast<double>(n) * g.h_x * g.h_y;
  return g;
}

inline DensityGrid kde2d(const std::vector<LandscapePoint>& points, const KdeParams& p = {},
                         Warnings* warnings = nullptr) {
  std::vector<std::pair<double, double>> xy;
  xy.reserve(points.size());
  for (const auto& pt : points) xy.emplace_back(pt.x, pt.y);
  return kde2d(xy, p, warnings);
}

// ---------------------------------------------------------------------------
// peaks and attractors

struct Peak {
  int ix = 0, iy = 0;
  double x = 0.0, y = 0.0;
  double magnitude = 0.0;
};

/// Positions i (interior) where diff(sign(diff(v))) == -2: a strict rise
/// followed by a strict fall. Plateaus never qualify.
inline std::vector<int> maxima_1d(const std::vector<double>& v) {
  std::vector<int> out;
  const auto sgn = [](double d) { return (d > 0) - (d < 0); };
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (sgn(v[i + 1] - v[i]) - sgn(v[i] - v[i - 1]) == -2) out.push_back(static_cast<int>(i));
  return out;
}

/// Cells that are 1D maxima along both their row and their column.
inline std::vector<Peak> find_maxima(const DensityGrid& g) {
  const auto m = static_cast<int>(g.values.rows());
  const auto k = static_cast<int>(g.values.cols());
  std::vector<std::vector<bool>> along_x(static_cast<std::size_t>(m), std::vector<bool>(static_cast<std::size_t>(k)));
  std::vector<double> line;
  for (int j = 0; j < k; ++j) {
    line.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) line[static_cast<std::size_t>(i)] = g.values(i, j);
    for (int i : maxima_1d(line)) along_x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = true;
  }
  std::vector<Peak> out;
  for (int i = 0; i < m; ++i) {
    line.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) line[static_cast<std::size_t>(j)] = g.values(i, j);
    for (int j : maxima_1d(line))
      if (along_x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
        out.push_back({i, j, g.gx[static_cast<std::size_t>(i)], g.gy[static_cast<std::size_t>(j)], g.values(i, j)});
  }
  return out;
}

struct Attractor {
  int id = 0;  // equals rank
  int grid_ix = 0, grid_iy = 0;
  double x = 0.0, y = 0.0;
  double magnitude = 0.0;
  int rank = 0;  // 1 = strongest
};

/// Keeps peaks with magnitude strictly above the cutoff, ranked by
/// descending magnitude (ties by grid position).
inline std::vector<Attractor> threshold_attractors(std::vector<Peak> peaks, double cutoff = 0.2,
                                                   Warnings* warnings = nullptr) {
  peaks.erase(std::remove_if(peaks.begin(), peaks.end(), [&](const Peak& p) { return !(p.magnitude > cutoff); }),
              peaks.end());
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    return std::tie(a.ix, a.iy) < std::tie(b.ix, b.iy);
  });
  std::vector<Attractor> out;
  for (std::size_t r = 0; r < peaks.size(); ++r) {
    const auto& p = peaks[r];
    const int rank = static_cast<int>(r) + 1;
    out.push_back({rank, p.ix, p.iy, p.x, p.y, p.magnitude, rank});
  }
  if (out.empty() && warnings) warnings->add("no density peak exceeds the magnitude cutoff");
  return out;
}

struct NearestAttractor {
  int id = 0;
  double distance = 0.0;
};

/// Euclidean nearest attractor; ties go to the better-ranked attractor.
inline NearestAttractor nearest_attractor(double x, double y, const std::vector<Attractor>& attractors) {
  if (attractors.empty()) throw DataError("nearest_attractor: no attractors");
  const Attractor* best = nullptr;
  double best_d = 0.0;
  for (const auto& a : attractors) {
    const double d = std::hypot(x - a.x, y - a.y);
    if (!best || d < best_d || (d == best_d && a.rank < best->rank)) {
      best = &a;
      best_d = d;
    }
  }
  return {best->id, best_d};
}

inline NearestAttractor nearest_attractor(const LandscapePoint& p, const std::vector<Attractor>& attractors) {
  return nearest_attractor(p.x, p.y, attractors);
}

// ---------------------------------------------------------------------------
// CSV output

inline void write_grid_csv(std::ostream& out, const DensityGrid& g) {
  out << "i,j,x,y,value\n";
  for (int i = 0; i < g.n_grid; ++i)
    for (int j = 0; j < g.n_grid; ++j)
      out << i << ',' << j << ',' << format_double(g.gx[static_cast<std::size_t>(i)]) << ','
          << format_double(g.gy[static_cast<std::size_t>(j)]) << ',' << format_double(g.values(i, j)) << '\n';
}

inline void write_attractors_csv(std::ostream& out, const std::vector<Attractor>& as) {
  out << "id,x,y,magnitude,rank\n";
  for (const auto& a : as)
    out << a.id << ',' << format_double(a.x) << ',' << format_double(a.y) << ','
        << format_double(a.magnitude) << ',' << a.rank << '\n';
}

inline void write_points_csv(std::ostream& out, const std::vector<LandscapePoint>& pts) {
  out << "user_id,t,x,y,stance\n";
  for (const auto& p : pts)
    out << p.user_id << ',' << p.t << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
        << to_string(p.stance) << '\n';
}

namespace landscape_detail {

inline std::vector<std::vector<std::string>> read_csv_rows(std::istream& in, const std::string& what,
                                                           std::size_t columns) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;  // header
    auto cols = text::split(line, ',');
    if (cols.size() != columns)
      throw DataError(what + " line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                      " columns");
    rows.push_back(std::move(cols));
  }
  return rows;
}

inline double to_real(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw DataError(what + ": bad number '" + s + "'");
  return v;
}

inline long to_long(const std::string& s, const std::string& what) {
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw DataError(what + ": bad integer '" + s + "'");
  return v;
}

}  // namespace landscape_detail

/// Inverse of write_grid_csv (bandwidths are not stored and read back as 0).
inline DensityGrid read_grid_csv(std::istream& in) {
  using namespace landscape_detail;
  const auto rows = read_csv_rows(in, "grid", 5);
  const auto n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rows.size()))));
  if (n < 2 || static_cast<std::size_t>(n) * static_cast<std::size_t>(n) != rows.size())
    throw DataError("grid: expected a square lattice");
  DensityGrid g;
  g.n_grid = n;
  g.gx.assign(static_cast<std::size_t>(n), 0.0);
  g.gy.assign(static_cast<std::size_t>(n), 0.0);
  g.values = Matrix::Zero(n, n);
  for (const auto& r : rows) {
    const auto i = to_long(r[0], "grid"), j = to_long(r[1], "grid");
    if (i < 0 || j < 0 || i >= n || j >= n) throw DataError("grid: cell index out of range");
    g.gx[static_cast<std::size_t>(i)] = to_real(r[2], "grid");
    g.gy[static_cast<std::size_t>(j)] = to_real(r[3], "grid");
    g.values(i, j) = to_real(r[4], "grid");
  }
  return g;
}

inline std::vector<Attractor> read_attractors_csv(std::istream& in) {
  using namespace landscape_detail;
  std::vector<Attractor> out;
  for (const auto& r : read_csv_rows(in, "attractors", 5)) {
    Attractor a;
    a.id = static_cast<int>(to_long(r[0], "attractors"));
    a.x = to_real(r[1], "attractors");
    a.y = to_real(r[2], "attractors");
    a.magnitude = to_real(r[3], "attractors");
    a.rank = static_cast<int>(to_long(r[4], "attractors"));
    out.push_back(a);
  }
  return out;
}

inline std::vector<LandscapePoint> read_points_csv(std::istream& in) {
  using namespace landscape_detail;
  std::vector<LandscapePoint> out;
  for (const auto& r : read_csv_rows(in, "points", 5)) {
    LandscapePoint p;
    p.user_id = r[0];
    p.t = to_long(r[1], "points");
    p.x = to_real(r[2], "points");
    p.y = to_real(r[3], "points");
    const auto s = parse_stance(r[4]);
    if (!s) throw DataError("points: bad stance '" + r[4] + "'");
    p.stance = *s;
    out.push_back(std::move(p));
  }
  return out;
}

/// Externally computed landscape coordinates: user_id,t,x,y.
inline std::vector<LandscapePoint> read_landscape_coordinates(std::istream& in, const UserStances* stances = nullptr) {
  using namespace landscape_detail;
  std::vector<LandscapePoint> out;
  for (const auto& r : read_csv_rows(in, "landscape coordinates", 4)) {
    LandscapePoint p;
    p.user_id = r[0];
    p.t = to_long(r[1], "landscape coordinates");
    p.x = to_real(r[2], "landscape coordinates");
    p.y = to_real(r[3], "landscape coordinates");
    if (stances) {
      const auto it = stances->find(p.user_id);
      if (it != stances->end()) p.stance = it->second;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace blf
