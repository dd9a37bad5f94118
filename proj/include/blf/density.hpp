#pragma once
// Built-in projection and density-clustering baselines shared by stance
// detection and belief clustering: principal-component projection and a
// noise-aware radius/minimum-neighbour density clustering.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"

namespace blf {

using Matrix = Eigen::MatrixXd;  // one observation per row
using Vector = Eigen::VectorXd;

/// Principal-component model. Component signs are fixed so that the entry
/// of largest magnitude in each axis is positive, which makes fits
/// reproducible across runs.
class PcaModel {
 public:
  PcaModel() = default;

  static PcaModel fit(const Matrix& rows, int components) {
    if (rows.cols() < components)
      throw ConfigError("projection needs input dimension >= " + std::to_string(components) +
                        ", got " + std::to_string(rows.cols()));
    if (rows.rows() < 1) throw DataError("projection needs at least one observation");
    PcaModel m;
    m.mean_ = rows.colwise().mean();
    const Matrix centered = rows.rowwise() - m.mean_.transpose();
    const double denom = rows.rows() > 1 ? static_cast<double>(rows.rows() - 1) : 1.0;
    const Matrix cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const auto d = rows.cols();
    m.axes_.resize(d, components);
    m.variance_.resize(components);
    for (int k = 0; k < components; ++k) {
      Vector axis = eig.eigenvectors().col(d - 1 - k);
      Eigen::Index arg = 0;
      axis.cwiseAbs().maxCoeff(&arg);
      if (axis(arg) < 0) axis = -axis;
      m.axes_.col(k) = axis;
      m.variance_(k) = std::max(0.0, eig.eigenvalues()(d - 1 - k));
    }
    return m;
  }

  Matrix transform(const Matrix& rows) const {
    return (rows.rowwise() - mean_.transpose()) * axes_;
  }

  const Vector& explained_variance() const { return variance_; }
  const Matrix& axes() const { return axes_; }

 private:
  Vector mean_;
  Matrix axes_;
  Vector variance_;
};

struct DensityParams {
  int min_samples = 100;       // neighbours (self included) for a core point
  int min_cluster_size = 200;  // smaller clusters dissolve into noise
  double eps = 0.0;            // neighbourhood radius; <= 0 selects eps_fraction
  double eps_fraction = 0.05;  // of the bounding-box diagonal
};

struct DensityClustering {
  std::vector<int> labels;  // kNoise or 0..num_clusters-1
  int num_clusters = 0;
  double eps = 0.0;
  std::size_t noise() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
  }
};

inline double bounding_diagonal(const Matrix& pts) {
  if (pts.rows() == 0) return 0.0;
  return (pts.colwise().maxCoeff() - pts.colwise().minCoeff()).norm();
}

/// Density clustering: points with at least `min_samples` neighbours within
/// `eps` are core points; clusters are the connected components of core
/// points plus the border points within reach of them. Clusters smaller than
/// `min_cluster_size` become noise. Labels are numbered by smallest member
/// index; the partition itself is independent of input order.
inline DensityClustering density_cluster(const Matrix& pts, const DensityParams& params) {
  if (params.min_samples < 1) throw ConfigError("min_samples must be >= 1");
  if (params.min_cluster_size < 1) throw ConfigError("min_cluster_size must be >= 1");
  DensityClustering out;
  const auto n = static_cast<std::size_t>(pts.rows());
  out.labels.assign(n, kNoise);
  if (n == 0) return out;
  out.eps = params.eps > 0 ? params.eps : params.eps_fraction * bounding_diagonal(pts);
  const double eps = out.eps;
  const double eps2 = eps * eps;

  std::vector<std::size_t> by_x(n);
  std::iota(by_x.begin(), by_x.end(), std::size_t{0});
  std::stable_sort(by_x.begin(), by_x.end(),
                   [&](std::size_t a, std::size_t b) { return pts(a, 0) < pts(b, 0); });
  std::vector<std::size_t> pos(n);
  for (std::size_t r = 0; r < n; ++r) pos[by_x[r]] = r;

  const auto dim = pts.cols();
  const auto dist2 = [&](std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double d = pts(static_cast<Eigen::Index>(a), k) - pts(static_cast<Eigen::Index>(b), k);
      acc += d * d;
    }
    return acc;
  };
  // visits every point within eps of i; `visit` returning false stops early
  const auto for_neighbours = [&](std::size_t i, auto&& visit) {
    const double xi = pts(static_cast<Eigen::Index>(i), 0);
    for (std::size_t r = pos[i] + 1; r-- > 0;) {
      if (xi - pts(static_cast<Eigen::Index>(by_x[r]), 0) > eps) break;
      if (dist2(i, by_x[r]) <= eps2 && !visit(by_x[r])) return;
    }
    for (std::size_t r = pos[i] + 1; r < n; ++r) {
      if (pts(static_cast<Eigen::Index>(by_x[r]), 0) - xi > eps) break;
      if (dist2(i, by_x[r]) <= eps2 && !visit(by_x[r])) return;
    }
  };

  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for_neighbours(i, [&](std::size_t) { return ++count < params.min_samples; });
    core[i] = count >= params.min_samples;
  }

  // connected components over core points only
  std::vector<int> raw(n, kNoise);
  int next = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || raw[seed] != kNoise) continue;
    const int id = next++;
    std::deque<std::size_t> queue{seed};
    raw[seed] = id;
    while (!queue.empty()) {
      const auto p = queue.front();
      queue.pop_front();
      for_neighbours(p, [&](std::size_t q) {
        if (core[q] && raw[q] == kNoise) {
          raw[q] = id;
          queue.push_back(q);
        }
        return true;
      });
    }
  }
  // border points join their nearest core point (ties: smaller coordinates),
  // so the partition does not depend on input order
  const auto coord_less = [&](std::size_t a, std::size_t b) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double xa = pts(static_cast<Eigen::Index>(a), k), xb = pts(static_cast<Eigen::Index>(b), k);
      if (xa != xb) return xa < xb;
    }
    return false;
  };
  std::vector<int> border(n, kNoise);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    std::size_t best = n;
    double best_d = 0.0;
    for_neighbours(i, [&](std::size_t q) {
      if (!core[q]) return true;
      const double d = dist2(i, q);
      if (best == n || d < best_d || (d == best_d && coord_less(q, best))) {
        best = q;
        best_d = d;
      }
      return true;
    });
    if (best != n) border[i] = raw[best];
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!core[i]) raw[i] = border[i];

  std::vector<std::size_t> sizes(static_cast<std::size_t>(next), 0);
  for (int l : raw)
    if (l != kNoise) ++sizes[static_cast<std::size_t>(l)];
  std::vector<int> remap(static_cast<std::size_t>(next), kNoise);
  for (std::size_t i = 0; i < n; ++i) {
    const int l = raw[i];
    if (l == kNoise || static_cast<int>(sizes[static_cast<std::size_t>(l)]) < params.min_cluster_size)
      continue;
    auto& r = remap[static_cast<std::size_t>(l)];
    if (r == kNoise) r = out.num_clusters++;
    out.labels[i] = r;
  }
  return out;
}

/// Rows of `m` scaled to unit Euclidean norm; all-zero rows stay zero.
inline Matrix unit_rows(Matrix m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    if (norm > 0) m.row(i) /= norm;
  }
  return m;
}

inline Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw DataError("ragged input rows");
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

}  // namespace blf
