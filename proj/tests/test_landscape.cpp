#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "blf.hpp"
#include "landscape_fixtures.hpp"

using namespace blf;

namespace {

using XY = std::vector<std::pair<double, double>>;

XY normal_cloud(int n, double cx, double cy, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  XY out;
  for (int i = 0; i < n; ++i) out.emplace_back(cx + g(rng), cy + g(rng));
  return out;
}

double trapezoid(const DensityGrid& g) {
  const double dx = g.gx[1] - g.gx[0], dy = g.gy[1] - g.gy[0];
  double s = 0;
  const int n = g.n_grid;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      s += wi * wj * g.values(i, j);
    }
  return s * dx * dy;
}

Attractor at(int rank, double x, double y) {
  Attractor a;
  a.id = a.rank = rank;
  a.x = x;
  a.y = y;
  a.magnitude = 1.0;
  return a;
}

}  // namespace

TEST(Bandwidth, StandardNormalNearFormulaValue) {
  const long double want = 4.0L * 1.06L * std::pow(10000.0L, -0.2L);
  EXPECT_NEAR(static_cast<double>(want), 0.672, 5e-4);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::vector<double> xs(10000);
  for (auto& x : xs) x = g(rng);
  const double h = bandwidth(xs);
  EXPECT_NEAR(h, static_cast<double>(want), 0.1 * static_cast<double>(want));
}

TEST(Bandwidth, MatchesIndependentEvaluation) {
  std::mt19937_64 rng(12);
  std::gamma_distribution<double> g(2.0, 3.0);
  std::vector<double> xs(777);
  for (auto& x : xs) x = g(rng);
  // long-double mean/sd and type-7 quartiles from a sorted copy
  auto s = xs;
  std::sort(s.begin(), s.end());
  long double mean = 0;
  for (double x : s) mean += x;
  mean /= s.size();
  long double ss = 0;
  for (double x : s) ss += (x - mean) * (x - mean);
  const long double sd = std::sqrt(ss / (s.size() - 1));
  const auto q = [&](long double p) {
    const long double h = (s.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(h);
    return s[lo] + (h - lo) * (s[std::min(lo + 1, s.size() - 1)] - s[lo]);
  };
  const long double iqr = q(0.75L) - q(0.25L);
  const long double want = 4.0L * 1.06L * std::min(sd, iqr / 1.34L) * std::pow(static_cast<long double>(s.size()), -0.2L);
  EXPECT_NEAR(bandwidth(xs), static_cast<double>(want), 1e-12 * static_cast<double>(want));
}

TEST(Bandwidth, ScalesWithTheSample) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3, 8);
  std::vector<double> xs(300);
  for (auto& x : xs) x = u(rng);
  const double h = bandwidth(xs);
  for (double c : {0.001, 0.5, 3.0, 1e4}) {
    auto ys = xs;
    for (auto& y : ys) y *= c;
    EXPECT_NEAR(bandwidth(ys), c * h, 1e-12 * c * h);
  }
}

TEST(Bandwidth, DegenerateSamples) {
  EXPECT_THROW(bandwidth({2.0, 2.0, 2.0}), DataError);
  EXPECT_THROW(bandwidth({1.0}), DataError);
  // IQR zero but sd positive: strict version refuses, fallback warns
  const std::vector<double> spike{0, 0, 0, 0, 0, 0, 0, 0, 0, 10};
  EXPECT_THROW(bandwidth(spike), DataError);
  Warnings w;
  EXPECT_GT(bandwidth_with_fallback(spike, w, "x"), 0.0);
  EXPECT_EQ(w.messages.size(), 1u);
  EXPECT_THROW(bandwidth_with_fallback({3, 3}, w, "y"), DataError);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile_linear({1, 2, 3, 4}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_linear({4, 3, 2, 1}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_linear({7}, 0.9), 7.0);
}

TEST(Kde, SymmetricUnderXNegation) {
  const XY pts{{-1.0, 0.3}, {1.0, 0.3}, {-2.5, -0.4}, {2.5, -0.4}};
  const auto g = kde2d(pts);
  const int n = g.n_grid;
  EXPECT_NEAR(g.gx.front(), -g.gx.back(), 1e-12);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) EXPECT_NEAR(g.values(i, j), g.values(n - 1 - i, j), 1e-12);
}

TEST(Kde, TwoPointsOnTheAxisWithFixedVerticalBandwidth) {
  KdeParams p;
  p.h_y = 0.5;
  const auto g = kde2d(XY{{-1, 0}, {1, 0}}, p);
  const int n = g.n_grid;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) EXPECT_NEAR(g.values(i, j), g.values(n - 1 - i, j), 1e-12);
  EXPECT_THROW(kde2d(XY{{-1, 0}, {1, 0}}), DataError);  // degenerate y axis
}

TEST(Kde, IntegratesToOne) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    auto pts = normal_cloud(400, 0, 0, 1.0, rng());
    const auto more = normal_cloud(200, 4, -2, 0.5, rng());
    pts.insert(pts.end(), more.begin(), more.end());
    const auto probe = kde2d(pts);
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& [x, y] : pts) {
      xlo = std::min(xlo, x), xhi = std::max(xhi, x);
      ylo = std::min(ylo, y), yhi = std::max(yhi, y);
    }
    KdeParams p;
    p.limits = std::array<double, 4>{xlo - 5 * probe.h_x, xhi + 5 * probe.h_x, ylo - 5 * probe.h_y, yhi + 5 * probe.h_y};
    EXPECT_NEAR(trapezoid(kde2d(pts, p)), 1.0, 0.01);
  }
}

TEST(Kde, PermutationGivesIdenticalSurface) {
  auto pts = normal_cloud(500, 1, 2, 1.5, 15);
  const auto a = kde2d(pts);
  std::mt19937_64 rng(16);
  std::shuffle(pts.begin(), pts.end(), rng);
  const auto b = kde2d(pts);
  EXPECT_TRUE(a.values == b.values);
  EXPECT_EQ(a.gx, b.gx);
  EXPECT_EQ(a.gy, b.gy);
}

TEST(Kde, TranslationShiftsTheGridOnly) {
  const auto pts = normal_cloud(300, 0, 0, 1.0, 17);
  XY moved;
  for (const auto& [x, y] : pts) moved.emplace_back(x + 3.5, y - 2.25);
  const auto a = kde2d(pts), b = kde2d(moved);
  EXPECT_NEAR(b.h_x, a.h_x, 1e-12);
  EXPECT_NEAR(b.x_min(), a.x_min() + 3.5, 1e-12);
  EXPECT_NEAR(b.y_max(), a.y_max() - 2.25, 1e-12);
  const double peak = a.values.maxCoeff();
  EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-10 * peak);
}

TEST(Kde, TightClusterPeaksAtItsCentroid) {
  const auto pts = normal_cloud(400, 2.0, -1.0, 0.05, 18);
  double cx = 0, cy = 0;
  for (const auto& [x, y] : pts) cx += x / pts.size(), cy += y / pts.size();
  const auto g = kde2d(pts);
  Eigen::Index i = 0, j = 0;
  g.values.maxCoeff(&i, &j);
  EXPECT_LE(std::abs(static_cast<int>(i) - fixtures::nearest_cell(g.gx, cx)), 1);
  EXPECT_LE(std::abs(static_cast<int>(j) - fixtures::nearest_cell(g.gy, cy)), 1);
}

TEST(Kde, NonNegativeAndRecordsSampleCount) {
  const auto g = kde2d(normal_cloud(50, 0, 0, 1, 19));
  EXPECT_GE(g.values.minCoeff(), 0.0);
  EXPECT_EQ(g.n_samples, 50u);
  EXPECT_EQ(g.values.rows(), 100);
  KdeParams p;
  p.n_grid = 1;
  EXPECT_THROW(kde2d(normal_cloud(5, 0, 0, 1, 1), p), ConfigError);
  EXPECT_THROW(kde2d(XY{{0, 0}}), DataError);
}

TEST(Maxima, OneDimensionalSignTest) {
  EXPECT_EQ(maxima_1d({0, 1, 0}), std::vector<int>{1});
  EXPECT_TRUE(maxima_1d({0, 1, 1, 0}).empty());
  EXPECT_TRUE(maxima_1d({3, 2, 1}).empty());
  EXPECT_EQ(maxima_1d({0, 2, 1, 3, 0}), (std::vector<int>{1, 3}));
  EXPECT_TRUE(maxima_1d({}).empty());
}

TEST(Maxima, ConcaveQuadraticHasOnlyItsArgmax) {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = u(rng), b = u(rng), sx = 0.2 + std::abs(u(rng)), sy = 0.2 + std::abs(u(rng));
    DensityGrid g;
    g.gx.resize(100);
    for (int i = 0; i < 100; ++i) g.gx[static_cast<std::size_t>(i)] = -5 + 10.0 * i / 99;
    g.gy = g.gx;
    g.values = Matrix(100, 100);
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < 100; ++j) {
        const double dx = g.gx[static_cast<std::size_t>(i)] - a, dy = g.gy[static_cast<std::size_t>(j)] - b;
        g.values(i, j) = 100 - sx * dx * dx - sy * dy * dy;
      }
    Eigen::Index ai = 0, aj = 0;
    g.values.maxCoeff(&ai, &aj);
    const auto peaks = find_maxima(g);
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_EQ(peaks[0].ix, ai);
    EXPECT_EQ(peaks[0].iy, aj);
  }
}

TEST(Maxima, PlateauGridHasNone) {
  DensityGrid g;
  g.gx = g.gy = {0, 1, 2, 3};
  g.values = Matrix::Zero(4, 4);
  g.values.block(1, 1, 2, 2).setOnes();
  EXPECT_TRUE(find_maxima(g).empty());
}

TEST(Maxima, ThreeGaussianMixturesAgainstExhaustiveScan) {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = fixtures::random_three(seed);
    good += fixtures::peaks_match(fixtures::mixture_grid(m, -2, 12), m);
  }
  EXPECT_EQ(good, 20);
}

TEST(Maxima, PeakMagnitudeIsTheCellValue) {
  const auto g = kde2d(normal_cloud(200, 0, 0, 1, 21));
  for (const auto& p : find_maxima(g)) {
    EXPECT_EQ(p.magnitude, g.values(p.ix, p.iy));
    EXPECT_EQ(p.x, g.gx[static_cast<std::size_t>(p.ix)]);
  }
}

TEST(Threshold, StrictCutoff) {
  const std::vector<Peak> ps{{1, 1, 0, 0, 0.5}, {2, 2, 1, 1, 0.19}};
  EXPECT_EQ(threshold_attractors(ps, 0.2).size(), 1u);
  Warnings w;
  EXPECT_TRUE(threshold_attractors({{1, 1, 0, 0, 0.2}}, 0.2, &w).empty());
  EXPECT_EQ(w.messages.size(), 1u);
}

TEST(Threshold, TiesByGridPosition) {
  const std::vector<Peak> ps{{5, 1, 0, 0, 0.4}, {2, 9, 0, 0, 0.4}, {2, 3, 0, 0, 0.4}, {0, 0, 0, 0, 0.9}};
  const auto as = threshold_attractors(ps);
  ASSERT_EQ(as.size(), 4u);
  EXPECT_EQ(as[0].grid_ix, 0);
  EXPECT_EQ(std::make_pair(as[1].grid_ix, as[1].grid_iy), std::make_pair(2, 3));
  EXPECT_EQ(std::make_pair(as[2].grid_ix, as[2].grid_iy), std::make_pair(2, 9));
  EXPECT_EQ(as[3].grid_ix, 5);
}

TEST(Threshold, RanksArePermutationAboveCutoff) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Peak> ps;
    for (int k = static_cast<int>(rng() % 30); k > 0; --k)
      ps.push_back({static_cast<int>(rng() % 100), static_cast<int>(rng() % 100), 0, 0, std::round(u(rng) * 10) / 10});
    const double cut = u(rng) * 0.5;
    const auto as = threshold_attractors(ps, cut);
    std::vector<int> ranks;
    for (const auto& a : as) {
      EXPECT_GT(a.magnitude, cut);
      EXPECT_EQ(a.id, a.rank);
      ranks.push_back(a.rank);
    }
    std::vector<int> want(as.size());
    std::iota(want.begin(), want.end(), 1);
    EXPECT_EQ(ranks, want);
    const auto kept = std::count_if(ps.begin(), ps.end(), [&](const Peak& p) { return p.magnitude > cut; });
    EXPECT_EQ(static_cast<long>(as.size()), kept);
    for (std::size_t i = 1; i < as.size(); ++i) EXPECT_GE(as[i - 1].magnitude, as[i].magnitude);
  }
}

TEST(Nearest, IdentityAndTies) {
  const std::vector<Attractor> as{at(1, 0, 0), at(2, 2, 0), at(3, 5, 5)};
  const auto n = nearest_attractor(5, 5, as);
  EXPECT_EQ(n.id, 3);
  EXPECT_EQ(n.distance, 0.0);
  EXPECT_EQ(nearest_attractor(1, 0, as).id, 1);
  const std::vector<Attractor> reversed{at(2, 2, 0), at(1, 0, 0)};
  EXPECT_EQ(nearest_attractor(1, 7, reversed).id, 1);
  EXPECT_THROW(nearest_attractor(0, 0, {}), DataError);
}

TEST(Nearest, MatchesLinearScan) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Attractor> as;
    for (int k = 1; k <= 1 + static_cast<int>(rng() % 8); ++k) as.push_back(at(k, u(rng), u(rng)));
    for (int q = 0; q < 20; ++q) {
      LandscapePoint p;
      p.x = u(rng);
      p.y = u(rng);
      int best = 0;
      for (std::size_t k = 1; k < as.size(); ++k)
        if (std::hypot(p.x - as[k].x, p.y - as[k].y) < std::hypot(p.x - as[static_cast<std::size_t>(best)].x,
                                                                  p.y - as[static_cast<std::size_t>(best)].y))
          best = static_cast<int>(k);
      const auto n = nearest_attractor(p, as);
      EXPECT_EQ(n.id, as[static_cast<std::size_t>(best)].id);
      EXPECT_DOUBLE_EQ(n.distance, std::hypot(p.x - as[static_cast<std::size_t>(best)].x,
                                              p.y - as[static_cast<std::size_t>(best)].y));
    }
  }
}

namespace {

// users concentrated on cluster pairs {0,1}, {2,3}, {4,5}
std::vector<BeliefVector> planted_vectors(int per_group, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.15);
  std::vector<BeliefVector> vs;
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i < per_group; ++i) {
      BeliefVector v;
      v.user_id = "g" + std::to_string(g) + "_" + std::to_string(i);
      v.t = i % 4;
      const double stray = u(rng);
      const double split = 0.3 + 0.4 * u(rng) / 0.15;
      v.vector[2 * g] = (1 - stray) * split;
      v.vector[2 * g + 1] = (1 - stray) * (1 - split);
      v.vector[(2 * g + 2) % 6] = stray;
      vs.push_back(v);
    }
  return vs;
}

}  // namespace

TEST(Projection, PlantedGroupsSeparate) {
  const auto vs = planted_vectors(80, 24);
  const auto pts = project_vectors(vs, {});
  ASSERT_EQ(pts.size(), vs.size());
  std::array<std::array<double, 2>, 3> mean{};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    mean[i / 80][0] += pts[i].x / 80;
    mean[i / 80][1] += pts[i].y / 80;
  }
  double intra = 0;
  long pairs = 0;
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t a = g * 80; a < g * 80 + 80; ++a)
      for (std::size_t b = a + 1; b < g * 80 + 80; ++b, ++pairs)
        intra += std::hypot(pts[a].x - pts[b].x, pts[a].y - pts[b].y);
  intra /= static_cast<double>(pairs);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      EXPECT_GT(std::hypot(mean[a][0] - mean[b][0], mean[a][1] - mean[b][1]), 3 * intra);
}

TEST(Projection, FullTrainingFractionFitsEverything) {
  const auto vs = planted_vectors(20, 25);
  LandscapeProjection p;
  p.train_fraction = 1.0;
  const auto pts = project_vectors(vs, p);
  const Matrix want = PcaModel::fit(dense_vectors(vs, 6), 2).transform(dense_vectors(vs, 6));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(pts[i].x, want(static_cast<Eigen::Index>(i), 0), 1e-12);
    EXPECT_NEAR(pts[i].y, want(static_cast<Eigen::Index>(i), 1), 1e-12);
  }
}

TEST(Projection, IdenticalVectorsIdenticalPoints) {
  auto vs = planted_vectors(10, 26);
  vs.push_back(vs[3]);
  vs.back().user_id = "copy";
  const auto pts = project_vectors(vs, {});
  EXPECT_EQ(pts[3].x, pts.back().x);
  EXPECT_EQ(pts[3].y, pts.back().y);
  const auto again = project_vectors(vs, {});
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(pts[i].x, again[i].x);
}

TEST(Projection, Errors) {
  EXPECT_THROW(project_vectors({}, {}), DataError);
  BeliefVector v;
  v.vector[0] = 1.0;
  EXPECT_THROW(project_vectors({v, v}, {}), ConfigError);
  LandscapeProjection p;
  p.train_fraction = 0;
  EXPECT_THROW(project_vectors(planted_vectors(3, 1), p), ConfigError);
}

TEST(Projection, StancesAttached) {
  const auto vs = planted_vectors(4, 27);
  const UserStances st{{"g1_2", Stance::Skeptic}};
  const auto pts = project_vectors(vs, {}, 0, &st);
  EXPECT_EQ(pts[6].stance, Stance::Skeptic);
  EXPECT_EQ(pts[0].stance, Stance::Unclustered);
}

TEST(LandscapeFiles, RoundTrips) {
  const auto g = kde2d(normal_cloud(60, 0, 0, 1, 28));
  std::ostringstream go;
  write_grid_csv(go, g);
  std::istringstream gi(go.str());
  const auto back = read_grid_csv(gi);
  EXPECT_TRUE(back.values == g.values);
  EXPECT_EQ(back.gx, g.gx);
  EXPECT_EQ(back.gy, g.gy);

  const auto as = threshold_attractors(find_maxima(g), 0.0);
  std::ostringstream ao;
  write_attractors_csv(ao, as);
  std::istringstream ai(ao.str());
  const auto as2 = read_attractors_csv(ai);
  ASSERT_EQ(as2.size(), as.size());
  for (std::size_t k = 0; k < as.size(); ++k) {
    EXPECT_EQ(as2[k].x, as[k].x);
    EXPECT_EQ(as2[k].magnitude, as[k].magnitude);
    EXPECT_EQ(as2[k].rank, as[k].rank);
  }

  std::vector<LandscapePoint> pts{{"u1", 3, 0.1, -2.5, Stance::Believer}, {"u2", 0, 1e-9, 7, Stance::Unclustered}};
  std::ostringstream po;
  write_points_csv(po, pts);
  std::istringstream pi(po.str());
  const auto pts2 = read_points_csv(pi);
  ASSERT_EQ(pts2.size(), 2u);
  EXPECT_EQ(pts2[0].user_id, "u1");
  EXPECT_EQ(pts2[1].x, 1e-9);
  EXPECT_EQ(pts2[0].stance, Stance::Believer);

  std::istringstream bad("i,j,x,y,value\n0,0,1,1\n");
  EXPECT_THROW(read_grid_csv(bad), DataError);
}

TEST(LandscapeFiles, ExternalCoordinates) {
  std::istringstream in("user_id,t,x,y\na,0,1.5,2\nb,1,-3,0\n");
  const UserStances st{{"b", Stance::Skeptic}};
  const auto pts = read_landscape_coordinates(in, &st);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[1].stance, Stance::Skeptic);
  EXPECT_EQ(pts[0].x, 1.5);
}
