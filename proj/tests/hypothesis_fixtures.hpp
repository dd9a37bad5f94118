// Planted generators and brute-force oracles for the hypothesis tests and
// the acceptance binary.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "blf.hpp"

namespace fixtures {

/// Transition events whose move probability follows a planted logistic
/// model on the standardized covariates.
inline std::vector<blf::TransitionEvent> planted_events(int n, double beta_d, double beta_s, double intercept,
                                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 4.0), strength(0.2, 1.0), u(0.0, 1.0);
  std::vector<blf::TransitionEvent> es(static_cast<std::size_t>(n));
  std::vector<double> d, s;
  for (auto& e : es) {
    e.from_distance = dist(rng);
    e.from_strength = strength(rng);
    d.push_back(e.from_distance);
    s.push_back(e.from_strength);
  }
  const auto z = [](const std::vector<double>& v, std::size_t i) {
    double mean = 0, ss = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : v) ss += (x - mean) * (x - mean);
    return (v[i] - mean) / std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  for (std::size_t i = 0; i < es.size(); ++i) {
    const double eta = intercept + beta_d * z(d, i) + beta_s * z(s, i);
    es[i].moved = u(rng) < 1.0 / (1.0 + std::exp(-eta));
    es[i].user_id = "u" + std::to_string(i);
  }
  return es;
}

/// `k` attractors at random positions, ranks 1..k.
inline std::vector<blf::Attractor> scattered_attractors(int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<blf::Attractor> as;
  for (int r = 1; r <= k; ++r) {
    blf::Attractor a;
    a.id = a.rank = r;
    a.x = u(rng);
    a.y = u(rng);
    a.magnitude = 1.0 / r;
    as.push_back(a);
  }
  return as;
}

/// Moves with a uniformly random origin and a uniformly random different
/// destination.
inline std::vector<blf::Move> uniform_moves(int k, long n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<blf::Move> ms;
  for (long i = 0; i < n; ++i) {
    const int from = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    int to = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(k - 1));
    if (to >= from) ++to;
    ms.push_back({from, to});
  }
  return ms;
}

/// Two stance blobs far apart; each user redrawn around its blob centre in
/// every window.
inline std::vector<blf::LandscapePoint> two_blobs(int users_per_stance, int windows, double gap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.5);
  std::vector<blf::LandscapePoint> pts;
  for (int w = 0; w < windows; ++w)
    for (int s = 0; s < 2; ++s)
      for (int i = 0; i < users_per_stance; ++i) {
        blf::LandscapePoint p;
        p.user_id = (s ? "s" : "b") + std::to_string(i);
        p.t = w;
        p.x = s * gap + g(rng);
        p.y = g(rng);
        p.stance = s ? blf::Stance::Skeptic : blf::Stance::Believer;
        pts.push_back(p);
      }
  return pts;
}

struct HomophilyOracle {
  std::multiset<double> believer, skeptic;
  long no_neighbors = 0;
};

/// Every stanced point against every other stanced point of its window.
inline HomophilyOracle homophily_by_scan(const std::vector<blf::LandscapePoint>& pts, int k, double radius) {
  HomophilyOracle out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    if (p.stance == blf::Stance::Unclustered) continue;
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i || pts[j].t != p.t || pts[j].stance == blf::Stance::Unclustered) continue;
      const double d = std::hypot(pts[j].x - p.x, pts[j].y - p.y);
      if (d <= radius) cand.emplace_back(d, j);
    }
    if (cand.empty()) {
      ++out.no_neighbors;
      continue;
    }
    std::sort(cand.begin(), cand.end(), [&](const auto& a, const auto& b) {
      return std::tie(a.first, pts[a.second].user_id) < std::tie(b.first, pts[b.second].user_id);
    });
    cand.resize(std::min(cand.size(), static_cast<std::size_t>(k)));
    long same = 0;
    for (const auto& c : cand) same += pts[c.second].stance == p.stance;
    (p.stance == blf::Stance::Believer ? out.believer : out.skeptic)
        .insert(static_cast<double>(same) / static_cast<double>(cand.size()));
  }
  return out;
}

/// Mean displacement between consecutive windows of each user, by direct
/// pairing.
inline double displacement_by_scan(const std::vector<blf::LandscapePoint>& pts) {
  std::map<std::string, std::map<long, const blf::LandscapePoint*>> by_user;
  for (const auto& p : pts) by_user[p.user_id][p.t] = &p;
  double sum = 0;
  long n = 0;
  for (const auto& [u, ws] : by_user) {
    const blf::LandscapePoint* prev = nullptr;
    for (const auto& [t, p] : ws) {
      if (prev) sum += std::hypot(p->x - prev->x, p->y - prev->y), ++n;
      prev = p;
    }
  }
  return sum / static_cast<double>(n);
}

}  // namespace fixtures
