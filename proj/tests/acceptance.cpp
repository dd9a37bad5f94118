// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Tolerances and time budgets are fixed here, not configurable.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "blf.hpp"
#include "curated_svo.hpp"
#include "hypothesis_fixtures.hpp"
#include "landscape_fixtures.hpp"

using namespace blf;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << ']';
    }
  }
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.check(secs < budget_s, "runtime over " + format_double(budget_s) + "s");
  if (!v.pass) ++failures;
  std::printf("%s %-22s %7.2fs %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), secs, v.detail.str().c_str());
  std::fflush(stdout);
}

std::vector<std::pair<double, double>> cloud(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < n; ++i) pts.emplace_back(g(rng) + (i % 3) * 2.5, g(rng) * 0.7 - (i % 2));
  return pts;
}

double trapezoid(const DensityGrid& g) {
  const double dx = g.gx[1] - g.gx[0], dy = g.gy[1] - g.gy[0];
  const int n = g.n_grid;
  double s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      s += ((i == 0 || i == n - 1) ? 0.5 : 1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0) * g.values(i, j);
  return s * dx * dy;
}

void decay() {
  criterion("decay_kernel", 1.0, [](Verdict& v) {
    double worst = 0;
    for (int h = 1; h <= 6; ++h) worst = std::max(worst, std::abs(std::pow(1 - decay_alpha(h), h) - 0.5));
    v.detail << "max |(1-a)^h - 1/2| = " << worst;
    v.check(worst <= 1e-12, "halving");

    const SparseVector c{{0, 0.25}, {2, 0.75}};
    std::vector<Observation> hist;
    for (long t = 0; t < 20; ++t) hist.push_back({t, c});
    bool fixed = true;
    for (int h = 1; h <= 6; ++h)
      for (long t = 0; t < 20; ++t) fixed = fixed && *belief_vector(hist, decay_alpha(h), t) == c;
    v.check(fixed, "constant input fixed point");

    // alpha = 0.5, x_1 = (1,0), x_0 = (0,1): weights 1 and 1/2 over 1.5
    const auto y = *belief_vector({{0, {{1, 1.0}}}, {1, {{0, 1.0}}}}, 0.5, 1);
    const long double b0 = 1.0L / 1.5L, b1 = 0.5L / 1.5L;
    const double err = std::max(std::abs(y.at(0) - static_cast<double>(b0)), std::abs(y.at(1) - static_cast<double>(b1)));
    v.detail << ", example error " << err;
    v.check(err <= 1e-12, "two-step example");
  });
}

void kde() {
  criterion("kde_correctness", 5.0, [](Verdict& v) {
    const auto pts = cloud(600, 1);
    const auto probe = kde2d(pts);
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& [x, y] : pts) {
      xlo = std::min(xlo, x), xhi = std::max(xhi, x);
      ylo = std::min(ylo, y), yhi = std::max(yhi, y);
    }
    KdeParams wide;
    wide.limits = std::array<double, 4>{xlo - 5 * probe.h_x, xhi + 5 * probe.h_x, ylo - 5 * probe.h_y, yhi + 5 * probe.h_y};
    const double integral = trapezoid(kde2d(pts, wide));
    v.detail << "integral " << integral;
    v.check(std::abs(integral - 1.0) <= 0.01, "integral");

    std::vector<std::pair<double, double>> sym;
    for (const auto& [x, y] : cloud(200, 2)) {
      sym.emplace_back(x, y);
      sym.emplace_back(-x, y);
    }
    const auto s = kde2d(sym);
    double asym = 0;
    for (int i = 0; i < s.n_grid; ++i)
      for (int j = 0; j < s.n_grid; ++j) asym = std::max(asym, std::abs(s.values(i, j) - s.values(s.n_grid - 1 - i, j)));
    v.detail << ", asymmetry " << asym;
    v.check(asym <= 1e-12, "x-negation symmetry");

    auto shuffled = pts;
    std::mt19937_64 rng(3);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    v.check(kde2d(shuffled).values == probe.values, "permutation invariance");

    const auto big = cloud(10000, 4);
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = kde2d(big);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.detail << ", 10k points " << secs << "s";
    v.check(g.n_grid == 100 && secs < 5.0, "10k-point surface");
  });
}

void peaks() {
  criterion("peak_detection", 10.0, [](Verdict& v) {
    int good = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto m = fixtures::random_three(1000 + seed);
      good += fixtures::peaks_match(fixtures::mixture_grid(m, -2, 12), m);
    }
    v.detail << good << "/100 fixtures with 3 peaks at the means";
    v.check(good >= 95, "peak count and position");

    DensityGrid plateau;
    plateau.gx = plateau.gy = {0, 1, 2, 3, 4};
    plateau.values = Matrix::Zero(5, 5);
    plateau.values.block(1, 1, 2, 2).setOnes();
    v.check(find_maxima(plateau).empty() && maxima_1d({0, 1, 1, 0}).empty(), "plateau");
  });
}

void stability_formula() {
  criterion("stability_formula", 1.0, [](Verdict& v) {
    std::mt19937_64 rng(5);
    int exact = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<AttractorAssignment> as;
      std::vector<int> seen;
      const long n = 1 + static_cast<long>(rng() % 40);
      const int pool = 1 + static_cast<int>(rng() % 10);
      for (long t = 0; t < n; ++t) {
        const int a = static_cast<int>(rng() % static_cast<std::uint64_t>(pool));
        as.push_back({"u", t, a, 0.0});
        if (std::find(seen.begin(), seen.end(), a) == seen.end()) seen.push_back(a);
      }
      const auto r = h1_stability(as, 0);
      exact += r.records.size() == 1 && r.records[0].distinct_attractors == static_cast<long>(seen.size()) &&
               r.records[0].stability == 1.0 - static_cast<double>(seen.size()) / static_cast<double>(n);
    }
    v.detail << exact << "/1000 exact";
    v.check(exact == 1000, "distinct-count oracle");
  });
}

void logistic() {
  criterion("logistic_regression", 5.0, [](Verdict& v) {
    const auto r = h2_regression(fixtures::planted_events(5000, 1.0, -1.0, -0.3, 20200106));
    v.detail << "beta_d " << r.beta_distance << ", beta_s " << r.beta_strength << ", |grad| " << r.fit.gradient_norm;
    v.check(!r.diverged, "converged");
    v.check(std::abs(r.beta_distance - 1.0) <= 0.15 && std::abs(r.beta_strength + 1.0) <= 0.15, "planted betas");
    v.check(r.fit.gradient_norm < 1e-8, "gradient norm");

    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    Matrix X(1000, 3);
    Vector y(1000);
    for (Eigen::Index i = 0; i < 1000; ++i) {
      X(i, 0) = 1;
      X(i, 1) = g(rng);
      X(i, 2) = g(rng);
      y(i) = static_cast<double>(rng() % 2);
    }
    double worst = 0;
    for (int point = 0; point < 20; ++point) {
      Vector b(3);
      for (int j = 0; j < 3; ++j) b(j) = g(rng);
      const Vector an = logistic_gradient(X, y, b);
      Vector fd(3);
      for (int j = 0; j < 3; ++j) {
        Vector hi = b, lo = b;
        hi(j) += 1e-5;
        lo(j) -= 1e-5;
        fd(j) = (logistic_loglik(X, y, hi) - logistic_loglik(X, y, lo)) / 2e-5;
      }
      worst = std::max(worst, (an - fd).norm() / an.norm());
    }
    v.detail << ", finite-difference rel. error " << worst;
    v.check(worst <= 1e-6, "gradient vs central differences");
  });
}

void ranks() {
  criterion("h3_rank_analysis", 5.0, [](Verdict& v) {
    const auto r = h3_rank_moves(fixtures::uniform_moves(20, 100000, 7), fixtures::scattered_attractors(20, 8));
    const double want = 5.0 / 19.0;
    v.detail << "fraction rank<=5 " << r.fraction_rank_le5.value_or(-1) << " vs " << want;
    v.check(r.fraction_rank_le5 && std::abs(*r.fraction_rank_le5 - want) <= 0.02, "uniform destinations");
    v.check(r.included == 100000 && r.comparable, "all moves ranked");
  });
}

void homophily() {
  criterion("h4_homophily", 5.0, [](Verdict& v) {
    auto pts = fixtures::two_blobs(200, 4, 20.0, 9);
    const auto r = h4_homophily(pts);
    const auto oracle = fixtures::homophily_by_scan(pts, 20, r.radius);
    v.detail << "believer " << r.believer.mean.value_or(-1) << ", skeptic " << r.skeptic.mean.value_or(-1);
    v.check(r.believer.mean > 0.95 && r.skeptic.mean > 0.95, "homophily above 0.95");
    v.check(std::multiset<double>(r.believer.fractions.begin(), r.believer.fractions.end()) == oracle.believer &&
                std::multiset<double>(r.skeptic.fractions.begin(), r.skeptic.fractions.end()) == oracle.skeptic,
            "neighbour-scan oracle");
    for (auto& p : pts) p.stance = p.stance == Stance::Believer ? Stance::Skeptic : Stance::Believer;
    const auto s = h4_homophily(pts);
    v.check(s.believer.fractions == r.skeptic.fractions && s.skeptic.fractions == r.believer.fractions,
            "stance swap symmetry");
  });
}

void svo() {
  criterion("svo_extraction", 1.0, [](Verdict& v) {
    const auto s = curated::score(std::string(BLF_DATA_DIR) + "/svo_curated");
    v.detail << s.matched << '/' << s.expected << " tuples (" << s.accuracy() << "), negation " << s.negation_matched
             << '/' << s.negation_expected << ", questions silent " << s.questions_silent << '/' << s.questions;
    v.check(s.accuracy() >= 0.8, "tuple accuracy");
    v.check(s.negation_matched == s.negation_expected && s.negation_expected > 0, "negation sub-suite");
    v.check(s.questions_silent == s.questions && s.questions > 0, "question sub-suite");
  });
}

void purity() {
  criterion("purity_label", 1.0, [](Verdict& v) {
    std::mt19937_64 rng(10);
    int exact = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      UserStances gold;
      std::vector<std::string> members;
      for (int i = static_cast<int>(rng() % 30); i > 0; --i) {
        members.push_back("u" + std::to_string(rng() % 40));
        if (rng() % 5) gold[members.back()] = rng() % 2 ? Stance::Skeptic : Stance::Believer;
      }
      long b = 0, s = 0;
      for (const auto& m : members)
        if (gold.count(m)) (gold.at(m) == Stance::Believer ? b : s) += 1;
      const auto label = cluster_label(members, gold);
      const auto p = cluster_purity(members, gold);
      if (b + s == 0) {
        exact += !label && !p;
        continue;
      }
      const auto want_label = b >= s ? Stance::Believer : Stance::Skeptic;
      exact += label == want_label && p == static_cast<double>(std::max(b, s)) / static_cast<double>(b + s);
    }
    v.detail << exact << "/1000 exact";
    v.check(exact == 1000, "counting oracle");
  });
}

void end_to_end() {
  criterion("e2e_synthetic", 60.0, [](Verdict& v) {
    const auto dir = fs::temp_directory_path() / "blf_acceptance_e2e";
    fs::remove_all(dir);
    SyntheticParams sp;  // 500 agents, 5 planted wells, 12 windows
    write_world(generate_world(sp), dir / "world");
    Pipeline p(Config::load(dir / "world" / "synthetic.ini"), dir / "run", 1);
    p.run_all();
    const auto js = nlohmann::json::parse(read_file(dir / "run" / "evaluate_summary.json"));
    for (const auto& l : p.window_labels()) {
      const auto& w = js.at(l);
      const auto n = w.at("attractors").get<int>();
      const auto stab = w["h1"]["mean"].is_null() ? -1.0 : w["h1"]["mean"].get<double>();
      v.detail << "w" << l << ": " << n << " attr, stab " << stab;
      v.check(n >= 4 && n <= 6, "window " + l + " attractor count");
      v.check(stab > 0.7, "window " + l + " stability");
      if (w["h2"].is_null() || w["h2"]["diverged"].get<bool>()) {
        v.check(false, "window " + l + " regression");
      } else {
        const auto& h2 = w["h2"];
        v.detail << ", bd " << h2["beta_distance"].get<double>() << " bs " << h2["beta_strength"].get<double>();
        v.check(h2["beta_distance"].get<double>() > 0 && h2["p_distance"].get<double>() < 0.01,
                "window " + l + " distance effect");
        v.check(h2["beta_strength"].get<double>() < 0 && h2["p_strength"].get<double>() < 0.01,
                "window " + l + " strength effect");
      }
      const auto hb = w["h4"].is_null() || w["h4"]["believer_mean"].is_null() ? -1.0 : w["h4"]["believer_mean"].get<double>();
      const auto hs = w["h4"].is_null() || w["h4"]["skeptic_mean"].is_null() ? -1.0 : w["h4"]["skeptic_mean"].get<double>();
      v.detail << ", homophily " << hb << '/' << hs << "; ";
      v.check(hb > 0.9 && hs > 0.9, "window " + l + " homophily");
    }
    fs::remove_all(dir);
  });
}

}  // namespace

int main() {
  decay();
  kde();
  peaks();
  stability_formula();
  logistic();
  ranks();
  homophily();
  svo();
  purity();
  end_to_end();
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
