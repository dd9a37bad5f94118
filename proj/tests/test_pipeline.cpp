#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "blf.hpp"

using namespace blf;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const auto p = fs::temp_directory_path() / (std::string("blf_") + info->test_suite_name() + "_" + info->name());
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SyntheticParams small_world() {
  SyntheticParams sp;
  sp.agents = 60;
  sp.windows = 6;
  sp.statements_per_window = 4;
  sp.seed = 7;
  return sp;
}

// writes a small synthetic world into dir/in and returns its config
Config small_config(const fs::path& dir) {
  write_world(generate_world(small_world()), dir / "in");
  return Config::load(dir / "in" / "synthetic.ini", "fixtures");
}

std::string slurp(const fs::path& p) { return read_file(p); }

}  // namespace

TEST(Config, UnknownKeyRejectedWithLine) {
  std::istringstream in("[stance]\nmin_tweets = 3\n\n[stance]\nmin_tweet = 4\n");
  try {
    Config::parse(in);
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":5:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("stance.min_tweet"), std::string::npos);
  }
}

TEST(Config, FixturesProfileOverrides) {
  const std::string text = "[cluster]\nmin_samples = 40\n[fixtures]\ncluster.min_samples = 3\n";
  std::istringstream a(text), b(text), c(text);
  EXPECT_EQ(Config::parse(a).integer("cluster.min_samples"), 40);
  const auto f = Config::parse(b, "fixtures");
  EXPECT_EQ(f.integer("cluster.min_samples"), 3);
  EXPECT_EQ(f.integer("stance.min_tweets"), 5);
  EXPECT_THROW(Config::parse(c, "production"), ConfigError);
}

TEST(Config, TypedAccessorsAndPaths) {
  const auto dir = scratch();
  {
    std::ofstream out(dir / "run.ini");
    out << "[input]\ntweets = t.jsonl\n[bots]\nthreshold = high\n[evaluate]\ninclude_gaps = no\n";
  }
  const auto c = Config::load(dir / "run.ini");
  EXPECT_EQ(fs::path(c.path("input.tweets")), dir / "t.jsonl");
  EXPECT_THROW(c.real("bots.threshold"), ConfigError);
  EXPECT_FALSE(c.boolean("evaluate.include_gaps"));
  EXPECT_THROW(c.require_path("input.parses"), ConfigError);
  EXPECT_THROW(Config::load(dir / "absent.ini"), ConfigError);
}

TEST(Manifest, DetectsChangedOutputs) {
  const auto dir = scratch();
  { std::ofstream(dir / "in.txt") << "input"; }
  { std::ofstream(dir / "out.txt") << "output"; }
  Manifest m(dir);
  const std::vector<std::string> inputs{(dir / "in.txt").string()};
  m.record("stage", "hash", 3, inputs, {"out.txt"});
  EXPECT_TRUE(Manifest(dir).up_to_date("stage", "hash", 3, inputs));
  EXPECT_FALSE(m.up_to_date("stage", "hash", 4, inputs));
  EXPECT_FALSE(m.up_to_date("stage", "other", 3, inputs));
  { std::ofstream(dir / "out.txt") << "edited"; }
  EXPECT_FALSE(m.up_to_date("stage", "hash", 3, inputs));
}

TEST(Manifest, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Pipeline, MissingUpstreamNamesTheStage) {
  const auto dir = scratch();
  Pipeline p(Config{}, dir, 1);
  try {
    p.run("evaluate");
    FAIL() << "evaluate ran without a landscape";
  } catch (const MissingArtifact& e) {
    EXPECT_EQ(e.stage_name, "landscape");
  }
  try {
    p.run("catalog");
    FAIL();
  } catch (const MissingArtifact& e) {
    EXPECT_EQ(e.stage_name, "extract");
  }
  EXPECT_THROW(p.run("nonsense"), ConfigError);
}

TEST(Pipeline, MissingInputFileIsDataError) {
  const auto dir = scratch();
  auto c = Config{};
  c.set("input.tweets", (dir / "nope.jsonl").string());
  Pipeline p(c, dir / "run", 1);
  EXPECT_THROW(p.run("ingest"), DataError);
}

TEST(Pipeline, SmallWorldEndToEnd) {
  const auto dir = scratch();
  const auto cfg = small_config(dir);
  std::ostringstream log;
  Pipeline p(cfg, dir / "run", 1, &log);
  p.run_all();
  for (const auto* f : {"report.txt", "report.csv", "evaluate_summary.json", "landscape_w7.svg", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;

  // every recorded output exists and hashes as recorded
  const Manifest m(dir / "run");
  EXPECT_EQ(m.stages().size(), Pipeline::pipeline_stages().size());
  for (const auto& [stage, r] : m.stages())
    for (const auto& [out, hash] : r.outputs) EXPECT_EQ(sha256_file(dir / "run" / out), hash) << stage << ' ' << out;

  const auto report = slurp(dir / "run" / "report.txt");
  for (const auto& row : report_rows()) EXPECT_NE(report.find(row), std::string::npos) << row;
  EXPECT_NE(report.find("Mean beta"), std::string::npos);

  // a second run finds everything current
  std::ostringstream log2;
  Pipeline again(cfg, dir / "run", 1, &log2);
  again.run_all();
  EXPECT_EQ(again.skipped(), Pipeline::pipeline_stages());
  EXPECT_NE(log2.str().find("render: up to date"), std::string::npos);

  // a fresh directory reproduces every artifact byte for byte
  Pipeline twin(cfg, dir / "twin", 1);
  twin.run_all();
  for (const auto& [stage, r] : m.stages())
    for (const auto& [out, hash] : r.outputs) EXPECT_EQ(sha256_file(dir / "twin" / out), hash) << out;

  // a changed seed invalidates the stages that use it
  Pipeline reseeded(cfg, dir / "run", 2);
  reseeded.run("ingest");
  EXPECT_TRUE(reseeded.skipped().empty());
}

TEST(Pipeline, PairsOnRequestOnly) {
  const auto dir = scratch();
  const auto cfg = small_config(dir);
  Pipeline p(cfg, dir / "run", 1);
  for (const auto* s : {"ingest", "extract", "stance", "catalog"}) p.run(s);
  EXPECT_FALSE(fs::exists(dir / "run" / "pairs.tsv"));
  p.run("pairs");
  std::ifstream in(dir / "run" / "pairs.tsv");
  const auto pairs = read_pairs(in);
  EXPECT_FALSE(pairs.empty());
  for (const auto& r : pairs) {
    EXPECT_GE(r.target_sim, -1.0);
    EXPECT_LE(r.target_sim, 1.0);
  }
}

TEST(Render, SampleFractions) {
  EXPECT_EQ(sample_points(10, 1.0, 1).size(), 10u);
  EXPECT_TRUE(sample_points(10, 0.0, 1).empty());
  EXPECT_EQ(sample_points(10, 0.001, 1).size(), 1u);
  EXPECT_EQ(sample_points(1000, 0.25, 3), sample_points(1000, 0.25, 3));
  const auto s = sample_points(1000, 0.25, 3);
  EXPECT_EQ(s.size(), 250u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_THROW(sample_points(5, 1.5, 1), ConfigError);
  EXPECT_THROW(sample_points(5, -0.1, 1), ConfigError);
}

TEST(Render, EmptyLandscape) {
  const auto r = render_landscape(nullptr, {}, {});
  EXPECT_NE(r.svg.find("empty landscape"), std::string::npos);
  EXPECT_EQ(r.warnings.messages.size(), 1u);
  EXPECT_EQ(r.csv, "kind,id,x,y,value,stance\n");
}

TEST(Render, DrawsEveryPointAtFullFraction) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<LandscapePoint> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({"u" + std::to_string(i), 0, g(rng), g(rng), static_cast<Stance>(i % 3)});
  const auto grid = kde2d(pts);
  const auto as = threshold_attractors(find_maxima(grid), 0.0);
  RenderParams rp;
  rp.sample_fraction = 1.0;
  const auto r = render_landscape(&grid, pts, as, rp);
  std::size_t circles = 0;
  for (auto at = r.svg.find("<circle"); at != std::string::npos; at = r.svg.find("<circle", at + 1)) ++circles;
  EXPECT_EQ(circles, pts.size());
  EXPECT_NE(r.csv.find("attractor,1,"), std::string::npos);
  EXPECT_NE(r.csv.find("contour,1,"), std::string::npos);
}

TEST(Render, ContourEndpointsLieOnTheLevel) {
  DensityGrid g;
  g.n_grid = 60;
  for (int i = 0; i < 60; ++i) g.gx.push_back(-3 + 6.0 * i / 59);
  g.gy = g.gx;
  g.values = Matrix(60, 60);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j) g.values(i, j) = 10 - g.gx[static_cast<std::size_t>(i)] * g.gx[static_cast<std::size_t>(i)] -
                                                  g.gy[static_cast<std::size_t>(j)] * g.gy[static_cast<std::size_t>(j)];
  const auto segs = contour_segments(g, 6.0);  // circle of radius 2
  ASSERT_FALSE(segs.empty());
  const double cell = 6.0 / 59;
  for (const auto& s : segs) {
    EXPECT_NEAR(std::hypot(s.x0, s.y0), 2.0, cell);
    EXPECT_NEAR(std::hypot(s.x1, s.y1), 2.0, cell);
  }
  EXPECT_TRUE(contour_segments(g, 50.0).empty());
}
