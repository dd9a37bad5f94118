// blf: command-line driver for the belief-landscape pipeline.
//
//   blf <stage> --config run.ini --out runs/a [--seed N] [--profile fixtures]
//   blf pipeline --config run.ini --out runs/a
//   blf synth --out data/synthetic
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "blf.hpp"

namespace {

struct Common {
  std::string config;
  std::string out = "run";
  std::optional<std::uint64_t> seed;
  std::string profile;
  bool force = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "run configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "run directory for artifacts and the manifest");
  cmd->add_option("--seed", c.seed, "master seed (overrides run.seed)");
  cmd->add_option("--profile", c.profile, "configuration profile")->check(CLI::IsMember({"fixtures"}));
  cmd->add_flag("--force", c.force, "re-run stages even when the manifest says they are up to date");
  cmd->add_flag("-q,--quiet", c.quiet, "no progress lines");
}

blf::Pipeline make_pipeline(const Common& c) {
  auto cfg = blf::Config::load(c.config, c.profile);
  if (c.seed) cfg.set("run.seed", std::to_string(*c.seed));
  const auto seed = static_cast<std::uint64_t>(cfg.integer("run.seed"));
  return blf::Pipeline(std::move(cfg), c.out, seed, c.quiet ? nullptr : &std::cerr, c.force);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief landscape pipeline"};
  app.require_subcommand(1);

  Common common;
  std::string stage_run;
  for (const auto& s : blf::Pipeline::stages()) {
    auto* cmd = app.add_subcommand(s, "run the " + s + " stage");
    add_common(cmd, common);
    cmd->callback([&, s] { stage_run = s; });
  }
  auto* all = app.add_subcommand("pipeline", "run every stage in order (pairs excluded)");
  add_common(all, common);
  all->callback([&] { stage_run = "pipeline"; });

  std::string synth_out = "synthetic";
  blf::SyntheticParams sp;
  auto* synth = app.add_subcommand("synth", "write the planted-attractor synthetic world and its config");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--agents", sp.agents, "number of agents");
  synth->add_option("--windows", sp.windows, "number of weekly windows");
  synth->add_option("--statements-per-window", sp.statements_per_window, "statements per agent and window");
  synth->add_option("--seed", sp.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      blf::write_world(blf::generate_world(sp), synth_out);
      std::cerr << "wrote " << synth_out << "/synthetic.ini\n";
      return 0;
    }
    auto p = make_pipeline(common);
    if (stage_run == "pipeline") p.run_all();
    else p.run(stage_run);
    return 0;
  } catch (const blf::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const blf::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
}
