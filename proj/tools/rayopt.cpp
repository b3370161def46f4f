// Command-line front end: run, schema, oracle-check.
#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rayopt/config.hpp"
#include "rayopt/oracle.hpp"
#include "rayopt/pipeline.hpp"

namespace {

using namespace rayopt;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

std::string summary(const config::RunConfig& cfg, const pipeline::PipelineResult& r) {
  const FixedPointScale scale(cfg.fixed_point_scale);
  std::ostringstream out;
  out << "preset " << cfg.preset << ", " << cfg.resolution.nx << "x" << cfg.resolution.ny << "x" << cfg.resolution.nz
      << ", mode " << config::mode_name(cfg.mode) << "\n";
  out << "rays " << r.rays.size() << ", pairwise edges " << r.instance.pairwise.size() << "\n";
  out << "energy " << scale.to_real(r.energy) << " (" << r.energy << " fixed)";
  if (r.twice_lower_bound) out << ", lower bound " << scale.to_real(*r.twice_lower_bound) / 2.0;
  out << ", unlabeled " << r.unlabeled << "\n";
  out << "occupancy IoU " << r.metrics.occupancy_iou << ", accuracy " << r.metrics.accuracy << "\n";
  if (r.oracle) {
    out << "oracle optimum " << r.oracle->optimum << ", solver " << r.oracle->solver << ": "
        << (r.oracle->matches ? "match" : "MISMATCH") << "\n";
  }
  return out.str();
}

std::string run_log(const config::RunConfig& cfg, const pipeline::PipelineResult& r) {
  std::ostringstream out;
  out << "# configuration\n" << config::to_ini(cfg) << "\n# timings\n";
  double total = 0.0;
  for (const auto& t : r.timings) {
    out << t.stage << " " << t.seconds << " s\n";
    total += t.seconds;
  }
  out << "total " << total << " s\n\n# summary\n" << summary(cfg, r);
  return out.str();
}

int cmd_run(const std::string& path, const std::vector<std::string>& overrides) {
  const config::RunConfig cfg = config::load_config(path, overrides);
  pipeline::PipelineResult res;
  try {
    res = pipeline::run_pipeline(cfg);
  } catch (const oracle::BudgetExceeded& e) {
    throw config::ConfigError("run.oracle_check", e.what());
  }
  pipeline::write_outputs(cfg, res, run_log(cfg, res));
  std::cout << summary(cfg, res) << "outputs in " << cfg.output_dir.string() << "\n";
  return res.oracle && !res.oracle->matches ? kExitFailure : kExitOk;
}

int cmd_oracle_check(const std::string& path, const std::vector<std::string>& overrides) {
  config::RunConfig cfg = config::load_config(path, overrides);
  cfg.oracle_check = true;
  pipeline::PipelineResult res;
  try {
    res = pipeline::run_pipeline(cfg);
  } catch (const oracle::BudgetExceeded& e) {
    throw config::ConfigError("scene.resolution", std::string("instance too large for brute force: ") + e.what());
  }
  std::cout << summary(cfg, res);
  return res.oracle->matches ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rayopt: semantic voxel reconstruction with first-hit ray potentials"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "solve a scene and write result.ply, metrics.json, energy_trace.csv, run.log");
  run->add_option("config", run_config, "INI configuration file")->required();
  run->allow_extras();
  run->footer("Extra arguments of the form --section.key=value override the file.");

  app.add_subcommand("schema", "print every configuration key with its default");

  std::string oracle_config;
  auto* check = app.add_subcommand("oracle-check", "compare the solver with brute force on a small instance");
  check->add_option("config", oracle_config, "INI configuration file")->required();
  check->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_config, run->remaining());
    if (check->parsed()) return cmd_oracle_check(oracle_config, check->remaining());
    std::cout << config::schema_text();
    return kExitOk;
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
