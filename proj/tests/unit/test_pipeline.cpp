#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rayopt/oracle.hpp"
#include "rayopt/pipeline.hpp"

using namespace rayopt;
using config::RunConfig;

namespace {

RunConfig small(const std::string& preset) {
  RunConfig cfg;
  cfg.preset = preset;
  cfg.resolution = {8, 8, 8};
  cfg.cameras = 4;
  cfg.image_size = 16;
  return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("parallel_for covers every index once") {
  for (std::size_t threads : {1, 3, 8}) {
    std::vector<int> hits(101, 0);
    pipeline::parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) CHECK(h == 1);
  }
  CHECK_THROWS(pipeline::parallel_for(10, 2, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
}

TEST_CASE("results do not depend on the thread count") {
  for (auto mode : {config::SolverMode::kBinary, config::SolverMode::kMultilabel}) {
    RunConfig cfg = small("two_planes");
    cfg.mode = mode;
    cfg.depth_sigma = 0.3;
    cfg.confusion = 0.1;
    cfg.seed = 5;
    const auto a = pipeline::run_pipeline(cfg);
    cfg.threads = 4;
    const auto b = pipeline::run_pipeline(cfg);
    CHECK(a.labeling == b.labeling);
    CHECK(a.trace == b.trace);
    CHECK(pipeline::metrics_json(cfg, a) == pipeline::metrics_json(cfg, b));
  }
}

TEST_CASE("energies are consistent") {
  RunConfig cfg = small("box");
  const auto r = pipeline::run_pipeline(cfg);
  CHECK(r.energy == solver::evaluate_energy(r.instance, r.labeling));
  REQUIRE(r.twice_lower_bound.has_value());
  CHECK(*r.twice_lower_bound <= 2 * r.energy);
  CHECK(r.trace.front() >= r.energy);
  CHECK(r.instance.pairwise.size() == 3 * 64 * 7);
  CHECK(r.lambda_pair == doctest::Approx(0.1 * std::abs(r.mean_ray_cost)));

  cfg.mode = config::SolverMode::kMultilabel;
  const auto m = pipeline::run_pipeline(cfg);
  for (std::size_t k = 1; k < m.trace.size(); ++k) CHECK(m.trace[k] <= m.trace[k - 1]);
  const std::string csv = pipeline::energy_trace_csv(m);
  CHECK(csv.rfind("step,label,committed,energy_fixed\n0,,,", 0) == 0);
}

TEST_CASE("oracle comparison on a tiny instance") {
  RunConfig cfg = small("box");
  cfg.resolution = {2, 2, 3};
  cfg.oracle_check = true;
  const auto r = pipeline::run_pipeline(cfg);
  REQUIRE(r.oracle.has_value());
  CHECK(r.oracle->optimum <= r.oracle->solver);
  CHECK(r.oracle->optimum == oracle::brute_force_binary(r.instance).energy);
  cfg.resolution = {4, 4, 4};
  CHECK_THROWS_AS(pipeline::run_pipeline(cfg), oracle::BudgetExceeded);
}

TEST_CASE("outputs") {
  RunConfig cfg = small("wall_with_hole");
  cfg.output_dir = std::filesystem::temp_directory_path() / "rayopt_pipeline_test";
  std::filesystem::remove_all(cfg.output_dir);
  const auto r = pipeline::run_pipeline(cfg);
  pipeline::write_outputs(cfg, r, "log\n");
  for (const char* f : {"result.ply", "metrics.json", "energy_trace.csv", "run.log"}) {
    CHECK(std::filesystem::exists(cfg.output_dir / f));
  }
  std::ifstream in(cfg.output_dir / "metrics.json");
  std::stringstream s;
  s << in.rdbuf();
  CHECK(s.str() == pipeline::metrics_json(cfg, r));
  CHECK(s.str().find("\"occupancy_iou\"") != std::string::npos);
  const auto mesh = mesh::read_ply(cfg.output_dir / "result.ply");
  CHECK(mesh.triangles.size() == pipeline::result_mesh(cfg, r).triangles.size());
}

}
