#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rayopt/config.hpp"
#include "rayopt/geometry.hpp"
#include "rayopt/mesh.hpp"
#include "rayopt/scene.hpp"
#include "rayopt/solver.hpp"

namespace rayopt::pipeline {

/// Runs fn(i) for i in [0, n) on `threads` workers with contiguous blocks.
/// Callers write results into per-index slots, so output never depends on
/// the thread count.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct StageTiming {
  std::string stage;
  double seconds;
};

struct OracleReport {
  Energy optimum = 0;
  Energy solver = 0;
  bool matches = false;  // solver energy equals the optimum
};

struct PipelineResult {
  scene::SyntheticScene scene;  // ground truth over the solve's label set
  std::vector<geometry::CastRay> rays;
  solver::EnergyInstance instance;
  double lambda_pair = 0.0;  // absolute Potts weight per unit area
  double mean_ray_cost = 0.0;

  solver::Labeling labeling;
  Energy energy = 0;
  std::optional<Energy> twice_lower_bound;
  std::vector<Energy> trace;
  std::vector<solver::MoveRecord> moves;
  std::size_t cycles = 0;
  std::size_t unlabeled = 0;
  std::size_t graph_nodes = 0;
  std::size_t graph_arcs = 0;

  scene::Metrics metrics;
  std::optional<OracleReport> oracle;
  std::vector<StageTiming> timings;
};

/// Scene, rays, costs and energy; no solve.
PipelineResult build_problem(const config::RunConfig& cfg);

/// build_problem followed by the solve, metrics and (if configured) the
/// oracle comparison.
PipelineResult run_pipeline(const config::RunConfig& cfg);

/// Brute-force comparison; throws oracle::BudgetExceeded on large instances.
OracleReport oracle_compare(const config::RunConfig& cfg, const PipelineResult& result);

mesh::TriangleMesh result_mesh(const config::RunConfig& cfg, const PipelineResult& result);

/// Deterministic metrics document (no timings).
std::string metrics_json(const config::RunConfig& cfg, const PipelineResult& result);
std::string energy_trace_csv(const PipelineResult& result);

/// Writes result.ply, metrics.json, energy_trace.csv and run.log.
void write_outputs(const config::RunConfig& cfg, const PipelineResult& result, const std::string& log_text);

}  // namespace rayopt::pipeline
