#include "rayopt/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include "json.hpp"
#include <sstream>
#include <thread>

#include "rayopt/oracle.hpp"

namespace rayopt::pipeline {

using config::RunConfig;
using config::SolverMode;

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t block = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        const std::size_t end = std::min(n, (t + 1) * block);
        for (std::size_t i = t * block; i < end; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<StageTiming>& out) : out_(out), start_(Clock::now()) {}
  void lap(const std::string& stage) {
    const auto now = Clock::now();
    out_.push_back({stage, std::chrono::duration<double>(now - start_).count()});
    start_ = now;
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::vector<StageTiming>& out_;
  Clock::time_point start_;
};

solver::LabelSet solve_labels(const RunConfig& cfg) {
  if (cfg.mode == SolverMode::kBinary) return solver::LabelSet::binary();
  const auto it = std::find(cfg.label_names.begin(), cfg.label_names.end(), cfg.free_space);
  return solver::LabelSet(cfg.label_names, static_cast<Label>(it - cfg.label_names.begin()));
}

// Voxel ids double as binary variable ids; occupied is label 1 and x = 0.
raypbf::BinarySolveOptions binary_options(const RunConfig& cfg, const solver::EnergyInstance& inst) {
  raypbf::BinarySolveOptions opts;
  if (cfg.icm_start == "free") {
    opts.unlabeled_fill = 1;
  } else if (cfg.icm_start == "ray_argmin") {
    opts.start.assign(inst.voxel_count, 1);
    const Label occ = inst.labels.free_space() == 0 ? 1 : 0;
    for (const solver::Ray& r : inst.rays) {
      std::size_t best = r.voxels.size();
      for (std::size_t k = 0; k < r.voxels.size(); ++k) {
        if (r.table.at(k, occ) < r.table.phi(best, occ)) best = k;
      }
      if (best < r.voxels.size()) opts.start[r.voxels[best]] = 0;
    }
  }
  return opts;
}

}  // namespace

PipelineResult build_problem(const RunConfig& cfg) {
  PipelineResult res;
  Stopwatch clock(res.timings);

  scene::CameraRig rig;
  rig.cameras = cfg.cameras;
  rig.image_size = cfg.image_size;
  rig.distance = cfg.camera_distance;
  rig.elevation_deg = cfg.elevation_deg;
  scene::SyntheticScene sc = scene::build_scene(cfg.preset, cfg.resolution, cfg.seed, rig);
  if (cfg.mode == SolverMode::kBinary) {
    sc = scene::collapse_to_binary(sc);
  } else {
    const solver::LabelSet target = solve_labels(cfg);
    std::vector<Label> remap(sc.labels.size());
    for (std::size_t l = 0; l < sc.labels.size(); ++l) {
      remap[l] = l == sc.labels.free_space() ? target.free_space() : *target.find(sc.labels.name(static_cast<Label>(l)));
    }
    for (Label& l : sc.truth.labels()) l = remap[l];
    sc.labels = target;
  }
  res.scene = std::move(sc);
  clock.lap("scene");

  const scene::SyntheticScene& s = res.scene;
  const std::size_t per_cam = cfg.image_size * cfg.image_size;
  const std::size_t pixels = per_cam * s.cameras.size();
  std::vector<geometry::CastRay> all(pixels);
  const double inf = std::numeric_limits<double>::infinity();
  parallel_for(pixels, cfg.threads, [&](std::size_t i) {
    const std::size_t cam = i / per_cam;
    const std::size_t pix = i % per_cam;
    all[i] = geometry::cast_ray(s.cameras[cam], pix % cfg.image_size, pix / cfg.image_size, s.truth, inf,
                                static_cast<std::uint32_t>(cam));
  });
  for (auto& r : all) {
    if (!r.empty()) res.rays.push_back(std::move(r));
  }
  all.clear();
  all.shrink_to_fit();
  clock.lap("ray casting");

  const double vs = s.truth.voxel_size();
  scene::CostParams params;
  params.lambda_sem = cfg.lambda_sem;
  params.lambda_dep = cfg.lambda_dep;
  params.delta = cfg.delta * vs;
  params.matches_per_pixel = cfg.matches_per_pixel;
  params.depth_sigma = cfg.depth_sigma * vs;
  params.confusion = cfg.confusion;
  params.semantic_floor = cfg.semantic_floor;
  params.seed = cfg.seed;
  params.validate();
  const FixedPointScale scale(cfg.fixed_point_scale);

  solver::EnergyInstance& inst = res.instance;
  inst.voxel_count = s.truth.voxel_count();
  inst.labels = s.labels;
  inst.metric = solver::LabelMetric::potts(s.labels.size());
  inst.rays.resize(res.rays.size());
  std::vector<Energy> ray_sums(res.rays.size());
  const Label lf = s.labels.free_space();
  parallel_for(res.rays.size(), cfg.threads, [&](std::size_t i) {
    const geometry::CastRay& r = res.rays[i];
    const scene::PixelObservation obs = scene::observe(r, s.truth, s.labels, params);
    solver::Ray& out = inst.rays[i];
    out.voxels = r.voxels;
    out.table = scene::ray_cost_table(r, obs, s.labels, params, scale);
    Energy sum = out.table.all_free();
    for (std::size_t k = 0; k < r.length(); ++k) {
      for (std::size_t l = 0; l < s.labels.size(); ++l) {
        if (l != lf) sum = checked_add(sum, out.table.at(k, static_cast<Label>(l)));
      }
    }
    ray_sums[i] = sum;
  });
  Energy total = 0;
  std::size_t entries = 0;
  for (std::size_t i = 0; i < res.rays.size(); ++i) {
    total = checked_add(total, ray_sums[i]);
    entries += res.rays[i].length() * (s.labels.size() - 1) + 1;
  }
  res.mean_ray_cost = entries == 0 ? 0.0 : scale.to_real(total) / static_cast<double>(entries);
  clock.lap("cost tables");

  res.lambda_pair = cfg.lambda_pair * (cfg.relative ? std::abs(res.mean_ray_cost) : 1.0);
  inst.pairwise = geometry::pairwise_edges(s.truth, res.lambda_pair, scale, cfg.neighborhood);
  clock.lap("pairwise edges");
  return res;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  PipelineResult res = build_problem(cfg);
  Stopwatch clock(res.timings);
  const solver::EnergyInstance& inst = res.instance;
  const Label lf = inst.labels.free_space();

  if (cfg.mode == SolverMode::kBinary) {
    const solver::Labeling all_free(inst.voxel_count, lf);
    res.trace.push_back(solver::evaluate_energy(inst, all_free));
    solver::BinaryResult b = solver::solve_binary(inst, binary_options(cfg, inst));
    res.labeling = std::move(b.labeling);
    res.energy = b.energy;
    res.twice_lower_bound = b.twice_lower_bound;
    res.unlabeled = b.unlabeled;
    res.graph_nodes = b.graph_nodes;
    res.graph_arcs = b.graph_arcs;
    res.trace.push_back(res.energy);
  } else {
    solver::ExpansionOptions opts;
    opts.shuffle_seed = cfg.shuffle_seed;
    opts.max_cycles = cfg.max_cycles;
    opts.ray_argmin_start = cfg.icm_start == "ray_argmin";
    solver::ExpansionResult e = solver::alpha_expansion(inst, opts);
    res.labeling = std::move(e.labeling);
    res.energy = e.energy;
    res.trace = std::move(e.trace);
    res.moves = std::move(e.moves);
    res.cycles = e.cycles;
    for (const auto& m : res.moves) res.unlabeled = std::max(res.unlabeled, m.unlabeled);
    res.graph_nodes = e.max_graph_nodes;
    res.graph_arcs = e.max_graph_arcs;
  }
  clock.lap("solve");

  res.metrics = scene::compute_metrics(res.labeling, res.scene.truth.labels(), inst.labels.size(), lf);
  if (cfg.oracle_check) {
    res.oracle = oracle_compare(cfg, res);
    clock.lap("oracle");
  }
  return res;
}

OracleReport oracle_compare(const RunConfig& cfg, const PipelineResult& result) {
  OracleReport rep;
  rep.solver = result.energy;
  rep.optimum = cfg.mode == SolverMode::kBinary ? oracle::brute_force_binary(result.instance).energy
                                                : oracle::brute_force_multilabel(result.instance).energy;
  rep.matches = rep.solver == rep.optimum;
  return rep;
}

mesh::TriangleMesh result_mesh(const RunConfig& cfg, const PipelineResult& result) {
  geometry::VoxelGrid grid = result.scene.truth;
  grid.labels() = result.labeling;
  const mesh::TriangleMesh m = mesh::marching_cubes(grid, result.instance.labels.free_space());
  return mesh::laplacian_smooth(m, cfg.smoothing_iterations, cfg.smoothing_step);
}

std::string metrics_json(const RunConfig& cfg, const PipelineResult& r) {
  using nlohmann::ordered_json;
  const FixedPointScale scale(cfg.fixed_point_scale);
  const solver::LabelSet& labels = r.instance.labels;
  ordered_json j;
  j["preset"] = cfg.preset;
  j["resolution"] = {cfg.resolution.nx, cfg.resolution.ny, cfg.resolution.nz};
  j["mode"] = config::mode_name(cfg.mode);
  j["seed"] = cfg.seed;
  j["labels"] = std::vector<std::string>(labels.names().begin(), labels.names().end());
  j["voxels"] = r.instance.voxel_count;
  j["rays"] = r.rays.size();
  std::size_t ray_voxels = 0;
  for (const auto& ray : r.rays) ray_voxels += ray.length();
  j["ray_voxels"] = ray_voxels;
  j["pairwise_edges"] = r.instance.pairwise.size();
  j["fixed_point_scale"] = cfg.fixed_point_scale;
  j["mean_ray_cost"] = r.mean_ray_cost;
  j["lambda_pair"] = r.lambda_pair;
  j["energy"] = scale.to_real(r.energy);
  j["energy_fixed"] = r.energy;
  if (r.twice_lower_bound) {
    j["lower_bound"] = scale.to_real(*r.twice_lower_bound) / 2.0;
    j["lower_bound_fixed_x2"] = *r.twice_lower_bound;
  } else {
    j["lower_bound"] = nullptr;
  }
  j["unlabeled"] = r.unlabeled;
  j["graph"] = {{"nodes", r.graph_nodes}, {"arcs", r.graph_arcs}};
  if (cfg.mode == SolverMode::kMultilabel) {
    j["moves"] = r.moves.size();
    j["cycles"] = r.cycles;
  }
  j["occupancy_iou"] = r.metrics.occupancy_iou;
  ordered_json cls;
  for (std::size_t l = 0; l < labels.size(); ++l) cls[labels.name(static_cast<Label>(l))] = r.metrics.class_iou[l];
  j["class_iou"] = cls;
  j["accuracy"] = r.metrics.accuracy;
  if (r.oracle) {
    j["oracle"] = {{"optimum_fixed", r.oracle->optimum},
                   {"solver_fixed", r.oracle->solver},
                   {"matches", r.oracle->matches}};
  }
  return j.dump(2) + "\n";
}

std::string energy_trace_csv(const PipelineResult& r) {
  std::ostringstream out;
  out << "step,label,committed,energy_fixed\n";
  out << "0,,," << r.trace.front() << "\n";
  if (r.moves.empty()) {
    for (std::size_t k = 1; k < r.trace.size(); ++k) out << k << ",,1," << r.trace[k] << "\n";
  } else {
    for (std::size_t k = 0; k < r.moves.size(); ++k) {
      out << k + 1 << "," << r.instance.labels.name(r.moves[k].label) << "," << (r.moves[k].committed ? 1 : 0) << ","
          << r.trace[k + 1] << "\n";
    }
  }
  return out.str();
}

void write_outputs(const RunConfig& cfg, const PipelineResult& result, const std::string& log_text) {
  std::filesystem::create_directories(cfg.output_dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(cfg.output_dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (cfg.output_dir / name).string());
    f << text;
  };
  mesh::write_ply(result_mesh(cfg, result), cfg.output_dir / "result.ply", cfg.ply_format);
  write("metrics.json", metrics_json(cfg, result));
  write("energy_trace.csv", energy_trace_csv(result));
  write("run.log", log_text);
}

}  // namespace rayopt::pipeline
