#pragma once

// Synthetic worlds, rendered observations and the per-ray cost model
//   phi(i, l)   = (lambda_sem C(l) + lambda_dep C(d_i)) d_i^2
//   phi(N, l_f) = lambda_sem C(sky) d_{N-1}^2

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rayopt/geometry.hpp"
#include "rayopt/solver.hpp"
#include "rayopt/types.hpp"

namespace rayopt::scene {

enum class Preset { kBox, kWallWithHole, kThinColumn, kTwoPlanes };

std::optional<Preset> parse_preset(const std::string& name);
std::string preset_name(Preset p);
std::vector<std::string> preset_names();

/// Semantic classes of every preset; index 0 is free space.
solver::LabelSet semantic_labels();

struct CameraRig {
  std::size_t cameras = 8;
  std::size_t image_size = 96;
  /// Ring radius as a multiple of the grid extent.
  double distance = 1.5;
  /// Elevation of the ring; cameras alternate above and below.
  double elevation_deg = 25.0;
};

struct SyntheticScene {
  std::string preset;
  solver::LabelSet labels = semantic_labels();
  geometry::VoxelGrid truth;
  std::vector<geometry::PinholeCamera> cameras;
};

/// Unit voxels, grid origin at 0. Geometry depends only on the preset and
/// dimensions; `seed` is kept for the scene identity and drives nothing
/// else here.
SyntheticScene build_scene(const std::string& preset, const geometry::GridDims& dims, std::uint64_t seed,
                           const CameraRig& rig = {});

/// Relabels every non-free voxel with the single occupied label of
/// LabelSet::binary().
SyntheticScene collapse_to_binary(const SyntheticScene& scene);

struct CostParams {
  double lambda_sem = 1.0;
  double lambda_dep = 1.0;
  double delta = 2.0;  // length units
  std::size_t matches_per_pixel = 1;
  double depth_sigma = 0.0;
  double confusion = 0.0;
  double semantic_floor = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DepthMatch {
  double depth;
  double weight;
};

struct PixelObservation {
  /// C(l) per label; the free-space entry is the sky cost.
  std::vector<double> semantic_cost;
  std::vector<DepthMatch> matches;  // weights non-increasing, first is 1
};

/// -log(max(floor, (1 - p) [l = observed] + p / L))
std::vector<double> semantic_costs(Label observed, std::size_t label_count, double confusion, double floor);

/// Observation of one pixel given its cast ray against the ground truth.
/// Noise is drawn from a stream keyed by (seed, camera, pixel).
PixelObservation observe(const geometry::CastRay& ray, const geometry::VoxelGrid& truth,
                         const solver::LabelSet& labels, const CostParams& params);

/// All pixels of camera `cam`, row-major.
std::vector<PixelObservation> render_observations(const SyntheticScene& scene, std::size_t cam,
                                                  const CostParams& params);

/// Sum over matches of w_n (-1 + |d - d_n| / delta) restricted to
/// |d - d_n| <= delta; overlapping intervals take the minimum.
double depth_cost(const PixelObservation& obs, double d, double delta);

/// Real-valued costs of a ray; index l_f of `table` is ignored except for
/// the all-free entry.
solver::RayCostTable ray_cost_table(const geometry::CastRay& ray, const PixelObservation& obs,
                                    const solver::LabelSet& labels, const CostParams& params,
                                    const FixedPointScale& scale);

struct Metrics {
  double occupancy_iou = 0.0;
  std::vector<double> class_iou;  // per label, including free space
  double accuracy = 0.0;
};

Metrics compute_metrics(const std::vector<Label>& result, const std::vector<Label>& truth,
                        std::size_t label_count, Label free_space);

}  // namespace rayopt::scene
