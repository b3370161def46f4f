#include "rayopt/scene.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace rayopt::scene {

using geometry::GridDims;
using geometry::PinholeCamera;
using geometry::Vec3;
using geometry::VoxelGrid;

namespace {

constexpr Label kFree = 0;
constexpr Label kBuilding = 1;
constexpr Label kTree = 2;
constexpr Label kGround = 3;

struct PresetEntry {
  Preset preset;
  const char* name;
};
constexpr PresetEntry kPresets[] = {{Preset::kBox, "box"},
                                    {Preset::kWallWithHole, "wall_with_hole"},
                                    {Preset::kThinColumn, "thin_column"},
                                    {Preset::kTwoPlanes, "two_planes"}};

std::size_t scaled(std::size_t n, double numerator) {
  return static_cast<std::size_t>(std::lround(numerator * static_cast<double>(n) / 32.0));
}

void fill_box(VoxelGrid& g, std::array<std::size_t, 3> lo, std::array<std::size_t, 3> hi, Label l) {
  for (std::size_t z = lo[2]; z < std::min(hi[2], g.dims().nz); ++z)
    for (std::size_t y = lo[1]; y < std::min(hi[1], g.dims().ny); ++y)
      for (std::size_t x = lo[0]; x < std::min(hi[0], g.dims().nx); ++x) g.at(x, y, z) = l;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t pixel_stream(std::uint64_t seed, std::uint32_t cam, std::uint32_t u, std::uint32_t v) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ cam);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(u) << 32 | v));
  return h;
}

}  // namespace

std::optional<Preset> parse_preset(const std::string& name) {
  for (const PresetEntry& e : kPresets) {
    if (name == e.name) return e.preset;
  }
  return std::nullopt;
}

std::string preset_name(Preset p) {
  for (const PresetEntry& e : kPresets) {
    if (e.preset == p) return e.name;
  }
  return "?";
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const PresetEntry& e : kPresets) out.emplace_back(e.name);
  return out;
}

solver::LabelSet semantic_labels() { return solver::LabelSet({"free", "building", "tree", "ground"}, kFree); }

SyntheticScene build_scene(const std::string& preset, const GridDims& dims, std::uint64_t /*seed*/,
                           const CameraRig& rig) {
  const std::optional<Preset> p = parse_preset(preset);
  if (!p) throw std::invalid_argument("unknown scene preset '" + preset + "'");
  if (rig.cameras == 0) throw std::invalid_argument("a scene needs at least one camera");
  if (rig.image_size == 0) throw std::invalid_argument("image size must be positive");

  SyntheticScene s;
  s.preset = preset;
  s.truth = VoxelGrid(dims, 1.0, Vec3::Zero(), kFree);
  const std::size_t nx = dims.nx, ny = dims.ny, nz = dims.nz;

  switch (*p) {
    case Preset::kBox:
      fill_box(s.truth, {nx / 4, ny / 4, nz / 4}, {3 * nx / 4, 3 * ny / 4, 3 * nz / 4}, kBuilding);
      break;
    case Preset::kWallWithHole: {
      const std::size_t x = nx / 2;
      fill_box(s.truth, {x, ny / 8, nz / 8}, {x + 1, 7 * ny / 8, 7 * nz / 8}, kBuilding);
      const std::size_t hy = scaled(ny, 6.0), hz = scaled(nz, 6.0);
      fill_box(s.truth, {x, (ny - hy) / 2, (nz - hz) / 2}, {x + 1, (ny - hy) / 2 + hy, (nz - hz) / 2 + hz}, kFree);
      break;
    }
    case Preset::kThinColumn: {
      const std::size_t h = std::max<std::size_t>(1, std::min(nz, scaled(nz, 20.0)));
      fill_box(s.truth, {nx / 2, ny / 2, (nz - h) / 2}, {nx / 2 + 1, ny / 2 + 1, (nz - h) / 2 + h}, kTree);
      break;
    }
    case Preset::kTwoPlanes:
      fill_box(s.truth, {0, 0, nz / 4}, {nx, ny, nz / 4 + 1}, kGround);
      fill_box(s.truth, {nx / 8, ny / 2, nz / 4 + 1}, {7 * nx / 8, ny / 2 + 1, 3 * nz / 4}, kBuilding);
      break;
  }

  const Vec3 lo = s.truth.lower_corner();
  const Vec3 hi = s.truth.upper_corner();
  const Vec3 center = 0.5 * (lo + hi);
  const double radius = 0.5 * (hi - lo).norm();
  const double dist = rig.distance * s.truth.extent();
  if (!(dist > radius)) throw std::invalid_argument("cameras must be placed outside the bounding sphere");
  const double fov = 2.0 * std::asin(radius / dist);
  const double elev = rig.elevation_deg * std::numbers::pi / 180.0;
  for (std::size_t k = 0; k < rig.cameras; ++k) {
    const double az = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(rig.cameras);
    const double el = k % 2 == 0 ? elev : -elev;
    const Vec3 eye = center + dist * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    s.cameras.push_back(PinholeCamera::look_at(eye, center, Vec3::UnitZ(), fov, rig.image_size, rig.image_size));
  }
  return s;
}

SyntheticScene collapse_to_binary(const SyntheticScene& scene) {
  SyntheticScene out = scene;
  out.labels = solver::LabelSet::binary();
  const Label free_space = scene.labels.free_space();
  for (Label& l : out.truth.labels()) l = l == free_space ? 0 : 1;
  return out;
}

void CostParams::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("cost.delta must be positive");
  if (lambda_sem < 0.0 || lambda_dep < 0.0) throw std::invalid_argument("cost weights must be non-negative");
  if (matches_per_pixel < 1 || matches_per_pixel > 3) throw std::invalid_argument("cost.matches_per_pixel must be in [1, 3]");
  if (depth_sigma < 0.0) throw std::invalid_argument("cost.depth_sigma must be non-negative");
  if (confusion < 0.0 || confusion > 1.0) throw std::invalid_argument("cost.confusion must be in [0, 1]");
  if (!(semantic_floor > 0.0) || semantic_floor >= 1.0) throw std::invalid_argument("cost.semantic_floor must be in (0, 1)");
}

std::vector<double> semantic_costs(Label observed, std::size_t label_count, double confusion, double floor) {
  std::vector<double> c(label_count);
  for (std::size_t l = 0; l < label_count; ++l) {
    const double p = (l == observed ? 1.0 - confusion : 0.0) + confusion / static_cast<double>(label_count);
    c[l] = -std::log(std::max(floor, p));
  }
  return c;
}

PixelObservation observe(const geometry::CastRay& ray, const VoxelGrid& truth, const solver::LabelSet& labels,
                         const CostParams& params) {
  std::mt19937_64 rng(pixel_stream(params.seed, ray.camera, ray.u, ray.v));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Label free_space = labels.free_space();
  std::size_t k = 0;
  while (k < ray.voxels.size() && truth.label(ray.voxels[k]) == free_space) ++k;

  PixelObservation obs;
  Label observed = free_space;
  if (k < ray.voxels.size()) {
    observed = truth.label(ray.voxels[k]);
    const double d_true = ray.depths[k];
    std::normal_distribution<double> jitter(0.0, 1.0);
    const double noise = params.depth_sigma > 0.0 ? params.depth_sigma * jitter(rng) : 0.0;
    obs.matches.push_back({d_true + noise, 1.0});
    double w = 1.0;
    for (std::size_t n = 1; n < params.matches_per_pixel; ++n) {
      const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      const double offset = params.delta * (2.0 + 4.0 * unit(rng));
      w *= 0.3 + 0.6 * unit(rng);
      obs.matches.push_back({std::max(0.0, d_true + sign * offset), w});
    }
  }
  if (params.confusion > 0.0 && unit(rng) < params.confusion) {
    observed = static_cast<Label>(std::min<std::size_t>(labels.size() - 1,
                                                        static_cast<std::size_t>(unit(rng) * labels.size())));
  }
  obs.semantic_cost = semantic_costs(observed, labels.size(), params.confusion, params.semantic_floor);
  return obs;
}

std::vector<PixelObservation> render_observations(const SyntheticScene& scene, std::size_t cam,
                                                  const CostParams& params) {
  const PinholeCamera& c = scene.cameras.at(cam);
  std::vector<PixelObservation> out;
  out.reserve(c.width * c.height);
  const double max_depth = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < c.height; ++v) {
    for (std::size_t u = 0; u < c.width; ++u) {
      const geometry::CastRay ray = geometry::cast_ray(c, u, v, scene.truth, max_depth, static_cast<std::uint32_t>(cam));
      out.push_back(observe(ray, scene.truth, scene.labels, params));
    }
  }
  return out;
}

double depth_cost(const PixelObservation& obs, double d, double delta) {
  double best = 0.0;
  for (const DepthMatch& m : obs.matches) {
    const double dist = std::abs(d - m.depth);
    if (dist <= delta) best = std::min(best, m.weight * (-1.0 + dist / delta));
  }
  return best;
}

solver::RayCostTable ray_cost_table(const geometry::CastRay& ray, const PixelObservation& obs,
                                    const solver::LabelSet& labels, const CostParams& params,
                                    const FixedPointScale& scale) {
  if (ray.empty()) throw std::invalid_argument("cost table of an empty ray");
  const Label free_space = labels.free_space();
  solver::RayCostTable table(ray.length(), labels.size());
  for (std::size_t i = 0; i < ray.length(); ++i) {
    const double d = ray.depths[i];
    const double dep = params.lambda_dep * depth_cost(obs, d, params.delta);
    for (std::size_t l = 0; l < labels.size(); ++l) {
      if (l == free_space) continue;
      table.set(i, static_cast<Label>(l), scale.to_fixed((params.lambda_sem * obs.semantic_cost[l] + dep) * d * d));
    }
  }
  const double d_exit = ray.depths.back();
  table.set_all_free(scale.to_fixed(params.lambda_sem * obs.semantic_cost[free_space] * d_exit * d_exit));
  return table;
}

Metrics compute_metrics(const std::vector<Label>& result, const std::vector<Label>& truth, std::size_t label_count,
                        Label free_space) {
  if (result.size() != truth.size()) throw std::invalid_argument("metric inputs differ in size");
  std::vector<std::size_t> inter(label_count, 0), uni(label_count, 0);
  std::size_t occ_inter = 0, occ_union = 0, equal = 0;
  for (std::size_t v = 0; v < result.size(); ++v) {
    const Label r = result[v], t = truth[v];
    if (r >= label_count || t >= label_count) throw std::out_of_range("label outside the label set");
    equal += r == t;
    const bool ro = r != free_space, to = t != free_space;
    occ_inter += ro && to;
    occ_union += ro || to;
    if (r == t) {
      ++inter[r];
      ++uni[r];
    } else {
      ++uni[r];
      ++uni[t];
    }
  }
  Metrics m;
  m.occupancy_iou = occ_union == 0 ? 1.0 : static_cast<double>(occ_inter) / static_cast<double>(occ_union);
  m.class_iou.resize(label_count);
  for (std::size_t l = 0; l < label_count; ++l) {
    m.class_iou[l] = uni[l] == 0 ? 1.0 : static_cast<double>(inter[l]) / static_cast<double>(uni[l]);
  }
  m.accuracy = result.empty() ? 1.0 : static_cast<double>(equal) / static_cast<double>(result.size());
  return m;
}

}  // namespace rayopt::scene
