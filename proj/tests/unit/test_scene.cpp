#include <cmath>
#include <random>

#include "doctest.h"
#include "rayopt/scene.hpp"
#include "rayopt/solver.hpp"

using namespace rayopt;
using namespace rayopt::scene;
using geometry::GridDims;

namespace {

constexpr Label kFree = 0;
constexpr Label kBuilding = 1;
constexpr Label kTree = 2;

std::size_t count_label(const geometry::VoxelGrid& g, Label l) {
  return static_cast<std::size_t>(std::count(g.labels().begin(), g.labels().end(), l));
}

/// Non-empty rays of every camera, in camera/row/column order.
std::vector<geometry::CastRay> scene_rays(const SyntheticScene& s) {
  std::vector<geometry::CastRay> out;
  for (std::size_t c = 0; c < s.cameras.size(); ++c) {
    for (std::size_t v = 0; v < s.cameras[c].height; ++v) {
      for (std::size_t u = 0; u < s.cameras[c].width; ++u) {
        auto r = geometry::cast_ray(s.cameras[c], u, v, s.truth, 1e9, static_cast<std::uint32_t>(c));
        if (!r.empty()) out.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::size_t truth_hit(const geometry::CastRay& r, const geometry::VoxelGrid& truth) {
  std::vector<Label> l;
  for (VoxelId v : r.voxels) l.push_back(truth.label(v));
  return solver::first_hit(l, kFree);
}

}  // namespace

TEST_SUITE("scene") {

TEST_CASE("presets") {
  CHECK(preset_names().size() == 4);
  CHECK_FALSE(parse_preset("castle").has_value());
  CHECK_THROWS(build_scene("castle", {8, 8, 8}, 0));

  SUBCASE("box") {
    const SyntheticScene s = build_scene("box", {16, 16, 16}, 0);
    CHECK(count_label(s.truth, kBuilding) == 512);
    CHECK(s.truth.at(4, 4, 4) == kBuilding);
    CHECK(s.truth.at(11, 11, 11) == kBuilding);
    CHECK(s.truth.at(3, 8, 8) == kFree);
    CHECK(s.truth.at(12, 8, 8) == kFree);
  }
  SUBCASE("wall with hole") {
    const SyntheticScene s = build_scene("wall_with_hole", {32, 32, 32}, 0);
    std::size_t wall = 0, hole = 0;
    for (std::size_t z = 4; z < 28; ++z) {
      for (std::size_t y = 4; y < 28; ++y) {
        if (s.truth.at(16, y, z) != kFree) ++wall;
        else ++hole;
      }
    }
    CHECK(hole == 36);
    CHECK(wall == 24 * 24 - 36);
    CHECK(s.truth.at(16, 16, 16) == kFree);
    CHECK(count_label(s.truth, kFree) == s.truth.voxel_count() - wall);
  }
  SUBCASE("thin column") {
    const SyntheticScene s = build_scene("thin_column", {32, 32, 32}, 0);
    CHECK(count_label(s.truth, kTree) == 20);
    CHECK(count_label(s.truth, kFree) == 32 * 32 * 32 - 20);
  }
  SUBCASE("two planes") {
    const SyntheticScene s = build_scene("two_planes", {16, 16, 16}, 0);
    CHECK(count_label(s.truth, 3) == 256);
    CHECK(count_label(s.truth, kBuilding) > 0);
  }
  SUBCASE("cameras see the grid") {
    const SyntheticScene s = build_scene("box", {16, 16, 16}, 0, CameraRig{6, 32});
    CHECK(s.cameras.size() == 6);
    for (const auto& cam : s.cameras) {
      CHECK(cam.width == 32);
      CHECK_FALSE(geometry::cast_ray(cam, 16, 16, s.truth, 1e9).empty());
    }
  }
}

TEST_CASE("binary collapse") {
  const SyntheticScene s = collapse_to_binary(build_scene("two_planes", {16, 16, 16}, 0));
  CHECK(s.labels.size() == 2);
  for (Label l : s.truth.labels()) CHECK(l <= 1);
}

TEST_CASE("depth cost") {
  PixelObservation obs;
  obs.matches.push_back({10.0, 1.0});
  CHECK(depth_cost(obs, 10.0, 2.0) == doctest::Approx(-1.0));
  CHECK(depth_cost(obs, 11.0, 2.0) == doctest::Approx(-0.5));
  CHECK(depth_cost(obs, 13.0, 2.0) == 0.0);
  obs.matches.push_back({11.0, 0.5});
  CHECK(depth_cost(obs, 11.5, 2.0) == doctest::Approx(-0.375));
  CHECK(depth_cost(obs, 12.5, 2.0) == doctest::Approx(-0.125));
  for (double d = 0.0; d < 20.0; d += 0.01) {
    const double c = depth_cost(obs, d, 2.0);
    CHECK((c <= 0.0 && c >= -1.5));
  }
}

TEST_CASE("semantic costs") {
  const auto c = semantic_costs(1, 4, 0.0, 1e-3);
  CHECK(c[1] == doctest::Approx(0.0));
  CHECK(c[0] == doctest::Approx(-std::log(1e-3)));
  const auto n = semantic_costs(1, 4, 0.2, 1e-3);
  CHECK(n[1] == doctest::Approx(-std::log(0.85)));
  CHECK(n[2] == doctest::Approx(-std::log(0.05)));
}

TEST_CASE("observations") {
  const SyntheticScene s = build_scene("box", {16, 16, 16}, 0, CameraRig{4, 24});
  const auto rays = scene_rays(s);
  CostParams p;
  SUBCASE("noiseless matches sit on the true first hit") {
    std::size_t hits = 0, misses = 0;
    for (const auto& r : rays) {
      const PixelObservation obs = observe(r, s.truth, s.labels, p);
      const std::size_t k = truth_hit(r, s.truth);
      if (k < r.length()) {
        ++hits;
        REQUIRE(obs.matches.size() == 1);
        CHECK(obs.matches[0].depth == r.depths[k]);
        CHECK(obs.matches[0].weight == 1.0);
        CHECK(obs.semantic_cost[kBuilding] == doctest::Approx(0.0));
      } else {
        ++misses;
        CHECK(obs.matches.empty());
        CHECK(std::min_element(obs.semantic_cost.begin(), obs.semantic_cost.end()) - obs.semantic_cost.begin() == 0);
      }
    }
    CHECK(hits > 0);
    CHECK(misses > 0);
  }
  SUBCASE("extra matches have lower weight") {
    p.matches_per_pixel = 3;
    for (const auto& r : rays) {
      const PixelObservation obs = observe(r, s.truth, s.labels, p);
      for (std::size_t n = 1; n < obs.matches.size(); ++n) CHECK(obs.matches[n].weight <= obs.matches[n - 1].weight);
    }
  }
  SUBCASE("observations are deterministic") {
    p.depth_sigma = 0.3;
    p.confusion = 0.2;
    p.seed = 99;
    for (std::size_t i = 0; i < rays.size(); i += 7) {
      const auto a = observe(rays[i], s.truth, s.labels, p);
      const auto b = observe(rays[i], s.truth, s.labels, p);
      CHECK(a.semantic_cost == b.semantic_cost);
      CHECK(a.matches.size() == b.matches.size());
      if (!a.matches.empty()) CHECK(a.matches[0].depth == b.matches[0].depth);
    }
  }
  CHECK_THROWS([] {
    CostParams bad;
    bad.matches_per_pixel = 4;
    bad.validate();
  }());
}

TEST_CASE("depth noise is half-normal in magnitude") {
  const SyntheticScene s = build_scene("box", {16, 16, 16}, 0, CameraRig{8, 128});
  CostParams p;
  p.depth_sigma = 0.5;
  p.seed = 3;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : scene_rays(s)) {
    const std::size_t k = truth_hit(r, s.truth);
    if (k == r.length()) continue;
    sum += std::abs(observe(r, s.truth, s.labels, p).matches[0].depth - r.depths[k]);
    ++n;
  }
  REQUIRE(n >= 10000);
  const double expect = 0.5 * std::sqrt(2.0 / M_PI);
  CHECK(std::abs(sum / static_cast<double>(n) - expect) < 0.05 * expect);
}

TEST_CASE("ray cost tables") {
  const FixedPointScale scale(1e4);
  SUBCASE("direct substitution") {
    const solver::LabelSet labels({"free", "building"}, 0);
    geometry::CastRay r;
    r.voxels = {0};
    r.depths = {2.0};
    PixelObservation obs;
    obs.semantic_cost = {3.0, 0.5};
    obs.matches.push_back({2.2, 1.0});
    CostParams p;
    p.delta = 1.0;
    const auto t = ray_cost_table(r, obs, labels, p, scale);
    CHECK(t.at(0, 1) == scale.to_fixed(-1.2));
    CHECK(t.all_free() == scale.to_fixed(3.0 * 4.0));
  }
  SUBCASE("uniform semantic cost grows with depth") {
    const solver::LabelSet labels({"free", "building"}, 0);
    geometry::CastRay r;
    r.voxels = {0, 1, 2, 3};
    r.depths = {1.0, 2.0, 3.0, 4.0};
    PixelObservation obs;
    obs.semantic_cost = {0.7, 0.7};
    CostParams p;
    p.lambda_dep = 0.0;
    const auto t = ray_cost_table(r, obs, labels, p, scale);
    for (std::size_t i = 0; i < 4; ++i) CHECK(t.at(i, 1) == scale.to_fixed(0.7 * r.depths[i] * r.depths[i]));
    for (std::size_t i = 1; i < 4; ++i) CHECK(t.at(i, 1) > t.at(i - 1, 1));
  }
  SUBCASE("noiseless box: the cheapest building depth is the surface") {
    const SyntheticScene s = build_scene("box", {16, 16, 16}, 0, CameraRig{8, 48});
    CostParams p;
    std::size_t hitting = 0, correct = 0;
    for (const auto& r : scene_rays(s)) {
      const std::size_t k = truth_hit(r, s.truth);
      if (k == r.length()) continue;
      ++hitting;
      const auto t = ray_cost_table(r, observe(r, s.truth, s.labels, p), s.labels, p, scale);
      std::size_t best = 0;
      for (std::size_t i = 1; i < r.length(); ++i) {
        if (t.at(i, kBuilding) < t.at(best, kBuilding)) best = i;
      }
      correct += best == k;
    }
    CHECK(static_cast<double>(correct) >= 0.99 * static_cast<double>(hitting));
  }
}

TEST_CASE("noiseless truth beats labelings that move a first hit") {
  const SyntheticScene s = build_scene("box", {8, 8, 8}, 0, CameraRig{6, 16});
  CostParams p;
  const FixedPointScale scale(1e4);
  solver::EnergyInstance inst;
  inst.voxel_count = s.truth.voxel_count();
  inst.labels = s.labels;
  inst.metric = solver::LabelMetric::potts(s.labels.size());
  for (const auto& r : scene_rays(s)) {
    inst.rays.push_back({r.voxels, ray_cost_table(r, observe(r, s.truth, s.labels, p), s.labels, p, scale)});
  }
  const solver::Labeling truth = s.truth.labels();
  const Energy e_truth = solver::evaluate_energy(inst, truth);
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<VoxelId> voxel(0, static_cast<VoxelId>(inst.voxel_count - 1));
  std::uniform_int_distribution<int> label(0, 3);
  for (int trial = 0; trial < 300; ++trial) {
    solver::Labeling other = truth;
    const int flips = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int k = 0; k < flips; ++k) other[voxel(rng)] = static_cast<Label>(label(rng));
    bool moved = false;
    for (const auto& r : inst.rays) {
      std::vector<Label> a, b;
      for (VoxelId v : r.voxels) {
        a.push_back(truth[v]);
        b.push_back(other[v]);
      }
      const std::size_t ka = solver::first_hit(a, kFree), kb = solver::first_hit(b, kFree);
      moved = moved || ka != kb || (ka < a.size() && a[ka] != b[kb]);
    }
    if (moved) CHECK(e_truth <= solver::evaluate_energy(inst, other));
  }
}

TEST_CASE("metrics") {
  std::vector<Label> truth(64, kFree), result(64, kFree);
  const auto same = compute_metrics(truth, truth, 2, kFree);
  CHECK(same.occupancy_iou == 1.0);
  CHECK(same.accuracy == 1.0);
  for (VoxelId v = 0; v < 8; ++v) truth[v] = 1;
  CHECK(compute_metrics(result, truth, 2, kFree).occupancy_iou == 0.0);
  for (VoxelId v = 4; v < 12; ++v) result[v] = 1;
  const auto m = compute_metrics(result, truth, 2, kFree);
  CHECK(m.occupancy_iou == doctest::Approx(4.0 / 12.0));
  CHECK(m.class_iou[1] == doctest::Approx(4.0 / 12.0));
  CHECK(m.accuracy == doctest::Approx(56.0 / 64.0));
  CHECK(compute_metrics(truth, truth, 2, kFree).class_iou == std::vector<double>{1.0, 1.0});
  CHECK_THROWS(compute_metrics(std::vector<Label>(3), truth, 2, kFree));
}

}
