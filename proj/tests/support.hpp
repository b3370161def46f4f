#pragma once

// Random instance generators shared by the unit tests and the acceptance
// suite.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "rayopt/geometry.hpp"
#include "rayopt/raypbf.hpp"
#include "rayopt/solver.hpp"

namespace rayopt::testing {

inline raypbf::RayCostProfile random_profile(std::mt19937_64& rng, std::size_t n, Energy lo = -20, Energy hi = 20) {
  std::uniform_int_distribution<Energy> d(lo, hi);
  raypbf::RayCostProfile p;
  p.costs.resize(n + 1);
  for (auto& c : p.costs) c = d(rng);
  return p;
}

/// All 2^n assignments, bit i of the index is x_i.
inline std::vector<std::uint8_t> assignment(std::size_t index, std::size_t n) {
  std::vector<std::uint8_t> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (index >> i) & 1U;
  return x;
}

/// Random ray through distinct voxels of [0, voxel_count).
inline std::vector<VoxelId> random_ray(std::mt19937_64& rng, std::size_t voxel_count, std::size_t max_len) {
  std::vector<VoxelId> ids(voxel_count);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  const std::size_t len = std::uniform_int_distribution<std::size_t>(1, std::min(max_len, voxel_count))(rng);
  ids.resize(len);
  return ids;
}

/// Instance on a grid with `rays` random rays, random integer tables in
/// [lo, hi] and 6-neighborhood Potts edges of weight `potts`.
inline solver::EnergyInstance random_instance(std::mt19937_64& rng, const geometry::GridDims& dims,
                                              const solver::LabelSet& labels, std::size_t rays,
                                              std::size_t max_len, Energy potts, Energy lo, Energy hi) {
  solver::EnergyInstance inst;
  inst.voxel_count = dims.count();
  inst.labels = labels;
  inst.metric = solver::LabelMetric::potts(labels.size());
  std::uniform_int_distribution<Energy> d(lo, hi);
  for (std::size_t r = 0; r < rays; ++r) {
    solver::Ray ray;
    ray.voxels = random_ray(rng, inst.voxel_count, max_len);
    ray.table = solver::RayCostTable(ray.voxels.size(), labels.size());
    for (std::size_t i = 0; i < ray.voxels.size(); ++i) {
      for (std::size_t l = 0; l < labels.size(); ++l) {
        if (l != labels.free_space()) ray.table.set(i, static_cast<Label>(l), d(rng));
      }
    }
    ray.table.set_all_free(d(rng));
    inst.rays.push_back(std::move(ray));
  }
  if (potts != 0) {
    const geometry::VoxelGrid grid(dims, 1.0, geometry::Vec3::Zero());
    for (VoxelId v = 0; v < inst.voxel_count; ++v) {
      const auto c = grid.coords(v);
      if (c[0] + 1 < dims.nx) inst.pairwise.push_back({v, grid.id(c[0] + 1, c[1], c[2]), potts});
      if (c[1] + 1 < dims.ny) inst.pairwise.push_back({v, grid.id(c[0], c[1] + 1, c[2]), potts});
      if (c[2] + 1 < dims.nz) inst.pairwise.push_back({v, grid.id(c[0], c[1], c[2] + 1), potts});
    }
  }
  return inst;
}

}  // namespace rayopt::testing
