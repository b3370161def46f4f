#pragma once

// Exhaustive reference solvers. Deliberately naive; used by tests and the
// acceptance suite only.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rayopt/binary_energy.hpp"
#include "rayopt/geometry.hpp"
#include "rayopt/maxflow.hpp"
#include "rayopt/qpbo.hpp"
#include "rayopt/raypbf.hpp"
#include "rayopt/solver.hpp"

namespace rayopt::oracle {

struct OracleBudget {
  std::size_t max_binary_vars = 14;
  std::size_t max_multilabel_states = 20000;
  std::size_t max_aux_vars = 20;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BinaryOptimum {
  Energy energy = 0;
  /// Every minimizing assignment, in lexicographic enumeration order
  /// (bit v of the enumeration index is variable v).
  std::vector<std::vector<std::uint8_t>> optima;
};

BinaryOptimum brute_force_binary(const raypbf::BinaryEnergy& energy, const OracleBudget& budget = {});

/// Two-label instance; assignments are labelings (values in the label set).
struct LabelingOptimum {
  Energy energy = 0;
  std::vector<solver::Labeling> optima;
};

LabelingOptimum brute_force_binary(const solver::EnergyInstance& inst, const OracleBudget& budget = {});
LabelingOptimum brute_force_multilabel(const solver::EnergyInstance& inst, const OracleBudget& budget = {});

struct FragmentMin {
  Energy minimum = 0;
  /// Whether the canonical auxiliary assignment attains the minimum.
  bool canonical_attains = false;
};

/// Minimum of a one-sided construction over its auxiliaries for fixed x.
FragmentMin construction_min(const raypbf::RayConstruction& rc, std::span<const std::uint8_t> x,
                             const OracleBudget& budget = {});

/// Minimum of a QPBO network over every auxiliary node (recorded with
/// QpboOptions::record_aux) with variable nodes fixed to x and mirrors to
/// 1 - x. The value is that of the doubled network.
FragmentMin fragment_min(const raypbf::QpboProblem& prob, std::span<const std::uint8_t> x,
                         const OracleBudget& budget = {});

/// The per-term constructions before merging: one chain of i + 1 private
/// auxiliaries for every nonzero a_i or b_i. Offsets are left to the caller.
std::vector<raypbf::RayConstruction> unmerged_constructions(const raypbf::SubmodularRay& s);

/// Minimum over the free nodes of `net` with the remaining nodes fixed by
/// `assignment`. Components of free nodes are enumerated independently.
Energy minimize_free_nodes(const maxflow::FlowNetwork& net, std::span<const std::uint8_t> assignment,
                           std::span<const maxflow::NodeId> free_nodes, const OracleBudget& budget = {});

/// Voxels whose box meets the ray segment t in [0, max_depth] in positive
/// length, ordered by entry distance. Tests every voxel of the grid.
std::vector<VoxelId> slab_traversal(const geometry::Vec3& origin, const geometry::Vec3& direction,
                                    const geometry::VoxelGrid& grid, double max_depth);

/// Distinct voxels containing the points origin + k * step * direction, in
/// order of first appearance.
std::vector<VoxelId> sampled_traversal(const geometry::Vec3& origin, const geometry::Vec3& direction,
                                       const geometry::VoxelGrid& grid, double max_depth, double step);

}  // namespace rayopt::oracle
