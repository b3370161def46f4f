#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rayopt/qpbo.hpp"
#include "rayopt/raypbf.hpp"

namespace rayopt::raypbf {

struct BinaryRayTerm {
  std::vector<VarId> vars;
  RayCostProfile profile;
};

struct BinaryPairTerm {
  VarId u;
  VarId v;
  Energy t00, t01, t10, t11;

  Energy at(std::uint8_t xu, std::uint8_t xv) const {
    return xu ? (xv ? t11 : t10) : (xv ? t01 : t00);
  }
};

/// Binary energy made of first-hit ray terms, pairwise tables and a
/// constant. x_v = 1 is free space, x_v = 0 is occupied.
class BinaryEnergy {
 public:
  explicit BinaryEnergy(std::size_t variable_count) : variable_count_(variable_count) {}

  std::size_t variable_count() const { return variable_count_; }

  void add_ray(std::vector<VarId> vars, RayCostProfile profile);
  void add_pairwise(VarId u, VarId v, Energy t00, Energy t01, Energy t10, Energy t11);
  void add_constant(Energy c) { constant_ = checked_add(constant_, c); }

  std::span<const BinaryRayTerm> rays() const { return rays_; }
  std::span<const BinaryPairTerm> pairs() const { return pairs_; }
  Energy constant() const { return constant_; }

  Energy evaluate(std::span<const std::uint8_t> x) const;

 private:
  std::size_t variable_count_;
  std::vector<BinaryRayTerm> rays_;
  std::vector<BinaryPairTerm> pairs_;
  Energy constant_ = 0;
};

/// Same contract as the generic icm_complete, evaluated with incremental
/// flip deltas.
std::vector<std::uint8_t> icm_complete(const PartialLabeling& partial, const BinaryEnergy& energy,
                                       std::uint8_t fill = 0);

/// As above, with unlabeled variable v starting at start[v].
std::vector<std::uint8_t> icm_complete(const PartialLabeling& partial, const BinaryEnergy& energy,
                                       std::span<const std::uint8_t> start);

struct BinarySolveOptions {
  std::uint8_t unlabeled_fill = 0;
  /// Per-variable ICM start for unlabeled variables; overrides
  /// unlabeled_fill when non-empty.
  std::vector<std::uint8_t> start;
  /// Unlabeled components with at most this many variables are completed
  /// by exhaustive search after ICM; 0 disables it.
  std::size_t exact_component_limit = 16;
};

/// Replaces the setting of every unlabeled component of at most
/// `max_component` variables by its best completion given all other
/// variables. Never increases the energy.
void exact_complete_components(const PartialLabeling& partial, const BinaryEnergy& energy,
                               std::vector<std::uint8_t>& labels, std::size_t max_component);

/// ICM start that marks the cheapest first hit of every ray occupied and
/// leaves everything else free.
std::vector<std::uint8_t> ray_argmin_start(const BinaryEnergy& energy);

struct BinarySolution {
  std::vector<std::uint8_t> labels;
  PartialLabeling persistent;
  Energy energy = 0;
  Energy twice_lower_bound = 0;
  std::size_t unlabeled = 0;
  std::size_t graph_nodes = 0;
  std::size_t graph_arcs = 0;
};

/// Builds the QPBO graph (ray fragments + pairwise terms), solves it and
/// completes unlabeled variables with ICM. `energy` always equals
/// evaluate(labels).
BinarySolution solve_binary_energy(const BinaryEnergy& energy, const BinarySolveOptions& options = {});

/// Graph construction only; exposed for oracles and statistics.
QpboProblem build_qpbo_problem(const BinaryEnergy& energy, QpboOptions options = {});

}  // namespace rayopt::raypbf
