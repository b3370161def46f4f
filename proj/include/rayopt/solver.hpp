#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rayopt/binary_energy.hpp"
#include "rayopt/raypbf.hpp"
#include "rayopt/types.hpp"

namespace rayopt::solver {

class LabelSet {
 public:
  LabelSet(std::vector<std::string> names, Label free_space);

  static LabelSet binary(std::string occupied = "occupied");

  std::size_t size() const { return names_.size(); }
  Label free_space() const { return free_space_; }
  const std::string& name(Label l) const { return names_.at(l); }
  std::span<const std::string> names() const { return names_; }
  std::optional<Label> find(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  Label free_space_;
};

/// Costs phi(i, l) of a ray for every depth i < N and label l, plus the
/// all-free-space cost phi(N, l_f). Entries phi(i, l_f) for i < N are unused.
class RayCostTable {
 public:
  RayCostTable() = default;
  RayCostTable(std::size_t length, std::size_t label_count);

  std::size_t length() const { return length_; }
  std::size_t label_count() const { return label_count_; }

  Energy at(std::size_t depth, Label l) const { return costs_[depth * label_count_ + l]; }
  void set(std::size_t depth, Label l, Energy cost) { costs_[depth * label_count_ + l] = cost; }
  Energy all_free() const { return all_free_; }
  void set_all_free(Energy cost) { all_free_ = cost; }

  /// phi(K, label) with the all-free entry at K == N.
  Energy phi(std::size_t depth, Label l) const { return depth == length_ ? all_free_ : at(depth, l); }

 private:
  std::size_t length_ = 0;
  std::size_t label_count_ = 0;
  std::vector<Energy> costs_;
  Energy all_free_ = 0;
};

struct Ray {
  std::vector<VoxelId> voxels;  // ordered by depth
  RayCostTable table;
};

struct PairwiseEdge {
  VoxelId u;
  VoxelId v;
  Energy weight;
};

/// Multiplier matrix for pairwise costs: cost(l1, l2) = weight * metric(l1, l2).
class LabelMetric {
 public:
  static LabelMetric potts(std::size_t label_count);
  LabelMetric(std::size_t label_count, std::vector<Energy> entries);

  std::size_t label_count() const { return n_; }
  Energy operator()(Label a, Label b) const { return m_[a * n_ + b]; }

  /// Zero diagonal, symmetric, non-negative and satisfies the triangle
  /// inequality; these keep every expansion move submodular.
  bool is_metric() const;

 private:
  std::size_t n_;
  std::vector<Energy> m_;
};

struct EnergyInstance {
  std::size_t voxel_count = 0;
  LabelSet labels = LabelSet::binary();
  std::vector<Ray> rays;
  std::vector<PairwiseEdge> pairwise;
  LabelMetric metric = LabelMetric::potts(2);

  /// Checks ray voxel ids, table shapes and the metric.
  void validate() const;
};

using Labeling = std::vector<Label>;

/// Index of the first non-free voxel of a ray, or its length.
std::size_t first_hit(std::span<const Label> ray_labels, Label free_space);

Energy ray_energy(const Ray& ray, std::span<const Label> labeling, Label free_space);
Energy evaluate_energy(const EnergyInstance& inst, std::span<const Label> labeling);

struct BinaryResult {
  Labeling labeling;
  Energy energy = 0;
  Energy twice_lower_bound = 0;
  raypbf::PartialLabeling persistent;
  std::size_t unlabeled = 0;
  std::size_t graph_nodes = 0;
  std::size_t graph_arcs = 0;
};

/// Two-label problem {occupied, l_f}; x = 1 corresponds to l_f.
raypbf::BinaryEnergy binary_energy(const EnergyInstance& inst);
BinaryResult solve_binary(const EnergyInstance& inst, const raypbf::BinarySolveOptions& options = {});

/// A ray projected onto the move variables of one expansion.
struct ProjectedRay {
  std::vector<VoxelId> vars;
  raypbf::RayCostProfile profile;
};

/// Free-space expansion: t = 1 switches a voxel to l_f, t = 0 keeps it.
/// Only currently occupied voxels influence the ray.
ProjectedRay project_freespace_expansion(const Ray& ray, std::span<const Label> labeling, Label free_space);

/// Expansion of l != l_f: t = 0 switches a voxel to l, t = 1 keeps it. Only
/// the prefix up to and including the current first hit matters.
ProjectedRay project_label_expansion(Label l, const Ray& ray, std::span<const Label> labeling, Label free_space);

struct ExpansionOptions {
  /// 0 keeps the declared order (l_f first); anything else shuffles the
  /// non-free labels with that seed.
  std::uint64_t shuffle_seed = 0;
  std::size_t max_cycles = 100;
  /// Unlabeled variables of a label expansion start from the cheapest first
  /// hit of each projected ray instead of keeping their label.
  bool ray_argmin_start = true;
};

struct MoveRecord {
  Label label;
  bool committed;
  Energy energy;  // energy after the move
  std::size_t unlabeled;
};

struct ExpansionResult {
  Labeling labeling;
  Energy energy = 0;
  std::vector<Energy> trace;  // initial energy followed by one entry per move
  std::vector<MoveRecord> moves;
  std::size_t cycles = 0;
  std::size_t max_graph_nodes = 0;
  std::size_t max_graph_arcs = 0;
};

/// Binary move energy for expanding `alpha` from `labeling`.
raypbf::BinaryEnergy expansion_move_energy(const EnergyInstance& inst, std::span<const Label> labeling, Label alpha);

ExpansionResult alpha_expansion(const EnergyInstance& inst, const ExpansionOptions& options = {});

}  // namespace rayopt::solver
