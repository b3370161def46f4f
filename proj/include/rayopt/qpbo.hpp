#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rayopt/maxflow.hpp"
#include "rayopt/raypbf.hpp"

namespace rayopt::raypbf {

using VarId = std::uint32_t;

enum class Persistent : std::uint8_t { kZero = 0, kOne = 1, kUnlabeled = 2 };

using PartialLabeling = std::vector<Persistent>;

struct QpboOptions {
  /// Keep a registry of every auxiliary node (ray, role, depth, side). Only
  /// needed by oracles and diagnostics.
  bool record_aux = false;
};

class QpboProblem;
struct QpboResult;
QpboResult qpbo_solve(QpboProblem prob);

struct AuxRecord {
  maxflow::NodeId node;
  std::uint32_t ray;
  AuxInfo info;
  bool mirrored;
};

/// Symmetric QPBO graph. Every variable v owns the node pair (v, n + v)
/// representing x_v and x_bar_v; every term is added once over x and once,
/// complemented, over x_bar. The network therefore encodes twice the
/// energy, which keeps all capacities integral.
class QpboProblem {
 public:
  explicit QpboProblem(std::size_t variable_count, QpboOptions options = {});

  std::size_t variable_count() const { return variable_count_; }
  maxflow::NodeId node_of(VarId v) const { return v; }
  maxflow::NodeId mirror_of(VarId v) const { return static_cast<maxflow::NodeId>(variable_count_ + v); }

  void add_constant(Energy c);
  void add_unary_term(VarId v, Energy e0, Energy e1);

  /// Requires t00 + t11 <= t01 + t10.
  void add_pairwise_term(VarId u, VarId v, Energy t00, Energy t01, Energy t10, Energy t11);

  /// Emits the symmetric form of the merged ray construction. `ray_vars[i]`
  /// is the variable at ray position i. Returns the number of arcs added.
  std::size_t emit_ray_fragment(std::span<const VarId> ray_vars, const SubmodularRay& s);

  const maxflow::FlowNetwork& network() const { return net_; }
  std::size_t ray_count() const { return ray_count_; }
  std::span<const AuxRecord> aux_records() const { return aux_records_; }
  /// Variables of ray r (only with record_aux).
  std::span<const VarId> ray_vars(std::size_t r) const { return ray_vars_.at(r); }

  void reserve(std::size_t nodes, std::size_t arcs) { net_.reserve(nodes, arcs); }

 private:
  friend QpboResult qpbo_solve(QpboProblem prob);

  std::size_t variable_count_;
  QpboOptions options_;
  maxflow::FlowNetwork net_;
  std::size_t ray_count_ = 0;
  std::vector<AuxRecord> aux_records_;
  std::vector<std::vector<VarId>> ray_vars_;
  RayConstruction scratch_;
};

struct QpboResult {
  PartialLabeling labeling;
  /// Minimum of the doubled relaxation; the lower bound is half of it.
  Energy twice_lower_bound = 0;
  std::size_t unlabeled = 0;
  std::size_t nodes = 0;
  std::size_t arcs = 0;
};

QpboResult qpbo_solve(QpboProblem prob);

using EnergyFunction = std::function<Energy(std::span<const std::uint8_t>)>;

/// Completes the unlabeled variables: they start at `fill`, then are visited
/// in ascending id order and flipped whenever that strictly lowers the
/// energy, until a sweep changes nothing. Labeled variables are never touched.
std::vector<std::uint8_t> icm_complete(const PartialLabeling& partial, const EnergyFunction& energy,
                                       std::uint8_t fill = 0);

}  // namespace rayopt::raypbf
