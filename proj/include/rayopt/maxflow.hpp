#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rayopt/types.hpp"

namespace rayopt::maxflow {

using NodeId = std::uint32_t;

/// Which side of the minimum cut a node ended up on. A node's binary value
/// is 0 on the SOURCE side and 1 on the SINK side.
enum class Side : std::uint8_t { kSource = 0, kSink = 1 };

struct NodeRange {
  NodeId first = 0;
  NodeId count = 0;

  NodeId operator[](NodeId i) const { return first + i; }
  bool empty() const { return count == 0; }
};

struct ArcPair {
  NodeId from;
  NodeId to;
  Energy capacity;          // from -> to
  Energy reverse_capacity;  // to -> from
};

/// Sparse s-t network built incrementally.
///
/// Energy convention: for a 0/1 assignment of nodes (0 = SOURCE side),
///   E = constant + sum_u [u=1] source_weight(u) + [u=0] sink_weight(u)
///       + sum_arcs [from=0, to=1] capacity + [from=1, to=0] reverse_capacity.
/// Terminal weights may be signed while the network is being built;
/// normalize() folds min(source, sink) of every node into the constant so
/// that all capacities are non-negative. The minimum of E equals
/// flow + constant_offset after solving.
class FlowNetwork {
 public:
  FlowNetwork() = default;

  NodeRange add_node(std::size_t n = 1);

  /// Parallel arcs between the same pair accumulate additively.
  void add_pairwise_arc(NodeId u, NodeId v, Energy cap_uv, Energy cap_vu);

  void add_terminal_weights(NodeId u, Energy w_source, Energy w_sink);

  void add_constant(Energy c) { constant_ = checked_add(constant_, c); }

  void normalize();

  std::size_t node_count() const { return source_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }
  std::span<const ArcPair> arcs() const { return arcs_; }
  Energy source_capacity(NodeId u) const { return source_.at(u); }
  Energy sink_capacity(NodeId u) const { return sink_.at(u); }
  Energy constant_offset() const { return constant_; }

  /// Direct evaluation of E for an assignment (0 = source side, 1 = sink side).
  Energy energy(std::span<const std::uint8_t> assignment) const;

  void reserve(std::size_t nodes, std::size_t arcs);

  /// Drops the arc list; used by the solver once it has built its own
  /// adjacency.
  void release_arcs();

 private:
  void check_node(NodeId u) const;

  std::vector<ArcPair> arcs_;
  std::vector<Energy> source_;
  std::vector<Energy> sink_;
  Energy constant_ = 0;
};

struct CutResult {
  Energy flow_value = 0;
  std::vector<Side> side;
  Energy constant_offset = 0;

  Energy min_energy() const { return checked_add(flow_value, constant_offset); }
};

/// Exact minimum s-t cut (Boykov-Kolmogorov augmenting paths with tree
/// reuse). Takes the network by value; pass an rvalue to avoid a copy of a
/// large graph. Nodes reachable from neither terminal are put on the SOURCE
/// side.
CutResult solve(FlowNetwork net);

}  // namespace rayopt::maxflow
