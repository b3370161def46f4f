#include "rayopt/maxflow.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>

namespace rayopt::maxflow {

NodeRange FlowNetwork::add_node(std::size_t n) {
  const std::size_t first = source_.size();
  if (n > std::numeric_limits<NodeId>::max() - first - 1) {
    throw std::length_error("flow network node id space exhausted");
  }
  source_.resize(first + n, 0);
  sink_.resize(first + n, 0);
  return NodeRange{static_cast<NodeId>(first), static_cast<NodeId>(n)};
}

void FlowNetwork::check_node(NodeId u) const {
  if (u >= source_.size()) {
    throw std::out_of_range("node id " + std::to_string(u) + " is not allocated");
  }
}

void FlowNetwork::add_pairwise_arc(NodeId u, NodeId v, Energy cap_uv, Energy cap_vu) {
  check_node(u);
  check_node(v);
  if (u == v) throw std::invalid_argument("self-loop arc");
  if (cap_uv < 0 || cap_vu < 0) throw std::invalid_argument("negative arc capacity");
  if (cap_uv == 0 && cap_vu == 0) return;
  // Residual capacities of a pair never exceed the pair's total.
  checked_add(cap_uv, cap_vu);
  if (arcs_.size() >= std::numeric_limits<std::uint32_t>::max() / 2) {
    throw std::length_error("flow network arc id space exhausted");
  }
  arcs_.push_back(ArcPair{u, v, cap_uv, cap_vu});
}

void FlowNetwork::add_terminal_weights(NodeId u, Energy w_source, Energy w_sink) {
  check_node(u);
  source_[u] = checked_add(source_[u], w_source);
  sink_[u] = checked_add(sink_[u], w_sink);
}

void FlowNetwork::normalize() {
  for (std::size_t u = 0; u < source_.size(); ++u) {
    const Energy m = std::min(source_[u], sink_[u]);
    if (m == 0) continue;
    source_[u] -= m;
    sink_[u] -= m;
    constant_ = checked_add(constant_, m);
  }
}

Energy FlowNetwork::energy(std::span<const std::uint8_t> assignment) const {
  if (assignment.size() != source_.size()) {
    throw std::invalid_argument("assignment size does not match node count");
  }
  Energy e = constant_;
  for (std::size_t u = 0; u < source_.size(); ++u) {
    e = checked_add(e, assignment[u] ? source_[u] : sink_[u]);
  }
  for (const ArcPair& a : arcs_) {
    const bool from = assignment[a.from] != 0;
    const bool to = assignment[a.to] != 0;
    if (!from && to) e = checked_add(e, a.capacity);
    if (from && !to) e = checked_add(e, a.reverse_capacity);
  }
  return e;
}

void FlowNetwork::reserve(std::size_t nodes, std::size_t arcs) {
  source_.reserve(nodes);
  sink_.reserve(nodes);
  arcs_.reserve(arcs);
}

void FlowNetwork::release_arcs() {
  arcs_.clear();
  arcs_.shrink_to_fit();
}

namespace {

using ArcId = std::uint32_t;

constexpr ArcId kNoParent = std::numeric_limits<ArcId>::max();
constexpr ArcId kTerminal = kNoParent - 1;
constexpr ArcId kOrphan = kNoParent - 2;
constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
constexpr std::uint32_t kInfiniteDist = std::numeric_limits<std::uint32_t>::max();

struct Arc {
  NodeId head;
  ArcId sister;
  Energy r_cap;
};

// Boykov-Kolmogorov max-flow on a static CSR adjacency. Node state is kept
// in parallel arrays to keep the hot loops cache friendly.
class BkSolver {
 public:
  explicit BkSolver(FlowNetwork& net) {
    net.normalize();
    const std::size_t n = net.node_count();
    first_.assign(n + 1, 0);
    for (const ArcPair& a : net.arcs()) {
      ++first_[a.from + 1];
      ++first_[a.to + 1];
    }
    for (std::size_t i = 0; i < n; ++i) first_[i + 1] += first_[i];
    arcs_.resize(first_[n]);
    {
      std::vector<ArcId> fill(first_.begin(), first_.end() - 1);
      for (const ArcPair& a : net.arcs()) {
        const ArcId fwd = fill[a.from]++;
        const ArcId rev = fill[a.to]++;
        arcs_[fwd] = Arc{a.to, rev, a.capacity};
        arcs_[rev] = Arc{a.from, fwd, a.reverse_capacity};
      }
    }
    net.release_arcs();

    tr_cap_.resize(n);
    Energy total_source = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Energy s = net.source_capacity(static_cast<NodeId>(i));
      const Energy t = net.sink_capacity(static_cast<NodeId>(i));
      total_source = checked_add(total_source, s);
      tr_cap_[i] = s - t;  // one of them is zero after normalization
    }
    constant_ = net.constant_offset();

    parent_.assign(n, kNoParent);
    next_.assign(n, kNoNode);
    ts_.assign(n, 0);
    dist_.assign(n, 0);
    is_sink_.assign(n, 0);
  }

  CutResult run() {
    init();
    NodeId current = kNoNode;
    while (true) {
      NodeId i = current;
      if (i != kNoNode) {
        next_[i] = kNoNode;
        if (parent_[i] == kNoParent) i = kNoNode;
      }
      if (i == kNoNode) {
        i = next_active();
        if (i == kNoNode) break;
      }

      ArcId middle = kNoParent;
      if (!is_sink_[i]) {
        for (ArcId a = first_[i]; a < first_[i + 1]; ++a) {
          if (arcs_[a].r_cap == 0) continue;
          const NodeId j = arcs_[a].head;
          if (parent_[j] == kNoParent) {
            is_sink_[j] = 0;
            parent_[j] = arcs_[a].sister;
            ts_[j] = ts_[i];
            dist_[j] = dist_[i] + 1;
            set_active(j);
          } else if (is_sink_[j]) {
            middle = a;
            break;
          } else if (ts_[j] <= ts_[i] && dist_[j] > dist_[i]) {
            parent_[j] = arcs_[a].sister;
            ts_[j] = ts_[i];
            dist_[j] = dist_[i] + 1;
          }
        }
      } else {
        for (ArcId a = first_[i]; a < first_[i + 1]; ++a) {
          if (arcs_[arcs_[a].sister].r_cap == 0) continue;
          const NodeId j = arcs_[a].head;
          if (parent_[j] == kNoParent) {
            is_sink_[j] = 1;
            parent_[j] = arcs_[a].sister;
            ts_[j] = ts_[i];
            dist_[j] = dist_[i] + 1;
            set_active(j);
          } else if (!is_sink_[j]) {
            middle = arcs_[a].sister;
            break;
          } else if (ts_[j] <= ts_[i] && dist_[j] > dist_[i]) {
            parent_[j] = arcs_[a].sister;
            ts_[j] = ts_[i];
            dist_[j] = dist_[i] + 1;
          }
        }
      }

      ++time_;
      if (middle != kNoParent) {
        next_[i] = i;  // keeps i out of the queue while it is being reused
        current = i;
        augment(middle);
        while (!orphans_.empty()) {
          const NodeId o = orphans_.front();
          orphans_.pop_front();
          if (is_sink_[o]) {
            process_orphan<true>(o);
          } else {
            process_orphan<false>(o);
          }
        }
      } else {
        current = kNoNode;
      }
    }

    CutResult out;
    out.flow_value = flow_;
    out.constant_offset = constant_;
    out.side.resize(parent_.size());
    for (std::size_t i = 0; i < parent_.size(); ++i) {
      out.side[i] = (parent_[i] != kNoParent && is_sink_[i]) ? Side::kSink : Side::kSource;
    }
    return out;
  }

 private:
  void init() {
    for (std::size_t i = 0; i < tr_cap_.size(); ++i) {
      if (tr_cap_[i] > 0) {
        is_sink_[i] = 0;
        parent_[i] = kTerminal;
        set_active(static_cast<NodeId>(i));
        dist_[i] = 1;
      } else if (tr_cap_[i] < 0) {
        is_sink_[i] = 1;
        parent_[i] = kTerminal;
        set_active(static_cast<NodeId>(i));
        dist_[i] = 1;
      }
    }
  }

  void set_active(NodeId i) {
    if (next_[i] != kNoNode) return;
    if (queue_last_ != kNoNode) {
      next_[queue_last_] = i;
    } else {
      queue_first_ = i;
    }
    queue_last_ = i;
    next_[i] = i;
  }

  NodeId next_active() {
    while (queue_first_ != kNoNode) {
      const NodeId i = queue_first_;
      if (next_[i] == i) {
        queue_first_ = queue_last_ = kNoNode;
      } else {
        queue_first_ = next_[i];
      }
      next_[i] = kNoNode;
      if (parent_[i] != kNoParent) return i;
    }
    return kNoNode;
  }

  void augment(ArcId middle) {
    Energy bottleneck = arcs_[middle].r_cap;
    // source tree
    NodeId i = arcs_[arcs_[middle].sister].head;
    while (true) {
      const ArcId a = parent_[i];
      if (a == kTerminal) break;
      bottleneck = std::min(bottleneck, arcs_[arcs_[a].sister].r_cap);
      i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, tr_cap_[i]);
    // sink tree
    i = arcs_[middle].head;
    while (true) {
      const ArcId a = parent_[i];
      if (a == kTerminal) break;
      bottleneck = std::min(bottleneck, arcs_[a].r_cap);
      i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, -tr_cap_[i]);

    arcs_[arcs_[middle].sister].r_cap += bottleneck;
    arcs_[middle].r_cap -= bottleneck;

    i = arcs_[arcs_[middle].sister].head;
    while (true) {
      const ArcId a = parent_[i];
      if (a == kTerminal) break;
      arcs_[a].r_cap += bottleneck;
      arcs_[arcs_[a].sister].r_cap -= bottleneck;
      if (arcs_[arcs_[a].sister].r_cap == 0) make_orphan_front(i);
      i = arcs_[a].head;
    }
    tr_cap_[i] -= bottleneck;
    if (tr_cap_[i] == 0) make_orphan_front(i);

    i = arcs_[middle].head;
    while (true) {
      const ArcId a = parent_[i];
      if (a == kTerminal) break;
      arcs_[arcs_[a].sister].r_cap += bottleneck;
      arcs_[a].r_cap -= bottleneck;
      if (arcs_[a].r_cap == 0) make_orphan_front(i);
      i = arcs_[a].head;
    }
    tr_cap_[i] += bottleneck;
    if (tr_cap_[i] == 0) make_orphan_front(i);

    flow_ = checked_add(flow_, bottleneck);
  }

  void make_orphan_front(NodeId i) {
    parent_[i] = kOrphan;
    orphans_.push_front(i);
  }

  void make_orphan_back(NodeId i) {
    parent_[i] = kOrphan;
    orphans_.push_back(i);
  }

  // Residual capacity of the arc that would carry flow towards `i`'s tree
  // root when `a` is an arc out of `i` used to attach `i` below head(a).
  template <bool kSink>
  Energy attach_capacity(ArcId a) const {
    return kSink ? arcs_[a].r_cap : arcs_[arcs_[a].sister].r_cap;
  }

  template <bool kSink>
  void process_orphan(NodeId i) {
    ArcId best = kNoParent;
    std::uint32_t d_min = kInfiniteDist;

    for (ArcId a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
      if (attach_capacity<kSink>(a0) == 0) continue;
      NodeId j = arcs_[a0].head;
      if (static_cast<bool>(is_sink_[j]) != kSink || parent_[j] == kNoParent) continue;

      // Trace j back to its terminal.
      std::uint32_t d = 0;
      while (true) {
        if (ts_[j] == time_) {
          d += dist_[j];
          break;
        }
        const ArcId a = parent_[j];
        ++d;
        if (a == kTerminal) {
          ts_[j] = time_;
          dist_[j] = 1;
          break;
        }
        if (a == kOrphan) {
          d = kInfiniteDist;
          break;
        }
        j = arcs_[a].head;
      }
      if (d == kInfiniteDist) continue;
      if (d < d_min) {
        best = a0;
        d_min = d;
      }
      for (j = arcs_[a0].head; ts_[j] != time_; j = arcs_[parent_[j]].head) {
        ts_[j] = time_;
        dist_[j] = d--;
      }
    }

    parent_[i] = best;
    if (best != kNoParent) {
      ts_[i] = time_;
      dist_[i] = d_min + 1;
      return;
    }

    ts_[i] = 0;
    for (ArcId a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
      const NodeId j = arcs_[a0].head;
      const ArcId a = parent_[j];
      if (static_cast<bool>(is_sink_[j]) != kSink || a == kNoParent) continue;
      if (attach_capacity<kSink>(a0) != 0) set_active(j);
      if (a != kTerminal && a != kOrphan && arcs_[a].head == i) make_orphan_back(j);
    }
  }

  std::vector<ArcId> first_;
  std::vector<Arc> arcs_;
  std::vector<Energy> tr_cap_;
  std::vector<ArcId> parent_;
  std::vector<NodeId> next_;
  std::vector<std::uint32_t> ts_;
  std::vector<std::uint32_t> dist_;
  std::vector<std::uint8_t> is_sink_;
  std::deque<NodeId> orphans_;
  NodeId queue_first_ = kNoNode;
  NodeId queue_last_ = kNoNode;
  std::uint32_t time_ = 0;
  Energy flow_ = 0;
  Energy constant_ = 0;
};

}  // namespace

CutResult solve(FlowNetwork net) {
  BkSolver solver(net);
  return solver.run();
}

}  // namespace rayopt::maxflow
