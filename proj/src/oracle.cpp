#include "rayopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace rayopt::oracle {

using maxflow::NodeId;
using raypbf::AuxRole;
using raypbf::Literal;
using raypbf::RayConstruction;
using solver::Labeling;

BinaryOptimum brute_force_binary(const raypbf::BinaryEnergy& energy, const OracleBudget& budget) {
  const std::size_t n = energy.variable_count();
  if (n > budget.max_binary_vars) {
    throw BudgetExceeded("binary oracle: " + std::to_string(n) + " variables exceed the budget");
  }
  BinaryOptimum out;
  out.energy = std::numeric_limits<Energy>::max();
  std::vector<std::uint8_t> x(n);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    for (std::size_t v = 0; v < n; ++v) x[v] = (code >> v) & 1;
    const Energy e = energy.evaluate(x);
    if (e < out.energy) {
      out.energy = e;
      out.optima.clear();
    }
    if (e == out.energy) out.optima.push_back(x);
  }
  return out;
}

namespace {

LabelingOptimum enumerate_labelings(const solver::EnergyInstance& inst, std::size_t states) {
  const std::size_t n = inst.voxel_count;
  const std::size_t L = inst.labels.size();
  LabelingOptimum out;
  out.energy = std::numeric_limits<Energy>::max();
  Labeling x(n, 0);
  for (std::size_t s = 0; s < states; ++s) {
    const Energy e = solver::evaluate_energy(inst, x);
    if (e < out.energy) {
      out.energy = e;
      out.optima.clear();
    }
    if (e == out.energy) out.optima.push_back(x);
    // Odometer increment, voxel 0 fastest.
    for (std::size_t v = 0; v < n; ++v) {
      if (++x[v] < L) break;
      x[v] = 0;
    }
  }
  return out;
}

std::size_t state_count(std::size_t labels, std::size_t vars, std::size_t limit) {
  std::size_t states = 1;
  for (std::size_t v = 0; v < vars; ++v) {
    if (states > limit / labels) return limit + 1;
    states *= labels;
  }
  return states;
}

}  // namespace

LabelingOptimum brute_force_binary(const solver::EnergyInstance& inst, const OracleBudget& budget) {
  if (inst.labels.size() != 2) throw std::invalid_argument("binary oracle requires exactly two labels");
  if (inst.voxel_count > budget.max_binary_vars) {
    throw BudgetExceeded("binary oracle: " + std::to_string(inst.voxel_count) + " variables exceed the budget");
  }
  inst.validate();
  return enumerate_labelings(inst, std::size_t{1} << inst.voxel_count);
}

LabelingOptimum brute_force_multilabel(const solver::EnergyInstance& inst, const OracleBudget& budget) {
  const std::size_t states = state_count(inst.labels.size(), inst.voxel_count, budget.max_multilabel_states);
  if (states > budget.max_multilabel_states) {
    throw BudgetExceeded("multilabel oracle: state space exceeds the budget");
  }
  inst.validate();
  return enumerate_labelings(inst, states);
}

FragmentMin construction_min(const RayConstruction& rc, std::span<const std::uint8_t> x, const OracleBudget& budget) {
  const std::size_t m = rc.aux.size();
  if (m > budget.max_aux_vars) throw BudgetExceeded("fragment oracle: too many auxiliary variables");
  if (x.size() != rc.length) throw std::invalid_argument("assignment length does not match construction");
  FragmentMin out;
  out.minimum = std::numeric_limits<Energy>::max();
  std::vector<std::uint8_t> z(m);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << m); ++code) {
    for (std::size_t k = 0; k < m; ++k) z[k] = (code >> k) & 1;
    out.minimum = std::min(out.minimum, raypbf::evaluate(rc, x, z));
  }
  out.canonical_attains = raypbf::evaluate(rc, x, raypbf::canonical_aux(rc, x)) == out.minimum;
  return out;
}

Energy minimize_free_nodes(const maxflow::FlowNetwork& net, std::span<const std::uint8_t> assignment,
                           std::span<const NodeId> free_nodes, const OracleBudget& budget) {
  const std::size_t n = net.node_count();
  std::vector<std::int32_t> local(n, -1);
  for (std::size_t k = 0; k < free_nodes.size(); ++k) local[free_nodes[k]] = static_cast<std::int32_t>(k);

  // Union-find over arcs joining two free nodes.
  std::vector<std::size_t> parent(free_nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const maxflow::ArcPair& a : net.arcs()) {
    if (local[a.from] >= 0 && local[a.to] >= 0) {
      parent[find(static_cast<std::size_t>(local[a.from]))] = find(static_cast<std::size_t>(local[a.to]));
    }
  }
  std::vector<std::vector<NodeId>> components;
  {
    std::vector<std::int32_t> comp_of_root(free_nodes.size(), -1);
    for (std::size_t k = 0; k < free_nodes.size(); ++k) {
      const std::size_t r = find(k);
      if (comp_of_root[r] < 0) {
        comp_of_root[r] = static_cast<std::int32_t>(components.size());
        components.emplace_back();
      }
      components[static_cast<std::size_t>(comp_of_root[r])].push_back(free_nodes[k]);
    }
  }
  std::vector<std::vector<std::size_t>> comp_arcs(components.size());
  std::vector<std::int32_t> comp_of(n, -1);
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (components[c].size() > budget.max_aux_vars) throw BudgetExceeded("fragment oracle: component too large");
    for (NodeId u : components[c]) comp_of[u] = static_cast<std::int32_t>(c);
  }
  const auto arcs = net.arcs();
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const std::int32_t c = comp_of[arcs[i].from] >= 0 ? comp_of[arcs[i].from] : comp_of[arcs[i].to];
    if (c >= 0) comp_arcs[static_cast<std::size_t>(c)].push_back(i);
  }

  std::vector<std::uint8_t> x(assignment.begin(), assignment.end());
  for (NodeId u : free_nodes) x[u] = 0;

  auto local_cost = [&](std::size_t c) {
    Energy e = 0;
    for (NodeId u : components[c]) e += x[u] ? net.source_capacity(u) : net.sink_capacity(u);
    for (std::size_t i : comp_arcs[c]) {
      const maxflow::ArcPair& a = arcs[i];
      if (!x[a.from] && x[a.to]) e += a.capacity;
      if (x[a.from] && !x[a.to]) e += a.reverse_capacity;
    }
    return e;
  };

  Energy total = net.energy(x);
  for (std::size_t c = 0; c < components.size(); ++c) {
    const Energy base = local_cost(c);
    Energy best = base;
    const auto& nodes = components[c];
    for (std::uint64_t code = 1; code < (std::uint64_t{1} << nodes.size()); ++code) {
      for (std::size_t k = 0; k < nodes.size(); ++k) x[nodes[k]] = (code >> k) & 1;
      best = std::min(best, local_cost(c));
    }
    for (NodeId u : nodes) x[u] = 0;
    total += best - base;
  }
  return total;
}

FragmentMin fragment_min(const raypbf::QpboProblem& prob, std::span<const std::uint8_t> x,
                         const OracleBudget& budget) {
  const std::size_t n = prob.variable_count();
  if (x.size() != n) throw std::invalid_argument("assignment size does not match variable count");
  const maxflow::FlowNetwork& net = prob.network();
  std::vector<std::uint8_t> assignment(net.node_count(), 0);
  for (std::size_t v = 0; v < n; ++v) {
    assignment[prob.node_of(static_cast<raypbf::VarId>(v))] = x[v];
    assignment[prob.mirror_of(static_cast<raypbf::VarId>(v))] = x[v] ^ 1;
  }
  std::vector<NodeId> free_nodes;
  for (const raypbf::AuxRecord& r : prob.aux_records()) {
    free_nodes.push_back(r.node);
    // Canonical values: z_j = prod_{k<=j} x_k, z'_i = (1 - x_i) prod_{k<i} x_k.
    const auto vars = prob.ray_vars(r.ray);
    std::uint8_t prefix = 1;
    for (std::uint32_t k = 0; k < r.info.depth; ++k) prefix &= x[vars[k]];
    const std::uint8_t at = x[vars[r.info.depth]];
    const std::uint8_t value = r.info.role == AuxRole::kPrefix ? (prefix & at) : (prefix & (at ^ 1));
    assignment[r.node] = r.mirrored ? value ^ 1 : value;
  }
  if (free_nodes.size() != net.node_count() - 2 * n) {
    throw std::invalid_argument("fragment oracle requires QpboOptions::record_aux");
  }
  FragmentMin out;
  out.minimum = minimize_free_nodes(net, assignment, free_nodes, budget);
  out.canonical_attains = net.energy(assignment) == out.minimum;
  return out;
}

std::vector<RayConstruction> unmerged_constructions(const raypbf::SubmodularRay& s) {
  std::vector<RayConstruction> out;
  const std::size_t N = s.length();
  for (std::uint32_t i = 0; i < N; ++i) {
    for (int kind = 0; kind < 2; ++kind) {
      const Energy w = kind == 0 ? s.a[i] : s.b[i];
      if (w == 0) continue;
      RayConstruction rc;
      rc.length = N;
      // Chain z_0 .. z_i; the last one is the complement auxiliary for b.
      for (std::uint32_t j = 0; j < i; ++j) rc.aux.push_back({AuxRole::kPrefix, j});
      rc.aux.push_back({kind == 0 ? AuxRole::kPrefix : AuxRole::kComplement, i});
      rc.linear.push_back({Literal::aux(i), -w});
      rc.edges.push_back({Literal::aux(i), kind == 0 ? Literal::var(i) : Literal::var_bar(i), w});
      for (std::uint32_t j = 0; j < i; ++j) {
        rc.edges.push_back({Literal::aux(j + 1), Literal::aux(j), w});
        rc.edges.push_back({Literal::aux(j), Literal::var(j), w});
      }
      out.push_back(std::move(rc));
    }
  }
  return out;
}

}  // namespace rayopt::oracle

namespace rayopt::oracle {

std::vector<VoxelId> slab_traversal(const geometry::Vec3& origin, const geometry::Vec3& direction,
                                    const geometry::VoxelGrid& grid, double max_depth) {
  const geometry::Vec3 d = direction.normalized();
  std::vector<std::pair<double, VoxelId>> hits;
  const double vs = grid.voxel_size();
  for (VoxelId v = 0; v < grid.voxel_count(); ++v) {
    const auto c = grid.coords(v);
    double t0 = 0.0;
    double t1 = max_depth;
    bool miss = false;
    for (int a = 0; a < 3; ++a) {
      const double lo = grid.origin()[a] + static_cast<double>(c[a]) * vs;
      const double hi = lo + vs;
      if (d[a] == 0.0) {
        if (origin[a] <= lo || origin[a] >= hi) miss = true;
        continue;
      }
      double ta = (lo - origin[a]) / d[a];
      double tb = (hi - origin[a]) / d[a];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
    }
    if (!miss && t0 < t1) hits.emplace_back(t0, v);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<VoxelId> out;
  for (const auto& h : hits) out.push_back(h.second);
  return out;
}

std::vector<VoxelId> sampled_traversal(const geometry::Vec3& origin, const geometry::Vec3& direction,
                                       const geometry::VoxelGrid& grid, double max_depth, double step) {
  const geometry::Vec3 d = direction.normalized();
  const double vs = grid.voxel_size();
  std::vector<VoxelId> out;
  for (double t = 0.0; t <= max_depth; t += step) {
    const geometry::Vec3 p = (origin + t * d - grid.origin()) / vs;
    const long ix = static_cast<long>(std::floor(p.x()));
    const long iy = static_cast<long>(std::floor(p.y()));
    const long iz = static_cast<long>(std::floor(p.z()));
    if (!grid.contains(ix, iy, iz)) continue;
    const VoxelId v = grid.id(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy), static_cast<std::size_t>(iz));
    if (out.empty() || out.back() != v) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  }
  return out;
}

}  // namespace rayopt::oracle
