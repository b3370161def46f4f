#include "rayopt/binary_energy.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>

namespace rayopt::raypbf {

void BinaryEnergy::add_ray(std::vector<VarId> vars, RayCostProfile profile) {
  if (profile.costs.size() != vars.size() + 1) {
    throw std::invalid_argument("ray profile must have one entry per voxel plus the all-free entry");
  }
  for (VarId v : vars) {
    if (v >= variable_count_) throw std::out_of_range("ray variable out of range");
  }
  rays_.push_back({std::move(vars), std::move(profile)});
}

void BinaryEnergy::add_pairwise(VarId u, VarId v, Energy t00, Energy t01, Energy t10, Energy t11) {
  if (u >= variable_count_ || v >= variable_count_) throw std::out_of_range("pairwise variable out of range");
  pairs_.push_back({u, v, t00, t01, t10, t11});
}

Energy BinaryEnergy::evaluate(std::span<const std::uint8_t> x) const {
  if (x.size() != variable_count_) throw std::invalid_argument("labeling size mismatch");
  Energy e = constant_;
  for (const BinaryRayTerm& r : rays_) {
    std::size_t k = 0;
    while (k < r.vars.size() && x[r.vars[k]] != 0) ++k;
    e = checked_add(e, r.profile.costs[k]);
  }
  for (const BinaryPairTerm& p : pairs_) e = checked_add(e, p.at(x[p.u], x[p.v]));
  return e;
}

namespace {

struct Incidence {
  std::uint32_t ray;
  std::uint32_t pos;
};

class IcmState {
 public:
  IcmState(const BinaryEnergy& energy, std::vector<std::uint8_t>& labels)
      : energy_(energy), x_(labels) {
    const std::size_t n = energy.variable_count();
    const auto rays = energy.rays();
    const auto pairs = energy.pairs();

    ray_first_.assign(n + 1, 0);
    for (const BinaryRayTerm& r : rays)
      for (VarId v : r.vars) ++ray_first_[v + 1];
    for (std::size_t v = 0; v < n; ++v) ray_first_[v + 1] += ray_first_[v];
    ray_inc_.resize(ray_first_[n]);
    {
      std::vector<std::size_t> fill(ray_first_.begin(), ray_first_.end() - 1);
      for (std::uint32_t r = 0; r < rays.size(); ++r)
        for (std::uint32_t p = 0; p < rays[r].vars.size(); ++p) ray_inc_[fill[rays[r].vars[p]]++] = {r, p};
    }

    pair_first_.assign(n + 1, 0);
    for (const BinaryPairTerm& p : pairs) {
      ++pair_first_[p.u + 1];
      ++pair_first_[p.v + 1];
    }
    for (std::size_t v = 0; v < n; ++v) pair_first_[v + 1] += pair_first_[v];
    pair_inc_.resize(pair_first_[n]);
    {
      std::vector<std::size_t> fill(pair_first_.begin(), pair_first_.end() - 1);
      for (std::uint32_t i = 0; i < pairs.size(); ++i) {
        pair_inc_[fill[pairs[i].u]++] = i;
        pair_inc_[fill[pairs[i].v]++] = i;
      }
    }

    first_hit_.resize(rays.size());
    for (std::size_t r = 0; r < rays.size(); ++r) first_hit_[r] = scan(rays[r], 0);
  }

  // Energy change of flipping v; if `apply`, also commits the flip.
  Energy flip(VarId v, bool apply) {
    const auto rays = energy_.rays();
    const auto pairs = energy_.pairs();
    const std::uint8_t old_value = x_[v];
    const std::uint8_t new_value = old_value ^ 1;
    Energy delta = 0;

    for (std::size_t k = ray_first_[v]; k < ray_first_[v + 1]; ++k) {
      const Incidence inc = ray_inc_[k];
      const BinaryRayTerm& r = rays[inc.ray];
      const std::uint32_t hit = first_hit_[inc.ray];
      std::uint32_t next = hit;
      if (new_value == 0) {
        if (inc.pos < hit) next = inc.pos;
      } else if (inc.pos == hit) {
        next = scan(r, inc.pos + 1);
      }
      if (next != hit) {
        delta = checked_add(delta, r.profile.costs[next] - r.profile.costs[hit]);
        if (apply) first_hit_[inc.ray] = next;
      }
    }
    for (std::size_t k = pair_first_[v]; k < pair_first_[v + 1]; ++k) {
      const BinaryPairTerm& p = pairs[pair_inc_[k]];
      const std::uint8_t xu_old = x_[p.u];
      const std::uint8_t xv_old = x_[p.v];
      const std::uint8_t xu_new = p.u == v ? new_value : xu_old;
      const std::uint8_t xv_new = p.v == v ? new_value : xv_old;
      delta = checked_add(delta, p.at(xu_new, xv_new) - p.at(xu_old, xv_old));
    }
    if (apply) x_[v] = new_value;
    return delta;
  }

 private:
  std::uint32_t scan(const BinaryRayTerm& r, std::uint32_t from) const {
    std::uint32_t k = from;
    while (k < r.vars.size() && x_[r.vars[k]] != 0) ++k;
    return k;
  }

  const BinaryEnergy& energy_;
  std::vector<std::uint8_t>& x_;
  std::vector<std::size_t> ray_first_;
  std::vector<Incidence> ray_inc_;
  std::vector<std::size_t> pair_first_;
  std::vector<std::uint32_t> pair_inc_;
  std::vector<std::uint32_t> first_hit_;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t v) {
  while (parent[v] != v) v = parent[v] = parent[parent[v]];
  return v;
}

// Connected components of the unlabeled variables, linked through shared
// rays and pairwise terms. Components are listed in order of their smallest
// variable.
std::vector<std::vector<VarId>> unlabeled_components(const PartialLabeling& partial, const BinaryEnergy& energy) {
  const std::size_t n = partial.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t v = 0; v < n; ++v) parent[v] = v;
  auto unite = [&](VarId a, VarId b) {
    const std::size_t ra = find_root(parent, a), rb = find_root(parent, b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  };
  for (const BinaryRayTerm& r : energy.rays()) {
    std::optional<VarId> first;
    for (VarId v : r.vars) {
      if (partial[v] != Persistent::kUnlabeled) continue;
      if (first) unite(*first, v);
      else first = v;
    }
  }
  for (const BinaryPairTerm& p : energy.pairs()) {
    if (partial[p.u] == Persistent::kUnlabeled && partial[p.v] == Persistent::kUnlabeled) unite(p.u, p.v);
  }
  std::vector<std::vector<VarId>> comps;
  std::vector<std::size_t> index(n, SIZE_MAX);
  for (std::size_t v = 0; v < n; ++v) {
    if (partial[v] != Persistent::kUnlabeled) continue;
    const std::size_t root = find_root(parent, v);
    if (index[root] == SIZE_MAX) {
      index[root] = comps.size();
      comps.emplace_back();
    }
    comps[index[root]].push_back(static_cast<VarId>(v));
  }
  return comps;
}

}  // namespace

void exact_complete_components(const PartialLabeling& partial, const BinaryEnergy& energy,
                               std::vector<std::uint8_t>& labels, std::size_t max_component) {
  if (labels.size() != energy.variable_count() || partial.size() != labels.size()) {
    throw std::invalid_argument("labeling size mismatch");
  }
  if (max_component == 0) return;
  IcmState state(energy, labels);
  for (const auto& comp : unlabeled_components(partial, energy)) {
    const std::size_t k = comp.size();
    if (k > max_component) continue;
    // Gray-code walk over all 2^k settings, then walk back to the best one.
    Energy delta = 0, best_delta = 0;
    std::uint64_t code = 0, best_code = 0;
    for (std::uint64_t step = 1; step < (std::uint64_t{1} << k); ++step) {
      const auto bit = static_cast<std::size_t>(std::countr_zero(step));
      delta = checked_add(delta, state.flip(comp[bit], true));
      code ^= std::uint64_t{1} << bit;
      if (delta < best_delta) best_delta = delta, best_code = code;
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (((code ^ best_code) >> i) & 1U) state.flip(comp[i], true);
    }
  }
}

std::vector<std::uint8_t> icm_complete(const PartialLabeling& partial, const BinaryEnergy& energy,
                                       std::uint8_t fill) {
  return icm_complete(partial, energy, std::vector<std::uint8_t>(partial.size(), fill ? 1 : 0));
}

std::vector<std::uint8_t> icm_complete(const PartialLabeling& partial, const BinaryEnergy& energy,
                                       std::span<const std::uint8_t> start) {
  if (partial.size() != energy.variable_count() || start.size() != partial.size()) {
    throw std::invalid_argument("labeling size mismatch");
  }
  std::vector<std::uint8_t> labels(partial.size());
  std::vector<VarId> free_vars;
  for (std::size_t v = 0; v < partial.size(); ++v) {
    if (partial[v] == Persistent::kUnlabeled) {
      labels[v] = start[v] ? 1 : 0;
      free_vars.push_back(static_cast<VarId>(v));
    } else {
      labels[v] = partial[v] == Persistent::kOne ? 1 : 0;
    }
  }
  if (free_vars.empty()) return labels;

  IcmState state(energy, labels);
  bool changed = true;
  while (changed) {
    changed = false;
    for (VarId v : free_vars) {
      if (state.flip(v, false) < 0) {
        state.flip(v, true);
        changed = true;
      }
    }
  }
  return labels;
}

std::vector<std::uint8_t> ray_argmin_start(const BinaryEnergy& energy) {
  std::vector<std::uint8_t> x(energy.variable_count(), 1);
  for (const BinaryRayTerm& r : energy.rays()) {
    const auto& c = r.profile.costs;
    const std::size_t k = static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
    if (k < r.vars.size()) x[r.vars[k]] = 0;
  }
  return x;
}

QpboProblem build_qpbo_problem(const BinaryEnergy& energy, QpboOptions options) {
  QpboProblem prob(energy.variable_count(), options);
  std::size_t ray_len = 0;
  for (const BinaryRayTerm& r : energy.rays()) ray_len += r.vars.size();
  // Upper bounds: 4 aux nodes and 8 arcs per ray position.
  prob.reserve(2 * energy.variable_count() + 4 * ray_len, 8 * ray_len + 2 * energy.pairs().size());

  prob.add_constant(energy.constant());
  for (const BinaryRayTerm& r : energy.rays()) {
    prob.emit_ray_fragment(r.vars, make_submodular(r.profile));
  }
  for (const BinaryPairTerm& p : energy.pairs()) {
    prob.add_pairwise_term(p.u, p.v, p.t00, p.t01, p.t10, p.t11);
  }
  return prob;
}

BinarySolution solve_binary_energy(const BinaryEnergy& energy, const BinarySolveOptions& options) {
  QpboResult q = qpbo_solve(build_qpbo_problem(energy));
  BinarySolution out;
  out.labels = options.start.empty() ? icm_complete(q.labeling, energy, options.unlabeled_fill)
                                     : icm_complete(q.labeling, energy, options.start);
  exact_complete_components(q.labeling, energy, out.labels, options.exact_component_limit);
  out.energy = energy.evaluate(out.labels);
  out.twice_lower_bound = q.twice_lower_bound;
  out.unlabeled = q.unlabeled;
  out.graph_nodes = q.nodes;
  out.graph_arcs = q.arcs;
  out.persistent = std::move(q.labeling);
  return out;
}

}  // namespace rayopt::raypbf
