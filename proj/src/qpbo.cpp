#include "rayopt/qpbo.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rayopt::raypbf {

using maxflow::NodeId;

QpboProblem::QpboProblem(std::size_t variable_count, QpboOptions options)
    : variable_count_(variable_count), options_(options) {
  net_.add_node(2 * variable_count);
}

void QpboProblem::add_constant(Energy c) { net_.add_constant(checked_mul(c, 2)); }

void QpboProblem::add_unary_term(VarId v, Energy e0, Energy e1) {
  if (v >= variable_count_) throw std::out_of_range("variable id out of range");
  net_.add_terminal_weights(node_of(v), e1, e0);
  net_.add_terminal_weights(mirror_of(v), e0, e1);
}

void QpboProblem::add_pairwise_term(VarId u, VarId v, Energy t00, Energy t01, Energy t10, Energy t11) {
  if (u >= variable_count_ || v >= variable_count_) throw std::out_of_range("variable id out of range");
  if (u == v) throw std::invalid_argument("pairwise term on a single variable");
  const Energy lambda = checked_add(checked_add(t01, t10), -checked_add(t00, t11));
  if (lambda < 0) {
    throw std::invalid_argument("non-submodular pairwise table (t00 + t11 > t01 + t10)");
  }
  // E = t00 + alpha u + beta v + p [u=0, v=1] + q [u=1, v=0]
  const Energy p = std::clamp<Energy>(t01 - t00, 0, lambda);
  const Energy q = lambda - p;
  const Energy alpha = t10 - t00 - q;
  const Energy beta = t01 - t00 - p;

  net_.add_constant(checked_mul(t00, 2));
  if (alpha != 0) {
    net_.add_terminal_weights(node_of(u), alpha, 0);
    net_.add_terminal_weights(mirror_of(u), 0, alpha);
  }
  if (beta != 0) {
    net_.add_terminal_weights(node_of(v), beta, 0);
    net_.add_terminal_weights(mirror_of(v), 0, beta);
  }
  if (p != 0 || q != 0) {
    net_.add_pairwise_arc(node_of(u), node_of(v), p, q);
    net_.add_pairwise_arc(mirror_of(u), mirror_of(v), q, p);
  }
}

std::size_t QpboProblem::emit_ray_fragment(std::span<const VarId> ray_vars, const SubmodularRay& s) {
  if (ray_vars.size() != s.length()) {
    throw std::invalid_argument("ray variable list does not match submodular ray length");
  }
  for (VarId v : ray_vars) {
    if (v >= variable_count_) throw std::out_of_range("ray variable id " + std::to_string(v) + " out of range");
  }
  const std::uint32_t ray_index = static_cast<std::uint32_t>(ray_count_++);
  merged_construction(s, scratch_);
  const RayConstruction& rc = scratch_;
  net_.add_constant(checked_mul(rc.offset, 2));

  const std::size_t aux_count = rc.aux.size();
  const maxflow::NodeRange aux = net_.add_node(2 * aux_count);
  const NodeId mirror_base = aux.first + static_cast<NodeId>(aux_count);

  auto node = [&](const Literal& l) -> NodeId {
    switch (l.kind) {
      case LiteralKind::kVar:
        return node_of(ray_vars[l.index]);
      case LiteralKind::kVarBar:
        return mirror_of(ray_vars[l.index]);
      case LiteralKind::kAux:
        return aux.first + l.index;
    }
    return 0;
  };
  auto mirror = [&](const Literal& l) -> NodeId {
    switch (l.kind) {
      case LiteralKind::kVar:
        return mirror_of(ray_vars[l.index]);
      case LiteralKind::kVarBar:
        return node_of(ray_vars[l.index]);
      case LiteralKind::kAux:
        return mirror_base + l.index;
    }
    return 0;
  };

  // w u           -> x side: cost when u = 1;  mirror: w (1 - m(u))
  // w u (1 - v)   -> x side: arc v -> u;       mirror: w (1 - m(u)) m(v), arc m(u) -> m(v)
  for (const LinearTerm& t : rc.linear) {
    net_.add_terminal_weights(node(t.u), t.weight, 0);
    net_.add_terminal_weights(mirror(t.u), 0, t.weight);
  }
  for (const EdgeTerm& t : rc.edges) {
    net_.add_pairwise_arc(node(t.v), node(t.u), t.weight, 0);
    net_.add_pairwise_arc(mirror(t.u), mirror(t.v), t.weight, 0);
  }

  if (options_.record_aux) {
    for (std::size_t k = 0; k < aux_count; ++k) {
      aux_records_.push_back({aux.first + static_cast<NodeId>(k), ray_index, rc.aux[k], false});
      aux_records_.push_back({mirror_base + static_cast<NodeId>(k), ray_index, rc.aux[k], true});
    }
    ray_vars_.emplace_back(ray_vars.begin(), ray_vars.end());
  }
  return 2 * rc.edges.size();
}

QpboResult qpbo_solve(QpboProblem prob) {
  QpboResult out;
  out.nodes = prob.net_.node_count();
  out.arcs = prob.net_.arc_count();
  const std::size_t n = prob.variable_count_;
  const maxflow::CutResult cut = maxflow::solve(std::move(prob.net_));
  out.twice_lower_bound = cut.min_energy();
  out.labeling.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const bool x = cut.side[v] == maxflow::Side::kSink;
    const bool x_bar = cut.side[n + v] == maxflow::Side::kSink;
    if (x != x_bar) {
      out.labeling[v] = x ? Persistent::kOne : Persistent::kZero;
    } else {
      out.labeling[v] = Persistent::kUnlabeled;
      ++out.unlabeled;
    }
  }
  return out;
}

std::vector<std::uint8_t> icm_complete(const PartialLabeling& partial, const EnergyFunction& energy,
                                       std::uint8_t fill) {
  std::vector<std::uint8_t> labels(partial.size());
  std::vector<std::size_t> free_vars;
  for (std::size_t v = 0; v < partial.size(); ++v) {
    if (partial[v] == Persistent::kUnlabeled) {
      labels[v] = fill ? 1 : 0;
      free_vars.push_back(v);
    } else {
      labels[v] = partial[v] == Persistent::kOne ? 1 : 0;
    }
  }
  if (free_vars.empty()) return labels;

  Energy current = energy(labels);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t v : free_vars) {
      labels[v] ^= 1;
      const Energy candidate = energy(labels);
      if (candidate < current) {
        current = candidate;
        changed = true;
      } else {
        labels[v] ^= 1;
      }
    }
  }
  return labels;
}

}  // namespace rayopt::raypbf
