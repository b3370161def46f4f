#include "rayopt/solver.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>

namespace rayopt::solver {

using raypbf::BinaryEnergy;
using raypbf::RayCostProfile;
using raypbf::VarId;

LabelSet::LabelSet(std::vector<std::string> names, Label free_space)
    : names_(std::move(names)), free_space_(free_space) {
  if (names_.size() < 2) throw std::invalid_argument("a label set needs at least two labels");
  if (names_.size() > 255) throw std::invalid_argument("too many labels");
  if (free_space_ >= names_.size()) throw std::invalid_argument("free-space label is not a member of the label set");
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size()) throw std::invalid_argument("label names must be distinct");
}

LabelSet LabelSet::binary(std::string occupied) { return LabelSet({"free", std::move(occupied)}, 0); }

std::optional<Label> LabelSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<Label>(i);
  }
  return std::nullopt;
}

RayCostTable::RayCostTable(std::size_t length, std::size_t label_count)
    : length_(length), label_count_(label_count), costs_(length * label_count, 0) {}

LabelMetric LabelMetric::potts(std::size_t label_count) {
  std::vector<Energy> m(label_count * label_count, 1);
  for (std::size_t i = 0; i < label_count; ++i) m[i * label_count + i] = 0;
  return LabelMetric(label_count, std::move(m));
}

LabelMetric::LabelMetric(std::size_t label_count, std::vector<Energy> entries)
    : n_(label_count), m_(std::move(entries)) {
  if (m_.size() != n_ * n_) throw std::invalid_argument("label metric must be a square matrix");
}

bool LabelMetric::is_metric() const {
  for (std::size_t a = 0; a < n_; ++a) {
    if (m_[a * n_ + a] != 0) return false;
    for (std::size_t b = 0; b < n_; ++b) {
      if (m_[a * n_ + b] < 0 || m_[a * n_ + b] != m_[b * n_ + a]) return false;
      for (std::size_t c = 0; c < n_; ++c) {
        if (m_[a * n_ + c] > m_[a * n_ + b] + m_[b * n_ + c]) return false;
      }
    }
  }
  return true;
}

void EnergyInstance::validate() const {
  if (metric.label_count() != labels.size()) throw std::invalid_argument("metric size does not match label set");
  if (!metric.is_metric()) throw std::invalid_argument("pairwise label costs must form a metric");
  for (const Ray& r : rays) {
    if (r.table.length() != r.voxels.size() || r.table.label_count() != labels.size()) {
      throw std::invalid_argument("ray cost table shape does not match the ray");
    }
    for (VoxelId v : r.voxels) {
      if (v >= voxel_count) throw std::out_of_range("ray voxel id out of range");
    }
  }
  for (const PairwiseEdge& e : pairwise) {
    if (e.u >= voxel_count || e.v >= voxel_count || e.u == e.v) throw std::out_of_range("invalid pairwise edge");
    if (e.weight < 0) throw std::invalid_argument("negative pairwise weight");
  }
}

std::size_t first_hit(std::span<const Label> ray_labels, Label free_space) {
  std::size_t k = 0;
  while (k < ray_labels.size() && ray_labels[k] == free_space) ++k;
  return k;
}

namespace {

std::size_t ray_first_hit(const Ray& ray, std::span<const Label> labeling, Label free_space) {
  std::size_t k = 0;
  while (k < ray.voxels.size() && labeling[ray.voxels[k]] == free_space) ++k;
  return k;
}

Label other_label(const LabelSet& labels) { return labels.free_space() == 0 ? 1 : 0; }

}  // namespace

Energy ray_energy(const Ray& ray, std::span<const Label> labeling, Label free_space) {
  const std::size_t k = ray_first_hit(ray, labeling, free_space);
  return k == ray.voxels.size() ? ray.table.all_free() : ray.table.at(k, labeling[ray.voxels[k]]);
}

Energy evaluate_energy(const EnergyInstance& inst, std::span<const Label> labeling) {
  if (labeling.size() != inst.voxel_count) throw std::invalid_argument("labeling size mismatch");
  const Label lf = inst.labels.free_space();
  Energy e = 0;
  for (const Ray& r : inst.rays) e = checked_add(e, ray_energy(r, labeling, lf));
  for (const PairwiseEdge& p : inst.pairwise) {
    e = checked_add(e, checked_mul(p.weight, inst.metric(labeling[p.u], labeling[p.v])));
  }
  return e;
}

BinaryEnergy binary_energy(const EnergyInstance& inst) {
  if (inst.labels.size() != 2) throw std::invalid_argument("binary solve requires exactly two labels");
  const Label lf = inst.labels.free_space();
  const Label occ = other_label(inst.labels);
  BinaryEnergy be(inst.voxel_count);
  for (const Ray& r : inst.rays) {
    RayCostProfile profile;
    profile.costs.resize(r.voxels.size() + 1);
    for (std::size_t i = 0; i < r.voxels.size(); ++i) profile.costs[i] = r.table.at(i, occ);
    profile.costs.back() = r.table.all_free();
    be.add_ray(std::vector<VarId>(r.voxels.begin(), r.voxels.end()), std::move(profile));
  }
  auto label_of = [&](int x) { return x ? lf : occ; };
  for (const PairwiseEdge& p : inst.pairwise) {
    Energy t[2][2];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) t[a][b] = checked_mul(p.weight, inst.metric(label_of(a), label_of(b)));
    be.add_pairwise(p.u, p.v, t[0][0], t[0][1], t[1][0], t[1][1]);
  }
  return be;
}

BinaryResult solve_binary(const EnergyInstance& inst, const raypbf::BinarySolveOptions& options) {
  inst.validate();
  const BinaryEnergy be = binary_energy(inst);
  raypbf::BinarySolution sol = raypbf::solve_binary_energy(be, options);
  const Label lf = inst.labels.free_space();
  const Label occ = other_label(inst.labels);

  BinaryResult out;
  out.labeling.resize(inst.voxel_count);
  for (std::size_t v = 0; v < inst.voxel_count; ++v) out.labeling[v] = sol.labels[v] ? lf : occ;
  out.energy = evaluate_energy(inst, out.labeling);
  if (out.energy != sol.energy) throw std::logic_error("binary energy disagrees with instance energy");
  out.twice_lower_bound = sol.twice_lower_bound;
  out.persistent = std::move(sol.persistent);
  out.unlabeled = sol.unlabeled;
  out.graph_nodes = sol.graph_nodes;
  out.graph_arcs = sol.graph_arcs;
  return out;
}

ProjectedRay project_freespace_expansion(const Ray& ray, std::span<const Label> labeling, Label free_space) {
  ProjectedRay out;
  for (std::size_t i = 0; i < ray.voxels.size(); ++i) {
    const Label l = labeling[ray.voxels[i]];
    if (l == free_space) continue;
    out.vars.push_back(ray.voxels[i]);
    out.profile.costs.push_back(ray.table.at(i, l));
  }
  out.profile.costs.push_back(ray.table.all_free());
  return out;
}

ProjectedRay project_label_expansion(Label l, const Ray& ray, std::span<const Label> labeling, Label free_space) {
  if (l == free_space) throw std::invalid_argument("label expansion of the free-space label");
  const std::size_t k = ray_first_hit(ray, labeling, free_space);
  const std::size_t prefix = k == ray.voxels.size() ? k : k + 1;
  ProjectedRay out;
  out.vars.assign(ray.voxels.begin(), ray.voxels.begin() + static_cast<std::ptrdiff_t>(prefix));
  out.profile.costs.resize(prefix + 1);
  for (std::size_t i = 0; i < prefix; ++i) out.profile.costs[i] = ray.table.at(i, l);
  out.profile.costs[prefix] = k == ray.voxels.size() ? ray.table.all_free() : ray.table.at(k, labeling[ray.voxels[k]]);
  return out;
}

namespace {

// Label of voxel v after the move with move variable t.
Label transformed(Label current, std::uint8_t t, Label alpha, Label free_space) {
  if (alpha == free_space) return t ? free_space : current;
  return t ? current : alpha;
}

}  // namespace

BinaryEnergy expansion_move_energy(const EnergyInstance& inst, std::span<const Label> labeling, Label alpha) {
  const Label lf = inst.labels.free_space();
  BinaryEnergy be(inst.voxel_count);
  for (const Ray& r : inst.rays) {
    ProjectedRay pr = alpha == lf ? project_freespace_expansion(r, labeling, lf)
                                  : project_label_expansion(alpha, r, labeling, lf);
    if (pr.vars.empty()) {
      be.add_constant(pr.profile.costs[0]);
    } else {
      be.add_ray(std::move(pr.vars), std::move(pr.profile));
    }
  }
  for (const PairwiseEdge& p : inst.pairwise) {
    Energy t[2][2];
    for (std::uint8_t a = 0; a < 2; ++a) {
      for (std::uint8_t b = 0; b < 2; ++b) {
        t[a][b] = checked_mul(p.weight, inst.metric(transformed(labeling[p.u], a, alpha, lf),
                                                    transformed(labeling[p.v], b, alpha, lf)));
      }
    }
    if (t[0][0] == t[0][1] && t[0][0] == t[1][0] && t[0][0] == t[1][1]) {
      be.add_constant(t[0][0]);
    } else {
      be.add_pairwise(p.u, p.v, t[0][0], t[0][1], t[1][0], t[1][1]);
    }
  }
  return be;
}

ExpansionResult alpha_expansion(const EnergyInstance& inst, const ExpansionOptions& options) {
  inst.validate();
  const Label lf = inst.labels.free_space();

  std::vector<Label> order{lf};
  for (std::size_t l = 0; l < inst.labels.size(); ++l) {
    if (l != lf) order.push_back(static_cast<Label>(l));
  }
  if (options.shuffle_seed != 0) {
    std::mt19937_64 rng(options.shuffle_seed);
    std::shuffle(order.begin() + 1, order.end(), rng);
  }

  ExpansionResult out;
  out.labeling.assign(inst.voxel_count, lf);
  out.energy = evaluate_energy(inst, out.labeling);
  out.trace.push_back(out.energy);

  Labeling candidate(inst.voxel_count);
  for (std::size_t cycle = 0; cycle < options.max_cycles; ++cycle) {
    ++out.cycles;
    bool committed_any = false;
    for (Label alpha : order) {
      const BinaryEnergy be = expansion_move_energy(inst, out.labeling, alpha);
      // Unlabeled move variables start from "keep", or for label expansions
      // optionally from the cheapest first hit of each projected ray.
      raypbf::BinarySolveOptions bopts;
      bopts.unlabeled_fill = alpha == lf ? 0 : 1;
      if (alpha != lf && options.ray_argmin_start) bopts.start = raypbf::ray_argmin_start(be);
      const raypbf::BinarySolution sol = raypbf::solve_binary_energy(be, bopts);
      out.max_graph_nodes = std::max(out.max_graph_nodes, sol.graph_nodes);
      out.max_graph_arcs = std::max(out.max_graph_arcs, sol.graph_arcs);

      for (std::size_t v = 0; v < inst.voxel_count; ++v) {
        candidate[v] = transformed(out.labeling[v], sol.labels[v], alpha, lf);
      }
      const Energy e = evaluate_energy(inst, candidate);
      const bool commit = e < out.energy;
      if (commit) {
        out.labeling.swap(candidate);
        out.energy = e;
        committed_any = true;
      }
      out.trace.push_back(out.energy);
      out.moves.push_back({alpha, commit, out.energy, sol.unlabeled});
    }
    if (!committed_any) break;
  }
  return out;
}

}  // namespace rayopt::solver
