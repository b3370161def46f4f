#pragma once

// Reduction of a first-hit ray potential over binary variables to a pairwise
// graph-representable construction with linearly many terms.
//
// Variable convention: x_i = 1 is free space, x_i = 0 is occupied. A ray's
// cost is costs[K] where K is the first position with x_K = 0 (or N if the
// whole ray is free).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rayopt/types.hpp"

namespace rayopt::raypbf {

struct RayCostProfile {
  /// costs[i] for i < N: cost if position i is the first occupied one;
  /// costs[N]: cost if the whole ray is free space.
  std::vector<Energy> costs;

  std::size_t length() const { return costs.empty() ? 0 : costs.size() - 1; }
  Energy value(std::span<const std::uint8_t> x) const;
};

/// psi(x) = k + sum_i c_i * prod_{j<=i} x_j
struct PolynomialRay {
  Energy k = 0;
  std::vector<Energy> c;

  Energy value(std::span<const std::uint8_t> x) const;
};

/// psi(x) = offset + sum_i ( -a_i prod_{j<=i} x_j - b_i (1 - x_i) prod_{j<i} x_j )
/// with a_i, b_i >= 0 and at most one of them nonzero per position.
/// f_i = sum_{j>=i} a_j + sum_{j>i} b_j is the weight carried by the merged
/// prefix chain at position i.
struct SubmodularRay {
  std::vector<Energy> a;
  std::vector<Energy> b;
  std::vector<Energy> f;
  Energy offset = 0;

  std::size_t length() const { return a.size(); }
  Energy value(std::span<const std::uint8_t> x) const;
};

PolynomialRay to_polynomial(const RayCostProfile& profile);

/// Walks the coefficients from the back, rewriting every positive product
/// through the complemented last variable and pushing its weight onto the
/// previous coefficient (or the constant for position 0).
SubmodularRay make_submodular(const PolynomialRay& poly);

inline SubmodularRay make_submodular(const RayCostProfile& profile) {
  return make_submodular(to_polynomial(profile));
}

// ---------------------------------------------------------------------------
// Pairwise constructions over ray positions and auxiliary variables.

enum class LiteralKind : std::uint8_t { kVar, kVarBar, kAux };

struct Literal {
  LiteralKind kind;
  std::uint32_t index;  // ray position for kVar/kVarBar, aux index for kAux

  static Literal var(std::uint32_t i) { return {LiteralKind::kVar, i}; }
  static Literal var_bar(std::uint32_t i) { return {LiteralKind::kVarBar, i}; }
  static Literal aux(std::uint32_t i) { return {LiteralKind::kAux, i}; }
};

/// z_i tracks prod_{k<=i} x_k; z'_i tracks (1 - x_i) prod_{k<i} x_k.
enum class AuxRole : std::uint8_t { kPrefix, kComplement };

struct AuxInfo {
  AuxRole role;
  std::uint32_t depth;
};

/// weight * u
struct LinearTerm {
  Literal u;
  Energy weight;
};

/// weight * u * (1 - v), weight >= 0
struct EdgeTerm {
  Literal u;
  Literal v;
  Energy weight;
};

/// One-sided pairwise construction whose minimum over the auxiliaries equals
/// the ray potential (with x_bar = 1 - x).
struct RayConstruction {
  std::size_t length = 0;
  std::vector<AuxInfo> aux;
  std::vector<LinearTerm> linear;
  std::vector<EdgeTerm> edges;
  Energy offset = 0;

  void clear();
};

/// The merged construction: one prefix auxiliary per position with f_i > 0
/// and one complement auxiliary per position with b_i > 0. Zero-weight terms
/// are not emitted.
void merged_construction(const SubmodularRay& s, RayConstruction& out);
RayConstruction merged_construction(const SubmodularRay& s);

/// Evaluates a construction with x_bar = 1 - x.
Energy evaluate(const RayConstruction& rc, std::span<const std::uint8_t> x,
                std::span<const std::uint8_t> aux);

/// The auxiliary assignment z_j = prod_{k<=j} x_k, z'_i = (1 - x_i) prod_{k<i} x_k.
std::vector<std::uint8_t> canonical_aux(const RayConstruction& rc, std::span<const std::uint8_t> x);

}  // namespace rayopt::raypbf
