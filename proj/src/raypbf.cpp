#include "rayopt/raypbf.hpp"

#include <stdexcept>

namespace rayopt::raypbf {

namespace {

void check_length(std::size_t expected, std::size_t got) {
  if (expected != got) throw std::invalid_argument("assignment length does not match ray length");
}

}  // namespace

Energy RayCostProfile::value(std::span<const std::uint8_t> x) const {
  if (costs.empty()) throw std::invalid_argument("empty ray cost profile");
  check_length(length(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) return costs[i];
  }
  return costs.back();
}

Energy PolynomialRay::value(std::span<const std::uint8_t> x) const {
  check_length(c.size(), x.size());
  Energy v = k;
  for (std::size_t i = 0; i < c.size() && x[i] != 0; ++i) v = checked_add(v, c[i]);
  return v;
}

Energy SubmodularRay::value(std::span<const std::uint8_t> x) const {
  check_length(a.size(), x.size());
  Energy v = offset;
  bool prefix = true;  // prod_{j<i} x_j
  for (std::size_t i = 0; i < a.size() && prefix; ++i) {
    if (x[i] != 0) {
      v = checked_add(v, -a[i]);
    } else {
      v = checked_add(v, -b[i]);
      prefix = false;
    }
  }
  return v;
}

PolynomialRay to_polynomial(const RayCostProfile& profile) {
  if (profile.costs.empty()) throw std::invalid_argument("ray cost profile must have at least one entry");
  PolynomialRay poly;
  poly.k = profile.costs[0];
  poly.c.resize(profile.length());
  for (std::size_t i = 0; i < poly.c.size(); ++i) {
    poly.c[i] = checked_add(profile.costs[i + 1], -profile.costs[i]);
  }
  return poly;
}

SubmodularRay make_submodular(const PolynomialRay& poly) {
  const std::size_t n = poly.c.size();
  SubmodularRay s;
  s.a.assign(n, 0);
  s.b.assign(n, 0);
  s.f.assign(n, 0);
  s.offset = poly.k;

  std::vector<Energy> c = poly.c;
  for (std::size_t r = n; r-- > 0;) {
    if (c[r] <= 0) {
      s.a[r] = -c[r];
    } else {
      s.b[r] = c[r];
      if (r > 0) {
        c[r - 1] = checked_add(c[r - 1], c[r]);
      } else {
        s.offset = checked_add(s.offset, c[r]);
      }
    }
  }

  // f_i = a_i + b_{i+1} + f_{i+1}
  Energy acc = 0;
  for (std::size_t r = n; r-- > 0;) {
    if (r + 1 < n) acc = checked_add(acc, s.b[r + 1]);
    acc = checked_add(acc, s.a[r]);
    s.f[r] = acc;
  }
  return s;
}

void RayConstruction::clear() {
  length = 0;
  aux.clear();
  linear.clear();
  edges.clear();
  offset = 0;
}

void merged_construction(const SubmodularRay& s, RayConstruction& out) {
  constexpr std::uint32_t kNone = ~0u;
  const std::size_t n = s.length();
  out.clear();
  out.length = n;
  out.offset = s.offset;

  thread_local std::vector<std::uint32_t> prefix;
  prefix.assign(n, kNone);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (s.f[i] > 0) {
      prefix[i] = static_cast<std::uint32_t>(out.aux.size());
      out.aux.push_back({AuxRole::kPrefix, i});
    }
  }

  for (std::uint32_t i = 0; i < n; ++i) {
    if (s.f[i] > 0) {
      const Literal z = Literal::aux(prefix[i]);
      if (s.a[i] > 0) out.linear.push_back({z, -s.a[i]});
      out.edges.push_back({z, Literal::var(i), s.f[i]});
      // f_{i-1} >= f_i, so z_{i-1} exists.
      if (i > 0) out.edges.push_back({z, Literal::aux(prefix[i - 1]), s.f[i]});
    }
    if (s.b[i] > 0) {
      const Literal zc = Literal::aux(static_cast<std::uint32_t>(out.aux.size()));
      out.aux.push_back({AuxRole::kComplement, i});
      out.linear.push_back({zc, -s.b[i]});
      out.edges.push_back({zc, Literal::var_bar(i), s.b[i]});
      if (i > 0) out.edges.push_back({zc, Literal::aux(prefix[i - 1]), s.b[i]});
    }
  }
}

RayConstruction merged_construction(const SubmodularRay& s) {
  RayConstruction rc;
  merged_construction(s, rc);
  return rc;
}

namespace {

std::uint8_t literal_value(const Literal& l, std::span<const std::uint8_t> x,
                           std::span<const std::uint8_t> aux) {
  switch (l.kind) {
    case LiteralKind::kVar:
      return x[l.index] ? 1 : 0;
    case LiteralKind::kVarBar:
      return x[l.index] ? 0 : 1;
    case LiteralKind::kAux:
      return aux[l.index] ? 1 : 0;
  }
  return 0;
}

}  // namespace

Energy evaluate(const RayConstruction& rc, std::span<const std::uint8_t> x,
                std::span<const std::uint8_t> aux) {
  check_length(rc.length, x.size());
  if (aux.size() != rc.aux.size()) throw std::invalid_argument("aux assignment length mismatch");
  Energy e = rc.offset;
  for (const LinearTerm& t : rc.linear) {
    if (literal_value(t.u, x, aux)) e = checked_add(e, t.weight);
  }
  for (const EdgeTerm& t : rc.edges) {
    if (literal_value(t.u, x, aux) && !literal_value(t.v, x, aux)) e = checked_add(e, t.weight);
  }
  return e;
}

std::vector<std::uint8_t> canonical_aux(const RayConstruction& rc, std::span<const std::uint8_t> x) {
  check_length(rc.length, x.size());
  std::vector<std::uint8_t> prefix_through(rc.length + 1, 1);  // prod_{k<i} x_k at index i
  for (std::size_t i = 0; i < rc.length; ++i) prefix_through[i + 1] = prefix_through[i] && x[i];
  std::vector<std::uint8_t> out(rc.aux.size());
  for (std::size_t k = 0; k < rc.aux.size(); ++k) {
    const std::uint32_t d = rc.aux[k].depth;
    out[k] = rc.aux[k].role == AuxRole::kPrefix ? prefix_through[d + 1]
                                                : static_cast<std::uint8_t>(prefix_through[d] && !x[d]);
  }
  return out;
}

}  // namespace rayopt::raypbf
