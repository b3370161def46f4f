#include "rayopt/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace rayopt::geometry {

VoxelGrid::VoxelGrid(GridDims dims, double voxel_size, Vec3 origin, Label fill)
    : dims_(dims), voxel_size_(voxel_size), origin_(std::move(origin)) {
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0) throw std::invalid_argument("grid dimensions must be >= 1");
  if (!(voxel_size > 0.0)) throw std::invalid_argument("voxel size must be positive");
  if (dims.count() > std::numeric_limits<VoxelId>::max()) throw std::invalid_argument("grid too large");
  labels_.assign(dims.count(), fill);
}

bool VoxelGrid::contains(long ix, long iy, long iz) const {
  return ix >= 0 && iy >= 0 && iz >= 0 && static_cast<std::size_t>(ix) < dims_.nx &&
         static_cast<std::size_t>(iy) < dims_.ny && static_cast<std::size_t>(iz) < dims_.nz;
}

Vec3 VoxelGrid::upper_corner() const {
  return origin_ + voxel_size_ * Vec3(static_cast<double>(dims_.nx), static_cast<double>(dims_.ny),
                                      static_cast<double>(dims_.nz));
}

Vec3 VoxelGrid::voxel_center(VoxelId v) const {
  const auto c = coords(v);
  return origin_ + voxel_size_ * Vec3(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5);
}

double VoxelGrid::extent() const {
  return voxel_size_ * static_cast<double>(std::max({dims_.nx, dims_.ny, dims_.nz}));
}

void PinholeCamera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera focal lengths must be positive");
  if (width == 0 || height == 0) throw std::invalid_argument("camera image size must be positive");
  const double err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (err > 1e-9) throw std::invalid_argument("camera rotation is not orthonormal");
}

Vec3 PinholeCamera::pixel_direction(std::size_t u, std::size_t v) const {
  const Vec3 d((static_cast<double>(u) + 0.5 - cx) / fx, (static_cast<double>(v) + 0.5 - cy) / fy, 1.0);
  return (rotation * d).normalized();
}

PinholeCamera PinholeCamera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fov_y,
                                     std::size_t width, std::size_t height) {
  const Vec3 forward = (target - eye).normalized();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  PinholeCamera cam;
  cam.rotation.col(0) = right;
  cam.rotation.col(1) = down;
  cam.rotation.col(2) = forward;
  cam.center = eye;
  cam.width = width;
  cam.height = height;
  cam.fy = 0.5 * static_cast<double>(height) / std::tan(0.5 * fov_y);
  cam.fx = cam.fy;
  cam.cx = 0.5 * static_cast<double>(width);
  cam.cy = 0.5 * static_cast<double>(height);
  cam.validate();
  return cam;
}

namespace {

enum class Outcome { kDone, kDegenerate };

bool on_grid_plane(double s) { return s == std::floor(s); }

Outcome dda(const Vec3& o, const Vec3& d, const VoxelGrid& grid, double max_depth, CastRay& out) {
  out.voxels.clear();
  out.depths.clear();
  const double vs = grid.voxel_size();
  const Vec3 lo = grid.lower_corner();
  const Vec3 hi = grid.upper_corner();
  const std::array<long, 3> n{static_cast<long>(grid.dims().nx), static_cast<long>(grid.dims().ny),
                              static_cast<long>(grid.dims().nz)};

  double t0 = 0.0;
  double t1 = max_depth;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return Outcome::kDone;
      if (on_grid_plane((o[a] - lo[a]) / vs)) return Outcome::kDegenerate;
      continue;
    }
    double ta = (lo[a] - o[a]) / d[a];
    double tb = (hi[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (!(t0 < t1)) return Outcome::kDone;

  const Vec3 p = o + t0 * d;
  std::array<long, 3> idx{};
  std::array<long, 3> step{};
  for (int a = 0; a < 3; ++a) {
    const double s = (p[a] - lo[a]) / vs;
    long i = d[a] < 0.0 ? static_cast<long>(std::ceil(s)) - 1 : static_cast<long>(std::floor(s));
    idx[a] = std::clamp(i, 0L, n[a] - 1);
    step[a] = d[a] > 0.0 ? 1 : (d[a] < 0.0 ? -1 : 0);
  }
  auto next_crossing = [&](int a) {
    if (step[a] == 0) return std::numeric_limits<double>::infinity();
    const long plane = step[a] > 0 ? idx[a] + 1 : idx[a];
    return (lo[a] + static_cast<double>(plane) * vs - o[a]) / d[a];
  };

  const double tie_tol = 1e-12 * vs;
  double t = t0;
  for (;;) {
    out.voxels.push_back(grid.id(static_cast<std::size_t>(idx[0]), static_cast<std::size_t>(idx[1]),
                                 static_cast<std::size_t>(idx[2])));
    out.depths.push_back(t);
    const std::array<double, 3> tm{next_crossing(0), next_crossing(1), next_crossing(2)};
    int a = 0;
    if (tm[1] < tm[a]) a = 1;
    if (tm[2] < tm[a]) a = 2;
    if (tm[a] >= t1) break;
    for (int b = 0; b < 3; ++b) {
      if (b != a && std::abs(tm[b] - tm[a]) <= tie_tol) return Outcome::kDegenerate;
    }
    idx[a] += step[a];
    if (idx[a] < 0 || idx[a] >= n[a]) break;
    t = tm[a];
  }
  return Outcome::kDone;
}

}  // namespace

CastRay traverse(const Vec3& origin, const Vec3& direction, const VoxelGrid& grid, double max_depth) {
  const double len = direction.norm();
  if (!(len > 0.0) || !std::isfinite(len)) throw std::invalid_argument("ray direction must be nonzero");
  const Vec3 d = direction / len;
  CastRay out;
  if (dda(origin, d, grid, max_depth, out) == Outcome::kDone) return out;

  // Fixed displacement directions, projected orthogonal to the ray.
  static const std::array<Vec3, 4> kNudges{Vec3(1.0, std::sqrt(2.0), std::sqrt(3.0)),
                                           Vec3(-std::sqrt(5.0), 1.0, std::sqrt(7.0)),
                                           Vec3(std::sqrt(11.0), -std::sqrt(3.0), 1.0),
                                           Vec3(1.0, 1.0, -std::sqrt(2.0))};
  const double eps = 1e-9 * grid.voxel_size();
  for (const Vec3& e : kNudges) {
    Vec3 perp = e - e.dot(d) * d;
    if (perp.norm() < 1e-6) continue;
    perp.normalize();
    if (dda(origin + eps * perp, d, grid, max_depth, out) == Outcome::kDone) return out;
  }
  throw std::runtime_error("ray traversal could not resolve a degenerate ray");
}

CastRay cast_ray(const PinholeCamera& cam, std::size_t u, std::size_t v, const VoxelGrid& grid, double max_depth,
                 std::uint32_t camera_id) {
  if (u >= cam.width || v >= cam.height) throw std::out_of_range("pixel outside the image");
  CastRay r = traverse(cam.center, cam.pixel_direction(u, v), grid, max_depth);
  r.camera = camera_id;
  r.u = static_cast<std::uint32_t>(u);
  r.v = static_cast<std::uint32_t>(v);
  return r;
}

std::vector<solver::PairwiseEdge> pairwise_edges(const VoxelGrid& grid, double weight, const FixedPointScale& scale,
                                                 Neighborhood nb) {
  if (weight < 0.0) throw std::invalid_argument("pairwise weight must be non-negative");
  struct Offset {
    int dx, dy, dz;
    Energy w;
  };
  std::vector<Offset> offsets;
  const double base = weight * grid.voxel_size() * grid.voxel_size();
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        // Lexicographically positive half of the neighborhood.
        const bool positive = dz > 0 || (dz == 0 && (dy > 0 || (dy == 0 && dx > 0)));
        if (!positive) continue;
        const int l1 = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (nb == Neighborhood::kSix && l1 != 1) continue;
        offsets.push_back({dx, dy, dz, scale.to_fixed(base / std::sqrt(static_cast<double>(l1)))});
      }
    }
  }
  std::sort(offsets.begin(), offsets.end(), [](const Offset& a, const Offset& b) {
    return std::tuple(a.dz, a.dy, a.dx) < std::tuple(b.dz, b.dy, b.dx);
  });

  std::vector<solver::PairwiseEdge> out;
  const GridDims& g = grid.dims();
  for (std::size_t iz = 0; iz < g.nz; ++iz) {
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
      for (std::size_t ix = 0; ix < g.nx; ++ix) {
        for (const Offset& o : offsets) {
          const long jx = static_cast<long>(ix) + o.dx;
          const long jy = static_cast<long>(iy) + o.dy;
          const long jz = static_cast<long>(iz) + o.dz;
          if (!grid.contains(jx, jy, jz)) continue;
          out.push_back({grid.id(ix, iy, iz),
                         grid.id(static_cast<std::size_t>(jx), static_cast<std::size_t>(jy),
                                 static_cast<std::size_t>(jz)),
                         o.w});
        }
      }
    }
  }
  return out;
}

}  // namespace rayopt::geometry
