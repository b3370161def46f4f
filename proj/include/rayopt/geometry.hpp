#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rayopt/solver.hpp"
#include "rayopt/types.hpp"

namespace rayopt::geometry {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct GridDims {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;

  std::size_t count() const { return nx * ny * nz; }
  bool operator==(const GridDims&) const = default;
};

/// Dense voxel lattice. Voxel (ix, iy, iz) has id ix + nx * (iy + ny * iz)
/// and occupies [origin + i * voxel_size, origin + (i + 1) * voxel_size).
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(GridDims dims, double voxel_size, Vec3 origin, Label fill = 0);

  const GridDims& dims() const { return dims_; }
  double voxel_size() const { return voxel_size_; }
  const Vec3& origin() const { return origin_; }
  std::size_t voxel_count() const { return labels_.size(); }

  VoxelId id(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return static_cast<VoxelId>(ix + dims_.nx * (iy + dims_.ny * iz));
  }
  std::array<std::size_t, 3> coords(VoxelId v) const {
    return {v % dims_.nx, (v / dims_.nx) % dims_.ny, v / (dims_.nx * dims_.ny)};
  }
  bool contains(long ix, long iy, long iz) const;

  Vec3 lower_corner() const { return origin_; }
  Vec3 upper_corner() const;
  Vec3 voxel_center(VoxelId v) const;
  /// Largest side length of the grid's bounding box.
  double extent() const;

  Label label(VoxelId v) const { return labels_[v]; }
  void set_label(VoxelId v, Label l) { labels_[v] = l; }
  Label& at(std::size_t ix, std::size_t iy, std::size_t iz) { return labels_[id(ix, iy, iz)]; }
  Label at(std::size_t ix, std::size_t iy, std::size_t iz) const { return labels_[id(ix, iy, iz)]; }
  std::vector<Label>& labels() { return labels_; }
  const std::vector<Label>& labels() const { return labels_; }

 private:
  GridDims dims_;
  double voxel_size_ = 1.0;
  Vec3 origin_ = Vec3::Zero();
  std::vector<Label> labels_;
};

/// Pinhole camera. `rotation` maps camera to world coordinates; its columns
/// are the camera's right, down and forward axes.
struct PinholeCamera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 center = Vec3::Zero();
  std::size_t width = 1;
  std::size_t height = 1;

  /// Throws if focal lengths are not positive or the rotation is not
  /// orthonormal to 1e-9.
  void validate() const;

  /// Unit world direction through the center of pixel (u, v).
  Vec3 pixel_direction(std::size_t u, std::size_t v) const;

  /// Camera at `eye` looking at `target`, square pixels, vertical field of
  /// view `fov_y` in radians.
  static PinholeCamera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fov_y, std::size_t width,
                               std::size_t height);
};

struct CastRay {
  std::uint32_t camera = 0;
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  std::vector<VoxelId> voxels;  // by increasing depth
  std::vector<double> depths;   // entry distance from the camera center

  std::size_t length() const { return voxels.size(); }
  bool empty() const { return voxels.empty(); }
};

/// 3D-DDA traversal of the half-line origin + t * direction, t in
/// [0, max_depth]. A voxel is visited if the ray spends positive length in
/// it. Rays that pass exactly through a voxel edge or corner, or run inside
/// a grid plane, are displaced by 1e-9 * voxel_size first.
CastRay traverse(const Vec3& origin, const Vec3& direction, const VoxelGrid& grid, double max_depth);

CastRay cast_ray(const PinholeCamera& cam, std::size_t u, std::size_t v, const VoxelGrid& grid, double max_depth,
                 std::uint32_t camera_id = 0);

enum class Neighborhood { kSix = 6, kTwentySix = 26 };

/// Potts edges between neighboring voxels, each unordered pair once. With
/// the 6-neighborhood every edge weighs weight * voxel_size^2; with 26 the
/// weight is divided by the center distance in voxels.
std::vector<solver::PairwiseEdge> pairwise_edges(const VoxelGrid& grid, double weight,
                                                 const FixedPointScale& scale,
                                                 Neighborhood nb = Neighborhood::kSix);

}  // namespace rayopt::geometry
