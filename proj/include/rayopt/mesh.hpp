#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "rayopt/geometry.hpp"

namespace rayopt::mesh {

using Color = std::array<std::uint8_t, 3>;

struct TriangleMesh {
  std::vector<geometry::Vec3> vertices;
  std::vector<Color> colors;  // one per vertex
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

/// Fixed palette indexed by label; index 0 is used for free space.
Color label_color(Label l);

/// Marching cubes on the occupancy field (label != free_space) sampled at
/// voxel centers and padded with one layer of free space, so the output is
/// closed. Ambiguous faces separate their occupied corners. Triangles are
/// oriented with normals pointing into free space. Each vertex takes the
/// color of the label of its occupied sample.
TriangleMesh marching_cubes(const geometry::VoxelGrid& grid, Label free_space, double iso = 0.5);

/// Jacobi umbrella smoothing: every vertex moves by step times the offset to
/// the centroid of its edge neighbors, `iterations` times.
TriangleMesh laplacian_smooth(const TriangleMesh& mesh, std::size_t iterations, double step);

enum class PlyFormat { kAscii, kBinaryLittleEndian };

/// PLY 1.0 with float x, y, z, uchar red, green, blue and a uchar/int face
/// list. Ascii coordinates use "%.6f".
void write_ply(const TriangleMesh& mesh, const std::filesystem::path& path, PlyFormat format);

/// Reads files in the layout produced by write_ply.
TriangleMesh read_ply(const std::filesystem::path& path);

/// Triangles emitted by one of the 256 cube cases; exposed for tests.
std::size_t marching_cubes_triangle_count(std::uint8_t cube_case);

double surface_area(const TriangleMesh& mesh);

}  // namespace rayopt::mesh
