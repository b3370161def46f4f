#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rayopt/mesh.hpp"

using namespace rayopt;
using namespace rayopt::mesh;
using geometry::Vec3;
using geometry::VoxelGrid;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rayopt_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

/// Every directed edge appears once and its reverse appears once.
bool watertight(const TriangleMesh& m) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> count;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) ++count[{t[k], t[(k + 1) % 3]}];
  }
  for (const auto& [e, c] : count) {
    if (c != 1) return false;
    auto it = count.find({e.second, e.first});
    if (it == count.end() || it->second != 1) return false;
  }
  return true;
}

long euler_characteristic(const TriangleMesh& m) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) edges.insert({std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])});
  }
  return static_cast<long>(m.vertices.size()) - static_cast<long>(edges.size()) +
         static_cast<long>(m.triangles.size());
}

void check_valid(const TriangleMesh& m) {
  CHECK(m.colors.size() == m.vertices.size());
  for (const auto& t : m.triangles) {
    for (auto i : t) CHECK(i < m.vertices.size());
    CHECK(t[0] != t[1]);
    CHECK(t[1] != t[2]);
    CHECK(t[0] != t[2]);
  }
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("case table") {
  CHECK(marching_cubes_triangle_count(0) == 0);
  CHECK(marching_cubes_triangle_count(255) == 0);
  for (int c = 0; c < 8; ++c) {
    CHECK(marching_cubes_triangle_count(static_cast<std::uint8_t>(1 << c)) == 1);
    CHECK(marching_cubes_triangle_count(static_cast<std::uint8_t>(255 ^ (1 << c))) == 1);
  }
  CHECK(marching_cubes_triangle_count(0x03) == 2);
  CHECK(marching_cubes_triangle_count(0x0f) == 2);
}

TEST_CASE("empty grid") {
  const TriangleMesh m = marching_cubes(VoxelGrid({4, 4, 4}, 1.0, Vec3::Zero()), 0);
  CHECK(m.vertices.empty());
  CHECK(m.triangles.empty());
}

TEST_CASE("single voxel is a closed sphere-like surface") {
  VoxelGrid g({1, 1, 1}, 1.0, Vec3::Zero());
  g.set_label(0, 2);
  const TriangleMesh m = marching_cubes(g, 0);
  check_valid(m);
  CHECK(m.vertices.size() == 6);
  CHECK(m.triangles.size() == 8);
  CHECK(euler_characteristic(m) == 2);
  CHECK(watertight(m));
  for (const auto& c : m.colors) CHECK(c == label_color(2));
}

TEST_CASE("solid block") {
  VoxelGrid g({10, 10, 10}, 1.0, Vec3::Zero());
  for (std::size_t z = 1; z < 9; ++z)
    for (std::size_t y = 1; y < 9; ++y)
      for (std::size_t x = 1; x < 9; ++x) g.at(x, y, z) = 1;
  const TriangleMesh m = marching_cubes(g, 0);
  check_valid(m);
  CHECK(watertight(m));
  CHECK(euler_characteristic(m) == 2);
  CHECK(std::abs(surface_area(m) - 384.0) <= 0.1 * 384.0);
  // Normals point away from the block center.
  const Vec3 center(5, 5, 5);
  for (const auto& t : m.triangles) {
    const Vec3 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
    CHECK((b - a).cross(c - a).dot((a + b + c) / 3.0 - center) > 0.0);
  }
}

TEST_CASE("random grids are watertight") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 40; ++trial) {
    VoxelGrid g({5, 4, 6}, 0.5, Vec3(1, 2, 3));
    for (auto& l : g.labels()) l = static_cast<Label>(std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? 1 : 0);
    const TriangleMesh m = marching_cubes(g, 0);
    check_valid(m);
    CHECK(watertight(m));
  }
}

TEST_CASE("laplacian smoothing") {
  TriangleMesh tet;
  tet.vertices = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  tet.colors.assign(4, label_color(1));
  tet.triangles = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};

  const TriangleMesh same = laplacian_smooth(tet, 0, 0.5);
  CHECK(same.vertices == tet.vertices);

  const TriangleMesh s = laplacian_smooth(tet, 1, 0.5);
  CHECK(s.triangles == tet.triangles);
  // Neighbour centroid of a vertex is -v/3, so v moves to (1 - 0.5 * 4/3) v.
  for (std::size_t i = 0; i < 4; ++i) CHECK(s.vertices[i].isApprox(tet.vertices[i] / 3.0));

  VoxelGrid g({3, 3, 3}, 1.0, Vec3::Zero());
  g.at(1, 1, 1) = 1;
  g.at(2, 1, 1) = 1;
  const TriangleMesh m = marching_cubes(g, 0);
  const TriangleMesh sm = laplacian_smooth(m, 1, 0.5);
  CHECK(sm.vertices.size() == m.vertices.size());
  CHECK(sm.triangles == m.triangles);
  std::vector<std::set<std::uint32_t>> ring(m.vertices.size());
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      ring[t[k]].insert(t[(k + 1) % 3]);
      ring[t[k]].insert(t[(k + 2) % 3]);
    }
  }
  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    Vec3 lo = m.vertices[v], hi = m.vertices[v];
    for (auto n : ring[v]) {
      lo = lo.cwiseMin(m.vertices[n]);
      hi = hi.cwiseMax(m.vertices[n]);
    }
    for (int a = 0; a < 3; ++a) {
      CHECK(sm.vertices[v][a] >= lo[a] - 1e-12);
      CHECK(sm.vertices[v][a] <= hi[a] + 1e-12);
    }
  }
}

TEST_CASE("ply output") {
  SUBCASE("empty mesh") {
    const auto p = temp_path("empty.ply");
    write_ply(TriangleMesh{}, p, PlyFormat::kAscii);
    const std::string text = slurp(p);
    CHECK(text.find("element vertex 0\n") != std::string::npos);
    CHECK(text.find("element face 0\n") != std::string::npos);
    CHECK(text.substr(text.size() - 11) == "end_header\n");
  }
  SUBCASE("one triangle") {
    TriangleMesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1.5, 0)};
    m.colors.assign(3, Color{10, 20, 30});
    m.triangles = {{0, 1, 2}};
    const auto p = temp_path("tri.ply");
    write_ply(m, p, PlyFormat::kAscii);
    const std::string text = slurp(p);
    const std::string body = text.substr(text.find("end_header\n") + 11);
    CHECK(body == "0.000000 0.000000 0.000000 10 20 30\n"
                  "1.000000 0.000000 0.000000 10 20 30\n"
                  "0.000000 1.500000 0.000000 10 20 30\n"
                  "3 0 1 2\n");
    CHECK(text.find("property float x\n") != std::string::npos);
    CHECK(text.find("property uchar red\n") != std::string::npos);
    CHECK(text.find("property list uchar int vertex_indices\n") != std::string::npos);
  }
  SUBCASE("round trip in both formats") {
    VoxelGrid g({4, 4, 4}, 1.0, Vec3::Zero());
    g.at(1, 1, 1) = 1;
    g.at(2, 1, 1) = 2;
    g.at(2, 2, 2) = 1;
    const TriangleMesh m = marching_cubes(g, 0);
    for (PlyFormat f : {PlyFormat::kAscii, PlyFormat::kBinaryLittleEndian}) {
      const auto p = temp_path("round.ply");
      write_ply(m, p, f);
      const TriangleMesh r = read_ply(p);
      CHECK(r.vertices.size() == m.vertices.size());
      CHECK(r.triangles == m.triangles);
      CHECK(r.colors == m.colors);
      for (std::size_t i = 0; i < m.vertices.size(); ++i) CHECK((r.vertices[i] - m.vertices[i]).norm() < 1e-5);
    }
    CHECK(slurp(temp_path("round.ply")).find("format binary_little_endian 1.0") != std::string::npos);
  }
  CHECK_THROWS(write_ply(TriangleMesh{}, "/nonexistent/dir/x.ply", PlyFormat::kAscii));
  CHECK_THROWS(read_ply("/nonexistent/dir/x.ply"));
}

}
