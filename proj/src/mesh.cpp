#include "rayopt/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rayopt::mesh {

using geometry::Vec3;

namespace {

// Cube corner c sits at (c & 1, (c >> 1) & 1, (c >> 2) & 1).
Vec3 corner_pos(int c) { return Vec3(c & 1, (c >> 1) & 1, (c >> 2) & 1); }

struct CubeEdge {
  int a, b;
  int axis;
};

std::array<CubeEdge, 12> make_edges() {
  std::array<CubeEdge, 12> e{};
  int k = 0;
  for (int axis = 0; axis < 3; ++axis) {
    for (int c = 0; c < 8; ++c) {
      if (c & (1 << axis)) continue;
      e[k++] = {c, c | (1 << axis), axis};
    }
  }
  return e;
}

const std::array<CubeEdge, 12> kEdges = make_edges();

int edge_between(int a, int b) {
  for (int k = 0; k < 12; ++k) {
    if ((kEdges[k].a == a && kEdges[k].b == b) || (kEdges[k].a == b && kEdges[k].b == a)) return k;
  }
  throw std::logic_error("corners are not adjacent");
}

using CaseTriangles = std::vector<std::array<std::int8_t, 3>>;

// Builds the triangle list of one case from per-face boundary segments.
// Each segment is directed so that (m x d) . (ref - mid) < 0, with m the
// outward face normal and ref an inside corner on the segment's side; the
// loops then wind counter-clockwise seen from free space.
CaseTriangles build_case(int mask) {
  auto inside = [&](int c) { return (mask >> c) & 1; };
  std::array<int, 12> next;
  next.fill(-1);

  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      std::array<int, 4> q{};
      const int ring[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
      for (int k = 0; k < 4; ++k) q[k] = (side << axis) | (ring[k][0] << u) | (ring[k][1] << v);
      Vec3 m = Vec3::Zero();
      m[axis] = side ? 1.0 : -1.0;

      std::vector<std::pair<int, int>> segments;  // pairs of cube edges
      std::vector<int> refs;                      // inside corner cut off by each segment
      std::vector<int> crossing;
      for (int k = 0; k < 4; ++k) {
        if (inside(q[k]) != inside(q[(k + 1) % 4])) crossing.push_back(k);
      }
      if (crossing.size() == 2) {
        segments.emplace_back(edge_between(q[crossing[0]], q[(crossing[0] + 1) % 4]),
                              edge_between(q[crossing[1]], q[(crossing[1] + 1) % 4]));
        int ref = -1;
        for (int k = 0; k < 4; ++k) {
          if (inside(q[k])) ref = q[k];
        }
        refs.push_back(ref);
      } else if (crossing.size() == 4) {
        for (int k = 0; k < 4; ++k) {
          if (!inside(q[k])) continue;
          segments.emplace_back(edge_between(q[(k + 3) % 4], q[k]), edge_between(q[k], q[(k + 1) % 4]));
          refs.push_back(q[k]);
        }
      }
      for (std::size_t s = 0; s < segments.size(); ++s) {
        auto [e0, e1] = segments[s];
        const Vec3 p0 = 0.5 * (corner_pos(kEdges[e0].a) + corner_pos(kEdges[e0].b));
        const Vec3 p1 = 0.5 * (corner_pos(kEdges[e1].a) + corner_pos(kEdges[e1].b));
        const Vec3 mid = 0.5 * (p0 + p1);
        if (m.cross(p1 - p0).dot(corner_pos(refs[s]) - mid) > 0.0) std::swap(e0, e1);
        if (next[e0] != -1) throw std::logic_error("marching cubes table: edge used twice");
        next[e0] = e1;
      }
    }
  }

  CaseTriangles tris;
  std::array<bool, 12> used{};
  for (int start = 0; start < 12; ++start) {
    if (next[start] == -1 || used[start]) continue;
    std::vector<int> loop;
    for (int e = start; !used[e]; e = next[e]) {
      if (next[e] == -1) throw std::logic_error("marching cubes table: open loop");
      used[e] = true;
      loop.push_back(e);
    }
    for (std::size_t k = 1; k + 1 < loop.size(); ++k) {
      tris.push_back({static_cast<std::int8_t>(loop[0]), static_cast<std::int8_t>(loop[k]),
                      static_cast<std::int8_t>(loop[k + 1])});
    }
  }
  return tris;
}

const std::array<CaseTriangles, 256>& case_table() {
  static const std::array<CaseTriangles, 256> table = [] {
    std::array<CaseTriangles, 256> t;
    for (int mask = 0; mask < 256; ++mask) t[mask] = build_case(mask);
    return t;
  }();
  return table;
}

}  // namespace

std::size_t marching_cubes_triangle_count(std::uint8_t cube_case) { return case_table()[cube_case].size(); }

Color label_color(Label l) {
  static constexpr Color kPalette[] = {{200, 200, 200}, {178, 34, 34}, {34, 139, 34},  {139, 115, 85},
                                       {65, 105, 225},  {218, 165, 32}, {148, 0, 211}, {0, 139, 139}};
  return kPalette[l % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

TriangleMesh marching_cubes(const geometry::VoxelGrid& grid, Label free_space, double iso) {
  if (!(iso > 0.0 && iso < 1.0)) throw std::invalid_argument("iso level must be in (0, 1)");
  const auto& table = case_table();
  const long nx = static_cast<long>(grid.dims().nx), ny = static_cast<long>(grid.dims().ny),
             nz = static_cast<long>(grid.dims().nz);
  // Padded sample lattice: indices -1 .. n along each axis.
  const long px = nx + 2, py = ny + 2, pz = nz + 2;
  auto label_at = [&](long x, long y, long z) -> Label {
    if (!grid.contains(x, y, z)) return free_space;
    return grid.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), static_cast<std::size_t>(z));
  };
  auto sample_key = [&](long x, long y, long z) { return ((z + 1) * py + (y + 1)) * px + (x + 1); };
  const double vs = grid.voxel_size();
  auto sample_pos = [&](long x, long y, long z) {
    return Vec3(grid.origin() + vs * Vec3(static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5,
                                          static_cast<double>(z) + 0.5));
  };

  TriangleMesh out;
  std::vector<std::int32_t> vertex_of(static_cast<std::size_t>(px * py * pz) * 3, -1);

  for (long z = -1; z < nz; ++z) {
    for (long y = -1; y < ny; ++y) {
      for (long x = -1; x < nx; ++x) {
        std::array<Label, 8> lab{};
        int mask = 0;
        for (int c = 0; c < 8; ++c) {
          lab[c] = label_at(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1));
          if (lab[c] != free_space) mask |= 1 << c;
        }
        if (mask == 0 || mask == 255) continue;
        std::array<std::uint32_t, 12> local{};
        for (int e = 0; e < 12; ++e) {
          const int ca = kEdges[e].a, cb = kEdges[e].b;
          if (((mask >> ca) & 1) == ((mask >> cb) & 1)) continue;
          const long ax = x + (ca & 1), ay = y + ((ca >> 1) & 1), az = z + ((ca >> 2) & 1);
          std::int32_t& slot = vertex_of[static_cast<std::size_t>(sample_key(ax, ay, az)) * 3 + kEdges[e].axis];
          if (slot < 0) {
            const double fa = (mask >> ca) & 1;
            const double t = (iso - fa) / (((mask >> cb) & 1) - fa);
            const Vec3 pa = sample_pos(ax, ay, az);
            const Vec3 pb = sample_pos(x + (cb & 1), y + ((cb >> 1) & 1), z + ((cb >> 2) & 1));
            slot = static_cast<std::int32_t>(out.vertices.size());
            out.vertices.push_back(pa + t * (pb - pa));
            out.colors.push_back(label_color((mask >> ca) & 1 ? lab[ca] : lab[cb]));
          }
          local[e] = static_cast<std::uint32_t>(slot);
        }
        for (const auto& t : table[mask]) out.triangles.push_back({local[t[0]], local[t[1]], local[t[2]]});
      }
    }
  }
  return out;
}

TriangleMesh laplacian_smooth(const TriangleMesh& mesh, std::size_t iterations, double step) {
  TriangleMesh out = mesh;
  if (iterations == 0) return out;
  const std::size_t n = mesh.vertices.size();
  std::vector<std::vector<std::uint32_t>> nbrs(n);
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = t[k], b = t[(k + 1) % 3];
      nbrs[a].push_back(b);
      nbrs[b].push_back(a);
    }
  }
  for (auto& list : nbrs) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  std::vector<Vec3> next(n);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t v = 0; v < n; ++v) {
      if (nbrs[v].empty()) {
        next[v] = out.vertices[v];
        continue;
      }
      Vec3 c = Vec3::Zero();
      for (std::uint32_t w : nbrs[v]) c += out.vertices[w];
      c /= static_cast<double>(nbrs[v].size());
      next[v] = out.vertices[v] + step * (c - out.vertices[v]);
    }
    out.vertices.swap(next);
  }
  return out;
}

double surface_area(const TriangleMesh& mesh) {
  double a = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& p = mesh.vertices[t[0]];
    a += 0.5 * (mesh.vertices[t[1]] - p).cross(mesh.vertices[t[2]] - p).norm();
  }
  return a;
}

void write_ply(const TriangleMesh& mesh, const std::filesystem::path& path, PlyFormat format) {
  static_assert(std::endian::native == std::endian::little, "binary PLY output assumes a little-endian host");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << "ply\n"
    << (format == PlyFormat::kAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n")
    << "element vertex " << mesh.vertices.size() << "\n"
    << "property float x\nproperty float y\nproperty float z\n"
    << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
    << "element face " << mesh.triangles.size() << "\n"
    << "property list uchar int vertex_indices\n"
    << "end_header\n";
  if (format == PlyFormat::kAscii) {
    char line[160];
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      const Vec3& p = mesh.vertices[v];
      const Color& c = mesh.colors[v];
      std::snprintf(line, sizeof(line), "%.6f %.6f %.6f %u %u %u\n", p.x(), p.y(), p.z(), c[0], c[1], c[2]);
      f << line;
    }
    for (const auto& t : mesh.triangles) f << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  } else {
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      const float xyz[3] = {static_cast<float>(mesh.vertices[v].x()), static_cast<float>(mesh.vertices[v].y()),
                            static_cast<float>(mesh.vertices[v].z())};
      f.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      f.write(reinterpret_cast<const char*>(mesh.colors[v].data()), 3);
    }
    for (const auto& t : mesh.triangles) {
      const std::uint8_t count = 3;
      const std::int32_t idx[3] = {static_cast<std::int32_t>(t[0]), static_cast<std::int32_t>(t[1]),
                                   static_cast<std::int32_t>(t[2])};
      f.write(reinterpret_cast<const char*>(&count), 1);
      f.write(reinterpret_cast<const char*>(idx), sizeof(idx));
    }
  }
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

TriangleMesh read_ply(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(f, line);
  if (line != "ply") throw std::runtime_error("not a PLY file");
  bool ascii = false;
  std::size_t nv = 0, nf = 0;
  while (std::getline(f, line)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string kind;
      ss >> kind;
      if (kind == "ascii") {
        ascii = true;
      } else if (kind != "binary_little_endian") {
        throw std::runtime_error("unsupported PLY format " + kind);
      }
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      ss >> name >> count;
      (name == "vertex" ? nv : nf) = count;
    } else if (word == "end_header") {
      break;
    }
  }
  TriangleMesh m;
  m.vertices.resize(nv);
  m.colors.resize(nv);
  m.triangles.resize(nf);
  if (ascii) {
    for (std::size_t v = 0; v < nv; ++v) {
      unsigned r, g, b;
      f >> m.vertices[v].x() >> m.vertices[v].y() >> m.vertices[v].z() >> r >> g >> b;
      m.colors[v] = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
    }
    for (std::size_t t = 0; t < nf; ++t) {
      unsigned count;
      f >> count >> m.triangles[t][0] >> m.triangles[t][1] >> m.triangles[t][2];
      if (count != 3) throw std::runtime_error("only triangle faces are supported");
    }
  } else {
    for (std::size_t v = 0; v < nv; ++v) {
      float xyz[3];
      f.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
      f.read(reinterpret_cast<char*>(m.colors[v].data()), 3);
      m.vertices[v] = Vec3(xyz[0], xyz[1], xyz[2]);
    }
    for (std::size_t t = 0; t < nf; ++t) {
      std::uint8_t count;
      std::int32_t idx[3];
      f.read(reinterpret_cast<char*>(&count), 1);
      if (count != 3) throw std::runtime_error("only triangle faces are supported");
      f.read(reinterpret_cast<char*>(idx), sizeof(idx));
      for (int k = 0; k < 3; ++k) m.triangles[t][k] = static_cast<std::uint32_t>(idx[k]);
    }
  }
  if (!f) throw std::runtime_error("truncated PLY file " + path.string());
  return m;
}

}  // namespace rayopt::mesh
