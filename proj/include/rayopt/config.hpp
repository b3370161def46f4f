#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rayopt/geometry.hpp"
#include "rayopt/mesh.hpp"

namespace rayopt::config {

enum class SolverMode { kBinary, kMultilabel };

struct RunConfig {
  // [scene]
  std::string preset = "box";
  geometry::GridDims resolution{32, 32, 32};
  std::uint64_t seed = 0;
  std::size_t cameras = 8;
  std::size_t image_size = 96;
  double camera_distance = 1.5;
  double elevation_deg = 25.0;
  // [labels]
  std::vector<std::string> label_names{"free", "building", "tree", "ground"};
  std::string free_space = "free";
  // [cost]
  double lambda_sem = 1.0;
  double lambda_dep = 1.0;
  double delta = 2.0;  // voxels
  std::size_t matches_per_pixel = 1;
  double depth_sigma = 0.0;  // voxels
  double confusion = 0.0;
  double semantic_floor = 1e-3;
  // [regularizer]
  double lambda_pair = 0.1;
  bool relative = true;
  geometry::Neighborhood neighborhood = geometry::Neighborhood::kSix;
  // [solver]
  SolverMode mode = SolverMode::kBinary;
  std::string icm_start = "ray_argmin";
  double fixed_point_scale = 1e4;
  std::uint64_t shuffle_seed = 0;
  std::size_t max_cycles = 100;
  // [run]
  std::filesystem::path output_dir = "rayopt_out";
  std::size_t threads = 1;
  bool oracle_check = false;
  // [mesh]
  std::size_t smoothing_iterations = 3;
  double smoothing_step = 0.5;
  mesh::PlyFormat ply_format = mesh::PlyFormat::kAscii;
};

/// Invalid configuration; `field()` is "section.key".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Flat "section.key" -> value map.
using KeyValues = std::map<std::string, std::string>;

KeyValues read_ini(std::istream& in);
KeyValues read_ini_file(const std::filesystem::path& path);

/// Applies "--section.key=value" (or "section.key=value") overrides.
void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides);

/// Validates every field; unknown keys are rejected.
RunConfig parse_config(const KeyValues& kv);

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// The full schema as an INI document with defaults and one comment line
/// per field; parse_config(read_ini(schema)) yields the defaults.
std::string schema_text();

/// Canonical INI rendering of a configuration.
std::string to_ini(const RunConfig& cfg);

std::string mode_name(SolverMode m);

}  // namespace rayopt::config
