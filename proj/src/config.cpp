#include "rayopt/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "rayopt/scene.hpp"

namespace rayopt::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

double to_double(const std::string& field, const std::string& text) {
  double v = 0.0;
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError(field, "expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& field, const std::string& text) {
  std::uint64_t v = 0;
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(field, "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& field, const std::string& text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(field, "expected true or false, got '" + text + "'");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

geometry::GridDims to_dims(const std::string& field, const std::string& text) {
  const auto parts = split(trim(text), 'x');
  if (parts.size() != 1 && parts.size() != 3) throw ConfigError(field, "expected N or AxBxC, got '" + text + "'");
  std::array<std::size_t, 3> n{};
  for (std::size_t k = 0; k < 3; ++k) {
    n[k] = static_cast<std::size_t>(to_uint(field, parts[parts.size() == 1 ? 0 : k]));
    if (n[k] < 2 || n[k] > 1024) throw ConfigError(field, "each dimension must be in [2, 1024]");
  }
  return {n[0], n[1], n[2]};
}

std::string dims_text(const geometry::GridDims& d) {
  if (d.nx == d.ny && d.ny == d.nz) return std::to_string(d.nx);
  return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

struct Field {
  const char* section;
  const char* key;
  const char* type;
  const char* doc;
  std::function<void(RunConfig&, const std::string& field, const std::string& value)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"scene", "preset", "string", "synthetic scene: box | wall_with_hole | thin_column | two_planes",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         if (!scene::parse_preset(trim(v))) throw ConfigError(f, "unknown preset '" + trim(v) + "'");
         c.preset = trim(v);
       },
       [](const RunConfig& c) { return c.preset; }},
      {"scene", "resolution", "dims", "voxel grid size, N or AxBxC",
       [](RunConfig& c, const std::string& f, const std::string& v) { c.resolution = to_dims(f, v); },
       [](const RunConfig& c) { return dims_text(c.resolution); }},
      {"scene", "seed", "uint", "seed of the observation noise",
       [](RunConfig& c, const std::string& f, const std::string& v) { c.seed = to_uint(f, v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"scene", "cameras", "uint", "number of cameras on the ring",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.cameras = to_uint(f, v);
         if (c.cameras < 1 || c.cameras > 256) throw ConfigError(f, "must be in [1, 256]");
       },
       [](const RunConfig& c) { return std::to_string(c.cameras); }},
      {"scene", "image_size", "uint", "square image side in pixels",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.image_size = to_uint(f, v);
         if (c.image_size < 1 || c.image_size > 4096) throw ConfigError(f, "must be in [1, 4096]");
       },
       [](const RunConfig& c) { return std::to_string(c.image_size); }},
      {"scene", "camera_distance", "float", "ring radius in multiples of the grid extent",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.camera_distance = to_double(f, v);
         if (!(c.camera_distance > 0.9)) throw ConfigError(f, "must be > 0.9 (outside the bounding sphere)");
       },
       [](const RunConfig& c) { return fmt_double(c.camera_distance); }},
      {"scene", "elevation_deg", "float", "ring elevation; cameras alternate above and below",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.elevation_deg = to_double(f, v);
         if (std::abs(c.elevation_deg) >= 89.0) throw ConfigError(f, "must be in (-89, 89)");
       },
       [](const RunConfig& c) { return fmt_double(c.elevation_deg); }},

      {"labels", "names", "list", "comma-separated label names; must include every class of the preset",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.label_names = split(v, ',');
         std::set<std::string> seen;
         for (const auto& n : c.label_names) {
           if (n.empty()) throw ConfigError(f, "empty label name");
           if (!seen.insert(n).second) throw ConfigError(f, "duplicate label '" + n + "'");
         }
         if (c.label_names.size() < 2 || c.label_names.size() > 64) throw ConfigError(f, "needs 2 to 64 labels");
       },
       [](const RunConfig& c) { return join(c.label_names); }},
      {"labels", "free_space", "string", "name of the free-space label",
       [](RunConfig& c, const std::string&, const std::string& v) { c.free_space = trim(v); },
       [](const RunConfig& c) { return c.free_space; }},

      {"cost", "lambda_sem", "float", "weight of the semantic cost",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.lambda_sem = to_double(f, v);
         if (c.lambda_sem < 0.0) throw ConfigError(f, "must be >= 0");
       },
       [](const RunConfig& c) { return fmt_double(c.lambda_sem); }},
      {"cost", "lambda_dep", "float", "weight of the depth cost",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.lambda_dep = to_double(f, v);
         if (c.lambda_dep < 0.0) throw ConfigError(f, "must be >= 0");
       },
       [](const RunConfig& c) { return fmt_double(c.lambda_dep); }},
      {"cost", "delta", "float", "depth tolerance in voxels",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.delta = to_double(f, v);
         if (!(c.delta > 0.0)) throw ConfigError(f, "must be > 0");
       },
       [](const RunConfig& c) { return fmt_double(c.delta); }},
      {"cost", "matches_per_pixel", "uint", "depth matches per pixel, 1 to 3",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.matches_per_pixel = to_uint(f, v);
         if (c.matches_per_pixel < 1 || c.matches_per_pixel > 3) throw ConfigError(f, "must be in [1, 3]");
       },
       [](const RunConfig& c) { return std::to_string(c.matches_per_pixel); }},
      {"cost", "depth_sigma", "float", "Gaussian depth jitter in voxels",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.depth_sigma = to_double(f, v);
         if (c.depth_sigma < 0.0) throw ConfigError(f, "must be >= 0");
       },
       [](const RunConfig& c) { return fmt_double(c.depth_sigma); }},
      {"cost", "confusion", "float", "semantic confusion probability",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.confusion = to_double(f, v);
         if (c.confusion < 0.0 || c.confusion > 1.0) throw ConfigError(f, "must be in [0, 1]");
       },
       [](const RunConfig& c) { return fmt_double(c.confusion); }},
      {"cost", "semantic_floor", "float", "lower clamp of class probabilities before the log",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.semantic_floor = to_double(f, v);
         if (!(c.semantic_floor > 0.0 && c.semantic_floor < 1.0)) throw ConfigError(f, "must be in (0, 1)");
       },
       [](const RunConfig& c) { return fmt_double(c.semantic_floor); }},

      {"regularizer", "lambda_pair", "float", "Potts weight per unit face area",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.lambda_pair = to_double(f, v);
         if (c.lambda_pair < 0.0) throw ConfigError(f, "must be >= 0");
       },
       [](const RunConfig& c) { return fmt_double(c.lambda_pair); }},
      {"regularizer", "relative", "bool", "scale lambda_pair by |mean ray cost table entry|",
       [](RunConfig& c, const std::string& f, const std::string& v) { c.relative = to_bool(f, v); },
       [](const RunConfig& c) { return std::string(c.relative ? "true" : "false"); }},
      {"regularizer", "neighborhood", "uint", "6 or 26",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         const auto n = to_uint(f, v);
         if (n != 6 && n != 26) throw ConfigError(f, "must be 6 or 26");
         c.neighborhood = n == 6 ? geometry::Neighborhood::kSix : geometry::Neighborhood::kTwentySix;
       },
       [](const RunConfig& c) { return std::to_string(static_cast<int>(c.neighborhood)); }},

      {"solver", "mode", "string", "binary | multilabel",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         const std::string t = trim(v);
         if (t == "binary") {
           c.mode = SolverMode::kBinary;
         } else if (t == "multilabel") {
           c.mode = SolverMode::kMultilabel;
         } else {
           throw ConfigError(f, "must be binary or multilabel, got '" + t + "'");
         }
       },
       [](const RunConfig& c) { return mode_name(c.mode); }},
      {"solver", "icm_start", "string", "ICM start for unlabeled voxels: ray_argmin | free | occupied; multilabel moves treat free and occupied as keep",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         const std::string t = trim(v);
         if (t != "ray_argmin" && t != "free" && t != "occupied") {
           throw ConfigError(f, "must be ray_argmin, free or occupied, got '" + t + "'");
         }
         c.icm_start = t;
       },
       [](const RunConfig& c) { return c.icm_start; }},
      {"solver", "fixed_point_scale", "float", "factor converting real energies to integers",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.fixed_point_scale = to_double(f, v);
         if (!(c.fixed_point_scale >= 1.0 && c.fixed_point_scale <= 1e9)) throw ConfigError(f, "must be in [1, 1e9]");
       },
       [](const RunConfig& c) { return fmt_double(c.fixed_point_scale); }},
      {"solver", "shuffle_seed", "uint", "0 keeps the declared label order; otherwise shuffles it",
       [](RunConfig& c, const std::string& f, const std::string& v) { c.shuffle_seed = to_uint(f, v); },
       [](const RunConfig& c) { return std::to_string(c.shuffle_seed); }},
      {"solver", "max_cycles", "uint", "upper bound on expansion cycles",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.max_cycles = to_uint(f, v);
         if (c.max_cycles < 1) throw ConfigError(f, "must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.max_cycles); }},

      {"run", "output_dir", "path", "directory for result.ply, metrics.json, energy_trace.csv, run.log",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         if (trim(v).empty()) throw ConfigError(f, "must not be empty");
         c.output_dir = trim(v);
       },
       [](const RunConfig& c) { return c.output_dir.string(); }},
      {"run", "threads", "uint", "worker threads for ray casting and cost tables",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.threads = to_uint(f, v);
         if (c.threads < 1 || c.threads > 256) throw ConfigError(f, "must be in [1, 256]");
       },
       [](const RunConfig& c) { return std::to_string(c.threads); }},
      {"run", "oracle_check", "bool", "compare against brute force (small instances only)",
       [](RunConfig& c, const std::string& f, const std::string& v) { c.oracle_check = to_bool(f, v); },
       [](const RunConfig& c) { return std::string(c.oracle_check ? "true" : "false"); }},

      {"mesh", "smoothing_iterations", "uint", "Laplacian smoothing iterations",
       [](RunConfig& c, const std::string& f, const std::string& v) { c.smoothing_iterations = to_uint(f, v); },
       [](const RunConfig& c) { return std::to_string(c.smoothing_iterations); }},
      {"mesh", "smoothing_step", "float", "smoothing step in (0, 1)",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         c.smoothing_step = to_double(f, v);
         if (!(c.smoothing_step > 0.0 && c.smoothing_step < 1.0)) throw ConfigError(f, "must be in (0, 1)");
       },
       [](const RunConfig& c) { return fmt_double(c.smoothing_step); }},
      {"mesh", "ply_format", "string", "ascii | binary",
       [](RunConfig& c, const std::string& f, const std::string& v) {
         const std::string t = trim(v);
         if (t == "ascii") {
           c.ply_format = mesh::PlyFormat::kAscii;
         } else if (t == "binary") {
           c.ply_format = mesh::PlyFormat::kBinaryLittleEndian;
         } else {
           throw ConfigError(f, "must be ascii or binary, got '" + t + "'");
         }
       },
       [](const RunConfig& c) { return std::string(c.ply_format == mesh::PlyFormat::kAscii ? "ascii" : "binary"); }},
  };
  return table;
}

}  // namespace

std::string mode_name(SolverMode m) { return m == SolverMode::kBinary ? "binary" : "multilabel"; }

KeyValues read_ini(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  KeyValues kv;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "key outside of any section");
    for (const auto& [key, value] : body) kv[section + "." + key] = value.get_value<std::string>();
  }
  return kv;
}

KeyValues read_ini_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot open '" + path.string() + "'");
  return read_ini(f);
}

void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides) {
  for (std::string o : overrides) {
    if (o.rfind("--", 0) == 0) o = o.substr(2);
    const auto eq = o.find('=');
    if (eq == std::string::npos || o.find('.') > eq) {
      throw ConfigError(o, "override must look like --section.key=value");
    }
    kv[trim(o.substr(0, eq))] = o.substr(eq + 1);
  }
}

RunConfig parse_config(const KeyValues& kv) {
  RunConfig cfg;
  std::set<std::string> known;
  for (const Field& f : fields()) {
    const std::string name = std::string(f.section) + "." + f.key;
    known.insert(name);
    if (auto it = kv.find(name); it != kv.end()) f.set(cfg, name, it->second);
  }
  for (const auto& [name, value] : kv) {
    if (!known.count(name)) throw ConfigError(name, "unknown configuration field");
  }
  if (std::find(cfg.label_names.begin(), cfg.label_names.end(), cfg.free_space) == cfg.label_names.end()) {
    throw ConfigError("labels.free_space", "'" + cfg.free_space + "' is not in labels.names");
  }
  if (cfg.mode == SolverMode::kMultilabel) {
    const solver::LabelSet classes = scene::semantic_labels();
    for (std::size_t l = 0; l < classes.size(); ++l) {
      if (l == classes.free_space()) continue;
      if (std::find(cfg.label_names.begin(), cfg.label_names.end(), classes.name(static_cast<Label>(l))) ==
          cfg.label_names.end()) {
        throw ConfigError("labels.names", "missing scene class '" + classes.name(static_cast<Label>(l)) + "'");
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  KeyValues kv = read_ini_file(path);
  apply_overrides(kv, overrides);
  return parse_config(kv);
}

std::string schema_text() {
  const RunConfig defaults;
  std::ostringstream out;
  out << "# rayopt configuration schema. Every field is optional; shown values are the defaults.\n"
      << "# Any field can be overridden on the command line as --section.key=value.\n";
  std::string section;
  for (const Field& f : fields()) {
    if (section != f.section) {
      section = f.section;
      out << "\n[" << section << "]\n";
    }
    out << "# " << f.key << " (" << f.type << "): " << f.doc << "\n";
    out << f.key << " = " << f.get(defaults) << "\n";
  }
  return out.str();
}

std::string to_ini(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const Field& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out << "\n";
      section = f.section;
      out << "[" << section << "]\n";
    }
    out << f.key << " = " << f.get(cfg) << "\n";
  }
  return out.str();
}

}  // namespace rayopt::config
