#include <sstream>

#include "doctest.h"
#include "rayopt/config.hpp"

using namespace rayopt;
using namespace rayopt::config;

namespace {

KeyValues ini(const std::string& text) {
  std::istringstream in(text);
  return read_ini(in);
}

std::string error_field(const KeyValues& kv) {
  try {
    parse_config(kv);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("schema parses back to the defaults") {
  const std::string schema = schema_text();
  CHECK(schema.find("lambda_sem = 1.0\n") != std::string::npos);
  CHECK(schema.find("fixed_point_scale = 10000.0\n") != std::string::npos);
  CHECK(to_ini(parse_config(ini(schema))) == to_ini(RunConfig{}));
}

TEST_CASE("to_ini round trips a modified configuration") {
  RunConfig cfg;
  cfg.preset = "thin_column";
  cfg.resolution = {16, 8, 4};
  cfg.mode = SolverMode::kMultilabel;
  cfg.delta = 1.5;
  cfg.relative = false;
  cfg.ply_format = mesh::PlyFormat::kBinaryLittleEndian;
  cfg.neighborhood = geometry::Neighborhood::kTwentySix;
  const RunConfig back = parse_config(ini(to_ini(cfg)));
  CHECK(to_ini(back) == to_ini(cfg));
  CHECK(back.resolution == geometry::GridDims{16, 8, 4});
}

TEST_CASE("values and comments") {
  const RunConfig cfg = parse_config(ini("# comment\n[scene]\n; other comment\npreset = wall_with_hole\nresolution = 24\n"
                                         "[cost]\nconfusion = 0.25\n[run]\noracle_check = yes\n"));
  CHECK(cfg.preset == "wall_with_hole");
  CHECK(cfg.resolution == geometry::GridDims{24, 24, 24});
  CHECK(cfg.confusion == 0.25);
  CHECK(cfg.oracle_check);
}

TEST_CASE("overrides") {
  KeyValues kv = ini("[scene]\npreset = box\n");
  apply_overrides(kv, {"--scene.preset=thin_column", "solver.mode=multilabel"});
  const RunConfig cfg = parse_config(kv);
  CHECK(cfg.preset == "thin_column");
  CHECK(cfg.mode == SolverMode::kMultilabel);
  CHECK_THROWS_AS(apply_overrides(kv, {"--preset"}), ConfigError);
}

TEST_CASE("errors name the offending field") {
  CHECK(error_field(ini("[scene]\npreset = castle\n")) == "scene.preset");
  CHECK(error_field(ini("[scene]\nresolution = 0\n")) == "scene.resolution");
  CHECK(error_field(ini("[scene]\nresolution = 4x4\n")) == "scene.resolution");
  CHECK(error_field(ini("[scene]\ncolour = red\n")) == "scene.colour");
  CHECK(error_field(ini("[cost]\nlambda_sem = -1\n")) == "cost.lambda_sem");
  CHECK(error_field(ini("[cost]\ndelta = abc\n")) == "cost.delta");
  CHECK(error_field(ini("[cost]\nmatches_per_pixel = 4\n")) == "cost.matches_per_pixel");
  CHECK(error_field(ini("[regularizer]\nneighborhood = 8\n")) == "regularizer.neighborhood");
  CHECK(error_field(ini("[solver]\nmode = fancy\n")) == "solver.mode");
  CHECK(error_field(ini("[run]\nthreads = 0\n")) == "run.threads");
  CHECK(error_field(ini("[labels]\nnames = a,b\nfree_space = c\n")) == "labels.free_space");
  CHECK(error_field(ini("[labels]\nnames = free,free\n")) == "labels.names");
  CHECK(error_field(ini("[labels]\nnames = free,building\n[solver]\nmode = multilabel\n")) == "labels.names");
  CHECK(error_field(ini("[mesh]\nsmoothing_step = 1.0\n")) == "mesh.smoothing_step");
  CHECK_THROWS_AS(ini("preset = box\n"), ConfigError);
  CHECK_THROWS_AS(ini("[scene\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

}
