#include <random>

#include "doctest.h"
#include "rayopt/oracle.hpp"
#include "../support.hpp"

using namespace rayopt;
using namespace rayopt::oracle;
using raypbf::BinaryEnergy;
using raypbf::RayCostProfile;
using raypbf::VarId;

TEST_SUITE("oracle") {

TEST_CASE("binary brute force") {
  SUBCASE("single ray has a unique optimum") {
    BinaryEnergy e(3);
    e.add_ray({0, 1, 2}, RayCostProfile{{4, 6, 1, 3}});
    const BinaryOptimum o = brute_force_binary(e);
    CHECK(o.energy == 1);
    REQUIRE(o.optima.size() == 1);
    CHECK(o.optima[0] == std::vector<std::uint8_t>{1, 1, 0});
  }
  SUBCASE("constant profiles make every labeling optimal") {
    BinaryEnergy e(3);
    e.add_ray({0, 1, 2}, RayCostProfile{{2, 2, 2, 2}});
    const BinaryOptimum o = brute_force_binary(e);
    CHECK(o.energy == 2);
    CHECK(o.optima.size() == 8);
  }
  SUBCASE("strong Potts forces a uniform labeling") {
    BinaryEnergy e(2);
    e.add_ray({0}, RayCostProfile{{-5, 0}});
    e.add_ray({1}, RayCostProfile{{0, -3}});
    e.add_pairwise(0, 1, 0, 100, 100, 0);
    const BinaryOptimum o = brute_force_binary(e);
    CHECK(o.energy == -5);
    REQUIRE(o.optima.size() == 1);
    CHECK(o.optima[0][0] == o.optima[0][1]);
  }
  SUBCASE("budget") {
    CHECK_THROWS_AS(brute_force_binary(BinaryEnergy(15)), BudgetExceeded);
  }
}

TEST_CASE("multilabel brute force") {
  const solver::LabelSet three({"free", "a", "b"}, 0);
  SUBCASE("one voxel") {
    solver::EnergyInstance inst;
    inst.voxel_count = 1;
    inst.labels = three;
    inst.metric = solver::LabelMetric::potts(3);
    solver::Ray r{{0}, solver::RayCostTable(1, 3)};
    r.table.set(0, 1, 4);
    r.table.set(0, 2, -2);
    r.table.set_all_free(1);
    inst.rays.push_back(r);
    const LabelingOptimum o = brute_force_multilabel(inst);
    CHECK(o.energy == -2);
    CHECK(o.optima == std::vector<solver::Labeling>{{2}});
  }
  SUBCASE("zero tables") {
    std::mt19937_64 rng(1);
    const auto inst = testing::random_instance(rng, {2, 2, 2}, three, 4, 8, 0, 0, 0);
    const LabelingOptimum o = brute_force_multilabel(inst);
    CHECK(o.energy == 0);
    CHECK(o.optima.size() == 6561);
  }
  SUBCASE("3^8 instances bound alpha expansion from below") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
      const auto inst = testing::random_instance(rng, {2, 2, 2}, three, 4, 8, 1, 0, 20);
      CHECK(brute_force_multilabel(inst).energy <= solver::alpha_expansion(inst).energy);
    }
  }
  SUBCASE("budget") {
    solver::EnergyInstance inst;
    inst.voxel_count = 10;
    inst.labels = three;
    inst.metric = solver::LabelMetric::potts(3);
    CHECK_THROWS_AS(brute_force_multilabel(inst), BudgetExceeded);
  }
  SUBCASE("binary instances agree with the binary energy") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const auto inst = testing::random_instance(rng, {2, 2, 2}, solver::LabelSet::binary(), 3, 6, 2, -10, 10);
      CHECK(brute_force_binary(inst).energy == brute_force_binary(solver::binary_energy(inst)).energy);
    }
  }
}

TEST_CASE("single-term constructions") {
  raypbf::SubmodularRay s;
  s.a = {0, 0, 3};
  s.b = {0, 0, 0};
  s.f = {3, 3, 3};
  const auto parts = unmerged_constructions(s);
  REQUIRE(parts.size() == 1);
  const auto& rc = parts[0];
  const auto all_free = std::vector<std::uint8_t>{1, 1, 1};
  const FragmentMin m = construction_min(rc, all_free);
  CHECK(m.minimum == -3);
  CHECK(m.canonical_attains);
  std::vector<std::uint8_t> ones(rc.aux.size(), 1);
  CHECK(raypbf::evaluate(rc, all_free, ones) == -3);
  for (std::size_t k = 0; k < 3; ++k) {
    auto x = all_free;
    x[k] = 0;
    CHECK(construction_min(rc, x).minimum == 0);
  }
}

TEST_CASE("merged and unmerged minima agree for N = 3") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = raypbf::make_submodular(testing::random_profile(rng, 3));
    const auto merged = raypbf::merged_construction(s);
    for (std::size_t m = 0; m < 8; ++m) {
      const auto x = testing::assignment(m, 3);
      Energy sum = s.offset;
      for (const auto& rc : unmerged_constructions(s)) sum += construction_min(rc, x).minimum;
      CHECK(construction_min(merged, x).minimum == sum);
    }
  }
}

TEST_CASE("fragment_min needs the aux registry") {
  raypbf::QpboProblem prob(1);
  const VarId v = 0;
  prob.emit_ray_fragment(std::span<const VarId>(&v, 1), raypbf::make_submodular(RayCostProfile{{3, 1}}));
  CHECK_THROWS(fragment_min(prob, std::vector<std::uint8_t>{1}));
}

TEST_CASE("traversal oracles") {
  const geometry::VoxelGrid g({3, 1, 1}, 1.0, geometry::Vec3::Zero());
  const geometry::Vec3 o(-1, 0.5, 0.5), d(1, 0, 0);
  CHECK(slab_traversal(o, d, g, 10.0) == std::vector<VoxelId>{0, 1, 2});
  CHECK(sampled_traversal(o, d, g, 10.0, 0.01) == std::vector<VoxelId>{0, 1, 2});
  CHECK(slab_traversal(o, d, g, 2.5) == std::vector<VoxelId>{0, 1});
}

}
