#include <random>

#include "doctest.h"
#include "rayopt/maxflow.hpp"
#include "../support.hpp"

using namespace rayopt;
using maxflow::FlowNetwork;
using maxflow::Side;

namespace {

Energy brute_min(const FlowNetwork& net) {
  const std::size_t n = net.node_count();
  Energy best = std::numeric_limits<Energy>::max();
  for (std::size_t m = 0; m < (std::size_t{1} << n); ++m) {
    best = std::min(best, net.energy(testing::assignment(m, n)));
  }
  return best;
}

std::vector<std::uint8_t> sides(const maxflow::CutResult& r) {
  std::vector<std::uint8_t> x;
  for (Side s : r.side) x.push_back(s == Side::kSink ? 1 : 0);
  return x;
}

}  // namespace

TEST_SUITE("maxflow") {

TEST_CASE("node allocation is consecutive") {
  FlowNetwork net;
  auto a = net.add_node(3);
  CHECK(a.first == 0);
  CHECK(a.count == 3);
  auto e = net.add_node(0);
  CHECK(e.empty());
  CHECK(net.node_count() == 3);
  auto b = net.add_node(2);
  auto c = net.add_node(2);
  CHECK(b.first == 3);
  CHECK(c.first == 5);
}

TEST_CASE("terminal weights fold their minimum into the constant") {
  FlowNetwork net;
  net.add_node(3);
  net.add_terminal_weights(0, 5, 2);
  net.add_terminal_weights(1, -1, 0);
  net.add_terminal_weights(2, 1, 0);
  net.add_terminal_weights(2, 0, 1);
  net.normalize();
  CHECK(net.source_capacity(0) == 3);
  CHECK(net.sink_capacity(0) == 0);
  CHECK(net.source_capacity(1) == 0);
  CHECK(net.sink_capacity(1) == 1);
  CHECK(net.source_capacity(2) == 0);
  CHECK(net.sink_capacity(2) == 0);
  CHECK(net.constant_offset() == 2 - 1 + 1);
}

TEST_CASE("arc pairs accumulate") {
  FlowNetwork net;
  net.add_node(2);
  net.add_pairwise_arc(0, 1, 1, 0);
  net.add_pairwise_arc(0, 1, 1, 0);
  net.add_pairwise_arc(0, 1, 0, 0);
  net.add_terminal_weights(0, 100, 0);
  net.add_terminal_weights(1, 0, 100);
  CHECK(maxflow::solve(net).min_energy() == 2);
}

TEST_CASE("hand-computed cuts") {
  SUBCASE("empty network") {
    FlowNetwork net;
    net.add_node(3);
    const auto r = maxflow::solve(net);
    CHECK(r.min_energy() == 0);
    for (Side s : r.side) CHECK(s == Side::kSource);
  }
  SUBCASE("source 3, sink 2") {
    FlowNetwork net;
    net.add_node(1);
    net.add_terminal_weights(0, 3, 2);
    const auto r = maxflow::solve(net);
    CHECK(r.min_energy() == 2);
    CHECK(r.side[0] == Side::kSource);
  }
  SUBCASE("bidirectional arc between saturated terminals") {
    FlowNetwork net;
    net.add_node(2);
    net.add_pairwise_arc(0, 1, 3, 5);
    net.add_terminal_weights(0, 1000, 0);
    net.add_terminal_weights(1, 0, 1000);
    const auto r = maxflow::solve(net);
    CHECK(r.min_energy() == 3);
    CHECK(r.side[0] == Side::kSource);
    CHECK(r.side[1] == Side::kSink);
  }
}

TEST_CASE("random networks match exhaustive enumeration") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    std::uniform_int_distribution<Energy> cap(0, 50);
    std::uniform_int_distribution<Energy> signed_w(-20, 20);
    std::uniform_int_distribution<std::size_t> node(0, n - 1);
    FlowNetwork net;
    net.add_node(n);
    for (std::size_t u = 0; u < n; ++u) net.add_terminal_weights(static_cast<maxflow::NodeId>(u), signed_w(rng), signed_w(rng));
    const std::size_t arcs = std::uniform_int_distribution<std::size_t>(0, 3 * n)(rng);
    for (std::size_t k = 0; k < arcs && n > 1; ++k) {
      const auto u = node(rng);
      auto v = node(rng);
      if (u == v) continue;
      net.add_pairwise_arc(static_cast<maxflow::NodeId>(u), static_cast<maxflow::NodeId>(v), cap(rng), cap(rng));
    }
    const Energy expect = brute_min(net);
    const auto r = maxflow::solve(net);
    REQUIRE(r.min_energy() == expect);
    CHECK(net.energy(sides(r)) == expect);
  }
}

TEST_CASE("flow value does not depend on arc insertion order") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10;
    std::vector<std::tuple<maxflow::NodeId, maxflow::NodeId, Energy, Energy>> arcs;
    std::uniform_int_distribution<maxflow::NodeId> node(0, n - 1);
    std::uniform_int_distribution<Energy> cap(0, 50);
    for (int k = 0; k < 25; ++k) {
      const auto u = node(rng), v = node(rng);
      if (u != v) arcs.emplace_back(u, v, cap(rng), cap(rng));
    }
    auto build = [&] {
      FlowNetwork net;
      net.add_node(n);
      net.add_terminal_weights(0, 0, 100);
      net.add_terminal_weights(n - 1, 100, 0);
      for (auto [u, v, a, b] : arcs) net.add_pairwise_arc(u, v, a, b);
      return net;
    };
    const Energy first = maxflow::solve(build()).min_energy();
    std::shuffle(arcs.begin(), arcs.end(), rng);
    CHECK(maxflow::solve(build()).min_energy() == first);
  }
}

TEST_CASE("invalid arcs are rejected") {
  FlowNetwork net;
  net.add_node(2);
  CHECK_THROWS(net.add_pairwise_arc(0, 0, 1, 1));
  CHECK_THROWS(net.add_pairwise_arc(0, 5, 1, 1));
}

}
