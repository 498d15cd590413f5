// Distributed secondary control: communication graph, delayed messaging,
// consensus references, and the per-node droop composition.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "droopsim/defaults.hpp"
#include "droopsim/secondary.hpp"

using namespace droopsim;
using namespace droopsim::secondary;

namespace {

Message msg(int sender, double v_pu, double i_pu, double sent_at) {
  Message m;
  m.sender = sender;
  m.v_pu = v_pu;
  m.i_pu = i_pu;
  m.sent_at = sent_at;
  return m;
}

NodeConfig bench_node(double r_d0, double i_base) {
  NodeConfig cfg;
  cfg.r_d0 = r_d0;
  cfg.i_base = i_base;
  cfg.v_base = 400.0;
  return cfg;
}

}  // namespace

TEST_CASE("full graph: everyone hears everyone else, nobody hears itself") {
  const auto g = CommGraph::full(3);
  g.validate();
  for (int i = 0; i < 3; ++i) {
    CHECK(g.adj(i, i) == 0);
    CHECK(g.in_neighbors(i).size() == 2);
  }
  CHECK(g.in_neighbors(0) == std::vector<int>{1, 2});
}

TEST_CASE("edge lists reject self-loops, bad ids, and deaf nodes") {
  CHECK_THROWS_AS(CommGraph::from_edges(2, {{0, 0}}), ConfigError);
  CHECK_THROWS_AS(CommGraph::from_edges(2, {{0, 5}}), ConfigError);
  // Node 1 speaks but never hears: invalid.
  const auto g = CommGraph::from_edges(2, {{1, 0}});
  CHECK_THROWS_AS(g.validate(), ConfigError);
  // A directed ring is fine.
  const auto ring = CommGraph::from_edges(3, {{0, 1}, {1, 2}, {2, 0}});
  CHECK_NOTHROW(ring.validate());
  CHECK(ring.in_neighbors(1) == std::vector<int>{0});
}

TEST_CASE("delay line holds messages for exactly the configured delay") {
  DelayLine line(0.01);
  line.push(msg(0, 1.0, 0.5, 0.0));
  CHECK(line.pop_due(0.005).empty());
  CHECK(line.pending() == 1);
  const auto due = line.pop_due(0.01);
  REQUIRE(due.size() == 1);
  CHECK(due[0].i_pu == 0.5);
  CHECK(line.pending() == 0);
}

TEST_CASE("delay line: zero delay delivers on the same tick, FIFO kept") {
  DelayLine line(0.0);
  line.push(msg(0, 1.0, 0.1, 0.0));
  line.push(msg(0, 1.0, 0.2, 0.0));
  const auto due = line.pop_due(0.0);
  REQUIRE(due.size() == 2);
  CHECK(due[0].i_pu == 0.1);  // send order preserved
  CHECK(due[1].i_pu == 0.2);
}

TEST_CASE("network delivers along every out-edge with deterministic order") {
  Network net(CommGraph::full(3), 0.01);
  net.publish(msg(2, 1.0, 0.3, 0.0));
  net.publish(msg(0, 1.0, 0.1, 0.0));
  net.publish(msg(1, 1.0, 0.2, 0.0));

  CHECK(net.tick(0.0).at(0).empty());  // nothing due yet

  const auto delivered = net.tick(0.01);
  REQUIRE(delivered.size() == 3);
  // Node 0 hears 1 and 2, in sender order regardless of publish order.
  REQUIRE(delivered[0].size() == 2);
  CHECK(delivered[0][0].sender == 1);
  CHECK(delivered[0][1].sender == 2);
  REQUIRE(delivered[1].size() == 2);
  CHECK(delivered[1][0].sender == 0);
  CHECK(delivered[1][1].sender == 2);
}

TEST_CASE("peer cache keeps the latest sample per sender") {
  PeerCache cache({1, 2});
  CHECK_FALSE(cache.any());
  cache.update(msg(1, 0.95, 0.4, 0.0));
  CHECK(cache.any());
  cache.update(msg(1, 0.97, 0.45, 0.01));  // newer sample wins
  cache.update(msg(2, 0.95, 0.6, 0.01));
  const Refs refs = consensus_references(cache, 0.95, Refs{});
  CHECK(refs.i_ref_pu == doctest::Approx((0.45 + 0.6) / 2.0));
}

TEST_CASE("consensus: one neighbor means its current is the reference") {
  PeerCache cache({1});
  cache.update(msg(1, 0.95, 0.7, 0.0));
  const Refs refs = consensus_references(cache, 0.95, Refs{});
  CHECK(refs.i_ref_pu == doctest::Approx(0.7));
  // Equal voltages average to themselves.
  CHECK(refs.v_bar_pu == doctest::Approx(0.95));
}

TEST_CASE("consensus: three nodes average the heard currents") {
  PeerCache cache({1, 2});
  cache.update(msg(1, 0.98, 0.4, 0.0));
  cache.update(msg(2, 0.96, 0.6, 0.0));
  const Refs refs = consensus_references(cache, 1.0, Refs{});
  CHECK(refs.i_ref_pu == doctest::Approx(0.5));
  CHECK(refs.v_bar_pu == doctest::Approx((1.0 + 0.98 + 0.96) / 3.0));
}

TEST_CASE("consensus holds the previous references until a message lands") {
  PeerCache cache({1});
  Refs prev;
  prev.i_ref_pu = 0.33;
  prev.v_bar_pu = 0.91;
  const Refs refs = consensus_references(cache, 1.0, prev);
  CHECK(refs.i_ref_pu == 0.33);
  CHECK(refs.v_bar_pu == 0.91);
}

TEST_CASE("consensus fixed point: equal per-unit currents are self-consistent") {
  PeerCache cache({0, 2, 3});
  cache.update(msg(0, 1.0, 0.62, 0.0));
  cache.update(msg(2, 1.0, 0.62, 0.0));
  cache.update(msg(3, 1.0, 0.62, 0.0));
  const Refs refs = consensus_references(cache, 1.0, Refs{});
  CHECK(refs.i_ref_pu == doctest::Approx(0.62).epsilon(1e-15));
}

TEST_CASE("per-unit conversion against the rated bases") {
  DscNode node(0, bench_node(1.0, 10.0));
  auto [i_pu, v_pu] = node.per_unit(5.0, 400.0);
  CHECK(i_pu == doctest::Approx(0.5));
  CHECK(v_pu == doctest::Approx(1.0));
  auto [i0, v0] = node.per_unit(0.0, 360.0);
  CHECK(i0 == doctest::Approx(0.0));
  CHECK(v0 == doctest::Approx(0.9));
}

TEST_CASE("with both loops disabled the droop is the conventional seed") {
  DscNode node(1, bench_node(2.0, 5.0));
  CHECK(node.droop() == 2.0);
  const double d = node.dsc_step(3.0, 0.6, 0.98, 0.55, 0.01);
  CHECK(d == 2.0);
  CHECK(node.r_v() == 0.0);
  CHECK(node.r_i() == 0.0);
  // No adaptation happened while disabled.
  CHECK(node.current_loop().state().theta.norm() == 0.0);
  CHECK(node.voltage_loop().state().theta.norm() == 0.0);
}

TEST_CASE("droop composition is exact at every step") {
  DscNode node(0, bench_node(1.0, 10.0));
  node.enable_current(0.46);
  node.enable_voltage(0.98);
  for (int k = 0; k < 200; ++k) {
    const double d = node.dsc_step(4.6, 0.46, 0.98, 0.55, 0.01);
    CHECK(d == node.config().r_d0 + node.r_v() + node.r_i());
  }
}

TEST_CASE("enabling a loop is bumpless") {
  DscNode node(0, bench_node(1.0, 10.0));
  for (int k = 0; k < 50; ++k) node.dsc_step(4.6, 0.46, 0.98, 0.46, 0.01);
  CHECK(node.droop() == 1.0);

  // The loop starts on the present measurement with zero gains: the first
  // enabled tick leaves the droop where it was.
  node.enable_current(0.46);
  const double d = node.dsc_step(4.6, 0.46, 0.98, 0.46, 0.01);
  CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("control-gain sign tracks -sign(i) with hysteresis") {
  DscNode node(0, bench_node(1.0, 10.0));
  node.enable_current(0.2);

  node.dsc_step(2.0, 0.2, 1.0, 0.2, 0.01);  // clearly positive current
  CHECK(node.current_loop().sign_b() == -1);

  // Inside the +-0.05 A band the sign must not chatter.
  node.dsc_step(0.02, 0.002, 1.0, 0.2, 0.01);
  CHECK(node.current_loop().sign_b() == -1);
  node.dsc_step(-0.04, -0.004, 1.0, 0.2, 0.01);
  CHECK(node.current_loop().sign_b() == -1);

  // A clear reversal flips it.
  node.dsc_step(-2.0, -0.2, 1.0, 0.2, 0.01);
  CHECK(node.current_loop().sign_b() == 1);
}

TEST_CASE("non-finite signals freeze the loop and are reported once") {
  DscNode node(0, bench_node(1.0, 10.0));
  node.enable_voltage(0.98);
  node.dsc_step(4.6, 0.46, 0.98, 0.46, 0.01);
  const double droop_before = node.droop();

  node.dsc_step(4.6, 0.46, std::nan(""), 0.46, 0.01);
  CHECK(node.voltage_loop().frozen());
  CHECK(std::isfinite(node.droop()));
  CHECK(node.droop() == doctest::Approx(droop_before).epsilon(1e-6));
  REQUIRE(node.events().size() == 1);

  // Further bad samples do not spam the event log.
  node.dsc_step(4.6, 0.46, std::nan(""), 0.46, 0.01);
  CHECK(node.events().size() == 1);
}

TEST_CASE("two coupled nodes drive their per-unit currents together") {
  // Closed loop against a static network equation instead of the full plant:
  // currents respond instantly to the droops, i_k = (400 - v_bus) / (r_dk +
  // 0.5), with the bus pinned. The consensus current loops must still equalize
  // the per-unit currents.
  auto cfg1 = bench::node_config(ConverterParams{400.0, 5e-3, 10.0, 1.0});
  auto cfg2 = bench::node_config(ConverterParams{400.0, 5e-3, 5.0, 2.0});
  cfg1.current.gamma0 = cfg2.current.gamma0 = 500.0;
  DscNode n1(0, cfg1), n2(1, cfg2);
  Network net(CommGraph::full(2), 0.01);
  PeerCache c1({1}), c2({0});
  Refs r1, r2;

  const double v_bus = 393.0;
  auto currents = [&](double d1, double d2) {
    return std::pair{(400.0 - v_bus) / (d1 + 0.5), (400.0 - v_bus) / (d2 + 0.5)};
  };
  auto [i1, i2] = currents(1.0, 2.0);
  bool enabled = false;
  for (int k = 0; k < 1500; ++k) {
    const double now = k * 0.01;
    auto [i1p, v1p] = n1.per_unit(i1, v_bus);
    auto [i2p, v2p] = n2.per_unit(i2, v_bus);
    net.publish(msg(0, v1p, i1p, now));
    net.publish(msg(1, v2p, i2p, now));
    const auto inbox = net.tick(now);
    for (const auto& m : inbox[0]) c1.update(m);
    for (const auto& m : inbox[1]) c2.update(m);
    r1 = consensus_references(c1, v1p, r1);
    r2 = consensus_references(c2, v2p, r2);
    if (!enabled && c1.any() && c2.any()) {
      n1.enable_current(i1p);
      n2.enable_current(i2p);
      enabled = true;
    }
    const double d1 = n1.dsc_step(i1, i1p, r1.v_bar_pu, r1.i_ref_pu, 0.01);
    const double d2 = n2.dsc_step(i2, i2p, r2.v_bar_pu, r2.i_ref_pu, 0.01);
    std::tie(i1, i2) = currents(d1, d2);
  }
  CHECK(i1 / 10.0 == doctest::Approx(i2 / 5.0).epsilon(1e-3));
  CHECK(i1 / i2 == doctest::Approx(2.0).epsilon(1e-3));
}
