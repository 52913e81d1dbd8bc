#include <gtest/gtest.h>

#include <random>

#include "splitlift/attack.hpp"
#include "splitlift/min_cost_flow.hpp"
#include "test_support.hpp"

using namespace splitlift;
using splitlift::testing::FeolBuilder;

namespace {

// Netlist built straight from the connections, without any loop breaking;
// Netlist::build rejects cycles.
Netlist raw_reconstruction(const FeolView& f, const InferredNetlist& inf) {
  std::vector<Gate> gates;
  for (const auto& g : f.gates)
    gates.push_back({g.id, g.function, std::vector<std::string>(g.arity, "__c"), g.id, 1});
  for (const auto& fr : f.fragments) {
    std::optional<DriverRef> d = fr.driver;
    for (int op : fr.open_pins)
      if (!d && inf.connection[op] >= 0) d = f.fragments[f.open_pins[inf.connection[op]].fragment].driver;
    if (!d) continue;
    const std::string name = d->gate >= 0 ? f.gates[d->gate].id : f.inputs[d->input];
    for (const Sink& s : fr.sinks)
      if (!s.is_primary_output()) gates[s.gate].inputs[s.pin] = name;
  }
  gates.push_back({"__c", GateFunction::Const0, {}, "__c", 1});
  return Netlist::build("raw", f.inputs, {}, std::move(gates));
}

}  // namespace

TEST(MinCostFlow, PicksCheapestPerfectMatching) {
  // 2x2 with costs (d1,s1)=1 (d1,s2)=5 (d2,s1)=4 (d2,s2)=2.
  MinCostFlow mcf(6);
  for (int d : {0, 1}) mcf.add_edge(4, d, 1, 0);
  int e11 = mcf.add_edge(0, 2, 1, 1);
  mcf.add_edge(0, 3, 1, 5);
  mcf.add_edge(1, 2, 1, 4);
  int e22 = mcf.add_edge(1, 3, 1, 2);
  for (int s : {2, 3}) mcf.add_edge(s, 5, 1, 0);
  auto [flow, cost] = mcf.solve(4, 5);
  EXPECT_EQ(flow, 2);
  EXPECT_EQ(cost, 3);
  EXPECT_EQ(mcf.flow(e11), 1);
  EXPECT_EQ(mcf.flow(e22), 1);
}

TEST(MinCostFlow, RejectsNegativeCost) {
  MinCostFlow mcf(2);
  EXPECT_THROW(mcf.add_edge(0, 1, 1, -1), std::invalid_argument);
}

TEST(Proximity, SinglePairIsForced) {
  FeolBuilder b(2);
  int d = b.driver(0, {0, 0});
  int s = b.sink(1, 0, {5000, 7000});
  auto inf = proximity_attack(b.view());
  EXPECT_EQ(inf.connection[s], d);
}

TEST(Proximity, TiesGoToLowerXThenLowerYThenId) {
  FeolBuilder b(4);
  int left = b.driver(0, {0, 1000});
  b.driver(1, {2000, 1000});
  int s1 = b.sink(3, 0, {1000, 1000});
  int s2 = b.sink(3, 1, {1000, 1000});
  auto first = proximity_attack(b.view());
  EXPECT_EQ(first.connection[s1], left);
  EXPECT_EQ(first.connection[s2], left);
  EXPECT_EQ(first, proximity_attack(b.view()));

  FeolBuilder c(4);
  c.driver(0, {1000, 2000});
  int low = c.driver(1, {1000, 0});
  int s = c.sink(3, 0, {1000, 1000});
  EXPECT_EQ(proximity_attack(c.view()).connection[s], low);
}

TEST(Proximity, NoDriversLeavesSinksUnassigned) {
  FeolBuilder b(2);
  int s = b.sink(0, 0, {0, 0});
  auto inf = proximity_attack(b.view());
  EXPECT_EQ(inf.connection[s], kUnassigned);
  EXPECT_FALSE(inf.warnings.empty());
}

TEST(NetworkFlow, HandCheckedTwoByTwo) {
  // Same costs as the min-cost-flow case, realized as distances.
  FeolBuilder b(4);
  int d1 = b.driver(0, {0, 0});
  int d2 = b.driver(1, {10000, 0});
  int s1 = b.sink(2, 0, {1000, 0});
  int s2 = b.sink(2, 1, {8000, 0});
  AttackConfig cfg;
  auto flow = network_flow_attack(b.view(), cfg);
  auto brute = brute_force_attack(b.view(), cfg);
  EXPECT_EQ(flow.connection[s1], d1);
  EXPECT_EQ(flow.connection[s2], d2);
  EXPECT_EQ(flow.total_cost, 1000 + 2000);
  EXPECT_EQ(brute.total_cost, flow.total_cost);
  EXPECT_EQ(brute.connection, flow.connection);
}

TEST(NetworkFlow, DirectionPenaltyDoublesCost) {
  FeolBuilder b(3);
  int east = b.driver(0, {2000, 0});
  int west = b.driver(1, {-1500, 0});
  int s = b.sink(2, 0, {0, 0}, UnitDir{1, 0});
  auto inf = network_flow_attack(b.view());
  // West is nearer but the wire points east: 1500 * 2 > 2000.
  EXPECT_EQ(inf.connection[s], east);
  EXPECT_EQ(proximity_attack(b.view()).connection[s], west);
  EXPECT_EQ(*assignment_cost(b.view(), proximity_attack(b.view()).connection), 3000);
}

TEST(NetworkFlow, DriveClassCapsFanout) {
  FeolBuilder b(8);
  int d = b.driver(0, {0, 0}, 1);
  b.driver(1, {50000, 0}, 1);
  std::vector<int> sinks;
  for (int i = 0; i < 5; ++i) sinks.push_back(b.sink(1 + i / 2, i % 2, {100 * (i + 1), 0}));
  auto inf = network_flow_attack(b.view());
  int to_near = 0;
  for (int s : sinks) to_near += inf.connection[s] == d;
  EXPECT_EQ(to_near, 4);
  EXPECT_EQ(inf.assigned(), 5u);
  EXPECT_EQ(inf.relax_round, 0);
}

TEST(NetworkFlow, RelaxesCapacityWhenInfeasible) {
  FeolBuilder b(4);
  int d = b.driver(0, {0, 0}, 1);
  for (int i = 0; i < 6; ++i) b.sink(1 + i / 2, i % 2, {100 * (i + 1), 0});
  auto inf = network_flow_attack(b.view());
  EXPECT_EQ(inf.relax_round, 2);
  EXPECT_EQ(inf.assigned(), 6u);
  for (const auto& op : b.view().open_pins)
    if (op.polarity == Polarity::SinkSide) EXPECT_EQ(inf.connection[op.id], d);

  AttackConfig tight;
  tight.relax_rounds = 1;
  auto partial = network_flow_attack(b.view(), tight);
  EXPECT_EQ(partial.assigned(), 5u);
  EXPECT_FALSE(partial.warnings.empty());
}

TEST(NetworkFlow, AvoidsLoopThatProximityCreates) {
  // True netlist: in0 -> g0 -> g1. g0's own output pin sits next to its
  // input pin, so nearest-driver closes g0 onto itself.
  FeolBuilder b(2, 1);
  int d_in = b.driver(-1, {10000, 0});
  int d_g0 = b.driver(0, {0, 0});
  int s_g0 = b.sink(0, 0, {500, 0});
  int s_g1 = b.sink(1, 0, {9000, 0});
  FeolView& f = b.view();

  auto prox = proximity_attack(f);
  ASSERT_EQ(prox.connection[s_g0], d_g0);
  EXPECT_THROW(raw_reconstruction(f, prox), NetlistError);

  // Cheapest loop-free answer: both sinks on the input (9500 + 1000).
  auto flow = network_flow_attack(f);
  EXPECT_FALSE(flow.iteration_cap_hit);
  EXPECT_EQ(flow.connection[s_g0], d_in);
  EXPECT_EQ(flow.connection[s_g1], d_in);
  EXPECT_EQ(flow.total_cost, 10500);
  EXPECT_NO_THROW(raw_reconstruction(f, flow));
  EXPECT_FALSE(assignment_has_loop(f, flow.connection));
}

TEST(NetworkFlow, KnownFeolWiresCountTowardLoops) {
  // g1 -> g0 is routed in the FEOL, so g0 -> g1 through the BEOL would close
  // a loop.
  FeolBuilder b(2, 2);
  b.wire(1, 0, 1);
  int d_in = b.driver(-1, {5000, 0});
  int d_g0 = b.driver(0, {0, 0});
  int s_g1 = b.sink(1, 0, {100, 0});
  auto inf = network_flow_attack(b.view());
  EXPECT_EQ(inf.connection[s_g1], d_in);
  EXPECT_EQ(proximity_attack(b.view()).connection[s_g1], d_g0);
}

TEST(NetworkFlow, MaxPairDistanceExcludesFarPairs) {
  FeolBuilder b(2);
  b.driver(0, {0, 0});
  int s = b.sink(1, 0, {10000, 0});
  AttackConfig cfg;
  cfg.max_pair_distance = 5000;
  EXPECT_EQ(network_flow_attack(b.view(), cfg).connection[s], kUnassigned);
}

TEST(NetworkFlow, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    FeolView f = splitlift::testing::random_instance(rng, 8);
    AttackConfig cfg;
    cfg.fanout_unit = i % 2 ? 1 : 4;
    auto flow = network_flow_attack(f, cfg);
    auto brute = brute_force_attack(f, cfg);
    ASSERT_FALSE(flow.iteration_cap_hit) << "instance " << i;
    EXPECT_EQ(flow.assigned(), brute.assigned()) << "instance " << i;
    EXPECT_EQ(flow.total_cost, brute.total_cost) << "instance " << i;
    EXPECT_EQ(*assignment_cost(f, flow.connection, cfg), flow.total_cost);
    EXPECT_FALSE(assignment_has_loop(f, flow.connection));
  }
}

TEST(NetworkFlow, NeverCostlierThanFeasibleProximity) {
  std::mt19937_64 rng(11);
  int compared = 0;
  for (int i = 0; i < 200; ++i) {
    FeolView f = splitlift::testing::random_instance(rng, 8);
    auto prox = proximity_attack(f);
    std::map<int, int> load;
    for (int c : prox.connection)
      if (c >= 0) ++load[c];
    bool feasible = !assignment_has_loop(f, prox.connection);
    for (auto [d, n] : load) feasible = feasible && n <= f.open_pins[d].drive_class * 4;
    if (!feasible) continue;
    ++compared;
    EXPECT_LE(network_flow_attack(f).total_cost, *assignment_cost(f, prox.connection));
  }
  EXPECT_GT(compared, 20);
}

TEST(NetworkFlow, Deterministic) {
  std::mt19937_64 rng(3);
  FeolView f = splitlift::testing::random_instance(rng, 8);
  EXPECT_EQ(network_flow_attack(f), network_flow_attack(f));
}

TEST(BruteForce, RefusesLargeInstances) {
  FeolBuilder b(9);
  for (int i = 0; i < 9; ++i) b.driver(i, {i * 100, 0});
  b.sink(0, 0, {0, 0});
  EXPECT_THROW(brute_force_attack(b.view()), AttackError);
}

TEST(BruteForce, SingleByOne) {
  FeolBuilder b(2);
  int d = b.driver(0, {0, 0});
  int s = b.sink(1, 0, {300, 400});
  auto inf = brute_force_attack(b.view());
  EXPECT_EQ(inf.connection[s], d);
  EXPECT_EQ(inf.total_cost, 700);
}

TEST(Reconstruct, PerfectAttackRestoresNetlist) {
  auto d = splitlift::testing::load_design("c17");
  // Lift everything so that c17 is fully hidden at M3.
  auto prot = apply_plan(d.baseline, naive_plan(*d.netlist, 1.0, 42, unlimited_budgets()));
  auto split = split_after(prot.layout, 3);
  ASSERT_FALSE(split.opps.pairs.empty());
  InferredNetlist perfect;
  perfect.connection.assign(split.feol.open_pins.size(), kUnassigned);
  for (const auto& p : split.opps.pairs)
    if (!p.dummy()) perfect.connection[p.sink_pin] = p.driver_pin;
  auto rec = reconstruct_netlist(split.feol, perfect);
  EXPECT_TRUE(rec.unassigned_sinks.empty());
  EXPECT_EQ(rec.loops_broken, 0);
  EXPECT_TRUE(structurally_equal(rec.netlist, *d.netlist));
  // Exhaustive simulation cross-check (5 inputs).
  std::vector<BitVector> all;
  for (int v = 0; v < 32; ++v) {
    BitVector bits(5);
    for (int i = 0; i < 5; ++i) bits[i] = (v >> i) & 1;
    all.push_back(bits);
  }
  EXPECT_EQ(simulate(rec.netlist, all), simulate(*d.netlist, all));
}

TEST(Reconstruct, NoConnectionsFlagsEveryHiddenSink) {
  auto d = splitlift::testing::load_design("c17");
  auto prot = apply_plan(d.baseline, naive_plan(*d.netlist, 1.0, 42, unlimited_budgets()));
  auto split = split_after(prot.layout, 5);
  InferredNetlist none;
  none.connection.assign(split.feol.open_pins.size(), kUnassigned);
  auto rec = reconstruct_netlist(split.feol, none);
  std::size_t hidden = 0;
  for (const auto& fr : split.feol.fragments)
    if (!fr.driver) hidden += fr.sinks.size();
  EXPECT_GT(hidden, 0u);
  EXPECT_EQ(rec.unassigned_sinks.size(), hidden);
  EXPECT_NO_THROW(rec.netlist.gate("__const0"));
}

TEST(Reconstruct, SinkMappedToSinkIsRejected) {
  FeolBuilder b(2);
  b.driver(0, {0, 0});
  int s0 = b.sink(1, 0, {0, 0});
  int s1 = b.sink(1, 1, {0, 0});
  InferredNetlist bad;
  bad.connection.assign(3, kUnassigned);
  bad.connection[s0] = s1;
  EXPECT_THROW(reconstruct_netlist(b.view(), bad), AttackError);
}

TEST(Attacks, ReadOnlyFeolInput) {
  auto d = splitlift::testing::load_design("c432");
  auto split = split_after(d.baseline, 3);
  const FeolView before = split.feol;
  network_flow_attack(split.feol);
  proximity_attack(split.feol);
  EXPECT_EQ(split.feol, before);
}
