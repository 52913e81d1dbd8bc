// FEOL/BEOL split, open pins and OPP bookkeeping.

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace splitlift;
using splitlift::testing::load_design;

namespace {

ProtectedLayout protected_c432(const Design& d) {
  return lift_flow(*d.netlist, d.baseline, LiftBudgets{}, 1.0);
}

}  // namespace

TEST(Split, LayersLandOnTheRightSide) {
  Design d = load_design("c432");
  auto prot = protected_c432(d);
  for (int k : {1, 3, 5, 8}) {
    SplitResult s = split_after(prot.layout, k);
    for (const auto& f : s.feol.fragments) {
      for (const auto& seg : f.geometry.segments) EXPECT_LE(seg.layer, k);
      for (const auto& v : f.geometry.vias) EXPECT_LT(v.below, k);
    }
    for (const auto& r : s.beol.routes) {
      for (const auto& seg : r.segments) EXPECT_GT(seg.layer, k);
      for (const auto& v : r.vias) EXPECT_GE(v.below, k);
    }
  }
}

TEST(Split, UniteRestoresTheLayout) {
  Design d = load_design("c432");
  auto prot = protected_c432(d);
  for (int k : {1, 4, 6, 10}) {
    SplitResult s = split_after(prot.layout, k);
    RoutedLayout back = unite(s.feol, s.beol);
    ASSERT_EQ(back.routes.size(), prot.layout.routes.size());
    for (std::size_t n = 0; n < back.routes.size(); ++n) {
      EXPECT_EQ(back.routes[n].segments, prot.layout.routes[n].segments);
      EXPECT_EQ(back.routes[n].vias, prot.layout.routes[n].vias);
      EXPECT_EQ(back.routes[n].branches, prot.layout.routes[n].branches);
    }
    ASSERT_EQ(back.stubs.size(), prot.layout.stubs.size());
    for (std::size_t i = 0; i < back.stubs.size(); ++i) EXPECT_EQ(back.stubs[i], prot.layout.stubs[i]);
  }
}

TEST(Split, OpenPinsSitOnSplitLayerVias) {
  Design d = load_design("c432");
  const int k = 3;
  SplitResult s = split_after(d.baseline, k);
  std::size_t vias = 0;
  for (const auto& r : d.baseline.routes)
    for (const auto& v : r.vias) vias += v.below == k;
  EXPECT_EQ(s.feol.open_pins.size(), vias);
  for (const auto& op : s.feol.open_pins) {
    const auto& f = s.feol.fragments[op.fragment];
    EXPECT_EQ(op.polarity == Polarity::DriverSide, f.driver.has_value());
    if (op.polarity == Polarity::DriverSide) EXPECT_GT(op.drive_class, 0);
    if (op.dangling_direction) EXPECT_EQ(std::abs(op.dangling_direction->dx) + std::abs(op.dangling_direction->dy), 1);
  }
}

TEST(Split, CompleteNetsNeedNoBeol) {
  Design d = load_design("c432");
  for (int k : {2, 4, 6}) {
    SplitResult s = split_after(d.baseline, k);
    const Netlist& nl = *d.netlist;
    EXPECT_EQ(s.feol.feol_complete_nets.size() + s.beol.cut_nets.size(), nl.nets().size());
    for (std::size_t n = 0; n < nl.nets().size(); ++n) {
      // A net whose route never leaves M1..Mk is whole in the FEOL.
      if (d.baseline.routes[n].topmost_layer() <= k)
        EXPECT_TRUE(s.feol.feol_complete_nets.count(nl.nets()[n].id)) << nl.nets()[n].id;
    }
    for (const auto& f : s.feol.fragments)
      if (f.net) EXPECT_TRUE(f.open_pins.empty());
  }
  SplitResult top = split_after(d.baseline, 10);
  EXPECT_TRUE(top.feol.open_pins.empty());
  EXPECT_TRUE(top.opps.pairs.empty());
  EXPECT_THROW(split_after(d.baseline, 0), LayoutError);
  EXPECT_THROW(split_after(d.baseline, 11), LayoutError);
}

TEST(Split, TruePairsJoinOneNet) {
  Design d = load_design("c432");
  LiftOptions o;
  o.use_s12 = false;
  auto prot = lift_flow(*d.netlist, d.baseline, LiftBudgets{}, 0.3, o);
  ASSERT_FALSE(prot.layout.stubs.empty());
  SplitResult s = split_after(prot.layout, 4);
  const Netlist& nl = *d.netlist;
  auto c = count_opps(s.opps);
  EXPECT_EQ(c.total, c.true_pairs + c.dummy_pairs);
  EXPECT_GT(c.dummy_pairs, 0u);
  for (const auto& p : s.opps.pairs) {
    const auto& dp = s.feol.open_pins[p.driver_pin];
    const auto& sp = s.feol.open_pins[p.sink_pin];
    EXPECT_EQ(dp.polarity, Polarity::DriverSide);
    EXPECT_EQ(sp.polarity, Polarity::SinkSide);
    EXPECT_EQ(p.distance, manhattan(dp.at, sp.at));
    if (p.dummy()) continue;
    const Net& net = nl.net(*p.net);
    DriverRef truth = net.is_primary_input() ? DriverRef{-1, net.input_index} : DriverRef{net.driver_gate, -1};
    EXPECT_EQ(*s.feol.fragments[dp.fragment].driver, truth);
    EXPECT_EQ(s.beol.fragment_owner[sp.fragment], nl.net_index(*p.net));
  }
  // Every sink-side pin of a cut net has exactly one true pair.
  std::map<int, int> seen;
  for (const auto& p : s.opps.pairs)
    if (!p.dummy()) ++seen[p.sink_pin];
  for (const auto& op : s.feol.open_pins)
    if (op.polarity == Polarity::SinkSide && s.beol.fragment_owner[op.fragment] >= 0) EXPECT_EQ(seen[op.id], 1);
}

TEST(Split, FeolIsAllTheAttackerGets) {
  Design d = load_design("c432");
  auto prot = protected_c432(d);
  SplitResult s = split_after(prot.layout, 5);
  for (const auto& f : s.feol.fragments)
    if (!f.open_pins.empty()) EXPECT_FALSE(f.net.has_value());
  FeolView back = feol_from_json(to_json(s.feol));
  EXPECT_EQ(back, s.feol);
}

TEST(Split, DanglingDirectionPointsAtThePin) {
  NetRoute r;
  r.add_segment({3, 0, 0, 500, 0});
  EXPECT_EQ(*detail::dangling_direction(r, {500, 0}), (UnitDir{1, 0}));
  EXPECT_EQ(*detail::dangling_direction(r, {0, 0}), (UnitDir{-1, 0}));
  EXPECT_FALSE(detail::dangling_direction(r, {200, 0}).has_value());
  EXPECT_FALSE(detail::dangling_direction(r, {0, 300}).has_value());
}

TEST(Opp, OptionCountMatchesSubsetEnumeration) {
  EXPECT_EQ(option_count(1), 1u);
  EXPECT_EQ(option_count(2), 3u);
  EXPECT_EQ(option_count(0), 0u);
  for (unsigned k = 1; k <= 10; ++k) {
    std::uint64_t subsets = 0;
    for (unsigned mask = 0; mask < (1u << k); ++mask) subsets += mask != 0;
    EXPECT_EQ(option_count(k), subsets) << k;
  }
  EXPECT_THROW(option_count(64), std::overflow_error);
}

TEST(Opp, DistanceStats) {
  OppSet s;
  for (Nm d : {5, 1, 9, 3}) s.pairs.push_back({0, 1, "n", "", d});
  auto st = opp_distance_stats(s);
  EXPECT_EQ(st.count, 4u);
  EXPECT_EQ(st.min, 1);
  EXPECT_EQ(st.max, 9);
  EXPECT_DOUBLE_EQ(st.median, 4.0);
  EXPECT_EQ(opp_distance_stats(OppSet{}).count, 0u);
}
