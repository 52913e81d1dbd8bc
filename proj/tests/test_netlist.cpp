// Netlist parsing, validation, analysis and simulation.

#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <random>

#include "test_support.hpp"

using namespace splitlift;
using splitlift::testing::load_bench;

namespace {

// Scalar reference evaluator: recursive, one pattern at a time.
std::vector<bool> reference_eval(const Netlist& nl, const std::vector<bool>& in) {
  std::map<std::string, bool> value;
  for (std::size_t i = 0; i < nl.inputs().size(); ++i) value[nl.inputs()[i]] = in[i];
  std::function<bool(const std::string&)> get = [&](const std::string& net) -> bool {
    if (auto it = value.find(net); it != value.end()) return it->second;
    const Gate& g = nl.gates()[nl.nets()[nl.net_index(net)].driver_gate];
    std::vector<bool> a;
    for (const auto& i : g.inputs) a.push_back(get(i));
    bool all = true, any = false, parity = false;
    for (bool b : a) {
      all = all && b;
      any = any || b;
      parity = parity != b;
    }
    bool r = false;
    switch (g.function) {
    case GateFunction::And: r = all; break;
    case GateFunction::Nand: r = !all; break;
    case GateFunction::Or: r = any; break;
    case GateFunction::Nor: r = !any; break;
    case GateFunction::Xor: r = parity; break;
    case GateFunction::Xnor: r = !parity; break;
    case GateFunction::Not: r = !a[0]; break;
    case GateFunction::Buf: r = a[0]; break;
    case GateFunction::Const0: r = false; break;
    }
    return value[net] = r;
  };
  std::vector<bool> out;
  for (const auto& o : nl.outputs()) out.push_back(get(o));
  return out;
}

}  // namespace

TEST(Parse, C17Shape) {
  Netlist nl = load_bench("c17");
  EXPECT_EQ(nl.inputs().size(), 5u);
  EXPECT_EQ(nl.outputs().size(), 2u);
  EXPECT_EQ(nl.gates().size(), 6u);
  EXPECT_EQ(nl.nets().size(), 11u);
  const Net& n11 = nl.net("N11");
  EXPECT_EQ(n11.fanout(), 2u);
  EXPECT_EQ(nl.gates()[n11.driver_gate].function, GateFunction::Nand);
  EXPECT_TRUE(nl.net("N1").is_primary_input());
}

TEST(Parse, CommentsBlankLinesAndSpacing) {
  Netlist nl = parse_bench("# header\nINPUT(a)  # trailing\n\n INPUT( b )\nOUTPUT(y)\ny=and(a,b)\n");
  EXPECT_EQ(nl.gate("y").function, GateFunction::And);
  EXPECT_EQ(nl.gate("y").inputs, (std::vector<std::string>{"a", "b"}));
}

TEST(Parse, RejectsBadInput) {
  EXPECT_THROW(parse_bench("INPUT(a)\nOUTPUT(y)\ny = FOO(a)\n"), ParseError);
  EXPECT_THROW(parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a, b)\n"), NetlistError);
  EXPECT_THROW(parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\ny = BUFF(a)\n"), NetlistError);
  EXPECT_THROW(parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a, a)\n"), NetlistError);
  EXPECT_THROW(parse_bench("INPUT(a)\nOUTPUT(y)\nx = AND(a, y)\ny = NOT(x)\n"), NetlistError);
  EXPECT_THROW(parse_bench("INPUT(a\n"), ParseError);
}

TEST(Parse, RoundTripIsStable) {
  for (const char* name : {"c17", "c432", "c880"}) {
    Netlist nl = load_bench(name);
    Netlist back = parse_bench(to_bench(nl), name);
    EXPECT_TRUE(structurally_equal(nl, back)) << name;
    EXPECT_EQ(to_bench(back), to_bench(nl)) << name;
  }
}

TEST(Build, TopologicalOrderRespectsEdges) {
  Netlist nl = load_bench("c432");
  std::vector<int> pos(nl.gates().size());
  for (std::size_t i = 0; i < nl.topological_order().size(); ++i) pos[nl.topological_order()[i]] = static_cast<int>(i);
  ASSERT_EQ(nl.topological_order().size(), nl.gates().size());
  for (std::size_t g = 0; g < nl.gates().size(); ++g)
    for (int s : nl.fanout_gates(static_cast<int>(g))) EXPECT_LT(pos[g], pos[s]);
}

TEST(Analysis, FanoutClasses) {
  Netlist nl = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\nOUTPUT(z)\ny = NOT(a)\nz = AND(a, a)\nw = NOT(b)\n");
  auto cls = classify_fanout(nl);
  EXPECT_EQ(cls["a"], FanoutClass::HiFon);
  EXPECT_EQ(cls["b"], FanoutClass::SingleSink);
  EXPECT_EQ(cls["y"], FanoutClass::SingleSink);
  EXPECT_EQ(cls["w"], FanoutClass::Dangling);
}

TEST(Analysis, SizingByFanout) {
  Netlist nl = load_bench("c432");
  size_gates_by_fanout(nl);
  for (std::size_t g = 0; g < nl.gates().size(); ++g) {
    auto fo = nl.nets()[nl.output_net(static_cast<int>(g))].fanout();
    int want = fo <= 4 ? 1 : fo <= 8 ? 2 : 4;
    EXPECT_EQ(nl.gates()[g].drive_strength, want) << nl.gates()[g].id;
  }
  EXPECT_THROW(nl.set_drive_strength(0, 3), NetlistError);
}

TEST(Analysis, LoopCheck) {
  Netlist nl = load_bench("c17");
  EXPECT_TRUE(has_combinational_loop(nl, "N22", "N10"));
  EXPECT_TRUE(has_combinational_loop(nl, "N16", "N16"));
  EXPECT_FALSE(has_combinational_loop(nl, "N10", "N19"));
}

TEST(Simulate, C17TruthTable) {
  Netlist nl = load_bench("c17");
  std::vector<BitVector> vectors;
  for (int v = 0; v < 32; ++v) {
    BitVector b(5);
    for (int i = 0; i < 5; ++i) b[i] = (v >> i) & 1;
    vectors.push_back(b);
  }
  auto out = simulate(nl, vectors);
  for (int v = 0; v < 32; ++v) {
    bool n1 = vectors[v][0], n2 = vectors[v][1], n3 = vectors[v][2], n6 = vectors[v][3], n7 = vectors[v][4];
    bool n10 = !(n1 && n3), n11 = !(n3 && n6), n16 = !(n2 && n11), n19 = !(n11 && n7);
    EXPECT_EQ(out[v][0], !(n10 && n16));
    EXPECT_EQ(out[v][1], !(n16 && n19));
  }
}

TEST(Simulate, MatchesScalarReference) {
  std::mt19937_64 rng(3);
  for (const char* name : {"c432", "c499", "c880"}) {
    Netlist nl = load_bench(name);
    std::vector<BitVector> vectors(100, BitVector(nl.inputs().size()));
    for (auto& v : vectors)
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng() & 1;
    auto out = simulate(nl, vectors);
    for (std::size_t k = 0; k < vectors.size(); ++k) {
      auto want = reference_eval(nl, std::vector<bool>(vectors[k].begin(), vectors[k].end()));
      ASSERT_EQ(std::vector<bool>(out[k].begin(), out[k].end()), want) << name << " vector " << k;
    }
  }
}

TEST(Simulate, RejectsWrongWidth) {
  Netlist nl = load_bench("c17");
  std::vector<BitVector> bad{BitVector(4)};
  EXPECT_THROW(simulate(nl, bad), NetlistError);
}
