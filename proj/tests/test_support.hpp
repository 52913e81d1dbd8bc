#pragma once

// Shared fixtures: benchmark loading and hand-built FEOL views.

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "splitlift/pipeline.hpp"

namespace splitlift::testing {

inline std::string bench_path(const std::string& name) {
  return std::string(SPLITLIFT_BENCH_DIR) + "/" + name + ".bench";
}

inline Netlist load_bench(const std::string& name) {
  return parse_bench(read_text_file(bench_path(name)), name);
}

inline Design load_design(const std::string& name, std::uint64_t seed = 42) {
  RunConfig c;
  c.input = bench_path(name);
  c.seed = seed;
  return prepare_design(c);
}

/// The attack that knows the BEOL: every sink-side pin of a real net gets
/// its true driver pin.
inline InferredNetlist perfect_attack(const SplitResult& split) {
  InferredNetlist inf;
  inf.method = "perfect";
  inf.connection.assign(split.feol.open_pins.size(), kUnassigned);
  for (const auto& p : split.opps.pairs)
    if (!p.dummy()) inf.connection[p.sink_pin] = p.driver_pin;
  return inf;
}

/// PPA recomputed from raw geometry with a memoized arrival-time recursion.
inline PpaReport reference_ppa(const RoutedLayout& L) {
  const PpaParams p;
  const Netlist& nl = L.nl();
  PpaReport r;
  std::vector<double> wire(nl.nets().size());
  for (std::size_t n = 0; n < nl.nets().size(); ++n) {
    NetRoute g = L.routes[n];
    for (const auto& st : L.stubs)
      if (st.net == nl.nets()[n].id) g.append(st.route);
    double res = 0;
    for (const auto& s : g.segments) {
      r.wirelength_nm += s.length();
      res += static_cast<double>(s.length()) * 130.0 / L.stack.at(s.layer).pitch_nm;
    }
    wire[n] = res * p.wire_delay_ns_per_nm + static_cast<double>(g.vias.size()) * p.via_delay_ns;
  }
  r.power = static_cast<double>(r.wirelength_nm) * p.activity;
  std::map<int, double> memo;
  std::function<double(int)> arrival = [&](int net) -> double {
    const Net& n = nl.nets()[net];
    if (n.is_primary_input()) return 0.0;
    if (auto it = memo.find(net); it != memo.end()) return it->second;
    double in = 0;
    for (const auto& i : nl.gates()[n.driver_gate].inputs) {
      int m = nl.net_index(i);
      in = std::max(in, arrival(m) + wire[m]);
    }
    return memo[net] = in + p.gate_delay_ns;
  };
  for (const auto& o : nl.outputs()) {
    int n = nl.net_index(o);
    r.delay_ns = std::max(r.delay_ns, arrival(n) + wire[n]);
  }
  const double site = L.placement.site_pitch / 1000.0;
  r.area_um2 = L.placement.rows * L.placement.cols * site * site;
  return r;
}

/// Builds a FEOL view from scratch. Every gate has the given arity; driver
/// pins and sink pins each get their own fragment.
class FeolBuilder {
public:
  explicit FeolBuilder(int gates, int arity = 2) {
    f_.design = "synthetic";
    f_.split_layer = 3;
    f_.stack = LayerStack::default_stack();
    for (int g = 0; g < gates; ++g) f_.gates.push_back({"g" + std::to_string(g), arity == 1 ? GateFunction::Not : GateFunction::Nand, arity, 1});
    for (int i = 0; i < 8; ++i) f_.inputs.push_back("in" + std::to_string(i));
  }

  /// Driver-side open pin for gate `g` (or primary input `-1 - g`).
  int driver(int g, Point at, int drive_class = 1) {
    Fragment fr;
    fr.id = static_cast<int>(f_.fragments.size());
    fr.driver = g >= 0 ? DriverRef{g, -1} : DriverRef{-1, -1 - g};
    return add_pin(std::move(fr), at, Polarity::DriverSide, drive_class, std::nullopt);
  }

  /// Sink-side open pin feeding input `pin` of gate `g`.
  int sink(int g, int pin, Point at, std::optional<UnitDir> dir = std::nullopt) {
    Fragment fr;
    fr.id = static_cast<int>(f_.fragments.size());
    fr.sinks.push_back(Sink{g, pin, -1});
    return add_pin(std::move(fr), at, Polarity::SinkSide, 1, dir);
  }

  /// A FEOL-complete wire from gate `from` to input `pin` of gate `to`.
  void wire(int from, int to, int pin) {
    Fragment fr;
    fr.id = static_cast<int>(f_.fragments.size());
    fr.driver = DriverRef{from, -1};
    fr.sinks.push_back(Sink{to, pin, -1});
    f_.fragments.push_back(std::move(fr));
  }

  FeolView& view() { return f_; }

private:
  int add_pin(Fragment fr, Point at, Polarity pol, int drive_class, std::optional<UnitDir> dir) {
    OpenPin op;
    op.id = static_cast<int>(f_.open_pins.size());
    op.at = at;
    op.polarity = pol;
    op.dangling_direction = dir;
    op.drive_class = drive_class;
    op.fragment = fr.id;
    fr.open_pins.push_back(op.id);
    f_.fragments.push_back(std::move(fr));
    f_.open_pins.push_back(op);
    return op.id;
  }

  FeolView f_;
};

/// Random attack instance with up to `max_pins` pins per side. About a
/// third of the driver pins are primary inputs; the rest belong to gates
/// that also own sink pins, so assignments can close loops.
inline FeolView random_instance(std::mt19937_64& rng, int max_pins) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int D = pick(1, max_pins), S = pick(1, max_pins);
  const int gates = std::max(D, (S + 1) / 2);
  FeolBuilder b(gates, 2);
  for (int d = 0; d < D; ++d)
    b.driver(pick(0, 2) == 0 ? -1 - d : d, {pick(0, 20) * 100, pick(0, 20) * 100}, kDriveClasses[pick(0, 2)]);
  for (int s = 0; s < S; ++s) {
    std::optional<UnitDir> dir;
    switch (pick(0, 4)) {
    case 0: dir = UnitDir{1, 0}; break;
    case 1: dir = UnitDir{-1, 0}; break;
    case 2: dir = UnitDir{0, 1}; break;
    case 3: dir = UnitDir{0, -1}; break;
    default: break;
    }
    b.sink(s / 2, s % 2, {pick(0, 20) * 100, pick(0, 20) * 100}, dir);
  }
  return b.view();
}

}  // namespace splitlift::testing
