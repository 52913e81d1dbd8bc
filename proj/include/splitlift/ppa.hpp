#pragma once

// Power/performance/area proxies over routed geometry.

#include <algorithm>
#include <vector>

#include "splitlift/layout.hpp"

namespace splitlift {

struct PpaParams {
  double activity = 0.2;
  double gate_delay_ns = 0.05;
  double wire_delay_ns_per_nm = 1e-5;  ///< at resistance 1.0
  double via_delay_ns = 0.002;
};

struct PpaReport {
  Nm wirelength_nm = 0;
  double power = 0.0;  ///< activity-weighted wirelength
  double delay_ns = 0.0;
  double area_um2 = 0.0;
  bool operator==(const PpaReport&) const = default;
};

/// Lumped wire delay of a piece of geometry.
inline double wire_delay_ns(const NetRoute& g, const LayerStack& stack, const PpaParams& p = {}) {
  double d = 0.0;
  for (const auto& s : g.segments) d += static_cast<double>(s.length()) * stack.resistance(s.layer);
  return d * p.wire_delay_ns_per_nm + static_cast<double>(g.vias.size()) * p.via_delay_ns;
}

inline PpaReport ppa_proxy(const RoutedLayout& layout, const PpaParams& p = {}) {
  PpaReport r;
  if (!layout.netlist) return r;
  const Netlist& nl = layout.nl();
  const auto n_nets = nl.nets().size();
  std::vector<double> wire(n_nets, 0.0), arrival(n_nets, 0.0);
  for (std::size_t n = 0; n < n_nets; ++n) {
    NetRoute g = layout.electrical_geometry(static_cast<int>(n));
    r.wirelength_nm += g.wirelength();
    wire[n] = wire_delay_ns(g, layout.stack, p);
  }
  r.power = static_cast<double>(r.wirelength_nm) * p.activity;
  for (int g : nl.topological_order()) {
    double in = 0.0;
    for (std::size_t pin = 0; pin < nl.gates()[g].inputs.size(); ++pin) {
      int net = nl.input_net(g, static_cast<int>(pin));
      in = std::max(in, arrival[net] + wire[net]);
    }
    arrival[nl.output_net(g)] = in + p.gate_delay_ns;
  }
  for (const auto& o : nl.outputs()) {
    int net = nl.net_index(o);
    r.delay_ns = std::max(r.delay_ns, arrival[net] + wire[net]);
  }
  const double site_um = static_cast<double>(layout.placement.site_pitch) / 1000.0;
  r.area_um2 = static_cast<double>(layout.placement.rows) * layout.placement.cols * site_um * site_um;
  return r;
}

struct PpaOverheads {
  double area_pct = 0.0;
  double power_pct = 0.0;
  double delay_pct = 0.0;
  bool operator==(const PpaOverheads&) const = default;
};

/// (protected - baseline) / baseline in percent per component; throws on a
/// zero baseline component.
inline PpaOverheads ppa_overheads(const PpaReport& baseline, const PpaReport& prot) {
  auto pct = [](double b, double v, const char* what) {
    if (b == 0.0) throw LayoutError(std::string("zero baseline ") + what);
    return (v - b) / b * 100.0;
  };
  return {pct(baseline.area_um2, prot.area_um2, "area"), pct(baseline.power, prot.power, "power"),
          pct(baseline.delay_ns, prot.delay_ns, "delay")};
}

}  // namespace splitlift
