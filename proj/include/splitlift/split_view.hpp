#pragma once

// Splitting a routed layout after metal k into the attacker-visible FEOL
// (metals <= k, vias below k) and the defender-held BEOL, with open pins and
// ground-truth open pin pairs.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "splitlift/layout.hpp"
#include "splitlift/layout_io.hpp"
#include "splitlift/routing.hpp"

namespace splitlift {

enum class Polarity { DriverSide, SinkSide };

/// Unit vector along the last FEOL wire, pointing at the open pin.
struct UnitDir {
  int dx = 0;
  int dy = 0;
  bool operator==(const UnitDir&) const = default;
};

struct OpenPin {
  int id = 0;
  Point at;
  Polarity polarity = Polarity::SinkSide;
  std::optional<UnitDir> dangling_direction;
  double load_estimate = 0.0;  ///< sink side: sink pins on the fragment
  int drive_class = 0;         ///< driver side
  int fragment = 0;
  bool operator==(const OpenPin&) const = default;
};

/// Driving pin of a fragment: a gate output or a primary input.
struct DriverRef {
  int gate = -1;
  int input = -1;
  bool operator==(const DriverRef&) const = default;
};

/// One connected piece of FEOL wiring and the cell pins it touches. Net
/// names survive only on nets that are complete below the split.
struct Fragment {
  int id = 0;
  std::optional<std::string> net;
  std::optional<DriverRef> driver;
  std::vector<Sink> sinks;
  NetRoute geometry;
  std::vector<int> open_pins;
  bool operator==(const Fragment&) const = default;
};

struct GateInfo {
  std::string id;
  GateFunction function = GateFunction::Buf;
  int arity = 0;
  int drive_strength = 1;
  bool operator==(const GateInfo&) const = default;
};

/// Everything the untrusted foundry sees.
struct FeolView {
  std::string design;
  int split_layer = 0;
  LayerStack stack;
  Placement placement;
  std::vector<GateInfo> gates;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<Fragment> fragments;
  std::vector<OpenPin> open_pins;
  std::set<std::string> feol_complete_nets;

  Point driver_point(const DriverRef& d) const {
    return placement.center(d.gate >= 0 ? placement.gate_sites[d.gate] : placement.input_terminals[d.input]);
  }
  bool operator==(const FeolView&) const = default;
};

/// Defender-held remainder plus the ownership needed to undo the split.
struct BeolView {
  int split_layer = 0;
  std::shared_ptr<const Netlist> netlist;
  RouterConfig config;
  std::uint64_t seed = 0;
  std::vector<RoutingIssue> overflow_nets;
  std::vector<NetRoute> routes;  ///< BEOL part per net, with the route branches
  std::vector<DummyStub> stubs;  ///< BEOL part of each stub
  std::vector<int> fragment_owner;  ///< net index, or -(stub + 1)
  std::vector<std::string> cut_nets;
};

struct OppPair {
  int driver_pin = 0;
  int sink_pin = 0;
  std::optional<std::string> net;  ///< empty for dummy pairs
  std::string obfuscated_net;      ///< dummy pairs only
  Nm distance = 0;
  bool dummy() const noexcept { return !net.has_value(); }
  bool operator==(const OppPair&) const = default;
};

/// Ground-truth pairs; never handed to an attack.
struct OppSet {
  std::vector<OppPair> pairs;
  bool operator==(const OppSet&) const = default;
};

struct SplitResult {
  FeolView feol;
  BeolView beol;
  OppSet opps;
};

namespace detail {

inline int sign(Nm v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

/// Direction of the highest FEOL wire ending at `p`, pointing at `p`.
inline std::optional<UnitDir> dangling_direction(const NetRoute& feol, Point p) {
  const Segment* best = nullptr;
  for (const auto& s : feol.segments)
    if (s.contains(p) && (!best || s.layer > best->layer)) best = &s;
  if (!best) return std::nullopt;
  Point a{best->x1, best->y1}, b{best->x2, best->y2};
  Point from;
  if (p == a) from = b;
  else if (p == b) from = a;
  else return std::nullopt;  // pin in mid-wire: no preferred heading
  return UnitDir{sign(p.x - from.x), sign(p.y - from.y)};
}

}  // namespace detail

inline SplitResult split_after(const RoutedLayout& layout, int k) {
  if (k < 1 || k > layout.stack.top()) throw LayoutError("split layer " + std::to_string(k) + " not in stack");
  const Netlist& nl = layout.nl();
  SplitResult res;
  FeolView& F = res.feol;
  BeolView& B = res.beol;
  F.design = nl.name();
  F.split_layer = k;
  F.stack = layout.stack;
  F.placement = layout.placement;
  for (const Gate& g : nl.gates())
    F.gates.push_back({g.id, g.function, static_cast<int>(g.inputs.size()), g.drive_strength});
  F.inputs = nl.inputs();
  F.outputs = nl.outputs();
  B.split_layer = k;
  B.netlist = layout.netlist;
  B.config = layout.config;
  B.seed = layout.seed;
  B.overflow_nets = layout.overflow_nets;

  auto drive_of = [&](const DriverRef& d) { return d.gate >= 0 ? nl.gates()[d.gate].drive_strength : 4; };

  // Splits one owner's geometry into fragments; returns, per pin, its
  // fragment id.
  auto cut = [&](const NetRoute& geom, const std::vector<Point>& pins, const std::vector<std::optional<DriverRef>>& pin_driver,
                 const std::vector<std::optional<Sink>>& pin_sink, int owner, NetRoute& beol_part) {
    NetRoute feol;
    for (const auto& s : geom.segments) (s.layer <= k ? feol.segments : beol_part.segments).push_back(s);
    for (const auto& v : geom.vias) (v.below < k ? feol.vias : beol_part.vias).push_back(v);
    std::vector<Point> opens;
    for (const auto& v : geom.vias)
      if (v.below == k) opens.push_back({v.x, v.y});
    std::sort(opens.begin(), opens.end());

    GeometryGraph g;
    for (auto p : pins) g.point(1, p);
    g.add(feol);
    for (auto p : opens) g.point(k, p);
    g.close();

    std::map<int, int> frag_of_root;
    auto frag = [&](int root) {
      auto [it, inserted] = frag_of_root.emplace(root, static_cast<int>(F.fragments.size()));
      if (inserted) {
        Fragment f;
        f.id = it->second;
        F.fragments.push_back(std::move(f));
        B.fragment_owner.push_back(owner);
      }
      return it->second;
    };
    std::vector<int> pin_frag;
    for (std::size_t i = 0; i < pins.size(); ++i) {
      int f = frag(g.find(*g.lookup(1, pins[i])));
      pin_frag.push_back(f);
      if (pin_driver[i]) F.fragments[f].driver = pin_driver[i];
      if (pin_sink[i]) F.fragments[f].sinks.push_back(*pin_sink[i]);
    }
    for (auto p : opens) {
      int f = frag(g.find(*g.lookup(k, p)));
      OpenPin op;
      op.id = static_cast<int>(F.open_pins.size());
      op.at = p;
      op.fragment = f;
      F.fragments[f].open_pins.push_back(op.id);
      F.open_pins.push_back(op);
    }
    for (const auto& s : feol.segments) F.fragments[frag(g.find(*g.lookup(s.layer, {s.x1, s.y1})))].geometry.segments.push_back(s);
    for (const auto& v : feol.vias) F.fragments[frag(g.find(*g.lookup(v.below, {v.x, v.y})))].geometry.vias.push_back(v);
    return pin_frag;
  };

  const auto n_nets = nl.nets().size();
  B.routes.resize(n_nets);
  for (std::size_t n = 0; n < n_nets; ++n) {
    const Net& net = nl.nets()[n];
    std::vector<std::optional<DriverRef>> drv(net.sinks.size() + 1);
    std::vector<std::optional<Sink>> snk(net.sinks.size() + 1);
    drv[0] = net.is_primary_input() ? DriverRef{-1, net.input_index} : DriverRef{net.driver_gate, -1};
    for (std::size_t i = 0; i < net.sinks.size(); ++i) snk[i + 1] = net.sinks[i];
    auto pf = cut(layout.routes[n], layout.pins(static_cast<int>(n)), drv, snk, static_cast<int>(n), B.routes[n]);
    B.routes[n].branches = layout.routes[n].branches;
    bool complete = std::all_of(pf.begin(), pf.end(), [&](int f) { return f == pf[0]; });
    if (complete) {
      F.feol_complete_nets.insert(net.id);
      F.fragments[pf[0]].net = net.id;
    } else {
      B.cut_nets.push_back(net.id);
    }
  }
  for (std::size_t s = 0; s < layout.stubs.size(); ++s) {
    const DummyStub& st = layout.stubs[s];
    int d = nl.gate_index(st.driver_gate);
    DummyStub part{st.net, st.driver_gate, st.obfuscated_net, {}, st.open_end};
    cut(st.route, {layout.placement.center(layout.placement.gate_sites[d])}, {DriverRef{d, -1}}, {std::nullopt},
        -(static_cast<int>(s) + 1), part.route);
    B.stubs.push_back(std::move(part));
  }

  // Open pin attributes.
  for (auto& op : F.open_pins) {
    const Fragment& f = F.fragments[op.fragment];
    op.polarity = f.driver ? Polarity::DriverSide : Polarity::SinkSide;
    op.dangling_direction = detail::dangling_direction(f.geometry, op.at);
    if (f.driver) op.drive_class = drive_of(*f.driver);
    else op.load_estimate = static_cast<double>(f.sinks.size());
  }

  // Ground-truth pairs: each sink-side open pin of a net with a driver-side
  // open pin of the same net, preferring one reached through the BEOL.
  std::map<int, std::vector<int>> driver_pins_of, sink_pins_of;  // by owner
  for (const auto& op : F.open_pins) {
    int owner = B.fragment_owner[op.fragment];
    (op.polarity == Polarity::DriverSide ? driver_pins_of : sink_pins_of)[owner].push_back(op.id);
  }
  auto beol_graph = [&](const NetRoute& part) {
    GeometryGraph g;
    g.add(part);
    g.close();
    return g;
  };
  for (std::size_t n = 0; n < n_nets; ++n) {
    auto sit = sink_pins_of.find(static_cast<int>(n));
    auto dit = driver_pins_of.find(static_cast<int>(n));
    if (sit == sink_pins_of.end() || dit == driver_pins_of.end()) continue;
    GeometryGraph g = beol_graph(B.routes[n]);
    auto root = [&](int pin) -> std::optional<int> {
      auto id = g.lookup(k, F.open_pins[pin].at);
      if (!id) return std::nullopt;
      return g.find(*id);
    };
    for (int sp : sit->second) {
      int choice = dit->second.front();
      auto rs = root(sp);
      for (int dp : dit->second)
        if (rs && root(dp) == rs) {
          choice = dp;
          break;
        }
      res.opps.pairs.push_back({choice, sp, nl.nets()[n].id, "", manhattan(F.open_pins[choice].at, F.open_pins[sp].at)});
    }
  }
  for (std::size_t s = 0; s < layout.stubs.size(); ++s) {
    auto dit = driver_pins_of.find(-(static_cast<int>(s) + 1));
    auto sit = sink_pins_of.find(nl.net_index(layout.stubs[s].obfuscated_net));
    if (dit == driver_pins_of.end() || sit == sink_pins_of.end()) continue;
    for (int dp : dit->second)
      for (int sp : sit->second)
        res.opps.pairs.push_back({dp, sp, std::nullopt, layout.stubs[s].obfuscated_net,
                                  manhattan(F.open_pins[dp].at, F.open_pins[sp].at)});
  }
  return res;
}

/// Re-assembles the layout from both halves.
inline RoutedLayout unite(const FeolView& feol, const BeolView& beol) {
  RoutedLayout out = make_empty_layout(beol.netlist, feol.placement, feol.stack, beol.seed, beol.config);
  out.overflow_nets = beol.overflow_nets;
  out.routes = beol.routes;
  out.stubs = beol.stubs;
  for (std::size_t f = 0; f < feol.fragments.size(); ++f) {
    int owner = beol.fragment_owner[f];
    NetRoute& dst = owner >= 0 ? out.routes[owner] : out.stubs[-owner - 1].route;
    const NetRoute& src = feol.fragments[f].geometry;
    dst.segments.insert(dst.segments.end(), src.segments.begin(), src.segments.end());
    dst.vias.insert(dst.vias.end(), src.vias.begin(), src.vias.end());
  }
  for (auto& r : out.routes) r.canonicalize();
  for (auto& s : out.stubs) s.route.canonicalize();
  rebuild_congestion(out);
  return out;
}

struct OppCount {
  std::size_t total = 0;
  std::size_t true_pairs = 0;
  std::size_t dummy_pairs = 0;
  bool operator==(const OppCount&) const = default;
};

inline OppCount count_opps(const OppSet& s) {
  OppCount c;
  c.total = s.pairs.size();
  for (const auto& p : s.pairs) (p.dummy() ? c.dummy_pairs : c.true_pairs)++;
  return c;
}

/// Non-empty subsets of k sinks sharing one driver pin: 2^k - 1.
inline std::uint64_t option_count(unsigned k) {
  if (k >= 64) throw std::overflow_error("option_count overflows for k >= 64");
  return k == 0 ? 0 : (std::uint64_t{1} << k) - 1;
}

struct DistanceStats {
  std::size_t count = 0;
  Nm min = 0;
  double median = 0.0;
  Nm max = 0;
  bool operator==(const DistanceStats&) const = default;
};

inline DistanceStats opp_distance_stats(const OppSet& s) {
  DistanceStats st;
  if (s.pairs.empty()) return st;
  std::vector<Nm> d;
  for (const auto& p : s.pairs) d.push_back(p.distance);
  std::sort(d.begin(), d.end());
  st.count = d.size();
  st.min = d.front();
  st.max = d.back();
  const std::size_t m = d.size() / 2;
  st.median = d.size() % 2 ? static_cast<double>(d[m]) : (static_cast<double>(d[m - 1]) + static_cast<double>(d[m])) / 2.0;
  return st;
}

// ---------------------------------------------------------------------------
// Documents

inline Json to_json(const FeolView& f) {
  Json j;
  j["format"] = "splitlift-feol/1";
  j["design"] = f.design;
  j["split_layer"] = f.stack.name(f.split_layer);
  j["stack"] = to_json(f.stack);
  j["grid"] = {{"rows", f.placement.rows}, {"cols", f.placement.cols}, {"site_pitch_nm", f.placement.site_pitch},
               {"utilization", f.placement.utilization}};
  j["gates"] = Json::array();
  for (std::size_t g = 0; g < f.gates.size(); ++g)
    j["gates"].push_back({{"id", f.gates[g].id},
                          {"function", std::string(to_string(f.gates[g].function))},
                          {"arity", f.gates[g].arity},
                          {"drive", f.gates[g].drive_strength},
                          {"row", f.placement.gate_sites[g].row},
                          {"col", f.placement.gate_sites[g].col}});
  auto ports = [](const std::vector<std::string>& names, const std::vector<SiteCoord>& s) {
    Json a = Json::array();
    for (std::size_t i = 0; i < names.size(); ++i) a.push_back({{"id", names[i]}, {"row", s[i].row}, {"col", s[i].col}});
    return a;
  };
  j["inputs"] = ports(f.inputs, f.placement.input_terminals);
  j["outputs"] = ports(f.outputs, f.placement.output_terminals);
  j["fragments"] = Json::array();
  for (const auto& fr : f.fragments) {
    Json jf{{"id", fr.id}};
    jf["net"] = fr.net ? Json(*fr.net) : Json(nullptr);
    if (fr.driver) jf["driver"] = {{"gate", fr.driver->gate}, {"input", fr.driver->input}};
    else jf["driver"] = nullptr;
    jf["sinks"] = Json::array();
    for (const auto& s : fr.sinks) jf["sinks"].push_back({{"gate", s.gate}, {"pin", s.pin}, {"output", s.output}});
    put_geometry(jf, fr.geometry);
    jf["open_pins"] = fr.open_pins;
    j["fragments"].push_back(std::move(jf));
  }
  j["open_pins"] = Json::array();
  for (const auto& op : f.open_pins) {
    Json jo{{"id", op.id}, {"x", op.at.x}, {"y", op.at.y},
            {"polarity", op.polarity == Polarity::DriverSide ? "DRIVER_SIDE" : "SINK_SIDE"}};
    jo["dir"] = op.dangling_direction ? Json::array({op.dangling_direction->dx, op.dangling_direction->dy}) : Json(nullptr);
    jo["load"] = op.load_estimate;
    jo["drive_class"] = op.drive_class;
    jo["fragment"] = op.fragment;
    j["open_pins"].push_back(std::move(jo));
  }
  j["feol_complete_nets"] = f.feol_complete_nets;
  return j;
}

inline FeolView feol_from_json(const Json& j) {
  if (j.value("format", "") != "splitlift-feol/1") throw FormatError("not a FEOL document");
  try {
    FeolView f;
    f.design = j.at("design").get<std::string>();
    f.stack = stack_from_json(j.at("stack"));
    f.split_layer = f.stack.index(j.at("split_layer").get<std::string>());
    f.placement.rows = j.at("grid").at("rows").get<int>();
    f.placement.cols = j.at("grid").at("cols").get<int>();
    f.placement.site_pitch = j.at("grid").at("site_pitch_nm").get<Nm>();
    f.placement.utilization = j.at("grid").at("utilization").get<double>();
    for (const auto& g : j.at("gates")) {
      auto fn = gate_function_from_string(g.at("function").get<std::string>());
      if (!fn) throw FormatError("unknown gate function");
      f.gates.push_back({g.at("id").get<std::string>(), *fn, g.at("arity").get<int>(), g.at("drive").get<int>()});
      f.placement.gate_sites.push_back({g.at("row").get<int>(), g.at("col").get<int>()});
    }
    for (const auto& p : j.at("inputs")) {
      f.inputs.push_back(p.at("id").get<std::string>());
      f.placement.input_terminals.push_back({p.at("row").get<int>(), p.at("col").get<int>()});
    }
    for (const auto& p : j.at("outputs")) {
      f.outputs.push_back(p.at("id").get<std::string>());
      f.placement.output_terminals.push_back({p.at("row").get<int>(), p.at("col").get<int>()});
    }
    for (const auto& jf : j.at("fragments")) {
      Fragment fr;
      fr.id = jf.at("id").get<int>();
      if (!jf.at("net").is_null()) fr.net = jf.at("net").get<std::string>();
      if (!jf.at("driver").is_null()) fr.driver = DriverRef{jf.at("driver").at("gate").get<int>(), jf.at("driver").at("input").get<int>()};
      for (const auto& s : jf.at("sinks")) fr.sinks.push_back({s.at("gate").get<int>(), s.at("pin").get<int>(), s.at("output").get<int>()});
      fr.geometry = geometry_from_json(jf);
      fr.open_pins = jf.at("open_pins").get<std::vector<int>>();
      f.fragments.push_back(std::move(fr));
    }
    for (const auto& jo : j.at("open_pins")) {
      OpenPin op;
      op.id = jo.at("id").get<int>();
      op.at = {jo.at("x").get<Nm>(), jo.at("y").get<Nm>()};
      op.polarity = jo.at("polarity").get<std::string>() == "DRIVER_SIDE" ? Polarity::DriverSide : Polarity::SinkSide;
      if (!jo.at("dir").is_null()) op.dangling_direction = UnitDir{jo.at("dir").at(0).get<int>(), jo.at("dir").at(1).get<int>()};
      op.load_estimate = jo.at("load").get<double>();
      op.drive_class = jo.at("drive_class").get<int>();
      op.fragment = jo.at("fragment").get<int>();
      f.open_pins.push_back(op);
    }
    for (const auto& n : j.at("feol_complete_nets")) f.feol_complete_nets.insert(n.get<std::string>());
    return f;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed FEOL document: ") + e.what());
  }
}

inline Json to_json(const BeolView& b) {
  Json j;
  j["format"] = "splitlift-beol/1";
  j["split_layer"] = b.split_layer;
  j["nets"] = Json::array();
  for (std::size_t n = 0; n < b.routes.size(); ++n) {
    Json jn{{"id", b.netlist->nets()[n].id}};
    put_geometry(jn, b.routes[n]);
    j["nets"].push_back(std::move(jn));
  }
  j["stubs"] = Json::array();
  for (const auto& s : b.stubs) {
    Json js{{"net", s.net}, {"driver_gate", s.driver_gate}, {"obfuscated_net", s.obfuscated_net}};
    put_geometry(js, s.route);
    j["stubs"].push_back(std::move(js));
  }
  j["fragment_owner"] = b.fragment_owner;
  j["cut_nets"] = b.cut_nets;
  return j;
}

inline Json to_json(const OppSet& s, const FeolView& f) {
  Json j;
  j["format"] = "splitlift-opps/1";
  j["split_layer"] = f.stack.name(f.split_layer);
  auto c = count_opps(s);
  j["count"] = {{"total", c.total}, {"true", c.true_pairs}, {"dummy", c.dummy_pairs}};
  j["pairs"] = Json::array();
  for (const auto& p : s.pairs) {
    Json jp{{"driver_pin", p.driver_pin}, {"sink_pin", p.sink_pin}};
    jp["net"] = p.net ? Json(*p.net) : Json("DUMMY");
    if (p.dummy()) jp["obfuscated_net"] = p.obfuscated_net;
    jp["distance_nm"] = p.distance;
    j["pairs"].push_back(std::move(jp));
  }
  return j;
}

}  // namespace splitlift
