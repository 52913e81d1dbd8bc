#pragma once

// JSON exchange format for routed layouts. Documents are self-contained:
// they embed the netlist as .bench text so later stages need no other input.

#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "json.hpp"

#include "splitlift/layout.hpp"
#include "splitlift/routing.hpp"

namespace splitlift {

using Json = nlohmann::ordered_json;

inline constexpr const char* kLayoutFormat = "splitlift-layout/1";

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline Json to_json(const Segment& s) {
  return {{"layer", s.layer}, {"x1", s.x1}, {"y1", s.y1}, {"x2", s.x2}, {"y2", s.y2}};
}
inline Json to_json(const Via& v) { return {{"below_layer", v.below}, {"x", v.x}, {"y", v.y}}; }
inline Json to_json(Point p) { return {{"x", p.x}, {"y", p.y}}; }

inline Segment segment_from_json(const Json& j) {
  return {j.at("layer").get<int>(), j.at("x1").get<Nm>(), j.at("y1").get<Nm>(), j.at("x2").get<Nm>(),
          j.at("y2").get<Nm>()};
}
inline Via via_from_json(const Json& j) {
  return {j.at("below_layer").get<int>(), j.at("x").get<Nm>(), j.at("y").get<Nm>()};
}
inline Point point_from_json(const Json& j) { return {j.at("x").get<Nm>(), j.at("y").get<Nm>()}; }

inline void put_geometry(Json& j, const NetRoute& r) {
  j["segments"] = Json::array();
  for (const auto& s : r.segments) j["segments"].push_back(to_json(s));
  j["vias"] = Json::array();
  for (const auto& v : r.vias) j["vias"].push_back(to_json(v));
}
inline NetRoute geometry_from_json(const Json& j) {
  NetRoute r;
  for (const auto& s : j.at("segments")) r.segments.push_back(segment_from_json(s));
  for (const auto& v : j.at("vias")) r.vias.push_back(via_from_json(v));
  return r;
}

inline Json to_json(const LayerStack& stack) {
  Json out = Json::array();
  for (const auto& l : stack.layers())
    out.push_back({{"name", l.name}, {"pitch_nm", l.pitch_nm}, {"dir", l.dir == Direction::Horizontal ? "H" : "V"}});
  return out;
}
inline LayerStack stack_from_json(const Json& j) {
  std::vector<MetalLayer> layers;
  for (const auto& l : j) {
    std::string dir = l.at("dir").get<std::string>();
    if (dir != "H" && dir != "V") throw FormatError("layer direction must be H or V");
    layers.push_back({l.at("name").get<std::string>(), l.at("pitch_nm").get<int>(),
                      dir == "H" ? Direction::Horizontal : Direction::Vertical});
  }
  return LayerStack(std::move(layers));
}

inline Json to_json(const RoutedLayout& layout) {
  const Netlist& nl = layout.nl();
  const Placement& p = layout.placement;
  Json j;
  j["format"] = kLayoutFormat;
  j["design"] = nl.name();
  j["seed"] = layout.seed;
  j["netlist"] = to_bench(nl);
  j["stack"] = to_json(layout.stack);
  j["router"] = {{"short_branch_sites", layout.config.short_branch_sites},
                 {"long_branch_sites", layout.config.long_branch_sites},
                 {"edge_capacity", layout.config.edge_capacity}};
  j["grid"] = {{"rows", p.rows}, {"cols", p.cols}, {"site_pitch_nm", p.site_pitch}, {"utilization", p.utilization}};
  auto sites = [](const std::vector<std::string>& ids, const std::vector<SiteCoord>& s) {
    Json a = Json::array();
    for (std::size_t i = 0; i < ids.size(); ++i) a.push_back({{"id", ids[i]}, {"row", s[i].row}, {"col", s[i].col}});
    return a;
  };
  std::vector<std::string> gate_ids;
  for (const auto& g : nl.gates()) gate_ids.push_back(g.id);
  j["gates"] = sites(gate_ids, p.gate_sites);
  for (std::size_t g = 0; g < nl.gates().size(); ++g) j["gates"][g]["drive"] = nl.gates()[g].drive_strength;
  j["inputs"] = sites(nl.inputs(), p.input_terminals);
  j["outputs"] = sites(nl.outputs(), p.output_terminals);
  j["nets"] = Json::array();
  for (std::size_t n = 0; n < nl.nets().size(); ++n) {
    Json net{{"id", nl.nets()[n].id}};
    put_geometry(net, layout.routes[n]);
    net["branches"] = Json::array();
    for (const auto& b : layout.routes[n].branches) net["branches"].push_back({b.from_pin, b.to_pin});
    j["nets"].push_back(std::move(net));
  }
  j["stubs"] = Json::array();
  for (const auto& st : layout.stubs) {
    Json s{{"net", st.net}, {"driver_gate", st.driver_gate}, {"obfuscated_net", st.obfuscated_net},
           {"open_end", to_json(st.open_end)}};
    put_geometry(s, st.route);
    j["stubs"].push_back(std::move(s));
  }
  j["overflow"] = Json::array();
  for (const auto& o : layout.overflow_nets) j["overflow"].push_back({{"net", o.net}, {"reason", o.reason}});
  return j;
}

inline RoutedLayout layout_from_json(const Json& j) {
  if (j.value("format", "") != kLayoutFormat) throw FormatError("not a layout document");
  try {
    auto parsed = std::make_shared<Netlist>(
        parse_bench(j.at("netlist").get<std::string>(), j.at("design").get<std::string>()));
    for (const auto& g : j.at("gates"))
      if (g.contains("drive")) parsed->set_drive_strength(parsed->gate_index(g.at("id").get<std::string>()), g.at("drive").get<int>());
    std::shared_ptr<const Netlist> nl = parsed;
    Placement p;
    const Json& grid = j.at("grid");
    p.rows = grid.at("rows").get<int>();
    p.cols = grid.at("cols").get<int>();
    p.site_pitch = grid.at("site_pitch_nm").get<Nm>();
    p.utilization = grid.at("utilization").get<double>();
    auto read_sites = [](const Json& a, const std::vector<std::string>& ids, const char* what) {
      if (a.size() != ids.size()) throw FormatError(std::string(what) + " count mismatch");
      std::map<std::string, SiteCoord, std::less<>> by_id;
      for (const auto& e : a) by_id[e.at("id").get<std::string>()] = {e.at("row").get<int>(), e.at("col").get<int>()};
      std::vector<SiteCoord> out;
      for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw FormatError(std::string(what) + ": no site for '" + id + "'");
        out.push_back(it->second);
      }
      return out;
    };
    std::vector<std::string> gate_ids;
    for (const auto& g : nl->gates()) gate_ids.push_back(g.id);
    p.gate_sites = read_sites(j.at("gates"), gate_ids, "gates");
    p.input_terminals = read_sites(j.at("inputs"), nl->inputs(), "inputs");
    p.output_terminals = read_sites(j.at("outputs"), nl->outputs(), "outputs");
    RouterConfig cfg;
    cfg.short_branch_sites = j.at("router").at("short_branch_sites").get<int>();
    cfg.long_branch_sites = j.at("router").at("long_branch_sites").get<int>();
    cfg.edge_capacity = j.at("router").at("edge_capacity").get<int>();
    RoutedLayout layout = make_empty_layout(nl, std::move(p), stack_from_json(j.at("stack")),
                                            j.at("seed").get<std::uint64_t>(), cfg);
    const Json& nets = j.at("nets");
    if (nets.size() != nl->nets().size()) throw FormatError("net count mismatch");
    for (const auto& net : nets) {
      auto idx = nl->find_net(net.at("id").get<std::string>());
      if (!idx) throw FormatError("unknown net '" + net.at("id").get<std::string>() + "'");
      NetRoute& r = layout.routes[*idx];
      r = geometry_from_json(net);
      for (const auto& b : net.at("branches")) r.branches.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
    }
    for (const auto& s : j.at("stubs")) {
      DummyStub st{s.at("net").get<std::string>(), s.at("driver_gate").get<std::string>(),
                   s.at("obfuscated_net").get<std::string>(), geometry_from_json(s), point_from_json(s.at("open_end"))};
      layout.stubs.push_back(std::move(st));
    }
    for (const auto& o : j.at("overflow"))
      layout.overflow_nets.push_back({o.at("net").get<std::string>(), o.at("reason").get<std::string>()});
    rebuild_congestion(layout);
    return layout;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed layout document: ") + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

inline void write_json_file(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

inline Json read_json_file(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
}

}  // namespace splitlift
