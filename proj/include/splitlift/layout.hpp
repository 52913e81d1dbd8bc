#pragma once

// Physical data model: metal stack, placement grid, routed geometry and
// per-net geometric connectivity.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "splitlift/netlist.hpp"

namespace splitlift {

using Nm = std::int64_t;

class LayoutError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Direction { Horizontal, Vertical };

struct MetalLayer {
  std::string name;
  int pitch_nm = 0;
  Direction dir = Direction::Horizontal;
  bool operator==(const MetalLayer&) const = default;
};

/// Ordered metal stack. Layers are addressed 1-based (M1 == 1).
class LayerStack {
public:
  LayerStack() = default;
  explicit LayerStack(std::vector<MetalLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw LayoutError("empty layer stack");
    for (std::size_t i = 1; i < layers_.size(); ++i) {
      if (layers_[i].pitch_nm < layers_[i - 1].pitch_nm)
        throw LayoutError("pitch decreases at " + layers_[i].name);
      if (layers_[i].dir == layers_[i - 1].dir)
        throw LayoutError("direction does not alternate at " + layers_[i].name);
    }
  }

  /// 45nm stack: M1 130, M2-M3 140, M4-M6 280, M7-M8 800, M9-M10 1600 nm.
  static LayerStack default_stack() {
    return from_pitches({130, 140, 140, 280, 280, 280, 800, 800, 1600, 1600});
  }

  /// Twelve layers: the M6 pitch class appears two more times above M6.
  static LayerStack extended_stack() {
    return from_pitches({130, 140, 140, 280, 280, 280, 280, 280, 800, 800, 1600, 1600});
  }

  static LayerStack from_pitches(const std::vector<int>& pitches) {
    std::vector<MetalLayer> layers;
    for (std::size_t i = 0; i < pitches.size(); ++i)
      layers.push_back({"M" + std::to_string(i + 1), pitches[i],
                        i % 2 == 0 ? Direction::Horizontal : Direction::Vertical});
    return LayerStack(std::move(layers));
  }

  int size() const noexcept { return static_cast<int>(layers_.size()); }
  int top() const noexcept { return size(); }
  const MetalLayer& at(int layer) const {
    if (layer < 1 || layer > size()) throw LayoutError("layer index " + std::to_string(layer) + " out of range");
    return layers_[layer - 1];
  }
  const std::vector<MetalLayer>& layers() const noexcept { return layers_; }

  int index(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
      if (layers_[i].name == name) return i + 1;
    throw LayoutError("unknown layer '" + name + "'");
  }
  const std::string& name(int layer) const { return at(layer).name; }
  bool horizontal(int layer) const { return at(layer).dir == Direction::Horizontal; }

  /// Relative sheet resistance; wider (higher) layers are faster.
  double resistance(int layer) const { return 130.0 / at(layer).pitch_nm; }

  bool operator==(const LayerStack&) const = default;

private:
  std::vector<MetalLayer> layers_;
};

/// Via-layer label, e.g. via_name(4) == "V45".
inline std::string via_name(int below) {
  return "V" + std::to_string(below) + std::to_string(below + 1);
}

struct Point {
  Nm x = 0;
  Nm y = 0;
  auto operator<=>(const Point&) const = default;
};

inline Nm manhattan(Point a, Point b) {
  return (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y);
}

struct Segment {
  int layer = 1;
  Nm x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  bool horizontal() const noexcept { return y1 == y2; }
  Nm length() const noexcept { return manhattan({x1, y1}, {x2, y2}); }
  /// Endpoints in canonical order (lower point first).
  Segment normalized() const {
    Segment s = *this;
    if (std::tie(s.x2, s.y2) < std::tie(s.x1, s.y1)) {
      std::swap(s.x1, s.x2);
      std::swap(s.y1, s.y2);
    }
    return s;
  }
  bool contains(Point p) const noexcept {
    if (horizontal())
      return p.y == y1 && p.x >= std::min(x1, x2) && p.x <= std::max(x1, x2);
    return p.x == x1 && p.y >= std::min(y1, y2) && p.y <= std::max(y1, y2);
  }
  auto operator<=>(const Segment&) const = default;
};

/// Connects metal `below` with `below + 1` at (x, y).
struct Via {
  int below = 1;
  Nm x = 0, y = 0;
  auto operator<=>(const Via&) const = default;
};

/// Logical pin-to-pin connection of a route tree. Pin 0 is the driver,
/// pin i > 0 is sink i - 1 in Net::sinks order.
struct Branch {
  int from_pin = 0;
  int to_pin = 0;
  auto operator<=>(const Branch&) const = default;
};

struct NetRoute {
  std::vector<Segment> segments;
  std::vector<Via> vias;
  std::vector<Branch> branches;

  bool empty() const noexcept { return segments.empty() && vias.empty(); }

  void add_segment(Segment s) {
    if (s.length() == 0) return;
    s = s.normalized();
    if (std::find(segments.begin(), segments.end(), s) == segments.end()) segments.push_back(s);
  }
  void add_via(Via v) {
    if (std::find(vias.begin(), vias.end(), v) == vias.end()) vias.push_back(v);
  }
  void add_stack(Point p, int from_layer, int to_layer) {
    for (int l = std::min(from_layer, to_layer); l < std::max(from_layer, to_layer); ++l)
      add_via({l, p.x, p.y});
  }
  void append(const NetRoute& other) {
    for (const auto& s : other.segments) add_segment(s);
    for (const auto& v : other.vias) add_via(v);
  }
  void canonicalize() {
    std::sort(segments.begin(), segments.end());
    std::sort(vias.begin(), vias.end());
    std::sort(branches.begin(), branches.end());
  }
  Nm wirelength() const {
    Nm total = 0;
    for (const auto& s : segments) total += s.length();
    return total;
  }
  /// Highest metal touched by a segment or a via landing; 0 when empty.
  int topmost_layer() const {
    int top = 0;
    for (const auto& s : segments) top = std::max(top, s.layer);
    for (const auto& v : vias) top = std::max(top, v.below + 1);
    return top;
  }
  bool operator==(const NetRoute&) const = default;
};

/// Dangling wire from a dummy driver to an obfuscating elevating cell. It is
/// electrically part of `net` (the dummy driver's own output net) and ends
/// open at `open_end` on the lift layer.
struct DummyStub {
  std::string net;
  std::string driver_gate;
  std::string obfuscated_net;
  NetRoute route;
  Point open_end;
  bool operator==(const DummyStub&) const = default;
};

struct SiteCoord {
  int row = 0;
  int col = 0;
  auto operator<=>(const SiteCoord&) const = default;
};

/// Gate sites on a rows x cols core; primary I/O terminals sit in extra
/// columns left (inputs, col < 0) and right (outputs, col >= cols) of it.
struct Placement {
  int rows = 0;
  int cols = 0;
  Nm site_pitch = 1000;
  double utilization = 0.0;
  std::vector<SiteCoord> gate_sites;
  std::vector<SiteCoord> input_terminals;
  std::vector<SiteCoord> output_terminals;

  Point center(SiteCoord s) const { return {s.col * site_pitch, s.row * site_pitch}; }
  int min_col() const {
    int c = 0;
    for (auto t : input_terminals) c = std::min(c, t.col);
    return c;
  }
  int max_col() const {
    int c = cols - 1;
    for (auto t : output_terminals) c = std::max(c, t.col);
    return c;
  }
  bool operator==(const Placement&) const = default;
};

struct RouterConfig {
  int short_branch_sites = 10;  ///< below: M1-M3
  int long_branch_sites = 40;   ///< below: M4-M6, otherwise M7 and up
  int edge_capacity = 4;        ///< tracks per grid edge per layer
};

/// Usage counters per layer per grid edge. Edge (r, c) on a horizontal
/// layer joins (r, c)-(r, c+1); on a vertical layer (r, c)-(r+1, c).
class CongestionMap {
public:
  CongestionMap() = default;
  CongestionMap(int layers, int rows, int min_col, int max_col, Nm pitch, int capacity)
      : layers_(layers), rows_(rows), min_col_(min_col), ncols_(max_col - min_col + 1),
        pitch_(pitch), capacity_(capacity),
        usage_(static_cast<std::size_t>(layers) * rows * ncols_, 0) {}

  int capacity() const noexcept { return capacity_; }

  /// Grid edges crossed by a segment.
  std::vector<std::size_t> edges_of(const Segment& s) const {
    std::vector<std::size_t> out;
    if (s.horizontal()) {
      int r = to_cell(s.y1);
      int c0 = to_cell(std::min(s.x1, s.x2)), c1 = to_cell(std::max(s.x1, s.x2));
      for (int c = c0; c < c1; ++c) push(out, s.layer, r, c);
    } else {
      int c = to_cell(s.x1);
      int r0 = to_cell(std::min(s.y1, s.y2)), r1 = to_cell(std::max(s.y1, s.y2));
      for (int r = r0; r < r1; ++r) push(out, s.layer, r, c);
    }
    return out;
  }
  /// Distinct grid edges used by a set of segments; a net occupies each
  /// edge at most once however many of its segments cross it.
  std::vector<std::size_t> edge_set(const std::vector<Segment>& segs) const {
    std::vector<std::size_t> out;
    for (const auto& s : segs) {
      auto e = edges_of(s);
      out.insert(out.end(), e.begin(), e.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  bool fits_edges(const std::vector<std::size_t>& edges) const {
    for (auto e : edges)
      if (usage_[e] + 1 > capacity_) return false;
    return true;
  }
  void add_edges(const std::vector<std::size_t>& edges, int delta) {
    for (auto e : edges) usage_[e] += delta;
  }
  bool fits(const std::vector<Segment>& segs) const { return fits_edges(edge_set(segs)); }
  void add(const std::vector<Segment>& segs, int delta) { add_edges(edge_set(segs), delta); }
  void clear() { std::fill(usage_.begin(), usage_.end(), 0); }
  int overflow() const {
    int total = 0;
    for (int u : usage_) total += std::max(0, u - capacity_);
    return total;
  }
  int max_usage() const { return usage_.empty() ? 0 : *std::max_element(usage_.begin(), usage_.end()); }
  bool operator==(const CongestionMap&) const = default;

private:
  int to_cell(Nm v) const {
    Nm q = v >= 0 ? (v + pitch_ / 2) / pitch_ : -((-v + pitch_ / 2 - 1) / pitch_);
    return static_cast<int>(q);
  }
  void push(std::vector<std::size_t>& out, int layer, int r, int c) const {
    int cc = c - min_col_;
    if (layer < 1 || layer > layers_ || r < 0 || r >= rows_ || cc < 0 || cc >= ncols_)
      throw LayoutError("segment leaves the routing grid");
    out.push_back((static_cast<std::size_t>(layer - 1) * rows_ + r) * ncols_ + cc);
  }

  int layers_ = 0, rows_ = 0, min_col_ = 0, ncols_ = 0;
  Nm pitch_ = 1000;
  int capacity_ = 4;
  std::vector<int> usage_;
};

struct RoutingIssue {
  std::string net;
  std::string reason;
  bool operator==(const RoutingIssue&) const = default;
};

/// Full pre-split geometry of a design.
struct RoutedLayout {
  std::shared_ptr<const Netlist> netlist;
  Placement placement;
  LayerStack stack;
  RouterConfig config;
  std::uint64_t seed = 0;
  std::vector<NetRoute> routes;  ///< indexed like netlist->nets()
  std::vector<DummyStub> stubs;
  CongestionMap congestion;
  std::vector<RoutingIssue> overflow_nets;

  const Netlist& nl() const { return *netlist; }
  bool legal() const { return congestion.overflow() == 0; }
  const NetRoute& route(std::string_view net) const { return routes[nl().net_index(net)]; }

  /// Driver pin first, then one pin per sink.
  std::vector<Point> pins(int net) const {
    const Net& n = nl().nets()[net];
    std::vector<Point> out;
    out.push_back(n.is_primary_input()
                      ? placement.center(placement.input_terminals[n.input_index])
                      : placement.center(placement.gate_sites[n.driver_gate]));
    for (const Sink& s : n.sinks)
      out.push_back(s.is_primary_output() ? placement.center(placement.output_terminals[s.output])
                                          : placement.center(placement.gate_sites[s.gate]));
    return out;
  }

  /// Geometry electrically attached to a net: its route plus any dummy
  /// stubs hanging off its driver.
  NetRoute electrical_geometry(int net) const {
    NetRoute g = routes[net];
    for (const auto& st : stubs)
      if (st.net == nl().nets()[net].id) g.append(st.route);
    return g;
  }
};

// ---------------------------------------------------------------------------
// Geometric connectivity

/// Union-find over metal points of one net's geometry.
class GeometryGraph {
public:
  struct Key {
    int layer;
    Nm x, y;
    auto operator<=>(const Key&) const = default;
  };

  int point(int layer, Point p) {
    Key k{layer, p.x, p.y};
    auto [it, inserted] = ids_.emplace(k, static_cast<int>(keys_.size()));
    if (inserted) {
      keys_.push_back(k);
      parent_.push_back(static_cast<int>(parent_.size()));
    }
    return it->second;
  }
  void add_via(const Via& v) { unite(point(v.below, {v.x, v.y}), point(v.below + 1, {v.x, v.y})); }
  void add_segment(const Segment& s) {
    point(s.layer, {s.x1, s.y1});
    point(s.layer, {s.x2, s.y2});
    segments_.push_back(s);
  }
  void add(const NetRoute& r) {
    for (const auto& s : r.segments) add_segment(s);
    for (const auto& v : r.vias) add_via(v);
  }

  /// Resolves segment incidences; call after all elements were added.
  void close() {
    for (const auto& s : segments_) {
      int anchor = point(s.layer, {s.x1, s.y1});
      for (std::size_t i = 0; i < keys_.size(); ++i)
        if (keys_[i].layer == s.layer && s.contains({keys_[i].x, keys_[i].y}))
          unite(anchor, static_cast<int>(i));
    }
    segments_.clear();
  }

  int find(int a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }
  std::optional<int> lookup(int layer, Point p) const {
    auto it = ids_.find({layer, p.x, p.y});
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  const Key& key(int id) const { return keys_[id]; }
  std::size_t size() const noexcept { return keys_.size(); }

private:
  std::map<Key, int> ids_;
  std::vector<Key> keys_;
  std::vector<int> parent_;
  std::vector<Segment> segments_;
};

/// For each pin of `net`, the component id of its M1 landing in the net's
/// electrical geometry; pins without geometry get distinct ids unless
/// they coincide.
inline std::vector<int> pin_components(const RoutedLayout& layout, int net) {
  GeometryGraph g;
  auto pins = layout.pins(net);
  for (auto p : pins) g.point(1, p);
  g.add(layout.electrical_geometry(net));
  g.close();
  std::vector<int> comp;
  for (auto p : pins) comp.push_back(g.find(*g.lookup(1, p)));
  return comp;
}

/// Checks the route tree of one net: geometry connects every pin, the
/// logical branches form a spanning tree over the pins, and each segment
/// runs in its layer's preferred direction.
inline bool route_tree_ok(const RoutedLayout& layout, int net, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = layout.nl().nets()[net].id + ": " + msg;
    return false;
  };
  const NetRoute& r = layout.routes[net];
  auto pins = layout.pins(net);
  if (pins.size() <= 1) return true;
  auto comp = pin_components(layout, net);
  for (int c : comp)
    if (c != comp[0]) return fail("pins not connected");
  for (const auto& s : r.segments)
    if (s.horizontal() != layout.stack.horizontal(s.layer))
      return fail("segment against layer direction on " + layout.stack.name(s.layer));
  if (r.branches.size() != pins.size() - 1) return fail("branch count is not pins - 1");
  std::vector<int> parent(pins.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& b : r.branches) {
    int a = find(b.from_pin), c = find(b.to_pin);
    if (a == c) return fail("branches form a cycle");
    parent[a] = c;
  }
  return true;
}

/// Netlist realized by the geometry: each sink keeps its net only if the
/// net's geometry reaches it from the driver, otherwise it is tied to a
/// constant-0 source. Dummy stubs never add sinks.
inline Netlist extract_netlist(const RoutedLayout& layout) {
  const Netlist& nl = layout.nl();
  std::vector<Gate> gates = nl.gates();
  std::vector<std::string> outputs = nl.outputs();
  bool need_const = false;
  const std::string kConst = "__const0";
  for (std::size_t n = 0; n < nl.nets().size(); ++n) {
    const Net& net = nl.nets()[n];
    if (net.sinks.empty()) continue;
    auto comp = pin_components(layout, static_cast<int>(n));
    for (std::size_t i = 0; i < net.sinks.size(); ++i) {
      if (comp[i + 1] == comp[0]) continue;
      need_const = true;
      const Sink& s = net.sinks[i];
      if (s.is_primary_output()) outputs[s.output] = kConst;
      else gates[s.gate].inputs[s.pin] = kConst;
    }
  }
  if (need_const) gates.push_back(Gate{kConst, GateFunction::Const0, {}, kConst, 1});
  return Netlist::build(nl.name(), nl.inputs(), std::move(outputs), std::move(gates));
}

}  // namespace splitlift
