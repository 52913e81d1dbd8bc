#pragma once

// Grid router: star/MST decomposition, L-shaped branches, layer pairs
// chosen by branch length, and congestion-driven climbing.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "splitlift/layout.hpp"
#include "splitlift/placement.hpp"

namespace splitlift {

namespace detail {

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) { return splitmix(a ^ splitmix(b)); }

}  // namespace detail

/// Two-leg route from `a` to `b`. The first leg runs on `first_layer` in
/// that layer's direction, the second on `second_layer`. Via stacks join
/// `start_layer` at `a` and `end_layer` at `b` to the legs. Zero-length
/// legs are dropped.
inline NetRoute leg_route(const LayerStack& stack, Point a, Point b, int first_layer, int second_layer,
                          int start_layer = 1, int end_layer = 1) {
  struct Leg {
    Point from, to;
    int layer;
  };
  std::vector<Leg> legs;
  Point corner = stack.horizontal(first_layer) ? Point{b.x, a.y} : Point{a.x, b.y};
  if (corner != a) legs.push_back({a, corner, first_layer});
  if (corner != b) legs.push_back({corner, b, second_layer});
  NetRoute g;
  if (legs.empty()) {
    g.add_stack(a, start_layer, end_layer);
    return g;
  }
  int cur = start_layer;
  for (const Leg& leg : legs) {
    g.add_stack(leg.from, cur, leg.layer);
    g.add_segment({leg.layer, leg.from.x, leg.from.y, leg.to.x, leg.to.y});
    cur = leg.layer;
  }
  g.add_stack(b, cur, end_layer);
  return g;
}

/// L-route on the layer pair (pair, pair + 1) between two M1 points.
inline NetRoute pair_route(const LayerStack& stack, Point a, Point b, int pair, bool lower_first) {
  int lo = pair, hi = pair + 1;
  return lower_first ? leg_route(stack, a, b, lo, hi) : leg_route(stack, a, b, hi, lo);
}

/// First layer pair of the tier a branch of `sites` length belongs to.
inline int tier_first_pair(const RouterConfig& cfg, Nm sites) {
  if (sites < cfg.short_branch_sites) return 1;
  if (sites < cfg.long_branch_sites) return 4;
  return 7;
}

/// Edges `geom` would newly occupy on top of what `owner` already holds.
inline std::vector<std::size_t> new_edges(const CongestionMap& cm, const NetRoute& owner,
                                          const NetRoute& geom) {
  auto have = cm.edge_set(owner.segments), want = cm.edge_set(geom.segments);
  std::vector<std::size_t> out;
  std::set_difference(want.begin(), want.end(), have.begin(), have.end(), std::back_inserter(out));
  return out;
}

/// Appends geometry to `owner` and books its new congestion footprint.
inline void commit_geometry(RoutedLayout& layout, NetRoute& owner, const NetRoute& geom) {
  layout.congestion.add_edges(new_edges(layout.congestion, owner, geom), +1);
  owner.append(geom);
}

inline void release_geometry(RoutedLayout& layout, const NetRoute& geom) {
  layout.congestion.add(geom.segments, -1);
}

inline bool fits_with(const RoutedLayout& layout, const NetRoute& owner, const NetRoute& geom) {
  return layout.congestion.fits_edges(new_edges(layout.congestion, owner, geom));
}

/// Tries layer pairs first_pair..last_pair (both orientations each) and
/// returns the first geometry that fits next to `owner`'s own usage.
inline std::optional<NetRoute> find_fit(const RoutedLayout& layout, const NetRoute& owner, Point a, Point b,
                                        int first_pair, int last_pair, bool lower_first) {
  for (int pair = first_pair; pair <= last_pair; ++pair) {
    for (bool lf : {lower_first, !lower_first}) {
      NetRoute g = pair_route(layout.stack, a, b, pair, lf);
      if (fits_with(layout, owner, g)) return g;
      if (a.x == b.x || a.y == b.y) break;  // both orientations coincide
    }
  }
  return std::nullopt;
}

/// Recomputes congestion from scratch out of routes and stubs.
inline void rebuild_congestion(RoutedLayout& layout) {
  layout.congestion.clear();
  for (const auto& r : layout.routes) layout.congestion.add(r.segments, +1);
  for (const auto& st : layout.stubs) layout.congestion.add(st.route.segments, +1);
}

/// Pin-to-pin logical tree: a star from the driver for fanout <= 3,
/// otherwise a rectilinear minimum spanning tree (Prim, lowest index wins
/// ties).
inline std::vector<Branch> net_topology(const std::vector<Point>& pins) {
  std::vector<Branch> out;
  const int n = static_cast<int>(pins.size());
  if (n <= 1) return out;
  if (n - 1 <= 3) {
    for (int i = 1; i < n; ++i) out.push_back({0, i});
    return out;
  }
  std::vector<char> in_tree(n, 0);
  std::vector<Nm> best(n, std::numeric_limits<Nm>::max());
  std::vector<int> parent(n, 0);
  in_tree[0] = 1;
  for (int i = 1; i < n; ++i) best[i] = manhattan(pins[0], pins[i]);
  for (int step = 1; step < n; ++step) {
    int pick = -1;
    for (int i = 1; i < n; ++i)
      if (!in_tree[i] && (pick < 0 || best[i] < best[pick])) pick = i;
    in_tree[pick] = 1;
    out.push_back({parent[pick], pick});
    for (int i = 1; i < n; ++i)
      if (!in_tree[i] && manhattan(pins[pick], pins[i]) < best[i]) {
        best[i] = manhattan(pins[pick], pins[i]);
        parent[i] = pick;
      }
  }
  return out;
}

inline bool orientation_bit(std::uint64_t seed, std::size_t net, std::size_t branch) {
  return detail::hash_combine(detail::hash_combine(seed, net), branch) & 1u;
}

/// Routes one 2-point branch by the length rule; on exhaustion it is put on
/// the top pair anyway and the net is reported as overflowing.
inline NetRoute route_branch(RoutedLayout& layout, int net, Point a, Point b, bool lower_first) {
  const NetRoute& owner = layout.routes[net];
  const Nm sites = manhattan(a, b) / layout.placement.site_pitch;
  const int top_pair = layout.stack.top() - 1;
  int first = std::min(tier_first_pair(layout.config, sites), top_pair);
  if (auto g = find_fit(layout, owner, a, b, first, top_pair, lower_first)) return *g;
  layout.overflow_nets.push_back({layout.nl().nets()[net].id, "capacity exhausted at top layer pair"});
  return pair_route(layout.stack, a, b, top_pair, lower_first);
}

inline void route_net(RoutedLayout& layout, int net) {
  auto pins = layout.pins(net);
  NetRoute& r = layout.routes[net];
  r.branches = net_topology(pins);
  for (std::size_t b = 0; b < r.branches.size(); ++b) {
    const Branch br = r.branches[b];
    bool lf = orientation_bit(layout.seed, net, b);
    NetRoute g = route_branch(layout, net, pins[br.from_pin], pins[br.to_pin], lf);
    commit_geometry(layout, r, g);
  }
}

/// Removes a net's route and its congestion footprint.
inline void rip_up(RoutedLayout& layout, int net) {
  release_geometry(layout, layout.routes[net]);
  layout.routes[net] = NetRoute{};
}

inline RoutedLayout make_empty_layout(std::shared_ptr<const Netlist> nl, Placement placement,
                                      LayerStack stack, std::uint64_t seed, RouterConfig cfg = {}) {
  RoutedLayout layout;
  layout.netlist = std::move(nl);
  layout.placement = std::move(placement);
  layout.stack = std::move(stack);
  layout.config = cfg;
  layout.seed = seed;
  layout.routes.assign(layout.nl().nets().size(), NetRoute{});
  layout.congestion = CongestionMap(layout.stack.size(), std::max(layout.placement.rows, 1),
                                    layout.placement.min_col(), layout.placement.max_col(),
                                    layout.placement.site_pitch, cfg.edge_capacity);
  return layout;
}

/// Routes every net in index order. Deterministic per seed.
inline RoutedLayout route(std::shared_ptr<const Netlist> nl, Placement placement, LayerStack stack,
                          std::uint64_t seed, RouterConfig cfg = {}) {
  RoutedLayout layout = make_empty_layout(std::move(nl), std::move(placement), std::move(stack), seed, cfg);
  for (std::size_t n = 0; n < layout.routes.size(); ++n) route_net(layout, static_cast<int>(n));
  for (auto& r : layout.routes) r.canonicalize();
  return layout;
}

/// Vias per adjacent layer pair, keyed by the lower layer (4 -> V45).
inline std::map<int, long> via_count_per_layer(const RoutedLayout& layout) {
  std::map<int, long> out;
  for (int l = 1; l < layout.stack.size(); ++l) out[l] = 0;
  for (std::size_t n = 0; n < layout.routes.size(); ++n)
    for (const Via& v : layout.electrical_geometry(static_cast<int>(n)).vias) ++out[v.below];
  return out;
}

inline long total_vias(const RoutedLayout& layout) {
  long total = 0;
  for (std::size_t n = 0; n < layout.routes.size(); ++n)
    total += static_cast<long>(layout.electrical_geometry(static_cast<int>(n)).vias.size());
  return total;
}

/// Highest layer used by a net's route (0 if unrouted).
inline int topmost_layer(const RoutedLayout& layout, std::string_view net) {
  return layout.route(net).topmost_layer();
}

}  // namespace splitlift
