#pragma once

// Reconnection attacks on a FEOL view: nearest-driver proximity, a
// min-cost-flow attack with direction, load and acyclicity hints, and an
// exhaustive oracle for small instances. None of them sees BEOL data.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "splitlift/min_cost_flow.hpp"
#include "splitlift/netlist.hpp"
#include "splitlift/split_view.hpp"

namespace splitlift {

class AttackError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct AttackConfig {
  double lambda_dir = 2.0;   ///< cost factor for sinks whose wire points away from the driver
  int fanout_unit = 4;       ///< sinks per drive class unit
  int relax_rounds = 3;      ///< +1 capacity per round when sinks stay unassigned
  int loop_repair_cap = 50;  ///< loop repairs before giving up; in exact mode each expanded search node is one repair
  std::optional<Nm> max_pair_distance;
  int candidate_limit = 64;  ///< cheapest drivers kept per sink; 0 keeps all
  int exact_limit = 32;      ///< sink pins up to which loop repair is exact
};

inline constexpr int kUnassigned = -1;

struct InferredNetlist {
  std::string method;
  /// Indexed by open pin id: the driver pin chosen for a sink-side pin,
  /// kUnassigned otherwise.
  std::vector<int> connection;
  std::int64_t total_cost = 0;
  int relax_round = 0;
  int solves = 0;
  int loop_repairs = 0;
  bool iteration_cap_hit = false;
  std::vector<std::string> warnings;

  std::size_t assigned() const {
    return static_cast<std::size_t>(std::count_if(connection.begin(), connection.end(), [](int c) { return c >= 0; }));
  }
  bool operator==(const InferredNetlist&) const = default;
};

namespace detail {

struct AttackInstance {
  std::vector<int> drivers;  ///< open pin ids, driver side
  std::vector<int> sinks;    ///< open pin ids, sink side
};

inline AttackInstance instance_of(const FeolView& f) {
  AttackInstance in;
  for (const auto& op : f.open_pins) (op.polarity == Polarity::DriverSide ? in.drivers : in.sinks).push_back(op.id);
  return in;
}

inline int driver_gate_of(const FeolView& f, int pin) {
  const auto& d = f.fragments[f.open_pins[pin].fragment].driver;
  return d ? d->gate : -1;
}

/// Edge cost under the hint model, or nullopt when the pair is excluded.
inline std::optional<std::int64_t> pair_cost(const FeolView& f, int dpin, int spin, const AttackConfig& cfg) {
  const OpenPin& d = f.open_pins[dpin];
  const OpenPin& s = f.open_pins[spin];
  const Nm dist = manhattan(d.at, s.at);
  if (cfg.max_pair_distance && dist > *cfg.max_pair_distance) return std::nullopt;
  double penalty = 1.0;
  if (s.dangling_direction) {
    const Nm dot = s.dangling_direction->dx * (d.at.x - s.at.x) + s.dangling_direction->dy * (d.at.y - s.at.y);
    if (dot < 0) penalty = cfg.lambda_dir;
  }
  return static_cast<std::int64_t>(std::llround(static_cast<double>(dist) * penalty));
}

inline int capacity_of(const FeolView& f, int dpin, const AttackConfig& cfg, int round) {
  return f.open_pins[dpin].drive_class * cfg.fanout_unit + round;
}

/// Gate-level edge (driver gate -> sink gate).
using GateEdge = std::pair<int, int>;

/// Gate graph seen by the attacker: FEOL fragments plus the assignment.
/// Returns the assignment-induced edges of one cycle, empty if acyclic.
/// Edges in `skip` are treated as absent.
inline std::vector<GateEdge> find_cycle(const FeolView& f, const std::vector<std::pair<int, int>>& assignment,
                                        const std::set<GateEdge>& skip = {}) {
  const int n = static_cast<int>(f.gates.size());
  std::vector<std::vector<std::pair<int, bool>>> adj(n);  // (to, induced)
  std::set<GateEdge> known;
  for (const auto& fr : f.fragments)
    if (fr.driver && fr.driver->gate >= 0)
      for (const Sink& s : fr.sinks)
        if (!s.is_primary_output() && known.insert({fr.driver->gate, s.gate}).second)
          adj[fr.driver->gate].push_back({s.gate, false});
  std::set<GateEdge> induced;
  for (auto [dp, sp] : assignment) {
    int dg = driver_gate_of(f, dp);
    if (dg < 0) continue;
    for (const Sink& s : f.fragments[f.open_pins[sp].fragment].sinks) {
      GateEdge e{dg, s.gate};
      if (s.is_primary_output() || known.count(e) || skip.count(e) || !induced.insert(e).second) continue;
      adj[dg].push_back({s.gate, true});
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  // Iterative DFS with colors; on a back edge, walk the stack.
  std::vector<int> color(n, 0), parent(n, -1);
  std::vector<char> parent_induced(n, 0);
  for (int root = 0; root < n; ++root) {
    if (color[root]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    color[root] = 1;
    while (!stack.empty()) {
      auto& [u, i] = stack.back();
      if (i == adj[u].size()) {
        color[u] = 2;
        stack.pop_back();
        continue;
      }
      auto [v, ind] = adj[u][i++];
      if (color[v] == 0) {
        color[v] = 1;
        parent[v] = u;
        parent_induced[v] = ind;
        stack.push_back({v, 0});
      } else if (color[v] == 1) {
        std::vector<GateEdge> cyc;
        if (ind) cyc.push_back({u, v});
        for (int w = u; w != v; w = parent[w])
          if (parent_induced[w]) cyc.push_back({parent[w], w});
        return cyc;
      }
    }
  }
  return {};
}

/// Gate edges that close a loop by themselves: the sink gate already
/// reaches the driver gate through FEOL wiring, or is the driver.
inline std::set<GateEdge> static_loop_edges(const FeolView& f) {
  const int n = static_cast<int>(f.gates.size());
  std::vector<std::vector<int>> adj(n);
  for (const auto& fr : f.fragments)
    if (fr.driver && fr.driver->gate >= 0)
      for (const Sink& s : fr.sinks)
        if (!s.is_primary_output()) adj[fr.driver->gate].push_back(s.gate);
  std::set<int> drivers;
  std::set<int> sinks;
  for (const auto& op : f.open_pins) {
    const Fragment& fr = f.fragments[op.fragment];
    if (op.polarity == Polarity::DriverSide && fr.driver && fr.driver->gate >= 0) drivers.insert(fr.driver->gate);
    if (op.polarity == Polarity::SinkSide)
      for (const Sink& s : fr.sinks)
        if (!s.is_primary_output()) sinks.insert(s.gate);
  }
  std::set<GateEdge> out;
  for (int s : sinks) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      if (drivers.count(u)) out.insert({u, s});
      for (int v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
    }
  }
  return out;
}

/// Like find_cycle, but returns a cycle with the fewest assignment-induced
/// edges, which keeps branching narrow.
inline std::vector<GateEdge> find_short_cycle(const FeolView& f, const std::vector<std::pair<int, int>>& assignment) {
  if (find_cycle(f, assignment).empty()) return {};
  const int n = static_cast<int>(f.gates.size());
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (to, weight)
  std::set<GateEdge> known;
  for (const auto& fr : f.fragments)
    if (fr.driver && fr.driver->gate >= 0)
      for (const Sink& s : fr.sinks)
        if (!s.is_primary_output() && known.insert({fr.driver->gate, s.gate}).second)
          adj[fr.driver->gate].push_back({s.gate, 0});
  std::set<GateEdge> induced;
  for (auto [dp, sp] : assignment) {
    int dg = driver_gate_of(f, dp);
    if (dg < 0) continue;
    for (const Sink& s : f.fragments[f.open_pins[sp].fragment].sinks)
      if (!s.is_primary_output() && !known.count({dg, s.gate}) && induced.insert({dg, s.gate}).second)
        adj[dg].push_back({s.gate, 1});
  }
  std::vector<GateEdge> best;
  for (const auto& [u, v] : induced) {
    // 0-1 BFS from v back to u.
    std::vector<int> dist(n, std::numeric_limits<int>::max()), parent(n, -1);
    std::deque<int> dq{v};
    dist[v] = 0;
    while (!dq.empty()) {
      int x = dq.front();
      dq.pop_front();
      for (auto [y, w] : adj[x])
        if (dist[x] + w < dist[y]) {
          dist[y] = dist[x] + w;
          parent[y] = x;
          w ? dq.push_back(y) : dq.push_front(y);
        }
    }
    if (dist[u] == std::numeric_limits<int>::max()) continue;
    if (!best.empty() && static_cast<int>(best.size()) <= dist[u] + 1) continue;
    std::vector<GateEdge> cyc{{u, v}};
    for (int y = u; y != v; y = parent[y])
      if (induced.count({parent[y], y}) && !known.count({parent[y], y})) cyc.push_back({parent[y], y});
    best = std::move(cyc);
  }
  return best;
}

/// Whether assigning driver pin `dp` to sink pin `sp` would add a forbidden
/// gate edge.
inline bool touches_forbidden(const FeolView& f, int dp, int sp, const std::set<GateEdge>& forbidden) {
  if (forbidden.empty()) return false;
  int dg = driver_gate_of(f, dp);
  if (dg < 0) return false;
  for (const Sink& s : f.fragments[f.open_pins[sp].fragment].sinks)
    if (!s.is_primary_output() && forbidden.count({dg, s.gate})) return true;
  return false;
}

struct FlowSolution {
  std::vector<std::pair<int, int>> pairs;  ///< (driver pin, sink pin)
  int flow = 0;
  std::int64_t cost = 0;
};

/// Upper bound on how many sink pins a loop-free assignment can serve.
/// Within each strongly connected part of the "could drive" gate graph the
/// gates take some topological order, and a sink pin whose drivers all come
/// later in that order must stay open.
inline int loop_free_bound(const FeolView& f, const AttackInstance& in, const AttackConfig& cfg,
                           const std::set<GateEdge>& forbidden) {
  const int n = static_cast<int>(f.gates.size());
  auto sink_gates = [&](int sp) {
    std::vector<int> g;
    for (const Sink& s : f.fragments[f.open_pins[sp].fragment].sinks)
      if (!s.is_primary_output()) g.push_back(s.gate);
    return g;
  };
  // Allowed drivers per sink pin (gate id, or -1 for a primary input).
  std::vector<std::vector<int>> options(in.sinks.size());
  std::vector<std::set<int>> adj(n);
  for (std::size_t s = 0; s < in.sinks.size(); ++s)
    for (int dp : in.drivers) {
      if (touches_forbidden(f, dp, in.sinks[s], forbidden) || !pair_cost(f, dp, in.sinks[s], cfg)) continue;
      int dg = driver_gate_of(f, dp);
      options[s].push_back(dg);
      if (dg >= 0)
        for (int h : sink_gates(in.sinks[s])) adj[dg].insert(h);
    }
  // Tarjan's SCC.
  std::vector<int> comp(n, -1), low(n), idx(n, -1), stack;
  std::vector<char> on(n, 0);
  int counter = 0, comps = 0;
  std::function<void(int)> dfs = [&](int u) {
    idx[u] = low[u] = counter++;
    stack.push_back(u);
    on[u] = 1;
    for (int v : adj[u]) {
      if (idx[v] < 0) {
        dfs(v);
        low[u] = std::min(low[u], low[v]);
      } else if (on[v]) {
        low[u] = std::min(low[u], idx[v]);
      }
    }
    if (low[u] == idx[u]) {
      for (;;) {
        int w = stack.back();
        stack.pop_back();
        on[w] = 0;
        comp[w] = comps;
        if (w == u) break;
      }
      ++comps;
    }
  };
  for (int g = 0; g < n; ++g)
    if (idx[g] < 0) dfs(g);
  // Sink pins with no option at all stay open once; the rest are charged
  // per part. For a part small enough, try every topological order by DP over
  // subsets: placing gate g while `rest` (g included) is still unplaced
  // forces open its sink pins whose drivers all lie in `rest` and that touch
  // no gate placed earlier. Larger parts charge only the best first gate.
  int open = 0;
  std::vector<std::vector<int>> members(comps);
  for (int g = 0; g < n; ++g) members[comp[g]].push_back(g);
  std::vector<std::vector<int>> touching(n);
  for (std::size_t s = 0; s < in.sinks.size(); ++s) {
    if (options[s].empty()) {
      ++open;
      continue;
    }
    for (int g : sink_gates(in.sinks[s])) touching[g].push_back(static_cast<int>(s));
  }
  constexpr int kSubsetLimit = 12;
  for (const auto& part : members) {
    const int m = static_cast<int>(part.size());
    std::vector<int> local(n, -1);
    for (int k = 0; k < m; ++k) local[part[k]] = k;
    // Bit mask of part members a sink pin's drivers or gates fall on; -1 when
    // something lies outside the part.
    auto mask_of = [&](const std::vector<int>& gs) {
      long long mask = 0;
      for (int g : gs) {
        if (g < 0 || local[g] < 0) return -1LL;
        mask |= 1LL << local[g];
      }
      return mask;
    };
    if (m > kSubsetLimit) {
      int least = std::numeric_limits<int>::max();
      for (int g : part) {
        int stuck = 0;
        for (int s : touching[g])
          if (mask_of(options[s]) >= 0) ++stuck;
        least = std::min(least, stuck);
      }
      open += least;
      continue;
    }
    const long long full = (1LL << m) - 1;
    std::vector<int> best(static_cast<std::size_t>(full) + 1, 0);
    for (long long rest = 1; rest <= full; ++rest) {
      int value = std::numeric_limits<int>::max();
      for (int k = 0; k < m; ++k) {
        if (!(rest >> k & 1)) continue;
        int stuck = 0;
        for (int s : touching[part[k]]) {
          long long drivers = mask_of(options[s]);
          if (drivers < 0 || (drivers & ~rest)) continue;
          auto gs = sink_gates(in.sinks[s]);
          bool placed = std::any_of(gs.begin(), gs.end(), [&](int h) { return local[h] >= 0 && !(rest >> local[h] & 1); });
          if (!placed) ++stuck;
        }
        value = std::min(value, stuck + best[static_cast<std::size_t>(rest & ~(1LL << k))]);
      }
      best[static_cast<std::size_t>(rest)] = value;
    }
    open += best[static_cast<std::size_t>(full)];
  }
  return static_cast<int>(in.sinks.size()) - open;
}

/// Min-cost max-flow assignment without pairs that add a forbidden edge.
inline FlowSolution solve_assignment(const FeolView& f, const AttackInstance& in, const AttackConfig& cfg, int round,
                                     const std::set<GateEdge>& forbidden,
                                     int limit = std::numeric_limits<int>::max()) {
  const int D = static_cast<int>(in.drivers.size()), S = static_cast<int>(in.sinks.size());
  MinCostFlow mcf(D + S + 2);
  const int src = D + S, dst = D + S + 1;
  for (int d = 0; d < D; ++d) mcf.add_edge(src, d, capacity_of(f, in.drivers[d], cfg, round), 0);
  std::vector<std::tuple<int, int, int>> arcs;  // (edge id, d, s)
  for (int s = 0; s < S; ++s) {
    std::vector<std::pair<std::int64_t, int>> cand;
    for (int d = 0; d < D; ++d) {
      if (touches_forbidden(f, in.drivers[d], in.sinks[s], forbidden)) continue;
      if (auto c = pair_cost(f, in.drivers[d], in.sinks[s], cfg)) cand.push_back({*c, d});
    }
    if (cfg.candidate_limit > 0 && static_cast<int>(cand.size()) > cfg.candidate_limit) {
      // Keep the cheapest pairs plus the plain nearest driver, so the
      // proximity answer always stays feasible.
      const Point ps = f.open_pins[in.sinks[s]].at;
      auto near_key = [&](int d) {
        const Point pd = f.open_pins[in.drivers[d]].at;
        return std::tuple(manhattan(pd, ps), pd.x, pd.y, in.drivers[d]);
      };
      int nearest = std::min_element(cand.begin(), cand.end(), [&](auto& a, auto& b) {
                      return near_key(a.second) < near_key(b.second);
                    })->second;
      std::stable_sort(cand.begin(), cand.end());
      bool kept = false;
      for (int i = 0; i < cfg.candidate_limit; ++i) kept = kept || cand[i].second == nearest;
      auto extra = std::find_if(cand.begin() + cfg.candidate_limit, cand.end(), [&](auto& c) { return c.second == nearest; });
      if (!kept) std::iter_swap(cand.begin() + cfg.candidate_limit - 1, extra);
      cand.resize(cfg.candidate_limit);
      std::sort(cand.begin(), cand.end(), [](auto& a, auto& b) { return a.second < b.second; });
    }
    for (auto [c, d] : cand) arcs.push_back({mcf.add_edge(d, D + s, 1, c), d, s});
    mcf.add_edge(D + s, dst, 1, 0);
  }
  FlowSolution sol;
  std::tie(sol.flow, sol.cost) = mcf.solve(src, dst, limit);
  for (auto [id, d, s] : arcs)
    if (mcf.flow(id) > 0) sol.pairs.push_back({in.drivers[d], in.sinks[s]});
  return sol;
}

}  // namespace detail

/// Each sink pin takes its Manhattan-nearest driver pin; ties go to the
/// lower x, then lower y, then lower pin id.
inline InferredNetlist proximity_attack(const FeolView& f) {
  InferredNetlist out;
  out.method = "proximity";
  out.connection.assign(f.open_pins.size(), kUnassigned);
  auto in = detail::instance_of(f);
  if (in.drivers.empty() && !in.sinks.empty()) {
    out.warnings.push_back("no driver-side open pins; all sinks unassigned");
    return out;
  }
  for (int s : in.sinks) {
    int best = -1;
    for (int d : in.drivers) {
      if (best < 0) {
        best = d;
        continue;
      }
      const Point pd = f.open_pins[d].at, pb = f.open_pins[best].at, ps = f.open_pins[s].at;
      auto key = [&](Point p, int id) { return std::tuple(manhattan(p, ps), p.x, p.y, id); };
      if (key(pd, d) < key(pb, best)) best = d;
    }
    out.connection[s] = best;
    out.total_cost += manhattan(f.open_pins[best].at, f.open_pins[s].at);
  }
  return out;
}

/// Total cost of an assignment under the flow attack's cost model;
/// nullopt if it uses an excluded pair.
inline std::optional<std::int64_t> assignment_cost(const FeolView& f, const std::vector<int>& connection,
                                                   const AttackConfig& cfg = {}) {
  std::int64_t total = 0;
  for (std::size_t s = 0; s < connection.size(); ++s) {
    if (connection[s] < 0) continue;
    auto c = detail::pair_cost(f, connection[s], static_cast<int>(s), cfg);
    if (!c) return std::nullopt;
    total += *c;
  }
  return total;
}

/// Whether the assignment closes a combinational loop with the FEOL wiring.
inline bool assignment_has_loop(const FeolView& f, const std::vector<int>& connection) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t s = 0; s < connection.size(); ++s)
    if (connection[s] >= 0) pairs.push_back({connection[s], static_cast<int>(s)});
  return !detail::find_cycle(f, pairs).empty();
}

/// Min-cost assignment with capacity, direction and acyclicity hints.
inline InferredNetlist network_flow_attack(const FeolView& f, const AttackConfig& cfg = {}) {
  InferredNetlist out;
  out.method = "network-flow";
  out.connection.assign(f.open_pins.size(), kUnassigned);
  auto in = detail::instance_of(f);
  if (in.sinks.empty()) return out;
  if (in.drivers.empty()) {
    out.warnings.push_back("no driver-side open pins; all sinks unassigned");
    return out;
  }
  const bool exact = static_cast<int>(in.sinks.size()) <= cfg.exact_limit;
  // Pairs that would close a loop on their own never enter the model.
  const std::set<detail::GateEdge> base = detail::static_loop_edges(f);
  std::optional<detail::FlowSolution> best;
  for (int round = 0; round <= cfg.relax_rounds; ++round) {
    std::optional<detail::FlowSolution> found;
    std::optional<detail::FlowSolution> fallback;  // best loop-free partial seen
    bool capped = false;
    auto better = [](const detail::FlowSolution& a, const detail::FlowSolution& b) {
      return a.flow > b.flow || (a.flow == b.flow && a.cost < b.cost);
    };
    if (exact) {
      // Best-first branch and bound: a solution with a loop spawns one
      // child per induced edge of its shortest loop, with that edge banned.
      struct Node {
        detail::FlowSolution sol;
        std::set<detail::GateEdge> forbidden;
        std::size_t seq;
      };
      auto worse = [](const Node& a, const Node& b) {
        if (a.sol.flow != b.sol.flow) return a.sol.flow < b.sol.flow;
        if (a.sol.cost != b.sol.cost) return a.sol.cost > b.sol.cost;
        return a.seq > b.seq;
      };
      std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
      std::set<std::set<detail::GateEdge>> seen{base};
      std::size_t seq = 0;
      auto relax = [&](const std::set<detail::GateEdge>& forb) {
        return detail::solve_assignment(f, in, cfg, round, forb, detail::loop_free_bound(f, in, cfg, forb));
      };
      open.push({relax(base), base, seq++});
      ++out.solves;
      while (!open.empty()) {
        Node node = open.top();
        open.pop();
        auto cyc = detail::find_short_cycle(f, node.sol.pairs);
        if (cyc.empty()) {
          found = node.sol;
          break;
        }
        if (out.loop_repairs >= cfg.loop_repair_cap) {
          capped = true;
          break;
        }
        ++out.loop_repairs;
        for (const auto& e : cyc) {
          auto forb = node.forbidden;
          forb.insert(e);
          if (!seen.insert(forb).second) continue;
          ++out.solves;
          auto sol = relax(forb);
          if (detail::find_cycle(f, sol.pairs).empty() && (!fallback || better(sol, *fallback))) fallback = sol;
          open.push({std::move(sol), std::move(forb), seq++});
        }
      }
    } else {
      // Forbid one induced edge per detected cycle and re-solve.
      std::set<detail::GateEdge> forbidden = base;
      for (;;) {
        auto sol = detail::solve_assignment(f, in, cfg, round, forbidden);
        ++out.solves;
        std::set<detail::GateEdge> found_edges;
        for (;;) {
          auto cyc = detail::find_cycle(f, sol.pairs, found_edges);
          if (cyc.empty()) break;
          // Drop the longest induced edge of the cycle.
          found_edges.insert(*std::max_element(cyc.begin(), cyc.end()));
        }
        if (found_edges.empty()) {
          found = sol;
          break;
        }
        if (out.loop_repairs >= cfg.loop_repair_cap) {
          capped = true;
          break;
        }
        ++out.loop_repairs;
        forbidden.insert(found_edges.begin(), found_edges.end());
      }
    }
    if (capped && !found) {
      out.iteration_cap_hit = true;
      found = fallback;
    }
    if (found && (!best || better(*found, *best))) {
      best = found;
      out.relax_round = round;
    }
    if (best && best->flow == static_cast<int>(in.sinks.size())) break;
    if (out.iteration_cap_hit) break;
  }
  if (best) {
    for (auto [dp, sp] : best->pairs) out.connection[sp] = dp;
    out.total_cost = best->cost;
  }
  if (out.iteration_cap_hit) out.warnings.push_back("loop repair cap reached; returning best loop-free partial");
  if (out.assigned() < in.sinks.size()) out.warnings.push_back("some sink pins left unassigned");
  return out;
}

/// Exhaustive optimum under the flow attack's model, for at most 8 pins per
/// side. Among equal (assigned count, cost) the lexicographically smallest
/// assignment vector wins.
inline InferredNetlist brute_force_attack(const FeolView& f, const AttackConfig& cfg = {}) {
  auto in = detail::instance_of(f);
  if (in.drivers.size() > 8 || in.sinks.size() > 8)
    throw AttackError("brute force needs at most 8 pins per side, got " + std::to_string(in.drivers.size()) + "x" +
                      std::to_string(in.sinks.size()));
  InferredNetlist out;
  out.method = "brute-force";
  out.connection.assign(f.open_pins.size(), kUnassigned);
  const int D = static_cast<int>(in.drivers.size()), S = static_cast<int>(in.sinks.size());
  std::vector<std::vector<std::optional<std::int64_t>>> cost(S, std::vector<std::optional<std::int64_t>>(D));
  for (int s = 0; s < S; ++s)
    for (int d = 0; d < D; ++d) cost[s][d] = detail::pair_cost(f, in.drivers[d], in.sinks[s], cfg);

  for (int round = 0; round <= cfg.relax_rounds; ++round) {
    std::vector<int> cap(D);
    for (int d = 0; d < D; ++d) cap[d] = detail::capacity_of(f, in.drivers[d], cfg, round);
    std::vector<int> pick(S, -1), best_pick;
    int best_n = -1;
    std::int64_t best_cost = 0;
    std::function<void(int, int, std::int64_t)> dfs = [&](int s, int n, std::int64_t c) {
      if (n + (S - s) < best_n) return;
      if (s == S) {
        if (n > best_n || (n == best_n && c < best_cost)) {
          std::vector<std::pair<int, int>> pairs;
          for (int k = 0; k < S; ++k)
            if (pick[k] >= 0) pairs.push_back({in.drivers[pick[k]], in.sinks[k]});
          if (!detail::find_cycle(f, pairs).empty()) return;
          best_n = n;
          best_cost = c;
          best_pick = pick;
        }
        return;
      }
      for (int d = 0; d < D; ++d) {
        if (!cost[s][d] || cap[d] == 0) continue;
        --cap[d];
        pick[s] = d;
        dfs(s + 1, n + 1, c + *cost[s][d]);
        pick[s] = -1;
        ++cap[d];
      }
      dfs(s + 1, n, c);
    };
    dfs(0, 0, 0);
    out.relax_round = round;
    out.connection.assign(f.open_pins.size(), kUnassigned);
    for (int s = 0; s < S; ++s)
      if (best_pick[s] >= 0) out.connection[in.sinks[s]] = in.drivers[best_pick[s]];
    out.total_cost = best_cost;
    if (best_n == S) break;
  }
  return out;
}

struct Reconstruction {
  Netlist netlist;
  std::vector<std::string> unassigned_sinks;  ///< "gate/pin" or "output:name"
  int loops_broken = 0;
};

/// Builds the netlist an attacker would derive: FEOL fragments as seen,
/// cut fragments merged per the inferred connections, and every sink left
/// without a driver tied to a constant-0 source.
inline Reconstruction reconstruct_netlist(const FeolView& f, const InferredNetlist& inf) {
  const std::string kConst = "__const0";
  std::vector<Gate> gates;
  for (const auto& g : f.gates) gates.push_back({g.id, g.function, std::vector<std::string>(g.arity), g.id, g.drive_strength});
  std::vector<std::string> outputs(f.outputs.size());
  auto name_of = [&](const DriverRef& d) { return d.gate >= 0 ? f.gates[d.gate].id : f.inputs[d.input]; };
  // Inputs set through an inferred connection, for loop breaking.
  std::set<std::pair<int, int>> inferred_inputs;
  for (const auto& fr : f.fragments) {
    std::optional<DriverRef> drv = fr.driver;
    bool inferred = false;
    if (!drv) {
      for (int op : fr.open_pins) {
        if (f.open_pins[op].polarity != Polarity::SinkSide) continue;
        if (static_cast<std::size_t>(op) >= inf.connection.size()) continue;
        int dp = inf.connection[op];
        if (dp < 0) continue;
        if (f.open_pins[dp].polarity != Polarity::DriverSide)
          throw AttackError("sink pin " + std::to_string(op) + " mapped to a sink-side pin");
        drv = f.fragments[f.open_pins[dp].fragment].driver;
        inferred = true;
        break;
      }
    }
    for (const Sink& s : fr.sinks) {
      if (!drv) continue;
      if (s.is_primary_output()) outputs[s.output] = name_of(*drv);
      else {
        gates[s.gate].inputs[s.pin] = name_of(*drv);
        if (inferred) inferred_inputs.insert({s.gate, s.pin});
      }
    }
  }
  Reconstruction rec;
  bool need_const = false;
  for (auto& g : gates)
    for (std::size_t p = 0; p < g.inputs.size(); ++p)
      if (g.inputs[p].empty()) {
        g.inputs[p] = kConst;
        need_const = true;
        rec.unassigned_sinks.push_back(g.id + "/" + std::to_string(p));
      }
  for (std::size_t o = 0; o < outputs.size(); ++o)
    if (outputs[o].empty()) {
      outputs[o] = kConst;
      need_const = true;
      rec.unassigned_sinks.push_back("output:" + f.outputs[o]);
    }
  // Break any remaining cycles at an inferred input.
  std::map<std::string, int> index;
  for (std::size_t g = 0; g < gates.size(); ++g) index[gates[g].id] = static_cast<int>(g);
  for (;;) {
    const int n = static_cast<int>(gates.size());
    std::vector<int> color(n, 0);
    std::optional<std::pair<int, int>> cut;  // (gate, pin)
    std::vector<std::pair<int, int>> path;   // (gate, pin used to reach it)
    std::function<bool(int)> dfs = [&](int u) -> bool {
      color[u] = 1;
      for (std::size_t p = 0; p < gates[u].inputs.size(); ++p) {
        auto it = index.find(gates[u].inputs[p]);
        if (it == index.end()) continue;
        int v = it->second;
        path.push_back({u, static_cast<int>(p)});
        if (color[v] == 1) {
          // Cycle: path entries from v onward. Prefer an inferred input.
          for (auto rit = path.rbegin(); rit != path.rend(); ++rit) {
            if (inferred_inputs.count(*rit)) {
              cut = *rit;
              break;
            }
            if (rit->first == v) break;
          }
          if (!cut) cut = path.back();
          return true;
        }
        if (color[v] == 0 && dfs(v)) return true;
        path.pop_back();
      }
      color[u] = 2;
      return false;
    };
    bool any = false;
    for (int g = 0; g < n && !any; ++g)
      if (!color[g]) any = dfs(g);
    if (!any) break;
    gates[cut->first].inputs[cut->second] = kConst;
    need_const = true;
    ++rec.loops_broken;
  }
  if (need_const) gates.push_back(Gate{kConst, GateFunction::Const0, {}, kConst, 1});
  rec.netlist = Netlist::build(f.design, f.inputs, std::move(outputs), std::move(gates));
  return rec;
}

}  // namespace splitlift
