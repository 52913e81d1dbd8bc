#pragma once

// Toy-scale standard-cell placement: breadth-first greedy clustering from
// the primary inputs followed by seeded HPWL-reducing swaps.

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "splitlift/layout.hpp"
#include "splitlift/netlist.hpp"

namespace splitlift {

class PlacementError : public LayoutError {
public:
  using LayoutError::LayoutError;
};

struct PlaceOptions {
  double target_utilization = 0.7;
  std::uint64_t seed = 42;
  int swap_passes = 20;  ///< swap attempts per gate
  int swap_radius = 4;   ///< sites
  int rows = 0;          ///< force grid size when both rows and cols > 0
  int cols = 0;
  Nm site_pitch = 1000;
};

namespace detail {

inline SiteCoord pin_site(const Placement& p, const Netlist& nl, int net, int pin) {
  const Net& n = nl.nets()[net];
  if (pin == 0)
    return n.is_primary_input() ? p.input_terminals[n.input_index] : p.gate_sites[n.driver_gate];
  const Sink& s = n.sinks[pin - 1];
  return s.is_primary_output() ? p.output_terminals[s.output] : p.gate_sites[s.gate];
}

inline Nm hpwl_sites(const Placement& p, const Netlist& nl, int net) {
  const Net& n = nl.nets()[net];
  int rmin = std::numeric_limits<int>::max(), rmax = std::numeric_limits<int>::min();
  int cmin = rmin, cmax = rmax;
  for (std::size_t i = 0; i <= n.sinks.size(); ++i) {
    SiteCoord s = pin_site(p, nl, net, static_cast<int>(i));
    rmin = std::min(rmin, s.row);
    rmax = std::max(rmax, s.row);
    cmin = std::min(cmin, s.col);
    cmax = std::max(cmax, s.col);
  }
  return static_cast<Nm>(rmax - rmin) + (cmax - cmin);
}

/// Terminal columns: up to `rows` terminals per column, evenly spread.
inline std::vector<SiteCoord> terminal_sites(std::size_t count, int rows, int first_col, int step) {
  std::vector<SiteCoord> out;
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t column = k / rows, idx = k % rows;
    std::size_t in_col = std::min<std::size_t>(rows, count - column * rows);
    out.push_back({static_cast<int>(idx * rows / in_col),
                   first_col + step * static_cast<int>(column)});
  }
  return out;
}

}  // namespace detail

/// Half-perimeter of the pin bounding box of `net`, in nm.
inline Nm hpwl(const Placement& p, const Netlist& nl, int net) {
  return detail::hpwl_sites(p, nl, net) * p.site_pitch;
}

inline Nm total_hpwl(const Placement& p, const Netlist& nl) {
  Nm total = 0;
  for (std::size_t n = 0; n < nl.nets().size(); ++n) total += hpwl(p, nl, static_cast<int>(n));
  return total;
}

/// Greedy constructive placement without the swap phase.
inline Placement place_greedy(const Netlist& nl, const PlaceOptions& opt) {
  if (!(opt.target_utilization > 0.0 && opt.target_utilization <= 0.85))
    throw PlacementError("target utilization must lie in (0, 0.85]");
  const std::size_t n = nl.gates().size();
  Placement p;
  p.site_pitch = opt.site_pitch;
  if (opt.rows > 0 && opt.cols > 0) {
    p.rows = opt.rows;
    p.cols = opt.cols;
    if (static_cast<std::size_t>(p.rows) * p.cols < n)
      throw PlacementError("grid " + std::to_string(p.rows) + "x" + std::to_string(p.cols) +
                           " too small for " + std::to_string(n) + " gates");
  } else {
    auto sites = static_cast<std::size_t>(std::ceil(std::max<std::size_t>(n, 1) / opt.target_utilization - 1e-9));
    p.cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(sites)) - 1e-9));
    p.rows = static_cast<int>((sites + p.cols - 1) / p.cols);
  }
  p.utilization = static_cast<double>(n) / (static_cast<double>(p.rows) * p.cols);
  p.input_terminals = detail::terminal_sites(nl.inputs().size(), p.rows, -1, -1);
  p.output_terminals = detail::terminal_sites(nl.outputs().size(), p.rows, p.cols, 1);
  p.gate_sites.assign(n, SiteCoord{-1, -1});

  // Breadth-first order from the primary inputs.
  std::vector<int> order;
  std::vector<char> queued(n, 0);
  std::deque<int> queue;
  for (const auto& in : nl.inputs())
    for (const Sink& s : nl.net(in).sinks)
      if (!s.is_primary_output() && !queued[s.gate]) {
        queued[s.gate] = 1;
        queue.push_back(s.gate);
      }
  auto drain = [&] {
    while (!queue.empty()) {
      int g = queue.front();
      queue.pop_front();
      order.push_back(g);
      for (int f : nl.fanout_gates(g))
        if (!queued[f]) {
          queued[f] = 1;
          queue.push_back(f);
        }
    }
  };
  drain();
  for (std::size_t g = 0; g < n; ++g)
    if (!queued[g]) {
      queued[g] = 1;
      queue.push_back(static_cast<int>(g));
      drain();
    }

  std::vector<char> used(static_cast<std::size_t>(p.rows) * p.cols, 0);
  for (int g : order) {
    double sr = 0, sc = 0;
    int cnt = 0;
    for (std::size_t pin = 0; pin < nl.gates()[g].inputs.size(); ++pin) {
      const Net& in = nl.nets()[nl.input_net(g, static_cast<int>(pin))];
      SiteCoord s = in.is_primary_input() ? p.input_terminals[in.input_index] : p.gate_sites[in.driver_gate];
      if (s.row < 0) continue;
      sr += s.row;
      sc += s.col;
      ++cnt;
    }
    double tr = cnt ? sr / cnt : 0.0, tc = cnt ? sc / cnt : 0.0;
    int r0 = std::clamp(static_cast<int>(std::lround(tr)), 0, p.rows - 1);
    int c0 = std::clamp(static_cast<int>(std::lround(tc)), 0, p.cols - 1);
    SiteCoord best{-1, -1};
    double best_d = std::numeric_limits<double>::max();
    for (int ring = 0; ring <= p.rows + p.cols; ++ring) {
      if (best.row >= 0 && ring > best_d + 1) break;
      for (int r = r0 - ring; r <= r0 + ring; ++r)
        for (int c = c0 - ring; c <= c0 + ring; ++c) {
          if (std::max(std::abs(r - r0), std::abs(c - c0)) != ring) continue;
          if (r < 0 || c < 0 || r >= p.rows || c >= p.cols || used[r * p.cols + c]) continue;
          double d = std::abs(r - tr) + std::abs(c - tc);
          if (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && SiteCoord{r, c} < best)) {
            best_d = d;
            best = {r, c};
          }
        }
    }
    used[best.row * p.cols + best.col] = 1;
    p.gate_sites[g] = best;
  }
  return p;
}

/// Seeded local moves/swaps, accepted only when total HPWL strictly drops.
inline void improve_placement(Placement& p, const Netlist& nl, std::uint64_t seed, int passes,
                              int radius) {
  const int n = static_cast<int>(nl.gates().size());
  if (n == 0 || passes <= 0) return;
  std::vector<int> occupant(static_cast<std::size_t>(p.rows) * p.cols, -1);
  for (int g = 0; g < n; ++g) occupant[p.gate_sites[g].row * p.cols + p.gate_sites[g].col] = g;
  std::vector<std::vector<int>> incident(n);
  for (int g = 0; g < n; ++g) {
    incident[g].push_back(nl.output_net(g));
    for (std::size_t pin = 0; pin < nl.gates()[g].inputs.size(); ++pin)
      incident[g].push_back(nl.input_net(g, static_cast<int>(pin)));
  }
  std::mt19937_64 rng(seed);
  auto draw = [&](std::uint64_t bound) { return static_cast<int>(rng() % bound); };
  auto cost = [&](int a, int b) {
    std::vector<int> nets = incident[a];
    if (b >= 0) nets.insert(nets.end(), incident[b].begin(), incident[b].end());
    std::sort(nets.begin(), nets.end());
    nets.erase(std::unique(nets.begin(), nets.end()), nets.end());
    Nm total = 0;
    for (int net : nets) total += detail::hpwl_sites(p, nl, net);
    return total;
  };
  const long iterations = static_cast<long>(passes) * n;
  for (long it = 0; it < iterations; ++it) {
    int g = draw(n);
    SiteCoord from = p.gate_sites[g];
    SiteCoord to{from.row + draw(2 * radius + 1) - radius, from.col + draw(2 * radius + 1) - radius};
    if (to.row < 0 || to.col < 0 || to.row >= p.rows || to.col >= p.cols || to == from) continue;
    int h = occupant[to.row * p.cols + to.col];
    Nm before = cost(g, h);
    p.gate_sites[g] = to;
    if (h >= 0) p.gate_sites[h] = from;
    if (cost(g, h) < before) {
      occupant[to.row * p.cols + to.col] = g;
      occupant[from.row * p.cols + from.col] = h;
    } else {
      p.gate_sites[g] = from;
      if (h >= 0) p.gate_sites[h] = to;
    }
  }
}

/// Deterministic for a given seed.
inline Placement place(const Netlist& nl, const PlaceOptions& opt = {}) {
  Placement p = place_greedy(nl, opt);
  improve_placement(p, nl, opt.seed, opt.swap_passes, opt.swap_radius);
  return p;
}

}  // namespace splitlift
