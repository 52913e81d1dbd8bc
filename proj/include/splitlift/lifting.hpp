#pragma once

// Wire lifting with elevating cells (ECs): HiFON/long-net lifting with
// defender-chosen open-pin distances (S12), short-net obfuscation with a
// dummy driver (S3), the single-EC naive baseline, and the budgeted flow.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "splitlift/layout.hpp"
#include "splitlift/layout_io.hpp"
#include "splitlift/placement.hpp"
#include "splitlift/ppa.hpp"
#include "splitlift/routing.hpp"

namespace splitlift {

class LiftError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NoCandidate : public LiftError {
public:
  using LiftError::LiftError;
};

enum class EcKind { Lift, Obfuscate };
enum class LiftStrategy { S12, S3, Naive };

inline std::string to_string(LiftStrategy s) {
  switch (s) {
  case LiftStrategy::S12: return "S12";
  case LiftStrategy::S3: return "S3";
  case LiftStrategy::Naive: return "NAIVE";
  }
  return "?";
}

inline LiftStrategy lift_strategy_from_string(std::string_view s) {
  if (s == "S12") return LiftStrategy::S12;
  if (s == "S3") return LiftStrategy::S3;
  if (s == "NAIVE") return LiftStrategy::Naive;
  throw LiftError("unknown strategy '" + std::string(s) + "'");
}

/// Device-free routing waypoint. An OBFUSCATE cell has a second pin for the
/// dummy driver one track next to the true pin.
struct ElevatingCell {
  std::string id;
  EcKind kind = EcKind::Lift;
  std::string net;
  int target_layer = 6;
  SiteCoord site;
  Point pin;
  std::optional<Point> dummy_pin;
  double annotated_load = 0.0;
  bool operator==(const ElevatingCell&) const = default;
};

struct LiftBudgets {
  double area_pct = 10.0;
  double power_pct = 10.0;
  double delay_pct = 15.0;
  bool operator==(const LiftBudgets&) const = default;
};

struct LiftEntry {
  std::string net;
  LiftStrategy strategy = LiftStrategy::S12;
  std::vector<ElevatingCell> ecs;
  std::optional<std::string> dummy_driver;
  bool operator==(const LiftEntry&) const = default;
};

struct SkippedNet {
  std::string net;
  std::string reason;
  bool operator==(const SkippedNet&) const = default;
};

struct LiftPlan {
  std::vector<LiftEntry> entries;
  LiftBudgets budgets;
  double ratio = 1.0;
  std::vector<SkippedNet> skipped;
  bool operator==(const LiftPlan&) const = default;
};

struct LiftOptions {
  int target_layer = 6;
  int ec_radius = 3;               ///< sites searched around the preferred EC site
  bool ec_random_in_bbox = false;  ///< sink ECs at random sites inside the pin bbox
  std::uint64_t seed = 42;
  std::optional<Nm> long_net_threshold_nm;  ///< default: median single-sink HPWL
  double chunk_fraction = 0.1;              ///< flow step as a fraction of all nets
  int dummy_radius_sites = 6;  ///< 0: dummy drivers from anywhere on the die
  bool use_s12 = true;
  bool use_s3 = true;
  double wire_cap_per_nm = 2e-4;
  double pin_cap = 1.0;
};

struct ProtectedLayout {
  RoutedLayout layout;
  LiftPlan plan;  ///< entries actually applied
  std::set<std::string> protected_nets;
  std::vector<std::string> warnings;
  PpaReport baseline_ppa;
  PpaReport ppa;
};

// ---------------------------------------------------------------------------
// Net selection

/// Rank-based long-net boundary: the lower median of single-sink HPWLs.
inline Nm long_net_threshold(const Netlist& nl, const Placement& p) {
  std::vector<Nm> lengths;
  for (std::size_t n = 0; n < nl.nets().size(); ++n)
    if (nl.nets()[n].fanout() == 1) lengths.push_back(hpwl(p, nl, static_cast<int>(n)));
  if (lengths.empty()) return 0;
  std::sort(lengths.begin(), lengths.end());
  return lengths[(lengths.size() - 1) / 2];
}

/// Qualifying dummy drivers for `net`, in gate index order.
inline std::vector<int> dummy_driver_candidates(const Netlist& nl, int net) {
  const Net& n = nl.nets()[net];
  if (n.sinks.empty()) throw LiftError("net '" + n.id + "' has no sinks");
  const int real_rank = drive_class_rank(n.is_primary_input() ? 4 : nl.gates()[n.driver_gate].drive_strength);
  // Gates reachable from a sink would close a loop once wired into it.
  std::vector<char> blocked(nl.gates().size(), 0);
  std::vector<int> stack;
  for (const Sink& s : n.sinks)
    if (!s.is_primary_output() && !blocked[s.gate]) {
      blocked[s.gate] = 1;
      stack.push_back(s.gate);
    }
  while (!stack.empty()) {
    int g = stack.back();
    stack.pop_back();
    for (int f : nl.fanout_gates(g))
      if (!blocked[f]) {
        blocked[f] = 1;
        stack.push_back(f);
      }
  }
  std::vector<int> out;
  for (std::size_t g = 0; g < nl.gates().size(); ++g) {
    if (static_cast<int>(g) == n.driver_gate || blocked[g]) continue;
    if (std::abs(drive_class_rank(nl.gates()[g].drive_strength) - real_rank) > 1) continue;
    out.push_back(static_cast<int>(g));
  }
  return out;
}

/// Uniform seeded pick among loop-free, strength-compatible gates. With a
/// placement and a positive radius the pick is restricted to candidates
/// within that many sites of the real driver, when any exist.
inline int choose_dummy_driver(const Netlist& nl, int net, std::uint64_t seed, const Placement* p = nullptr,
                               int radius_sites = 0) {
  auto cands = dummy_driver_candidates(nl, net);
  if (cands.empty()) throw NoCandidate("no dummy driver for net '" + nl.nets()[net].id + "'");
  if (p && radius_sites > 0) {
    SiteCoord a = detail::pin_site(*p, nl, net, 0);
    std::vector<int> near;
    for (int g : cands) {
      SiteCoord s = p->gate_sites[g];
      if (std::abs(s.row - a.row) + std::abs(s.col - a.col) <= radius_sites) near.push_back(g);
    }
    if (!near.empty()) cands = std::move(near);
  }
  std::mt19937_64 rng(detail::hash_combine(seed, static_cast<std::uint64_t>(net)));
  return cands[rng() % cands.size()];
}

inline std::string choose_dummy_driver(const Netlist& nl, std::string_view net, std::uint64_t seed) {
  return nl.gates()[choose_dummy_driver(nl, nl.net_index(net), seed)].id;
}

/// HiFONs by fanout, then long single-sink nets by HPWL (both S12), then
/// short nets by ascending HPWL (S3), truncated to round(ratio * nets).
inline LiftPlan build_lift_plan(const Netlist& nl, const RoutedLayout& layout, double ratio,
                                LiftBudgets budgets = {}, const LiftOptions& opt = {}) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw LiftError("lift ratio must lie in (0, 1]");
  if (nl.nets().empty()) throw LiftError("empty netlist");
  const Placement& p = layout.placement;
  const int N = static_cast<int>(nl.nets().size());
  std::vector<Nm> len(N);
  for (int n = 0; n < N; ++n) len[n] = hpwl(p, nl, n);
  const Nm threshold = opt.long_net_threshold_nm.value_or(long_net_threshold(nl, p));

  std::vector<int> hifon, long_nets, short_nets;
  for (int n = 0; n < N; ++n) {
    std::size_t fo = nl.nets()[n].fanout();
    if (fo >= 2) hifon.push_back(n);
    else if (fo == 1 && len[n] > threshold && opt.use_s12) long_nets.push_back(n);
    else if (fo == 1) short_nets.push_back(n);
  }
  std::stable_sort(hifon.begin(), hifon.end(), [&](int a, int b) {
    if (nl.nets()[a].fanout() != nl.nets()[b].fanout()) return nl.nets()[a].fanout() > nl.nets()[b].fanout();
    return len[a] > len[b];
  });
  std::stable_sort(long_nets.begin(), long_nets.end(), [&](int a, int b) { return len[a] > len[b]; });
  std::stable_sort(short_nets.begin(), short_nets.end(), [&](int a, int b) { return len[a] < len[b]; });

  LiftPlan plan;
  plan.budgets = budgets;
  plan.ratio = ratio;
  const auto limit = static_cast<std::size_t>(std::llround(ratio * N));
  auto push = [&](int n, LiftStrategy s) {
    if (plan.entries.size() >= limit) return;
    LiftEntry e{nl.nets()[n].id, s, {}, std::nullopt};
    if (s == LiftStrategy::S3) {
      try {
        e.dummy_driver = nl.gates()[choose_dummy_driver(nl, n, opt.seed, &p, opt.dummy_radius_sites)].id;
      } catch (const NoCandidate& ex) {
        plan.skipped.push_back({e.net, ex.what()});
        return;
      }
    }
    plan.entries.push_back(std::move(e));
  };
  if (opt.use_s12) {
    for (int n : hifon) push(n, LiftStrategy::S12);
    for (int n : long_nets) push(n, LiftStrategy::S12);
  }
  if (opt.use_s3)
    for (int n : short_nets) push(n, LiftStrategy::S3);
  return plan;
}

/// Nested random selection: the nets for a smaller ratio are a prefix of
/// those for a larger one under the same seed.
inline std::vector<std::string> select_random_nets(const Netlist& nl, double ratio, std::uint64_t seed) {
  if (ratio < 0.0 || ratio > 1.0) throw LiftError("lift ratio must lie in [0, 1]");
  std::vector<int> pool;
  for (std::size_t n = 0; n < nl.nets().size(); ++n)
    if (nl.nets()[n].fanout() > 0) pool.push_back(static_cast<int>(n));
  std::mt19937_64 rng(seed);
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng() % i]);
  auto count = std::min<std::size_t>(pool.size(), std::llround(ratio * nl.nets().size()));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(nl.nets()[pool[i]].id);
  return out;
}

// ---------------------------------------------------------------------------
// Geometry

/// Applies lifting transformations to one working layout and keeps track of
/// EC pin slots so pins of distinct ECs never coincide.
class Lifter {
public:
  Lifter(RoutedLayout& layout, LiftOptions opt) : layout_(layout), opt_(opt) {
    if (opt_.target_layer < 2 || opt_.target_layer >= layout_.stack.top())
      throw LiftError("target layer must leave a layer above and below it");
  }

  const std::set<Point>& used_pins() const noexcept { return used_; }
  void restore_pins(std::set<Point> pins) { used_ = std::move(pins); }
  const LiftOptions& options() const noexcept { return opt_; }

  LiftEntry lift_s12(int net) {
    const Net& n = nl().nets()[net];
    if (n.sinks.empty()) throw LiftError("net '" + n.id + "' has no sinks");
    Txn txn(*this, net);
    auto pins = layout_.pins(net);
    auto sites = pin_sites(net);
    LiftEntry e{n.id, LiftStrategy::S12, {}, std::nullopt};
    e.ecs.push_back(place_ec(n.id, 0, EcKind::Lift, sites[0]));
    std::mt19937_64 rng(detail::hash_combine(opt_.seed, 0x5121ull + static_cast<std::uint64_t>(net)));
    for (std::size_t i = 1; i < pins.size(); ++i) {
      SiteCoord want = sites[i];
      if (opt_.ec_random_in_bbox) {
        int r0 = std::min(sites[0].row, sites[i].row), r1 = std::max(sites[0].row, sites[i].row);
        int c0 = std::min(sites[0].col, sites[i].col), c1 = std::max(sites[0].col, sites[i].col);
        want = {r0 + static_cast<int>(rng() % (r1 - r0 + 1)), c0 + static_cast<int>(rng() % (c1 - c0 + 1))};
      }
      e.ecs.push_back(place_ec(n.id, static_cast<int>(i), EcKind::Lift, want));
    }
    // The upper tree joins the EC pins with the same star/MST rule the
    // router uses; every pin drops to its own EC, so each sink gets its own
    // open pin below the lift layer.
    std::vector<Point> ec_pins;
    for (const auto& ec : e.ecs) ec_pins.push_back(ec.pin);
    NetRoute& r = txn.route();
    r.branches = net_topology(ec_pins);
    for (std::size_t i = 0; i < pins.size(); ++i) txn.commit(low(r, pins[i], ec_pins[i]));
    for (const Branch& b : r.branches) txn.commit(high(r, ec_pins[b.from_pin], ec_pins[b.to_pin]));
    finish(e, r, txn);
    return e;
  }

  LiftEntry lift_s3(int net, int dummy_gate) {
    const Net& n = nl().nets()[net];
    if (n.sinks.empty()) throw LiftError("net '" + n.id + "' has no sinks");
    if (dummy_gate == n.driver_gate) throw LiftError("dummy driver equals the real driver");
    Txn txn(*this, net);
    auto pins = layout_.pins(net);
    auto sites = pin_sites(net);
    SiteCoord d_site = layout_.placement.gate_sites[dummy_gate];
    const Point d_pin = layout_.placement.center(d_site);
    SiteCoord mid{static_cast<int>(std::floor((sites[0].row + d_site.row) / 2.0)),
                  static_cast<int>(std::floor((sites[0].col + d_site.col) / 2.0))};
    LiftEntry e{n.id, LiftStrategy::S3, {}, nl().gates()[dummy_gate].id};
    e.ecs.push_back(place_ec(n.id, 0, EcKind::Obfuscate, mid));
    const ElevatingCell& ec = e.ecs[0];
    NetRoute& r = txn.route();
    r.branches.clear();
    for (std::size_t i = 1; i < pins.size(); ++i) r.branches.push_back({0, static_cast<int>(i)});
    txn.commit(low(r, pins[0], ec.pin));
    for (std::size_t i = 1; i < pins.size(); ++i) txn.commit(high(r, ec.pin, pins[i]));

    DummyStub stub;
    stub.net = nl().nets()[nl().output_net(dummy_gate)].id;
    stub.driver_gate = nl().gates()[dummy_gate].id;
    stub.obfuscated_net = n.id;
    stub.open_end = *ec.dummy_pin;
    auto leg = low(stub.route, d_pin, *ec.dummy_pin);
    if (!leg) txn.fail("dummy stub unroutable");
    commit_geometry(layout_, stub.route, *leg);
    stub.route.add_stack(*ec.dummy_pin, 1, opt_.target_layer);
    stub.route.canonicalize();
    finish(e, r, txn);
    layout_.stubs.push_back(std::move(stub));
    return e;
  }

  LiftEntry lift_naive(int net) {
    const Net& n = nl().nets()[net];
    if (n.sinks.empty()) throw LiftError("net '" + n.id + "' has no sinks");
    Txn txn(*this, net);
    auto pins = layout_.pins(net);
    auto sites = pin_sites(net);
    LiftEntry e{n.id, LiftStrategy::Naive, {}, std::nullopt};
    e.ecs.push_back(place_ec(n.id, 0, EcKind::Lift, sites[0]));
    const Point ep = e.ecs[0].pin;
    NetRoute& r = txn.route();
    r.branches.clear();
    for (std::size_t i = 1; i < pins.size(); ++i) r.branches.push_back({0, static_cast<int>(i)});
    txn.commit(low(r, pins[0], ep));
    const int t = opt_.target_layer, top = layout_.stack.top();
    for (std::size_t i = 1; i < pins.size(); ++i) {
      // Up at the EC, one leg on the lift layer, back down one layer for the
      // second leg: the sink side is left to the router.
      std::optional<NetRoute> fit;
      for (int first = t; first <= top && !fit; first += 2) {
        for (int second : {first - 1, first + 1}) {
          if (second < 1 || second > top) continue;
          NetRoute g = leg_route(layout_.stack, ep, pins[i], first, second);
          g.add_stack(ep, 1, t);
          if (fits_with(layout_, r, g)) {
            fit = std::move(g);
            break;
          }
        }
      }
      txn.commit(fit);
    }
    finish(e, r, txn);
    return e;
  }

private:
  // Rolls a net back to its pre-lift route unless committed.
  class Txn {
  public:
    Txn(Lifter& l, int net) : l_(l), net_(net), saved_(l.layout_.routes[net]), pins_before_(l.used_) {
      rip_up(l.layout_, net);
    }
    ~Txn() {
      if (!done_) rollback();
    }
    NetRoute& route() { return l_.layout_.routes[net_]; }
    void commit(const std::optional<NetRoute>& g) {
      if (!g) fail("no routing resources");
      commit_geometry(l_.layout_, route(), *g);
    }
    [[noreturn]] void fail(const std::string& why) {
      throw LiftError("net '" + l_.nl().nets()[net_].id + "': " + why);
    }
    void done() { done_ = true; }

  private:
    void rollback() {
      rip_up(l_.layout_, net_);
      commit_geometry(l_.layout_, route(), saved_);
      route().branches = saved_.branches;
      route().canonicalize();
      l_.used_ = pins_before_;
    }
    Lifter& l_;
    int net_;
    NetRoute saved_;
    std::set<Point> pins_before_;
    bool done_ = false;
  };

  const Netlist& nl() const { return layout_.nl(); }

  std::vector<SiteCoord> pin_sites(int net) const {
    std::vector<SiteCoord> out;
    for (std::size_t i = 0; i <= nl().nets()[net].sinks.size(); ++i)
      out.push_back(detail::pin_site(layout_.placement, nl(), net, static_cast<int>(i)));
    return out;
  }

  static std::vector<Nm> tracks_in(Nm lo, Nm hi, Nm pitch, Nm center) {
    std::vector<Nm> out;
    Nm t = lo >= 0 ? ((lo + pitch - 1) / pitch) * pitch : -((-lo / pitch) * pitch);
    for (; t < hi; t += pitch) out.push_back(t);
    std::stable_sort(out.begin(), out.end(), [&](Nm a, Nm b) {
      Nm da = a > center ? a - center : center - a, db = b > center ? b - center : center - b;
      return da < db;
    });
    return out;
  }

  /// Pin slots inside a site: lift-layer tracks crossed with the tracks of
  /// the layer below, nearest to the site center first. With `pair` the
  /// neighbouring lift-layer track must stay inside the site as well.
  std::vector<Point> slots(SiteCoord s, bool pair) const {
    const Point c = layout_.placement.center(s);
    const Nm half = layout_.placement.site_pitch / 2;
    const Nm pitch = layout_.stack.at(opt_.target_layer).pitch_nm;
    const Nm cross = layout_.stack.at(opt_.target_layer - 1).pitch_nm;
    const bool vertical = !layout_.stack.horizontal(opt_.target_layer);
    const Nm along = vertical ? c.x : c.y, across = vertical ? c.y : c.x;
    auto main = tracks_in(along - half, along + half - (pair ? pitch : 0), pitch, along);
    auto other = tracks_in(across - half, across + half, cross, across);
    std::vector<std::pair<Nm, Point>> ranked;
    for (Nm a : main)
      for (Nm o : other) {
        Point pt = vertical ? Point{a, o} : Point{o, a};
        ranked.push_back({manhattan(pt, c), pt});
      }
    std::stable_sort(ranked.begin(), ranked.end());
    std::vector<Point> out;
    for (auto& [d, pt] : ranked) out.push_back(pt);
    return out;
  }

  Point dummy_of(Point p) const {
    const Nm pitch = layout_.stack.at(opt_.target_layer).pitch_nm;
    return layout_.stack.horizontal(opt_.target_layer) ? Point{p.x, p.y + pitch} : Point{p.x + pitch, p.y};
  }

  /// Spiral search (rings of growing Chebyshev radius, row-major within a
  /// ring) for a free pin slot near `want`.
  ElevatingCell place_ec(const std::string& net, int index, EcKind kind, SiteCoord want) {
    const Placement& p = layout_.placement;
    const int min_col = p.min_col(), max_col = p.max_col();
    want.row = std::clamp(want.row, 0, std::max(p.rows - 1, 0));
    want.col = std::clamp(want.col, min_col, max_col);
    const bool pair = kind == EcKind::Obfuscate;
    for (int ring = 0; ring <= opt_.ec_radius; ++ring)
      for (int r = want.row - ring; r <= want.row + ring; ++r)
        for (int c = want.col - ring; c <= want.col + ring; ++c) {
          if (std::max(std::abs(r - want.row), std::abs(c - want.col)) != ring) continue;
          if (r < 0 || r >= p.rows || c < min_col || c > max_col) continue;
          for (Point pin : slots({r, c}, pair)) {
            if (used_.count(pin) || (pair && used_.count(dummy_of(pin)))) continue;
            ElevatingCell ec{net + "/ec" + std::to_string(index), kind, net, opt_.target_layer, {r, c}, pin,
                             std::nullopt, 0.0};
            used_.insert(pin);
            if (pair) {
              ec.dummy_pin = dummy_of(pin);
              used_.insert(*ec.dummy_pin);
            }
            return ec;
          }
        }
    throw LiftError("net '" + net + "': no free EC slot within " + std::to_string(opt_.ec_radius) + " sites");
  }

  /// Route between M1 points staying below the lift layer.
  std::optional<NetRoute> low(const NetRoute& owner, Point a, Point b) const {
    const int max_pair = opt_.target_layer - 2;
    if (max_pair < 1) return a == b ? std::optional<NetRoute>(NetRoute{}) : std::nullopt;
    const Nm sites = manhattan(a, b) / layout_.placement.site_pitch;
    const int first = std::min(tier_first_pair(layout_.config, sites), max_pair);
    const bool lf = orientation_bit(layout_.seed, a.x * 31 + a.y, b.x * 17 + b.y);
    if (auto g = find_fit(layout_, owner, a, b, first, max_pair, lf)) return g;
    if (first > 1)
      if (auto g = find_fit(layout_, owner, a, b, 1, first - 1, lf)) return g;
    return std::nullopt;
  }

  /// Route between M1 points through pairs at or above the lift layer,
  /// first leg on the lower layer of the pair.
  std::optional<NetRoute> high(const NetRoute& owner, Point a, Point b) const {
    return find_fit(layout_, owner, a, b, opt_.target_layer, layout_.stack.top() - 1, true);
  }

  void finish(LiftEntry& e, NetRoute& r, Txn& txn) {
    r.canonicalize();
    const auto& n = nl().net(e.net);
    const double load =
        static_cast<double>(r.wirelength()) * opt_.wire_cap_per_nm + static_cast<double>(n.fanout()) * opt_.pin_cap;
    for (auto& ec : e.ecs) ec.annotated_load = load;
    txn.done();
  }

  RoutedLayout& layout_;
  LiftOptions opt_;
  std::set<Point> used_;
};

inline LiftEntry apply_strategy_1_2(RoutedLayout& layout, std::string_view net, const LiftOptions& opt = {}) {
  Lifter l(layout, opt);
  return l.lift_s12(layout.nl().net_index(net));
}

inline LiftEntry apply_strategy_3(RoutedLayout& layout, std::string_view net, std::string_view dummy_driver,
                                  const LiftOptions& opt = {}) {
  Lifter l(layout, opt);
  return l.lift_s3(layout.nl().net_index(net), layout.nl().gate_index(dummy_driver));
}

/// Lifts the given nets with one EC each at the driver. Failures are
/// returned as skipped entries.
inline LiftPlan naive_lift(RoutedLayout& layout, const std::vector<std::string>& nets, const LiftOptions& opt = {}) {
  Lifter l(layout, opt);
  LiftPlan plan;
  for (const auto& id : nets) {
    try {
      plan.entries.push_back(l.lift_naive(layout.nl().net_index(id)));
    } catch (const LiftError& e) {
      plan.skipped.push_back({id, e.what()});
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Flow

inline bool within_budget(const PpaOverheads& o, const LiftBudgets& b) {
  return o.area_pct <= b.area_pct && o.power_pct <= b.power_pct && o.delay_pct <= b.delay_pct;
}

/// Applies a plan in chunks, re-checking PPA overhead against the baseline
/// after each one and stopping before the first chunk that breaks a budget.
/// Entries that cannot be realized are skipped and reported.
inline ProtectedLayout apply_plan(const RoutedLayout& baseline, const LiftPlan& plan, const LiftOptions& opt = {},
                                  const PpaParams& ppa = {}) {
  ProtectedLayout out{baseline, {}, {}, {}, ppa_proxy(baseline, ppa), {}};
  out.plan.budgets = plan.budgets;
  out.plan.ratio = plan.ratio;
  out.plan.skipped = plan.skipped;
  out.ppa = out.baseline_ppa;
  Lifter lifter(out.layout, opt);
  const std::size_t chunk =
      std::max<std::size_t>(1, std::llround(opt.chunk_fraction * baseline.nl().nets().size()));
  std::size_t i = 0;
  bool stopped = false;
  while (i < plan.entries.size() && !stopped) {
    // A chunk never mixes strategies.
    std::size_t end = i;
    while (end < plan.entries.size() && end - i < chunk && plan.entries[end].strategy == plan.entries[i].strategy) ++end;
    RoutedLayout snapshot = out.layout;
    auto pins_snapshot = lifter.used_pins();
    std::vector<LiftEntry> applied;
    std::vector<SkippedNet> skipped;
    for (std::size_t k = i; k < end; ++k) {
      const LiftEntry& e = plan.entries[k];
      int net = baseline.nl().net_index(e.net);
      try {
        switch (e.strategy) {
        case LiftStrategy::S12: applied.push_back(lifter.lift_s12(net)); break;
        case LiftStrategy::S3: applied.push_back(lifter.lift_s3(net, baseline.nl().gate_index(*e.dummy_driver))); break;
        case LiftStrategy::Naive: applied.push_back(lifter.lift_naive(net)); break;
        }
      } catch (const LiftError& ex) {
        skipped.push_back({e.net, ex.what()});
      }
    }
    PpaReport now = ppa_proxy(out.layout, ppa);
    if (!within_budget(ppa_overheads(out.baseline_ppa, now), plan.budgets)) {
      out.layout = std::move(snapshot);
      lifter.restore_pins(pins_snapshot);
      out.warnings.push_back("budget exceeded by entries " + std::to_string(i) + ".." + std::to_string(end - 1) +
                             "; stopped");
      stopped = true;
      break;
    }
    out.ppa = now;
    for (auto& a : applied) out.plan.entries.push_back(std::move(a));
    for (auto& s : skipped) out.plan.skipped.push_back(std::move(s));
    i = end;
  }
  if (out.plan.entries.empty() && !plan.entries.empty())
    out.warnings.push_back("budget exhausted before any lifting");
  for (const auto& e : out.plan.entries)
    if (out.layout.route(e.net).topmost_layer() >= opt.target_layer) out.protected_nets.insert(e.net);
  return out;
}

inline ProtectedLayout lift_flow(const Netlist& nl, const RoutedLayout& baseline, LiftBudgets budgets,
                                 double ratio, const LiftOptions& opt = {}, const PpaParams& ppa = {}) {
  for (double b : {budgets.area_pct, budgets.power_pct, budgets.delay_pct})
    if (b < 0.0) throw LiftError("budgets must be non-negative");
  return apply_plan(baseline, build_lift_plan(nl, baseline, ratio, budgets, opt), opt, ppa);
}

// ---------------------------------------------------------------------------
// Plan documents

inline Json to_json(const LiftPlan& plan) {
  Json j;
  j["format"] = "splitlift-plan/1";
  j["ratio"] = plan.ratio;
  j["budgets"] = {{"area_pct", plan.budgets.area_pct},
                  {"power_pct", plan.budgets.power_pct},
                  {"delay_pct", plan.budgets.delay_pct}};
  j["entries"] = Json::array();
  for (const auto& e : plan.entries) {
    Json je{{"net", e.net}, {"strategy", to_string(e.strategy)}};
    je["dummy_driver"] = e.dummy_driver ? Json(*e.dummy_driver) : Json(nullptr);
    je["ecs"] = Json::array();
    for (const auto& ec : e.ecs) {
      Json jc{{"id", ec.id},
              {"kind", ec.kind == EcKind::Lift ? "LIFT" : "OBFUSCATE"},
              {"target_layer", ec.target_layer},
              {"row", ec.site.row},
              {"col", ec.site.col},
              {"pin", to_json(ec.pin)}};
      jc["dummy_pin"] = ec.dummy_pin ? to_json(*ec.dummy_pin) : Json(nullptr);
      jc["annotated_load"] = ec.annotated_load;
      je["ecs"].push_back(std::move(jc));
    }
    j["entries"].push_back(std::move(je));
  }
  j["skipped"] = Json::array();
  for (const auto& s : plan.skipped) j["skipped"].push_back({{"net", s.net}, {"reason", s.reason}});
  return j;
}

inline LiftPlan plan_from_json(const Json& j) {
  if (j.value("format", "") != "splitlift-plan/1") throw FormatError("not a plan document");
  try {
    LiftPlan plan;
    plan.ratio = j.at("ratio").get<double>();
    plan.budgets = {j.at("budgets").at("area_pct").get<double>(), j.at("budgets").at("power_pct").get<double>(),
                    j.at("budgets").at("delay_pct").get<double>()};
    for (const auto& je : j.at("entries")) {
      LiftEntry e{je.at("net").get<std::string>(), lift_strategy_from_string(je.at("strategy").get<std::string>()),
                  {}, std::nullopt};
      if (!je.at("dummy_driver").is_null()) e.dummy_driver = je.at("dummy_driver").get<std::string>();
      for (const auto& jc : je.at("ecs")) {
        ElevatingCell ec;
        ec.id = jc.at("id").get<std::string>();
        ec.kind = jc.at("kind").get<std::string>() == "LIFT" ? EcKind::Lift : EcKind::Obfuscate;
        ec.net = e.net;
        ec.target_layer = jc.at("target_layer").get<int>();
        ec.site = {jc.at("row").get<int>(), jc.at("col").get<int>()};
        ec.pin = point_from_json(jc.at("pin"));
        if (!jc.at("dummy_pin").is_null()) ec.dummy_pin = point_from_json(jc.at("dummy_pin"));
        ec.annotated_load = jc.at("annotated_load").get<double>();
        e.ecs.push_back(std::move(ec));
      }
      plan.entries.push_back(std::move(e));
    }
    for (const auto& s : j.at("skipped"))
      plan.skipped.push_back({s.at("net").get<std::string>(), s.at("reason").get<std::string>()});
    return plan;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed plan document: ") + e.what());
  }
}

}  // namespace splitlift
