#pragma once

// Scoring: recovery rates (PNR, CCR), functional distance (HD, OER), via
// deltas and the report that bundles them.

#include <bit>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "splitlift/attack.hpp"
#include "splitlift/layout_io.hpp"
#include "splitlift/ppa.hpp"
#include "splitlift/split_view.hpp"

namespace splitlift {

class MetricsError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Connection scoring

/// Per cut net: whether every sink-side open pin of it went to its true
/// driver. Unassigned pins count as wrong.
struct ConnectionScore {
  std::map<std::string, bool> cut_net_correct;
  std::size_t sink_pins = 0;
  std::size_t sink_pins_correct = 0;
};

inline ConnectionScore score_connections(const SplitResult& split, const InferredNetlist& inf) {
  const FeolView& F = split.feol;
  const BeolView& B = split.beol;
  const Netlist& nl = *B.netlist;
  if (inf.connection.size() != F.open_pins.size()) throw MetricsError("inferred connections do not match the FEOL view");
  ConnectionScore sc;
  for (const auto& id : B.cut_nets) sc.cut_net_correct[id] = true;
  for (const auto& op : F.open_pins) {
    if (op.polarity != Polarity::SinkSide) continue;
    int owner = B.fragment_owner[op.fragment];
    if (owner < 0) continue;
    const Net& net = nl.nets()[owner];
    DriverRef truth = net.is_primary_input() ? DriverRef{-1, net.input_index} : DriverRef{net.driver_gate, -1};
    int dp = inf.connection[op.id];
    bool ok = dp >= 0 && F.fragments[F.open_pins[dp].fragment].driver == truth;
    ++sc.sink_pins;
    sc.sink_pins_correct += ok;
    if (!ok) sc.cut_net_correct[net.id] = false;
  }
  return sc;
}

/// (correct hidden nets + FEOL-complete nets) / total nets, in percent.
inline double pnr(std::size_t correct, std::size_t feol_complete, std::size_t total_nets) {
  if (total_nets == 0) throw MetricsError("no nets");
  return 100.0 * static_cast<double>(correct + feol_complete) / static_cast<double>(total_nets);
}

inline double pnr(const SplitResult& split, const InferredNetlist& inf) {
  auto sc = score_connections(split, inf);
  std::size_t correct = 0;
  for (const auto& [net, ok] : sc.cut_net_correct) correct += ok;
  return pnr(correct, split.feol.feol_complete_nets.size(), split.beol.netlist->nets().size());
}

/// Correct protected nets over protected nets; nullopt for an empty set.
/// A protected net left whole in the FEOL is correct by definition.
inline std::optional<double> ccr(const SplitResult& split, const InferredNetlist& inf,
                                 const std::set<std::string>& protected_nets) {
  if (protected_nets.empty()) return std::nullopt;
  auto sc = score_connections(split, inf);
  std::size_t correct = 0;
  for (const auto& id : protected_nets) {
    if (!split.beol.netlist->find_net(id)) throw MetricsError("unknown protected net '" + id + "'");
    auto it = sc.cut_net_correct.find(id);
    correct += it == sc.cut_net_correct.end() ? 1 : it->second;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(protected_nets.size());
}

/// The hidden nets of a split: the default protected set.
inline std::set<std::string> cut_net_set(const SplitResult& split) {
  return {split.beol.cut_nets.begin(), split.beol.cut_nets.end()};
}

/// Share of sink-side open pins mapped to their true driver.
inline std::optional<double> pair_rate(const SplitResult& split, const InferredNetlist& inf) {
  auto sc = score_connections(split, inf);
  if (sc.sink_pins == 0) return std::nullopt;
  return 100.0 * static_cast<double>(sc.sink_pins_correct) / static_cast<double>(sc.sink_pins);
}

// ---------------------------------------------------------------------------
// Functional distance

struct FunctionalDistance {
  double hd = 0.0;   ///< mean share of wrong output bits, percent
  double oer = 0.0;  ///< share of vectors with any wrong output, percent
  std::size_t vectors = 0;
  bool exhaustive = false;
};

/// Input words for pattern block `block`: exhaustive enumeration for up to
/// 16 inputs, seeded random words otherwise.
inline std::vector<std::uint64_t> pattern_block(std::size_t n_inputs, std::size_t block, bool exhaustive,
                                                std::mt19937_64& rng) {
  std::vector<std::uint64_t> words(n_inputs, 0);
  if (exhaustive) {
    for (std::size_t k = 0; k < 64; ++k) {
      std::uint64_t pattern = block * 64 + k;
      for (std::size_t i = 0; i < n_inputs; ++i)
        if ((pattern >> i) & 1u) words[i] |= std::uint64_t{1} << k;
    }
  } else {
    for (auto& w : words) w = rng();
  }
  return words;
}

/// HD and OER from one simulation pass. Outputs are compared by position:
/// a reconstruction names each output after the net it believes drives it.
inline FunctionalDistance functional_distance(const Netlist& original, const Netlist& other,
                                              std::size_t vectors = 10000, std::uint64_t seed = 42) {
  if (original.inputs() != other.inputs() || original.outputs().size() != other.outputs().size())
    throw MetricsError("primary I/O of the two netlists differ");
  const std::size_t n_in = original.inputs().size(), n_out = original.outputs().size();
  if (n_out == 0) throw MetricsError("no primary outputs");
  FunctionalDistance fd;
  fd.exhaustive = n_in <= 16;
  fd.vectors = fd.exhaustive ? (std::size_t{1} << n_in) : vectors;
  if (fd.vectors == 0) throw MetricsError("vector count must be positive");
  std::mt19937_64 rng(seed);
  std::uint64_t wrong_bits = 0, wrong_vectors = 0;
  for (std::size_t block = 0, done = 0; done < fd.vectors; ++block) {
    const std::size_t count = std::min<std::size_t>(64, fd.vectors - done);
    const std::uint64_t mask = count == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << count) - 1;
    auto words = pattern_block(n_in, block, fd.exhaustive, rng);
    auto a = simulate_words(original, words), b = simulate_words(other, words);
    std::uint64_t any = 0;
    for (std::size_t o = 0; o < n_out; ++o) {
      std::uint64_t diff = (a[o] ^ b[o]) & mask;
      wrong_bits += static_cast<std::uint64_t>(std::popcount(diff));
      any |= diff;
    }
    wrong_vectors += static_cast<std::uint64_t>(std::popcount(any));
    done += count;
  }
  fd.hd = 100.0 * static_cast<double>(wrong_bits) / (static_cast<double>(fd.vectors) * static_cast<double>(n_out));
  fd.oer = 100.0 * static_cast<double>(wrong_vectors) / static_cast<double>(fd.vectors);
  return fd;
}

inline double hd(const Netlist& a, const Netlist& b, std::size_t vectors = 10000, std::uint64_t seed = 42) {
  return functional_distance(a, b, vectors, seed).hd;
}
inline double oer(const Netlist& a, const Netlist& b, std::size_t vectors = 10000, std::uint64_t seed = 42) {
  return functional_distance(a, b, vectors, seed).oer;
}

// ---------------------------------------------------------------------------
// Via deltas

struct ViaDelta {
  int lower = 0;  ///< via layer between M<lower> and M<lower+1>
  long before = 0;
  long after = 0;
  long absolute = 0;
  double pct_of_total = 0.0;             ///< relative to all vias before
  std::optional<double> pct_of_pair;     ///< relative to this via layer before
};

inline std::vector<ViaDelta> via_delta_report(const RoutedLayout& before, const RoutedLayout& after) {
  if (before.netlist != after.netlist && !structurally_equal(before.nl(), after.nl()))
    throw MetricsError("via delta needs layouts of the same netlist");
  auto vb = via_count_per_layer(before), va = via_count_per_layer(after);
  const long total = total_vias(before);
  std::vector<ViaDelta> out;
  for (int l = 1; l < std::max(before.stack.top(), after.stack.top()); ++l) {
    ViaDelta d;
    d.lower = l;
    d.before = vb.count(l) ? vb[l] : 0;
    d.after = va.count(l) ? va[l] : 0;
    d.absolute = d.after - d.before;
    d.pct_of_total = total ? 100.0 * static_cast<double>(d.absolute) / static_cast<double>(total) : 0.0;
    if (d.before) d.pct_of_pair = 100.0 * static_cast<double>(d.absolute) / static_cast<double>(d.before);
    out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct MetricsReport {
  std::string design;
  std::string variant;  ///< e.g. "original" or "protected"
  std::string attack;
  int split_layer = 0;
  std::uint64_t seed = 0;
  std::size_t vectors = 0;
  std::size_t total_nets = 0;
  std::size_t feol_complete_nets = 0;
  std::size_t protected_nets = 0;
  double pnr = 0.0;
  std::optional<double> ccr;
  std::optional<double> pair_rate;
  double oer = 0.0;
  double hd = 0.0;
  OppCount opps;
  std::vector<ViaDelta> via_deltas;
  std::optional<PpaOverheads> ppa;
};

/// Scores one attack. `protected_nets` defaults to the split's hidden nets
/// when empty.
inline MetricsReport evaluate(const SplitResult& split, const InferredNetlist& inf, std::set<std::string> protected_nets,
                              std::size_t vectors = 10000, std::uint64_t seed = 42) {
  const Netlist& truth = *split.beol.netlist;
  MetricsReport r;
  r.design = truth.name();
  r.attack = inf.method;
  r.split_layer = split.feol.split_layer;
  r.seed = seed;
  r.total_nets = truth.nets().size();
  r.feol_complete_nets = split.feol.feol_complete_nets.size();
  if (protected_nets.empty()) protected_nets = cut_net_set(split);
  r.protected_nets = protected_nets.size();
  r.pnr = pnr(split, inf);
  r.ccr = ccr(split, inf, protected_nets);
  r.pair_rate = pair_rate(split, inf);
  auto rec = reconstruct_netlist(split.feol, inf);
  auto fd = functional_distance(truth, rec.netlist, vectors, seed);
  r.vectors = fd.vectors;
  r.hd = fd.hd;
  r.oer = fd.oer;
  r.opps = count_opps(split.opps);
  return r;
}

inline Json to_json(const MetricsReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json j;
  j["format"] = "splitlift-metrics/1";
  j["design"] = r.design;
  j["variant"] = r.variant;
  j["attack"] = r.attack;
  j["split_layer"] = r.split_layer;
  j["seed"] = r.seed;
  j["vectors"] = r.vectors;
  j["total_nets"] = r.total_nets;
  j["feol_complete_nets"] = r.feol_complete_nets;
  j["protected_nets"] = r.protected_nets;
  j["pnr_pct"] = r.pnr;
  j["ccr_pct"] = opt(r.ccr);
  j["icr_pct"] = r.ccr ? Json(100.0 - *r.ccr) : Json(nullptr);
  j["pair_rate_pct"] = opt(r.pair_rate);
  j["oer_pct"] = r.oer;
  j["hd_pct"] = r.hd;
  j["opps"] = {{"total", r.opps.total}, {"true", r.opps.true_pairs}, {"dummy", r.opps.dummy_pairs}};
  j["via_deltas"] = Json::array();
  for (const auto& d : r.via_deltas)
    j["via_deltas"].push_back({{"via", "V" + std::to_string(d.lower) + std::to_string(d.lower + 1)},
                               {"before", d.before},
                               {"after", d.after},
                               {"absolute", d.absolute},
                               {"pct_of_total", d.pct_of_total},
                               {"pct_of_pair", opt(d.pct_of_pair)}});
  if (r.ppa)
    j["ppa_overheads"] = {{"area_pct", r.ppa->area_pct}, {"power_pct", r.ppa->power_pct}, {"delay_pct", r.ppa->delay_pct}};
  else
    j["ppa_overheads"] = nullptr;
  return j;
}

inline constexpr const char* kMetricsCsvVersion = "splitlift-metrics-csv/1";

/// Column order of the flat CSV row.
inline std::string metrics_csv_header() {
  return "schema,design,variant,attack,split_layer,seed,vectors,total_nets,feol_complete_nets,protected_nets,pnr_pct,ccr_pct,"
         "pair_rate_pct,oer_pct,hd_pct,opps_total,opps_true,opps_dummy,area_pct,power_pct,delay_pct";
}

inline std::string fmt_pct(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(4) << v;
  return ss.str();
}

inline std::string metrics_csv_row(const MetricsReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt_pct(*v) : std::string(); };
  std::ostringstream ss;
  ss << kMetricsCsvVersion << ',' << r.design << ',' << r.variant << ',' << r.attack << ',' << r.split_layer << ',' << r.seed << ',' << r.vectors << ',' << r.total_nets
     << ',' << r.feol_complete_nets << ',' << r.protected_nets << ',' << fmt_pct(r.pnr) << ',' << opt(r.ccr) << ','
     << opt(r.pair_rate) << ',' << fmt_pct(r.oer) << ',' << fmt_pct(r.hd) << ',' << r.opps.total << ','
     << r.opps.true_pairs << ',' << r.opps.dummy_pairs << ',';
  if (r.ppa) ss << fmt_pct(r.ppa->area_pct) << ',' << fmt_pct(r.ppa->power_pct) << ',' << fmt_pct(r.ppa->delay_pct);
  else ss << ",,";
  return ss.str();
}

}  // namespace splitlift
