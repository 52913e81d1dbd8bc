#pragma once

// End-to-end runs: parse, place and route, protect, split, attack, score.
// Every artifact carries the run's config hash and seed.

#include <cstdlib>
#include <filesystem>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "splitlift/attack.hpp"
#include "splitlift/layout_io.hpp"
#include "splitlift/lifting.hpp"
#include "splitlift/metrics.hpp"
#include "splitlift/placement.hpp"
#include "splitlift/routing.hpp"
#include "splitlift/split_view.hpp"

namespace splitlift {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Failure inside one pipeline stage; what() starts with "[stage]".
class StageError : public std::runtime_error {
public:
  StageError(const std::string& stage, const std::string& msg) : std::runtime_error("[" + stage + "] " + msg), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

struct RunConfig {
  std::string input;
  std::uint64_t seed = 42;
  double utilization = 0.7;
  std::string stack = "default";  ///< "default" (10 layers) or "extended" (12)
  int target_layer = 6;
  std::vector<int> split_layers{3, 4, 5};
  double lift_ratio = 1.0;
  LiftBudgets budgets;
  std::vector<std::string> strategies{"S12", "S3"};  ///< S12, S3, NAIVE or NONE
  std::string attack = "flow";                      ///< flow or proximity
  std::size_t vectors = 10000;
  std::vector<double> sweep_ratios{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  double compare_ratio = 0.3;
  std::string output_dir = "out";
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

inline Json to_json(const RunConfig& c) {
  Json j;
  j["input"] = c.input;
  j["seed"] = c.seed;
  j["utilization"] = c.utilization;
  j["stack"] = c.stack;
  j["target_layer"] = c.target_layer;
  j["split_layers"] = c.split_layers;
  j["lift_ratio"] = c.lift_ratio;
  j["budgets"] = {{"area_pct", c.budgets.area_pct}, {"power_pct", c.budgets.power_pct}, {"delay_pct", c.budgets.delay_pct}};
  j["strategies"] = c.strategies;
  j["attack"] = c.attack;
  j["vectors"] = c.vectors;
  j["sweep_ratios"] = c.sweep_ratios;
  j["compare_ratio"] = c.compare_ratio;
  j["output_dir"] = c.output_dir;
  return j;
}

/// Overrides fields of `c` with the keys present in `j`.
inline void apply_config_json(RunConfig& c, const Json& j) {
  static const std::set<std::string> known{"input",      "seed",       "utilization", "stack",         "target_layer",
                                           "split_layers", "lift_ratio", "budgets",    "strategies",    "attack",
                                           "vectors",    "sweep_ratios", "compare_ratio", "output_dir"};
  try {
    for (const auto& [key, _] : j.items())
      if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    if (j.contains("input")) c.input = j["input"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("utilization")) c.utilization = j["utilization"].get<double>();
    if (j.contains("stack")) c.stack = j["stack"].get<std::string>();
    if (j.contains("target_layer")) c.target_layer = j["target_layer"].get<int>();
    if (j.contains("split_layers")) c.split_layers = j["split_layers"].get<std::vector<int>>();
    if (j.contains("lift_ratio")) c.lift_ratio = j["lift_ratio"].get<double>();
    if (j.contains("budgets")) {
      const Json& b = j["budgets"];
      c.budgets.area_pct = b.value("area_pct", c.budgets.area_pct);
      c.budgets.power_pct = b.value("power_pct", c.budgets.power_pct);
      c.budgets.delay_pct = b.value("delay_pct", c.budgets.delay_pct);
    }
    if (j.contains("strategies")) c.strategies = j["strategies"].get<std::vector<std::string>>();
    if (j.contains("attack")) c.attack = j["attack"].get<std::string>();
    if (j.contains("vectors")) c.vectors = j["vectors"].get<std::size_t>();
    if (j.contains("sweep_ratios")) c.sweep_ratios = j["sweep_ratios"].get<std::vector<double>>();
    if (j.contains("compare_ratio")) c.compare_ratio = j["compare_ratio"].get<double>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

inline LayerStack stack_of(const RunConfig& c) {
  if (c.stack == "default") return LayerStack::default_stack();
  if (c.stack == "extended") return LayerStack::extended_stack();
  throw ConfigError("stack must be 'default' or 'extended', got '" + c.stack + "'");
}

inline bool lifting_enabled(const RunConfig& c) {
  return !(c.strategies.size() == 1 && c.strategies[0] == "NONE");
}

inline void validate(const RunConfig& c) {
  if (c.input.empty()) throw ConfigError("no input netlist given");
  const LayerStack stack = stack_of(c);
  if (c.target_layer < 2 || c.target_layer > stack.top()) throw ConfigError("target layer outside the stack");
  if (c.split_layers.empty()) throw ConfigError("no split layer given");
  for (int k : c.split_layers)
    if (k < 1 || k > stack.top()) throw ConfigError("split layer " + std::to_string(k) + " outside the stack");
  if (c.strategies.empty()) throw ConfigError("no strategy given");
  std::set<std::string> s(c.strategies.begin(), c.strategies.end());
  for (const auto& name : s)
    if (name != "S12" && name != "S3" && name != "NAIVE" && name != "NONE")
      throw ConfigError("unknown strategy '" + name + "'");
  if ((s.count("NONE") || s.count("NAIVE")) && s.size() > 1)
    throw ConfigError("NONE and NAIVE cannot be combined with other strategies");
  if (lifting_enabled(c))
    for (int k : c.split_layers)
      if (k >= c.target_layer) throw ConfigError("split layer must lie below the lift target layer");
  if (!(c.lift_ratio > 0.0 && c.lift_ratio <= 1.0)) throw ConfigError("lift ratio must lie in (0, 1]");
  if (!(c.compare_ratio > 0.0 && c.compare_ratio <= 1.0)) throw ConfigError("compare ratio must lie in (0, 1]");
  for (double r : c.sweep_ratios)
    if (r < 0.0 || r > 1.0) throw ConfigError("sweep ratios must lie in [0, 1]");
  if (c.attack != "flow" && c.attack != "proximity") throw ConfigError("attack must be 'flow' or 'proximity'");
  if (c.vectors == 0) throw ConfigError("vector count must be positive");
}

/// Hash of everything that determines results; the output location is left
/// out so moving a run does not change it.
inline std::string config_hash(const RunConfig& c) {
  Json j = to_json(c);
  j.erase("output_dir");
  return hex64(fnv1a(j.dump()));
}

inline std::string netlist_hash(const Netlist& nl) { return hex64(fnv1a(to_bench(nl))); }

/// Output directory, placed under $SPLITLIFT_OUT_ROOT when that is set and
/// the configured path is relative.
inline std::filesystem::path resolve_output_dir(const RunConfig& c) {
  std::filesystem::path p(c.output_dir);
  if (p.is_relative())
    if (const char* root = std::getenv("SPLITLIFT_OUT_ROOT"); root && *root) p = std::filesystem::path(root) / p;
  return p;
}

// ---------------------------------------------------------------------------
// Stages

struct Design {
  std::shared_ptr<const Netlist> netlist;
  RoutedLayout baseline;
};

/// Parses, sizes, places and routes the input netlist.
inline Design prepare_design(const Netlist& input, const RunConfig& c) {
  Netlist nl = canonical(input);
  size_gates_by_fanout(nl);
  auto shared = std::make_shared<const Netlist>(std::move(nl));
  PlaceOptions po;
  po.target_utilization = c.utilization;
  po.seed = c.seed;
  Placement p = place(*shared, po);
  return {shared, route(shared, std::move(p), stack_of(c), c.seed)};
}

inline Design prepare_design(const RunConfig& c) {
  std::filesystem::path in(c.input);
  Netlist nl;
  try {
    nl = parse_bench(read_text_file(c.input), in.stem().string());
  } catch (const std::exception& e) {
    throw StageError("parse", e.what());
  }
  try {
    return prepare_design(nl, c);
  } catch (const std::exception& e) {
    throw StageError("layout", e.what());
  }
}

inline LiftOptions lift_options(const RunConfig& c) {
  LiftOptions o;
  o.target_layer = c.target_layer;
  o.seed = c.seed;
  return o;
}

inline LiftBudgets unlimited_budgets() {
  const double inf = std::numeric_limits<double>::infinity();
  return {inf, inf, inf};
}

/// Naive lifting of randomly chosen nets, as a plan.
inline LiftPlan naive_plan(const Netlist& nl, double ratio, std::uint64_t seed, LiftBudgets budgets) {
  LiftPlan plan;
  plan.ratio = ratio;
  plan.budgets = budgets;
  for (auto& id : select_random_nets(nl, ratio, seed)) plan.entries.push_back({id, LiftStrategy::Naive, {}, std::nullopt});
  return plan;
}

/// Applies the strategy set at `ratio` under `budgets`.
inline ProtectedLayout protect(const Design& d, const std::vector<std::string>& strategies, double ratio,
                               LiftBudgets budgets, const RunConfig& c) {
  std::set<std::string> s(strategies.begin(), strategies.end());
  LiftOptions opt = lift_options(c);
  if (s.count("NONE") || ratio == 0.0) {
    PpaReport base = ppa_proxy(d.baseline);
    ProtectedLayout out{d.baseline, {}, {}, {}, base, base};
    out.plan.budgets = budgets;
    out.plan.ratio = 0.0;
    return out;
  }
  if (s.count("NAIVE")) return apply_plan(d.baseline, naive_plan(*d.netlist, ratio, c.seed, budgets), opt);
  opt.use_s12 = s.count("S12") > 0;
  opt.use_s3 = s.count("S3") > 0;
  return lift_flow(*d.netlist, d.baseline, budgets, ratio, opt);
}

inline InferredNetlist run_attack(const FeolView& f, const std::string& attack, const AttackConfig& ac = {}) {
  if (attack == "flow") return network_flow_attack(f, ac);
  if (attack == "proximity") return proximity_attack(f);
  throw ConfigError("unknown attack '" + attack + "'");
}

// ---------------------------------------------------------------------------
// Attack result documents

inline Json to_json(const InferredNetlist& inf, const FeolView& f) {
  Json j;
  j["format"] = "splitlift-attack/1";
  j["design"] = f.design;
  j["split_layer"] = f.split_layer;
  j["method"] = inf.method;
  j["total_cost"] = inf.total_cost;
  j["relax_round"] = inf.relax_round;
  j["solves"] = inf.solves;
  j["loop_repairs"] = inf.loop_repairs;
  j["iteration_cap_hit"] = inf.iteration_cap_hit;
  j["warnings"] = inf.warnings;
  j["open_pins"] = f.open_pins.size();
  j["decisions"] = Json::array();
  for (const auto& op : f.open_pins) {
    if (op.polarity != Polarity::SinkSide) continue;
    Json d{{"sink_pin", op.id}, {"sink_at", to_json(op.at)}};
    int dp = inf.connection[op.id];
    if (dp >= 0) {
      d["driver_pin"] = dp;
      d["driver_at"] = to_json(f.open_pins[dp].at);
      d["distance"] = manhattan(op.at, f.open_pins[dp].at);
    } else {
      d["driver_pin"] = nullptr;
    }
    j["decisions"].push_back(std::move(d));
  }
  return j;
}

inline InferredNetlist inferred_from_json(const Json& j) {
  if (j.value("format", "") != "splitlift-attack/1") throw FormatError("not an attack document");
  try {
    InferredNetlist inf;
    inf.method = j.at("method").get<std::string>();
    inf.total_cost = j.at("total_cost").get<std::int64_t>();
    inf.relax_round = j.at("relax_round").get<int>();
    inf.solves = j.at("solves").get<int>();
    inf.loop_repairs = j.at("loop_repairs").get<int>();
    inf.iteration_cap_hit = j.at("iteration_cap_hit").get<bool>();
    inf.warnings = j.at("warnings").get<std::vector<std::string>>();
    inf.connection.assign(j.at("open_pins").get<std::size_t>(), kUnassigned);
    for (const auto& d : j.at("decisions")) {
      auto sp = d.at("sink_pin").get<std::size_t>();
      if (sp >= inf.connection.size()) throw FormatError("sink pin out of range");
      if (!d.at("driver_pin").is_null()) inf.connection[sp] = d.at("driver_pin").get<int>();
    }
    return inf;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed attack document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Commands

struct RunContext {
  RunConfig config;
  std::string hash;
  std::filesystem::path dir;

  explicit RunContext(RunConfig c) : config(std::move(c)) {
    validate(config);
    hash = config_hash(config);
    dir = resolve_output_dir(config);
    std::filesystem::create_directories(dir);
  }

  Json stamp(Json j) const {
    j["config_hash"] = hash;
    j["seed"] = config.seed;
    return j;
  }
  void write(const std::string& name, const Json& j) const { write_json_file((dir / name).string(), stamp(j)); }
  void write_text(const std::string& name, const std::string& text) const { write_text_file((dir / name).string(), text); }
};

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

/// Full flow on one design: baseline and protected layouts, split at every
/// configured layer, attack both and score them.
inline std::vector<MetricsReport> cmd_pipeline(const RunConfig& config, std::ostream& log) {
  RunContext ctx(config);
  const RunConfig& c = ctx.config;
  Design d = prepare_design(c);
  ProtectedLayout prot = stage("protect", [&] { return protect(d, c.strategies, c.lift_ratio, c.budgets, c); });
  ctx.write("baseline.layout.json", to_json(d.baseline));
  ctx.write("protected.layout.json", to_json(prot.layout));
  Json plan = to_json(prot.plan);
  plan["warnings"] = prot.warnings;
  ctx.write("plan.json", plan);

  const auto vias = via_delta_report(d.baseline, prot.layout);
  const auto ppa = ppa_overheads(prot.baseline_ppa, prot.ppa);
  std::vector<MetricsReport> reports;
  for (int k : c.split_layers) {
    const std::string tag = "M" + std::to_string(k);
    for (const auto& [variant, layout] : {std::pair<std::string, const RoutedLayout*>{"original", &d.baseline},
                                          std::pair<std::string, const RoutedLayout*>{"protected", &prot.layout}}) {
      SplitResult split = stage("split", [&] { return split_after(*layout, k); });
      if (variant == "protected") {
        ctx.write(tag + ".feol.json", to_json(split.feol));
        ctx.write(tag + ".beol.json", to_json(split.beol));
        ctx.write(tag + ".opps.json", to_json(split.opps, split.feol));
      }
      InferredNetlist inf = stage("attack", [&] { return run_attack(split.feol, c.attack); });
      ctx.write(tag + "." + variant + ".attack.json", to_json(inf, split.feol));
      MetricsReport r = stage("eval", [&] {
        std::set<std::string> prot_set;
        if (variant == "protected") prot_set = prot.protected_nets;
        return evaluate(split, inf, prot_set, c.vectors, c.seed);
      });
      r.variant = variant;
      if (variant == "protected") {
        r.via_deltas = vias;
        r.ppa = ppa;
      }
      log << r.design << ' ' << variant << ' ' << tag << ": OPPs " << r.opps.total << ", PNR " << fmt_pct(r.pnr)
          << "%, HD " << fmt_pct(r.hd) << "%, OER " << fmt_pct(r.oer) << "%\n";
      reports.push_back(std::move(r));
    }
  }
  Json mj;
  mj["format"] = "splitlift-run/1";
  mj["config"] = to_json(c);
  mj["config"].erase("output_dir");
  mj["netlist_hash"] = netlist_hash(*d.netlist);
  mj["protected_nets"] = prot.protected_nets.size();
  mj["reports"] = Json::array();
  for (const auto& r : reports) mj["reports"].push_back(to_json(r));
  ctx.write("metrics.json", mj);
  std::string csv = metrics_csv_header() + "\n";
  for (const auto& r : reports) csv += metrics_csv_row(r) + "\n";
  ctx.write_text("metrics.csv", csv);
  return reports;
}

struct SplitSweepRow {
  std::string variant;
  int split_layer = 0;
  OppCount opps;
  double pnr = 0.0;
};

struct SplitSweep {
  std::vector<SplitSweepRow> rows;
  std::map<std::string, bool> opp_nonincreasing;  ///< per variant
  std::map<std::string, bool> pnr_nondecreasing;
};

inline SplitSweep sweep_split(const Design& d, const RunConfig& c, const std::vector<int>& layers) {
  std::vector<std::pair<std::string, RoutedLayout>> variants{{"original", d.baseline}};
  if (lifting_enabled(c))
    variants.push_back({"protected", stage("protect", [&] { return protect(d, c.strategies, c.lift_ratio, c.budgets, c); }).layout});
  SplitSweep s;
  for (const auto& [variant, layout] : variants) {
    bool opp_ok = true, pnr_ok = true;
    std::optional<SplitSweepRow> prev;
    for (int k : layers) {
      SplitResult split = split_after(layout, k);
      InferredNetlist inf = run_attack(split.feol, c.attack);
      s.rows.push_back({variant, k, count_opps(split.opps), pnr(split, inf)});
      if (prev) {
        opp_ok = opp_ok && s.rows.back().opps.total <= prev->opps.total;
        pnr_ok = pnr_ok && s.rows.back().pnr >= prev->pnr;
      }
      prev = s.rows.back();
    }
    s.opp_nonincreasing[variant] = opp_ok;
    s.pnr_nondecreasing[variant] = pnr_ok;
  }
  return s;
}

inline SplitSweep cmd_sweep_split(const RunConfig& config, std::vector<int> layers, std::ostream& log) {
  RunContext ctx(config);
  const RunConfig& c = ctx.config;
  Design d = prepare_design(c);
  if (layers.empty())
    for (int k = 1; k <= d.baseline.stack.top(); ++k) layers.push_back(k);
  SplitSweep s = sweep_split(d, c, layers);
  std::string csv = "schema,design,variant,split_layer,opps_total,opps_true,opps_dummy,pnr_pct\n";
  for (const auto& r : s.rows) {
    csv += "splitlift-sweep-split/1," + d.netlist->name() + "," + r.variant + "," + std::to_string(r.split_layer) + "," +
           std::to_string(r.opps.total) + "," + std::to_string(r.opps.true_pairs) + "," +
           std::to_string(r.opps.dummy_pairs) + "," + fmt_pct(r.pnr) + "\n";
  }
  ctx.write_text("sweep_split.csv", csv);
  Json j{{"format", "splitlift-sweep-split-summary/1"}, {"design", d.netlist->name()}};
  for (const auto& [variant, ok] : s.opp_nonincreasing) {
    j["trends"][variant] = {{"opp_nonincreasing", ok}, {"pnr_nondecreasing", s.pnr_nondecreasing.at(variant)}};
    log << d.netlist->name() << ' ' << variant << ": OPPs non-increasing " << (ok ? "yes" : "no")
        << ", PNR non-decreasing " << (s.pnr_nondecreasing.at(variant) ? "yes" : "no") << '\n';
  }
  ctx.write("sweep_split.json", j);
  return s;
}

struct RatioSweepRow {
  double ratio = 0.0;
  int split_layer = 0;
  std::size_t nets_lifted = 0;
  std::size_t opps = 0;
  std::optional<double> normalized_opps;  ///< empty when the ratio-0 count is 0
  double pnr = 0.0;
};

struct RatioSweep {
  std::vector<RatioSweepRow> rows;
  std::map<int, bool> normalized_nondecreasing;  ///< per split layer
  std::map<int, bool> pnr_nonincreasing;
};

/// Randomly selected nets lifted naively to the target layer, at each ratio.
inline RatioSweep sweep_ratio(const Design& d, const RunConfig& c, std::vector<double> ratios) {
  std::sort(ratios.begin(), ratios.end());
  RatioSweep s;
  std::map<int, std::size_t> base;
  std::map<int, RatioSweepRow> prev;
  for (int k : c.split_layers) {
    s.normalized_nondecreasing[k] = true;
    s.pnr_nonincreasing[k] = true;
  }
  for (double ratio : ratios) {
    ProtectedLayout pl = protect(d, {"NAIVE"}, ratio, unlimited_budgets(), c);
    for (int k : c.split_layers) {
      SplitResult split = split_after(pl.layout, k);
      InferredNetlist inf = run_attack(split.feol, c.attack);
      RatioSweepRow row{ratio, k, pl.plan.entries.size(), split.opps.pairs.size(), std::nullopt, pnr(split, inf)};
      if (ratio == 0.0) base[k] = row.opps;
      if (base.count(k) && base[k] > 0)
        row.normalized_opps = static_cast<double>(row.opps) / static_cast<double>(base[k]);
      s.rows.push_back(row);
      const RatioSweepRow* cur = &s.rows.back();
      if (prev.count(k)) {
        const RatioSweepRow* p = &prev[k];
        if (p->normalized_opps && cur->normalized_opps && *cur->normalized_opps < *p->normalized_opps)
          s.normalized_nondecreasing[k] = false;
        if (cur->opps < p->opps) s.normalized_nondecreasing[k] = false;
        if (cur->pnr > p->pnr) s.pnr_nonincreasing[k] = false;
      }
      prev[k] = *cur;
    }
  }
  return s;
}

inline RatioSweep cmd_sweep_ratio(const RunConfig& config, std::ostream& log) {
  RunContext ctx(config);
  const RunConfig& c = ctx.config;
  Design d = prepare_design(c);
  RatioSweep s = stage("sweep", [&] { return sweep_ratio(d, c, c.sweep_ratios); });
  std::string csv = "schema,design,ratio,split_layer,nets_lifted,opps_total,opps_normalized,pnr_pct\n";
  for (const auto& r : s.rows)
    csv += "splitlift-sweep-ratio/1," + d.netlist->name() + "," + fmt_pct(r.ratio) + "," + std::to_string(r.split_layer) +
           "," + std::to_string(r.nets_lifted) + "," + std::to_string(r.opps) + "," +
           (r.normalized_opps ? fmt_pct(*r.normalized_opps) : std::string()) + "," + fmt_pct(r.pnr) + "\n";
  ctx.write_text("sweep_ratio.csv", csv);
  Json j{{"format", "splitlift-sweep-ratio-summary/1"}, {"design", d.netlist->name()}};
  for (int k : c.split_layers) {
    j["trends"]["M" + std::to_string(k)] = {{"normalized_opps_nondecreasing", s.normalized_nondecreasing[k]},
                                            {"pnr_nonincreasing", s.pnr_nonincreasing[k]}};
    log << d.netlist->name() << " M" << k << ": normalized OPPs non-decreasing "
        << (s.normalized_nondecreasing[k] ? "yes" : "no") << ", PNR non-increasing "
        << (s.pnr_nonincreasing[k] ? "yes" : "no") << '\n';
  }
  ctx.write("sweep_ratio.json", j);
  return s;
}

struct StrategyRow {
  std::string strategy;  ///< ORIGINAL, NAIVE, S12 or S3
  int split_layer = 0;
  std::size_t nets_lifted = 0;
  OppCount opps;
  double pnr = 0.0;
  std::string netlist_hash;
};

/// Every strategy lifts the same share of nets; budgets are not applied so
/// the rows differ only in how nets are lifted.
inline std::vector<StrategyRow> compare_strategies(const Design& d, const RunConfig& c) {
  std::vector<StrategyRow> rows;
  const std::string hash = netlist_hash(*d.netlist);
  for (const std::string name : {"ORIGINAL", "NAIVE", "S12", "S3"}) {
    std::vector<std::string> set = name == "ORIGINAL" ? std::vector<std::string>{"NONE"} : std::vector<std::string>{name};
    ProtectedLayout pl = protect(d, set, c.compare_ratio, unlimited_budgets(), c);
    for (int k : c.split_layers) {
      SplitResult split = split_after(pl.layout, k);
      InferredNetlist inf = run_attack(split.feol, c.attack);
      rows.push_back({name, k, pl.plan.entries.size(), count_opps(split.opps), pnr(split, inf), netlist_hash(pl.layout.nl())});
      if (rows.back().netlist_hash != hash) throw StageError("protect", "lifting changed the netlist");
    }
  }
  return rows;
}

inline std::vector<StrategyRow> cmd_compare_strategies(const RunConfig& config, std::ostream& log) {
  RunContext ctx(config);
  const RunConfig& c = ctx.config;
  Design d = prepare_design(c);
  auto rows = stage("compare", [&] { return compare_strategies(d, c); });
  std::string csv = "schema,design,strategy,ratio,split_layer,nets_lifted,opps_total,opps_true,opps_dummy,pnr_pct,netlist_hash\n";
  for (const auto& r : rows) {
    csv += "splitlift-compare/1," + d.netlist->name() + "," + r.strategy + "," + fmt_pct(c.compare_ratio) + "," +
           std::to_string(r.split_layer) + "," + std::to_string(r.nets_lifted) + "," + std::to_string(r.opps.total) +
           "," + std::to_string(r.opps.true_pairs) + "," + std::to_string(r.opps.dummy_pairs) + "," + fmt_pct(r.pnr) +
           "," + r.netlist_hash + "\n";
    log << d.netlist->name() << ' ' << r.strategy << " M" << r.split_layer << ": " << r.nets_lifted
        << " nets lifted, OPPs " << r.opps.total << ", PNR " << fmt_pct(r.pnr) << "%\n";
  }
  ctx.write_text("compare_strategies.csv", csv);
  return rows;
}

/// Attacks a FEOL document and writes the decisions.
inline InferredNetlist cmd_attack(const std::string& feol_path, const std::string& attack, const std::string& out_path,
                                  const AttackConfig& ac = {}) {
  FeolView f = stage("load", [&] { return feol_from_json(read_json_file(feol_path)); });
  InferredNetlist inf = stage("attack", [&] { return run_attack(f, attack, ac); });
  write_json_file(out_path, to_json(inf, f));
  return inf;
}

/// Scores an attack document against the layout it was derived from.
inline MetricsReport cmd_eval(const std::string& layout_path, int split_layer, const std::string& attack_path,
                              std::size_t vectors, std::uint64_t seed, const std::string& out_path) {
  RoutedLayout layout = stage("load", [&] { return layout_from_json(read_json_file(layout_path)); });
  InferredNetlist inf = stage("load", [&] { return inferred_from_json(read_json_file(attack_path)); });
  SplitResult split = stage("split", [&] { return split_after(layout, split_layer); });
  MetricsReport r = stage("eval", [&] { return evaluate(split, inf, {}, vectors, seed); });
  r.variant = "evaluated";
  write_json_file(out_path, to_json(r));
  return r;
}

}  // namespace splitlift
