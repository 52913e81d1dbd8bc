// Run configuration, pipeline artifacts and the standalone commands.

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "test_support.hpp"

using namespace splitlift;
using splitlift::testing::bench_path;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("splitlift_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig c17_config(const fs::path& out) {
  RunConfig c;
  c.input = bench_path("c17");
  c.output_dir = out.string();
  c.vectors = 256;
  return c;
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = read_text_file(e.path().string());
  return out;
}

}  // namespace

TEST(Config, HashIgnoresOnlyTheOutputLocation) {
  RunConfig a;
  a.input = "x.bench";
  RunConfig b = a;
  b.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 43;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  // FNV-1a reference values.
  EXPECT_EQ(fnv1a(""), 14695981039346656037ull);
  EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Config, JsonOverridesAndRejectsUnknownKeys) {
  RunConfig c;
  apply_config_json(c, Json{{"seed", 7}, {"split_layers", {2, 3}}, {"budgets", {{"power_pct", 5.0}}}});
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.split_layers, (std::vector<int>{2, 3}));
  EXPECT_DOUBLE_EQ(c.budgets.power_pct, 5.0);
  EXPECT_DOUBLE_EQ(c.budgets.area_pct, 10.0);
  EXPECT_THROW(apply_config_json(c, Json{{"sed", 1}}), ConfigError);
  EXPECT_THROW(apply_config_json(c, Json{{"seed", "many"}}), ConfigError);
  RunConfig back;
  apply_config_json(back, to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, Validation) {
  RunConfig ok;
  ok.input = "x.bench";
  EXPECT_NO_THROW(validate(ok));
  auto bad = [&](auto mutate) {
    RunConfig c = ok;
    mutate(c);
    EXPECT_THROW(validate(c), ConfigError);
  };
  bad([](RunConfig& c) { c.input.clear(); });
  bad([](RunConfig& c) { c.stack = "tall"; });
  bad([](RunConfig& c) { c.split_layers = {6}; });
  bad([](RunConfig& c) { c.split_layers = {11}; });
  bad([](RunConfig& c) { c.strategies = {"S12", "NONE"}; });
  bad([](RunConfig& c) { c.strategies = {"S4"}; });
  bad([](RunConfig& c) { c.lift_ratio = 0.0; });
  bad([](RunConfig& c) { c.attack = "guess"; });
  bad([](RunConfig& c) { c.vectors = 0; });
  RunConfig none = ok;
  none.strategies = {"NONE"};
  none.split_layers = {8};
  EXPECT_NO_THROW(validate(none));
  RunConfig ext = ok;
  ext.stack = "extended";
  ext.split_layers = {12};
  ext.strategies = {"NONE"};
  EXPECT_NO_THROW(validate(ext));
}

TEST(Pipeline, WritesStampedArtifacts) {
  fs::path out = scratch("artifacts");
  RunConfig c = c17_config(out);
  std::ostringstream log;
  auto reports = cmd_pipeline(c, log);
  ASSERT_EQ(reports.size(), 6u);
  for (const char* f : {"baseline.layout.json", "protected.layout.json", "plan.json", "M3.feol.json", "M3.beol.json",
                        "M3.opps.json", "M3.original.attack.json", "M4.protected.attack.json", "metrics.json",
                        "metrics.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  Json m = read_json_file((out / "metrics.json").string());
  EXPECT_EQ(m["config_hash"], config_hash(c));
  EXPECT_EQ(m["seed"], 42);
  EXPECT_FALSE(m["config"].contains("output_dir"));
  EXPECT_EQ(m["reports"].size(), 6u);
  std::istringstream csv(read_text_file((out / "metrics.csv").string()));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, metrics_csv_header());
  // The layout document reloads to the same geometry.
  RoutedLayout back = layout_from_json(read_json_file((out / "protected.layout.json").string()));
  Design d = prepare_design(c);
  auto prot = protect(d, c.strategies, c.lift_ratio, c.budgets, c);
  EXPECT_EQ(back.routes, prot.layout.routes);
  fs::remove_all(out);
}

TEST(Pipeline, RepeatRunsAreByteIdentical) {
  fs::path a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream log;
  cmd_pipeline(c17_config(a), log);
  cmd_pipeline(c17_config(b), log);
  auto fa = read_dir(a), fb = read_dir(b);
  EXPECT_EQ(fa.size(), fb.size());
  for (const auto& [name, text] : fa) EXPECT_EQ(text, fb[name]) << name;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Pipeline, UnprotectedTinyDesignIsFullyRecovered) {
  // A single AND gate routes entirely on M1-M3, so nothing is hidden.
  fs::path dir = scratch("and");
  fs::create_directories(dir);
  write_text_file((dir / "and2.bench").string(), "INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n");
  RunConfig c;
  c.input = (dir / "and2.bench").string();
  c.strategies = {"NONE"};
  c.output_dir = (dir / "out").string();
  std::ostringstream log;
  auto reports = cmd_pipeline(c, log);
  for (const auto& r : reports) {
    EXPECT_DOUBLE_EQ(r.pnr, 100.0);
    EXPECT_EQ(r.opps.total, 0u);
    EXPECT_DOUBLE_EQ(r.oer, 0.0);
  }
  fs::remove_all(dir);
}

TEST(Pipeline, StageErrorsNameTheStage) {
  RunConfig c;
  c.input = "/nonexistent/none.bench";
  c.output_dir = scratch("err").string();
  std::ostringstream log;
  try {
    cmd_pipeline(c, log);
    FAIL() << "no error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "parse");
    EXPECT_EQ(std::string(e.what()).rfind("[parse] ", 0), 0u);
  }
  fs::remove_all(c.output_dir);
}

TEST(Pipeline, OutputRootFromEnvironment) {
  RunConfig c;
  c.output_dir = "rel";
  ::setenv("SPLITLIFT_OUT_ROOT", "/tmp/root", 1);
  EXPECT_EQ(resolve_output_dir(c), fs::path("/tmp/root/rel"));
  c.output_dir = "/abs";
  EXPECT_EQ(resolve_output_dir(c), fs::path("/abs"));
  ::unsetenv("SPLITLIFT_OUT_ROOT");
  c.output_dir = "rel";
  EXPECT_EQ(resolve_output_dir(c), fs::path("rel"));
}

TEST(Commands, AttackAndEvalDocumentsRoundTrip) {
  fs::path out = scratch("cmds");
  RunConfig c = c17_config(out);
  std::ostringstream log;
  auto reports = cmd_pipeline(c, log);
  auto inf = cmd_attack((out / "M3.feol.json").string(), "flow", (out / "again.attack.json").string(), AttackConfig{});
  Json stored = read_json_file((out / "M3.protected.attack.json").string());
  EXPECT_EQ(inferred_from_json(stored).connection, inf.connection);
  auto r = cmd_eval((out / "protected.layout.json").string(), 3, (out / "again.attack.json").string(), 256, 42,
                    (out / "eval.json").string());
  const MetricsReport* pipeline_row = nullptr;
  for (const auto& x : reports)
    if (x.variant == "protected" && x.split_layer == 3) pipeline_row = &x;
  ASSERT_NE(pipeline_row, nullptr);
  EXPECT_DOUBLE_EQ(r.pnr, pipeline_row->pnr);
  EXPECT_DOUBLE_EQ(r.hd, pipeline_row->hd);
  EXPECT_THROW(cmd_attack((out / "M3.feol.json").string(), "guess", (out / "x.json").string(), AttackConfig{}),
               StageError);
  fs::remove_all(out);
}

TEST(Sweeps, SplitSweepTrendsOnC432) {
  RunConfig c;
  c.input = bench_path("c432");
  Design d = prepare_design(c);
  SplitSweep s = sweep_split(d, c, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  EXPECT_TRUE(s.opp_nonincreasing.at("original"));
  EXPECT_TRUE(s.pnr_nondecreasing.at("original"));
  for (const auto& row : s.rows)
    if (row.variant == "original" && row.split_layer == 10) EXPECT_DOUBLE_EQ(row.pnr, 100.0);
}

TEST(Sweeps, CompareStrategiesRowsAndHash) {
  RunConfig c;
  c.input = bench_path("c432");
  c.split_layers = {4};
  Design d = prepare_design(c);
  auto rows = compare_strategies(d, c);
  std::map<std::string, std::size_t> opps;
  for (const auto& r : rows) {
    EXPECT_EQ(r.netlist_hash, netlist_hash(*d.netlist));
    opps[r.strategy] = r.opps.total;
  }
  ASSERT_EQ(opps.size(), 4u);
  EXPECT_EQ(rows.front().strategy, "ORIGINAL");
  EXPECT_EQ(rows.front().nets_lifted, 0u);
}
