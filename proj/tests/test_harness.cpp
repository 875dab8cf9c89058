#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pspin/cli.hpp"
#include "pspin/error.hpp"
#include "pspin/harness.hpp"
#include "pspin/records_io.hpp"

using namespace pspin;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ScheduleConfig small_tap(int T = 3) {
  ScheduleConfig c;
  c.schedule = "tap";
  c.beta = 1.0;
  c.q = 0.5;
  c.a = {0.0};
  c.T = T;
  return c;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "pspin_harness_tests" / name;
  fs::remove_all(dir);
  return dir;
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pspin");
  std::ostringstream out, err;
  const int code = cli(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(read_text_file(p)); }

}  // namespace

TEST_CASE("stability: identical tensors and empty runs give zero deviation") {
  const auto same = run_stability(3, 6, small_tap(), {.pair_count = 3, .tau_small = 0.0}, 1);
  CHECK(same.all_hold());
  for (const auto& r : same.records) {
    CHECK(r.v_dev_t == 0.0);
    CHECK(r.beta_N_t == 0.0);
    CHECK(r.bound == 0.0);
  }
  const auto empty = run_stability(3, 6, small_tap(0), {.pair_count = 2, .independent = true}, 2);
  CHECK(empty.records.size() == 2);
  for (const auto& r : empty.records) CHECK(r.v_dev_t == 0.0);
}

TEST_CASE("stability: observed deviation stays below the recorded bound") {
  for (bool independent : {false, true}) {
    const auto rep =
        run_stability(4, 10, small_tap(4), {.pair_count = 4, .tau_small = 0.05, .independent = independent}, 3);
    CHECK(rep.all_hold());
    CHECK(rep.records.size() == 4 * 5);
    for (const auto& r : rep.records) {
      CHECK(r.v_dev_t <= r.beta_N_t + 1e-12);
      CHECK(r.bound >= 0.0);
      CHECK(r.bound == std::max(r.bound_statement, r.bound_proof));
      CHECK(r.K >= 1.0);
    }
  }
  CHECK(stability_constant(1.0, 2.0) == 2.0 * 3.0 + 1.0);
}

TEST_CASE("overlap path endpoints") {
  const auto same = run_overlap_path(3, 8, small_tap(), 0.25, -1.0, 4, {.identical_hat = true});
  REQUIRE(same.size() == 5);
  for (const auto& r : same) {
    CHECK(r.overlap == 1.0);
    CHECK(r.jump == 0.0);
    CHECK_FALSE(r.within_mu);
  }
  const auto path = run_overlap_path(3, 8, small_tap(), 0.125, 0.5, 5);
  CHECK(path.front().overlap == 1.0);
  CHECK(path.front().tau == 0.0);
  CHECK(path.back().tau == 1.0);
  bool any_within = false;
  for (const auto& r : path) {
    CHECK(r.overlap >= 0.0);
    CHECK(r.overlap <= 1.0);
    any_within = any_within || r.within_mu;
  }
  CHECK(any_within);
  CHECK_THROWS_AS(run_overlap_path(3, 8, small_tap(), 0.3, -1.0, 5), InvalidArgument);
}

TEST_CASE("concentration degenerate controls") {
  const auto shared = run_concentration(Quantity::eta_N, 3, {6}, 5, 1, {}, {.shared_seed = true});
  REQUIRE(shared.size() == 1);
  CHECK(shared[0].empirical_std == 0.0);
  CHECK(shared[0].values.size() == 5);

  ScheduleConfig gd;
  gd.schedule = "gd";
  gd.eta = {0.3};
  gd.init = InitKind::zeros;
  const auto zero = run_concentration(Quantity::A_of_V, 4, {5, 7}, 4, 2, gd);
  for (const auto& r : zero) {
    CHECK(r.empirical_std == 0.0);
    CHECK(r.empirical_mean == 0.0);
  }
  CHECK(sample_stddev({1.0, 3.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(median({3.0, 1.0, 2.0, 10.0}) == 2.5);
}

TEST_CASE("OGP experiment passes through to the scanner") {
  OgpConfig cfg;
  cfg.p = 4;
  cfg.N = 8;
  cfg.seed_A = cfg.seed_Ahat = 17;
  cfg.tau_grid = {0.0};
  cfg.mu = 0.0;
  for (double o : run_ogp_experiment(cfg).overlap_values()) CHECK(o == 1.0);

  cfg.seed_Ahat = 18;
  cfg.tau_grid = {0.0, 0.5, 1.0};
  cfg.mu = 0.05;
  const auto r = run_ogp_experiment(cfg);
  const auto direct = ogp_scan(sample_gaussian(4, 8, 17), sample_gaussian(4, 8, 18), cfg.tau_grid,
                               cfg.mu, cfg.min_width, cfg.bin_width);
  CHECK(json(r) == json(direct));
}

TEST_CASE("records survive JSON and CSV round trips") {
  const auto stab = run_stability(3, 6, small_tap(), {.pair_count = 2}, 9).records;
  CHECK(parse_stability_csv(stability_csv(stab)) == stab);
  for (const auto& r : stab) CHECK(json(r).get<StabilityRecord>() == r);

  const auto path = run_overlap_path(3, 6, small_tap(), 0.25, 0.1, 9);
  RunMetadata meta{7, "gen", "1.0", "2026-01-01T00:00:00Z", "abc"};
  CHECK(parse_path_csv(path_csv(path, &meta)) == path);
  for (const auto& r : path) CHECK(json(r).get<PathRecord>() == r);
  CHECK(json(meta).get<RunMetadata>() == meta);

  const auto conc = run_concentration(Quantity::eta_N, 3, {5}, 6, 9);
  CHECK(parse_concentration_csv(concentration_csv(conc[0])) == conc[0].values);
  CHECK(json(conc[0]).get<ConcentrationRecord>() == conc[0]);

  OgpConfig cfg;
  cfg.N = 7;
  const auto ogp = run_ogp_experiment(cfg);
  const auto back = parse_overlaps_csv(overlaps_csv(ogp.samples));
  REQUIRE(back.size() == ogp.samples.size());
  for (std::size_t k = 0; k < back.size(); ++k) CHECK(json(back[k]) == json(ogp.samples[k]));
  CHECK(json(json(ogp).get<OgpReport>()) == json(ogp));

  const auto chaos = chaos_check(4, 6, 3, 0.0, 2);
  CHECK(json(json(chaos).get<ChaosReport>()) == json(chaos));
  const auto gs = brute_force_ground_state(sample_gaussian(4, 6, 1));
  CHECK(json(json(gs).get<GroundStateResult>()) == json(gs));

  ScheduleConfig sc = small_tap();
  sc.direction = GdDirection::ascent;
  sc.init = InitKind::uniform;
  CHECK(json(sc).get<ScheduleConfig>() == sc);

  for (double x : {0.1, -0.0, 1e-300, 5e-324, 1.0 / 3.0, 123456789.123}) {
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK_THROWS_AS(parse_stability_csv("bad,header\n"), InvalidArgument);
}

TEST_CASE("cli: ground-state matches the library") {
  const auto dir = scratch("gs");
  const auto run = run_cli({"ground-state", "--p", "2", "--n", "2", "--seed", "7", "--out", dir.string()});
  REQUIRE(run.code == 0);
  const auto report = read_json(dir / "report.json");
  CHECK(report.at("eta_N").get<double>() == brute_force_ground_state(sample_gaussian(2, 2, 7)).eta_N);
  CHECK(report.at("meta").at("master_seed").get<std::uint64_t>() == 7);
  CHECK(fs::exists(dir / "meta.json"));
}

TEST_CASE("cli: usage and budget errors") {
  const auto unknown = run_cli({"frobnicate"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("Config JSON") != std::string::npos);
  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"ground-state", "--p", "two"}).code == 1);
  CHECK(run_cli({"path", "--delta", "0.3", "--out", scratch("bad").string()}).code == 1);

  const auto budget = run_cli({"ground-state", "--p", "4", "--n", "40", "--out", scratch("b").string()});
  CHECK(budget.code == 2);
  CHECK(budget.err.find("budget") != std::string::npos);
}

TEST_CASE("cli: amp-run with T = 0 reports the clamped U^0") {
  const auto dir = scratch("amp0");
  const auto cfg = dir.parent_path() / "amp0.json";
  write_text_file(cfg, R"({"p": 3, "n": 2, "u0": [2.5, -0.3], "schedule": {"schedule": "gd", "M": 3.0, "T": 0}})");
  const auto run = run_cli({"amp-run", "--config", cfg.string(), "--out", dir.string()});
  REQUIRE(run.code == 0);
  const auto report = read_json(dir / "report.json");
  CHECK(report.at("V").get<std::vector<double>>() == std::vector<double>{1.0, -0.3});
  CHECK(read_text_file(dir / "trace.csv").rfind("# meta ", 0) == 0);
}

TEST_CASE("cli: reruns are identical apart from the timestamp") {
  std::vector<json> reports;
  for (const char* threads : {"1", "3"}) {
    const auto dir = scratch(std::string("ogp") + threads);
    const auto run = run_cli({"ogp-scan", "--p", "4", "--n", "7", "--seed", "11", "--mu", "0.05",
                              "--threads", threads, "--out", dir.string()});
    REQUIRE(run.code == 0);
    auto r = read_json(dir / "report.json");
    r["meta"].erase("timestamp");
    reports.push_back(r);
    CHECK(fs::exists(dir / "overlaps.csv"));
  }
  CHECK(reports[0] == reports[1]);
}

TEST_CASE("cli: every subcommand runs on a small config") {
  const auto dir = scratch("all");
  const auto cfg = dir.parent_path() / "all.json";
  write_text_file(cfg, R"({"p": 3, "n": 6, "seed": 3, "pairs": 3, "replicas": 4, "delta": 0.25,
                           "null_trials": 1000, "n_list": [4, 6], "tau_sweep": [0.1, 0.01],
                           "sweep_seeds": 3, "schedule": {"T": 2}})");
  for (const char* cmd : {"sample", "amp-run", "round", "ground-state", "ogp-scan", "chaos", "path",
                          "stability", "concentrate"}) {
    const auto out = dir / cmd;
    const auto run = run_cli({cmd, "--config", cfg.string(), "--out", out.string()});
    CHECK_MESSAGE(run.code == 0, cmd, ": ", run.err);
    CHECK(fs::exists(out / "report.json"));
  }
  CHECK(fs::exists(dir / "stability" / "stability.csv"));
  CHECK(fs::exists(dir / "concentrate" / "concentration_N4.csv"));
  CHECK(fs::exists(dir / "path" / "path.csv"));
  CHECK(fs::exists(dir / "round" / "rounding.csv"));

  const auto loaded = run_cli({"ground-state", "--config", cfg.string(), "--out", (dir / "gs2").string()});
  REQUIRE(loaded.code == 0);
  const auto tensor_cfg = dir / "tensor.json";
  write_text_file(tensor_cfg, json{{"tensor", (dir / "sample" / "tensor.bin").string()}}.dump());
  const auto from_file =
      run_cli({"ground-state", "--config", tensor_cfg.string(), "--out", (dir / "gs3").string()});
  REQUIRE(from_file.code == 0);
  CHECK(read_json(dir / "gs2" / "report.json").at("eta_N") ==
        read_json(dir / "gs3" / "report.json").at("eta_N"));
}
