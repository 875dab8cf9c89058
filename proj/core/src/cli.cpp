#include "pspin/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pspin/error.hpp"
#include "pspin/harness.hpp"
#include "pspin/oracle.hpp"
#include "pspin/parallel.hpp"
#include "pspin/records_io.hpp"
#include "pspin/rng.hpp"
#include "pspin/tensor_io.hpp"

namespace pspin {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const char* const kSchema = R"(Config JSON (every key optional; flags override):
{
  "p": 4,                 order of the tensor (--p)
  "n": 12,                dimension N (--n)
  "seed": 1,              master seed (--seed)
  "threads": 1,           worker threads (--threads)
  "tensor": "path.bin",   load a tensor written by `sample` instead of sampling
  "schedule": {           AMP schedule
    "schedule": "tap" | "gd",
    "beta": 1.0, "q": 0.5, "a": [0.0], "data_driven_a": false,
    "eta": [0.1], "direction": "descent" | "ascent",
    "T": 5 (--t), "M": 1.0,
    "init": "prescribed" | "zeros" | "uniform"
  },
  "u0": [...],            explicit U^0 (amp-run, round)
  "v": [...],             explicit V to round (round)
  "full_trace": false,    include every U^t in the amp-run report
  "mu": 0.05,             near-optimality window (--mu)
  "tau_grid": [0, 0.25, 0.5, 0.75, 1],  ogp-scan grid
  "seed_A": ..., "seed_Ahat": ...,      ogp-scan tensor seeds
  "min_width": 0.05, "bin_width": 0.02 (--bin-width),
  "pairs": 200,           chaos pairs / stability pairs (--pairs)
  "identical": false,     degenerate control (chaos, path)
  "null_trials": 100000,  chaos null-model draws
  "delta": 0.125,         path grid step, 1/delta integer (--delta)
  "mu_probe": -1,         path near-optimality flag, < 0 disables
  "tau_small": 0.01, "independent": false,   stability perturbation
  "tau_sweep": [], "sweep_seeds": 20,        stability median sweep
  "quantity": "eta_N" | "A_of_V", "n_list": [6, 12], "replicas": 200 (--replicas),
  "shared_seed": false    concentration degenerate control
}
Subcommands: sample amp-run round ground-state ogp-scan chaos path stability concentrate
)";

struct Outputs {
  json report = json::object();
  std::map<std::string, std::string> csv;
  bool assertion_failed = false;
};

template <class T>
T get(const json& cfg, const std::string& key, T fallback) {
  return cfg.contains(key) ? cfg.at(key).get<T>() : fallback;
}

std::uint64_t seed_of(const json& cfg) { return get<std::uint64_t>(cfg, "seed", 1); }

ScheduleConfig schedule_of(const json& cfg) {
  ScheduleConfig s;
  if (cfg.contains("schedule")) cfg.at("schedule").get_to(s);
  return s;
}

CouplingTensor tensor_of(const json& cfg) {
  if (cfg.contains("tensor")) return read_tensor(cfg.at("tensor").get<std::string>());
  return sample_gaussian(get(cfg, "p", 4), get(cfg, "n", 12), seed_of(cfg));
}

std::vector<double> u0_of(const json& cfg, const BuiltSchedule& built) {
  return cfg.contains("u0") ? cfg.at("u0").get<std::vector<double>>() : built.u0;
}

Outputs cmd_sample(const json& cfg, const fs::path& out) {
  const auto a = tensor_of(cfg);
  fs::create_directories(out);
  write_tensor(out / "tensor.bin", a);
  const auto nr = norms(a, 4, 50, derive_seed(seed_of(cfg), "sample/norms"));
  Outputs o;
  o.report = {{"header", tensor_header(a)},
              {"frobenius", nr.frobenius},
              {"op_lower", nr.op_lower},
              {"op_upper", nr.op_upper},
              {"tensor_file", "tensor.bin"}};
  return o;
}

Outputs cmd_amp_run(const json& cfg, const fs::path&, const RunMetadata& meta) {
  const auto a = tensor_of(cfg);
  const auto built =
      build_schedule(schedule_of(cfg), a.order(), a.dim(), derive_seed(seed_of(cfg), "amp-run/U0"));
  const auto trace = run_iterations(a, built.schedule, u0_of(cfg, built));
  Outputs o;
  o.report = trace_to_json(trace, get(cfg, "full_trace", false));
  o.report["energy_V"] = energy(a, trace.V);
  o.report["schedule_check"] =
      verify_schedule(built.schedule, 1000, 1e-6, derive_seed(seed_of(cfg), "amp-run/verify"));
  o.csv["trace.csv"] = trace_csv(trace, &meta);
  return o;
}

Outputs cmd_round(const json& cfg, const fs::path&, const RunMetadata& meta) {
  const auto a = tensor_of(cfg);
  std::vector<double> v;
  if (cfg.contains("v")) {
    v = cfg.at("v").get<std::vector<double>>();
  } else {
    const auto built = build_schedule(schedule_of(cfg), a.order(), a.dim(),
                                      derive_seed(seed_of(cfg), "amp-run/U0"));
    v = run_iterations(a, built.schedule, u0_of(cfg, built)).V;
  }
  const auto r = sign_round(a, v);
  Outputs o;
  o.report = r;
  o.report["V"] = v;
  o.report["energy_before"] = r.objective_before / a.dim();
  o.report["energy_after"] = r.objective_after / a.dim();
  o.csv["rounding.csv"] = rounding_csv(r, &meta);
  return o;
}

Outputs cmd_ground_state(const json& cfg) {
  Outputs o;
  o.report = brute_force_ground_state(tensor_of(cfg));
  return o;
}

Outputs cmd_ogp_scan(const json& cfg, const RunMetadata& meta) {
  OgpConfig c;
  c.p = get(cfg, "p", c.p);
  c.N = get(cfg, "n", c.N);
  c.seed_A = get(cfg, "seed_A", derive_seed(seed_of(cfg), "ogp/A"));
  c.seed_Ahat = get(cfg, "seed_Ahat", derive_seed(seed_of(cfg), "ogp/Ahat"));
  c.tau_grid = get(cfg, "tau_grid", c.tau_grid);
  c.mu = get(cfg, "mu", c.mu);
  c.min_width = get(cfg, "min_width", c.min_width);
  c.bin_width = get(cfg, "bin_width", c.bin_width);
  const auto r = run_ogp_experiment(c);
  Outputs o;
  o.report = r;
  o.report["seed_A"] = c.seed_A;
  o.report["seed_Ahat"] = c.seed_Ahat;
  o.csv["overlaps.csv"] = overlaps_csv(r.samples, &meta);
  return o;
}

Outputs cmd_chaos(const json& cfg, const RunMetadata& meta) {
  const int n = get(cfg, "n", 12);
  const int pairs = get(cfg, "pairs", 200);
  const auto seed = seed_of(cfg);
  const auto r = chaos_check(get(cfg, "p", 4), n, pairs, get(cfg, "mu", 0.0), seed,
                             ChaosOptions{.identical_pairs = get(cfg, "identical", false)});
  const auto null = simulate_null_overlaps(n, get(cfg, "null_trials", 100000),
                                           derive_seed(seed, "chaos/null"));
  Outputs o;
  o.report = r;
  o.report["null_model"] = {{"mean", null.mean},
                            {"stddev", null.stddev},
                            {"trials", null.trials},
                            {"threshold", null.threshold(pairs)}};
  o.report["below_threshold"] = r.mean_abs_overlap < null.threshold(pairs);
  std::string text = "# meta " + json(meta).dump() + "\npair,overlap\n";
  for (std::size_t k = 0; k < r.overlaps.size(); ++k) {
    text += std::to_string(k) + "," + format_double(r.overlaps[k]) + "\n";
  }
  o.csv["chaos.csv"] = text;
  return o;
}

Outputs cmd_path(const json& cfg, const RunMetadata& meta) {
  const auto path = run_overlap_path(get(cfg, "p", 4), get(cfg, "n", 12), schedule_of(cfg),
                                     get(cfg, "delta", 0.125), get(cfg, "mu_probe", -1.0),
                                     seed_of(cfg),
                                     PathOptions{.identical_hat = get(cfg, "identical", false)});
  Outputs o;
  o.report = {{"records", path},
              {"max_jump", max_jump(path)},
              {"terminal_overlap", path.back().overlap}};
  o.csv["path.csv"] = path_csv(path, &meta);
  return o;
}

Outputs cmd_stability(const json& cfg, const RunMetadata& meta) {
  const int p = get(cfg, "p", 4);
  const int n = get(cfg, "n", 12);
  const auto sched = schedule_of(cfg);
  Perturbation pert;
  pert.pair_count = get(cfg, "pairs", pert.pair_count);
  pert.tau_small = get(cfg, "tau_small", pert.tau_small);
  pert.independent = get(cfg, "independent", pert.independent);
  const auto r = run_stability(p, n, sched, pert, seed_of(cfg));
  Outputs o;
  o.report = {{"records", r.records}, {"violations", r.violations}, {"all_hold", r.all_hold()}};
  const auto taus = get(cfg, "tau_sweep", std::vector<double>{});
  if (!taus.empty()) {
    o.report["tau_sweep"] = taus;
    o.report["sweep_medians"] =
        stability_sweep(p, n, sched, taus, get(cfg, "sweep_seeds", 20), seed_of(cfg));
  }
  o.csv["stability.csv"] = stability_csv(r.records, &meta);
  o.assertion_failed = !r.all_hold();
  return o;
}

Outputs cmd_concentrate(const json& cfg, const RunMetadata& meta) {
  const int n = get(cfg, "n", 12);
  const auto recs = run_concentration(
      quantity_from_string(get<std::string>(cfg, "quantity", "eta_N")), get(cfg, "p", 4),
      get(cfg, "n_list", std::vector<int>{n}), get(cfg, "replicas", 200), seed_of(cfg),
      schedule_of(cfg), ConcentrationOptions{.shared_seed = get(cfg, "shared_seed", false)});
  Outputs o;
  o.report = {{"records", recs}};
  for (const auto& r : recs) {
    o.csv["concentration_N" + std::to_string(r.N) + ".csv"] = concentration_csv(r, &meta);
  }
  return o;
}

// Top-level scalars of the report, for the terminal.
json summary_of(const json& report) {
  json s = json::object();
  for (const auto& [k, v] : report.items()) {
    if (v.is_primitive()) s[k] = v;
  }
  return s;
}

int usage_error(std::ostream& err, const std::string& what) {
  err << "error: " << what << "\n\n" << kSchema;
  return 1;
}

}  // namespace

std::string config_schema() { return kSchema; }

int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"p-spin AMP / ground-state experiment harness", "pspin"};
  app.fallthrough();
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = "pspin-run";
  std::optional<int> p, n, t, threads, pairs, replicas;
  std::optional<std::uint64_t> seed;
  std::optional<double> beta, mu, delta, bin_width;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--p", p, "tensor order");
  app.add_option("--n", n, "dimension N");
  app.add_option("--t", t, "AMP horizon T");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--beta", beta, "inverse temperature");
  app.add_option("--mu", mu, "near-optimality window");
  app.add_option("--delta", delta, "path grid step");
  app.add_option("--bin-width", bin_width, "overlap histogram bin width");
  app.add_option("--pairs", pairs, "tensor pairs");
  app.add_option("--replicas", replicas, "Monte Carlo replicas");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"sample", "draw a Gaussian tensor and write it to tensor.bin"},
      {"amp-run", "run an AMP schedule"},
      {"round", "sign-round an AMP output (or a given V)"},
      {"ground-state", "exhaustive ground state"},
      {"ogp-scan", "overlap scan over an interpolated family"},
      {"chaos", "ground-state overlaps of independent pairs"},
      {"path", "AMP overlap path along the interpolation"},
      {"stability", "iterate deviation vs. the stability bound"},
      {"concentrate", "Monte Carlo concentration of eta_N or A(V)/N"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help() << "\n" << kSchema;
    return 0;
  } catch (const CLI::ParseError& e) {
    return usage_error(err, e.what());
  }
  const std::string command = app.get_subcommands().front()->get_name();

  json cfg = json::object();
  try {
    if (!config_path.empty()) cfg = json::parse(read_text_file(config_path));
    if (!cfg.is_object()) return usage_error(err, "config must be a JSON object");
    if (p) cfg["p"] = *p;
    if (n) cfg["n"] = *n;
    if (seed) cfg["seed"] = *seed;
    if (mu) cfg["mu"] = *mu;
    if (delta) cfg["delta"] = *delta;
    if (bin_width) cfg["bin_width"] = *bin_width;
    if (pairs) cfg["pairs"] = *pairs;
    if (replicas) cfg["replicas"] = *replicas;
    if (threads) cfg["threads"] = *threads;
    if (t || beta) {
      if (!cfg.contains("schedule")) cfg["schedule"] = json::object();
      if (t) cfg["schedule"]["T"] = *t;
      if (beta) cfg["schedule"]["beta"] = *beta;
    }
    set_num_threads(get(cfg, "threads", 1));
  } catch (const json::exception& e) {
    return usage_error(err, std::string("bad config: ") + e.what());
  } catch (const Error& e) {
    return usage_error(err, e.what());
  }

  json digest_input = cfg;
  digest_input.erase("threads");
  digest_input["command"] = command;
  RunMetadata meta{.master_seed = 0,
                   .generator_id = std::string(kGeneratorId),
                   .build_version = build_version(),
                   .timestamp = utc_timestamp(),
                   .config_digest = fnv1a_hex(digest_input.dump())};

  const fs::path out_path = out_dir;
  try {
    meta.master_seed = seed_of(cfg);
    Outputs o;
    if (command == "sample") o = cmd_sample(cfg, out_path);
    else if (command == "amp-run") o = cmd_amp_run(cfg, out_path, meta);
    else if (command == "round") o = cmd_round(cfg, out_path, meta);
    else if (command == "ground-state") o = cmd_ground_state(cfg);
    else if (command == "ogp-scan") o = cmd_ogp_scan(cfg, meta);
    else if (command == "chaos") o = cmd_chaos(cfg, meta);
    else if (command == "path") o = cmd_path(cfg, meta);
    else if (command == "stability") o = cmd_stability(cfg, meta);
    else o = cmd_concentrate(cfg, meta);

    json report = o.report;
    report["meta"] = meta;
    report["command"] = command;
    json meta_file = meta;
    meta_file["config"] = cfg;
    write_text_file(out_path / "meta.json", meta_file.dump(2) + "\n");
    write_text_file(out_path / "report.json", report.dump(2) + "\n");
    for (const auto& [name, text] : o.csv) write_text_file(out_path / name, text);

    json summary = summary_of(report);
    summary["out"] = out_path.string();
    out << summary.dump() << "\n";
    if (o.assertion_failed) {
      err << "assertion failed: see " << (out_path / "report.json").string() << "\n";
      return 2;
    }
    return 0;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return 2;
  } catch (const AssertionViolation& e) {
    err << "assertion failed: " << e.what() << "\n";
    return 2;
  } catch (const NonFiniteValue& e) {
    err << "non-finite value: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    return usage_error(err, std::string("bad config: ") + e.what());
  } catch (const Error& e) {
    return usage_error(err, e.what());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cli(args, std::cout, std::cerr);
}

}  // namespace pspin
