#include "pspin/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <cstdio>

#include "pspin/error.hpp"
#include "pspin/parallel.hpp"
#include "pspin/rng.hpp"

#ifndef PSPIN_VERSION
#define PSPIN_VERSION "unknown"
#endif

namespace pspin {

namespace {

constexpr int kC2Samples = 40;

double l2_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

void require_dims(int p, int n) {
  if (p < 2) throw InvalidArgument("p must be >= 2");
  if (n < 1) throw InvalidArgument("N must be >= 1");
  checked_entry_count(p, n);
}

}  // namespace

std::string build_version() { return PSPIN_VERSION; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::prescribed: return "prescribed";
    case InitKind::zeros: return "zeros";
    case InitKind::uniform: return "uniform";
  }
  return "prescribed";
}

InitKind init_kind_from_string(const std::string& s) {
  if (s == "prescribed") return InitKind::prescribed;
  if (s == "zeros") return InitKind::zeros;
  if (s == "uniform") return InitKind::uniform;
  throw InvalidArgument("init must be 'prescribed', 'zeros' or 'uniform', got '" + s + "'");
}

BuiltSchedule build_schedule(const ScheduleConfig& cfg, int p, int n, std::uint64_t init_seed) {
  if (cfg.T < 0) throw InvalidArgument("schedule: T must be >= 0");
  if (cfg.T == 0) {
    // The concrete schedules need T >= 1; an empty run only needs U^0 and M.
    ScheduleConfig one = cfg;
    one.T = 1;
    auto built = build_schedule(one, p, n, init_seed);
    const AmpSchedule& s = built.schedule;
    AmpSchedule empty(s.name(), 0, s.truncation_M(), s.zeta(),
                      [s](int t, std::span<const double> h) { return s.f(t, h); },
                      [s](int t, double y, std::span<const double> h, const StepContext& c) {
                        return s.F(t, y, h, c);
                      },
                      s.needs_symmetric_tensor());
    return {std::move(empty), std::move(built.u0)};
  }
  std::vector<double> u0(static_cast<std::size_t>(std::max(n, 0)), 0.0);
  if (cfg.init == InitKind::uniform) {
    CounterStream rng(init_seed);
    for (auto& x : u0) x = rng.uniform(-1.0, 1.0);
  }
  if (cfg.schedule == "tap") {
    TapConfig tc{.beta = cfg.beta,
                 .q = cfg.q,
                 .a = cfg.a,
                 .T = cfg.T,
                 .M = cfg.M,
                 .data_driven_a = cfg.data_driven_a,
                 .order = p};
    auto [schedule, prescribed] = tap_schedule(tc, n);
    if (cfg.init == InitKind::prescribed) u0 = std::move(prescribed);
    return {std::move(schedule), std::move(u0)};
  }
  if (cfg.schedule == "gd") {
    GdConfig gc{.eta = cfg.eta, .direction = cfg.direction, .T = cfg.T, .M = cfg.M, .order = p};
    return {gd_schedule(gc, n), std::move(u0)};
  }
  throw InvalidArgument("schedule must be 'tap' or 'gd', got '" + cfg.schedule + "'");
}

double stability_constant(double zeta, double c2_hat) {
  return (1.0 + zeta * zeta) * (1.0 + zeta * c2_hat) + 1.0;
}

StabilityReport run_stability(int p, int n, const ScheduleConfig& sched,
                              const Perturbation& perturbation, std::uint64_t seed) {
  require_dims(p, n);
  if (perturbation.pair_count < 1) throw InvalidArgument("stability: pair_count must be >= 1");
  if (!perturbation.independent &&
      !(perturbation.tau_small >= 0.0 && perturbation.tau_small <= 1.0)) {
    throw InvalidArgument("stability: tau_small must lie in [0, 1]");
  }
  const auto pairs = static_cast<std::size_t>(perturbation.pair_count);
  std::vector<std::vector<StabilityRecord>> per_pair(pairs);

  parallel_for(pairs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto b = sample_gaussian(p, n, derive_seed(seed, "stability/B", k));
      const auto fresh = sample_gaussian(p, n, derive_seed(seed, "stability/fresh", k));
      const auto bhat = perturbation.independent ? fresh
                                                 : interpolate(b, fresh, perturbation.tau_small);
      const auto built = build_schedule(sched, p, n, derive_seed(seed, "stability/U0", k));
      const auto tr = run_iterations(b, built.schedule, built.u0);
      const auto trh = run_iterations(bhat, built.schedule, built.u0);

      const double op = frobenius_norm(difference(bhat, b));
      const double M = built.schedule.truncation_M();
      const double c2 =
          estimate_c2(bhat, M, kC2Samples, derive_seed(seed, "stability/c2", k)).c2_hat;
      const double zeta = built.schedule.zeta();
      const double K = stability_constant(zeta, c2);
      const int T = built.schedule.horizon();
      const double nn = n;
      const double statement =
          std::pow(K, T) * op * std::pow(zeta * M * std::sqrt(nn * T), p - 1);

      double acc = 0.0;
      for (int t = 0; t <= T; ++t) {
        const auto& u = tr.U[static_cast<std::size_t>(t)];
        const auto& uh = trh.U[static_cast<std::size_t>(t)];
        const double d = l2_distance(u, uh);
        acc += d * d;
        StabilityRecord r;
        r.pair = static_cast<int>(k);
        r.t = t;
        r.beta_N_t = std::sqrt(acc);
        r.v_dev_t = l2_distance(project_hypercube(u), project_hypercube(uh));
        r.op_dist = op;
        r.K = K;
        r.c2_hat = c2;
        r.bound_statement = statement;
        r.bound_proof = std::pow(K * (c2 + 1.0), t) * op * std::pow(zeta * M * std::sqrt(nn * t), p);
        r.bound = std::max(r.bound_statement, r.bound_proof);
        per_pair[k].push_back(r);
      }
    }
  });

  StabilityReport report;
  for (const auto& recs : per_pair) {
    for (const auto& r : recs) {
      if (r.v_dev_t > r.bound) {
        report.violations.push_back("pair " + std::to_string(r.pair) + ", step " +
                                    std::to_string(r.t) + ": observed " +
                                    std::to_string(r.v_dev_t) + " > bound " +
                                    std::to_string(r.bound));
      }
      report.records.push_back(r);
    }
  }
  return report;
}

std::vector<double> stability_sweep(int p, int n, const ScheduleConfig& sched,
                                    const std::vector<double>& taus, int seeds,
                                    std::uint64_t seed) {
  require_dims(p, n);
  if (seeds < 1) throw InvalidArgument("stability_sweep: seeds must be >= 1");
  for (double tau : taus) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("stability_sweep: tau must lie in [0, 1]");
  }
  const auto reps = static_cast<std::size_t>(seeds);
  std::vector<std::vector<double>> dev(taus.size(), std::vector<double>(reps));
  parallel_for(reps, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const auto a = sample_gaussian(p, n, derive_seed(seed, "sweep/A", r));
      const auto fresh = sample_gaussian(p, n, derive_seed(seed, "sweep/fresh", r));
      const auto built = build_schedule(sched, p, n, derive_seed(seed, "sweep/U0", r));
      const auto v = run_iterations(a, built.schedule, built.u0).V;
      for (std::size_t k = 0; k < taus.size(); ++k) {
        const auto vt = run_iterations(interpolate(a, fresh, taus[k]), built.schedule, built.u0).V;
        dev[k][r] = l2_distance(v, vt) / std::sqrt(static_cast<double>(n));
      }
    }
  });
  std::vector<double> out;
  for (auto& d : dev) out.push_back(median(d));
  return out;
}

std::vector<PathRecord> run_overlap_path(int p, int n, const ScheduleConfig& sched,
                                         double delta, double mu_probe, std::uint64_t seed,
                                         PathOptions options) {
  require_dims(p, n);
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("path: delta must lie in (0, 1]");
  const long steps = std::lround(1.0 / delta);
  if (std::abs(static_cast<double>(steps) * delta - 1.0) > 1e-9) {
    throw InvalidArgument("path: 1/delta must be an integer");
  }
  const auto a = sample_gaussian(p, n, derive_seed(seed, "path/A"));
  const auto ahat =
      options.identical_hat ? a : sample_gaussian(p, n, derive_seed(seed, "path/Ahat"));
  const auto built = build_schedule(sched, p, n, derive_seed(seed, "path/U0"));

  const auto count = static_cast<std::size_t>(steps) + 1;
  std::vector<std::vector<double>> vs(count);
  std::vector<double> energies(count);
  std::vector<double> taus(count);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      taus[k] = static_cast<double>(k) / static_cast<double>(steps);
      // With Ahat = A the family is A itself; the literal mix would rescale it.
      const auto at = options.identical_hat ? a : interpolate(a, ahat, taus[k]);
      vs[k] = run_iterations(at, built.schedule, built.u0).V;
      energies[k] = energy(at, vs[k]);
    }
  });

  const double lowest = *std::min_element(energies.begin(), energies.end());
  std::vector<PathRecord> path(count);
  for (std::size_t k = 0; k < count; ++k) {
    auto& r = path[k];
    r.n = static_cast<int>(k);
    r.tau = taus[k];
    r.overlap = overlap(vs[0], vs[k]);
    r.energy = energies[k];
    r.jump = (k == 0) ? 0.0 : std::abs(r.overlap - path[k - 1].overlap);
    r.within_mu = mu_probe >= 0.0 && r.energy <= lowest + mu_probe;
  }
  return path;
}

double max_jump(const std::vector<PathRecord>& path) {
  double m = 0.0;
  for (const auto& r : path) m = std::max(m, r.jump);
  return m;
}

std::string to_string(Quantity q) { return q == Quantity::eta_N ? "eta_N" : "A_of_V"; }

Quantity quantity_from_string(const std::string& s) {
  if (s == "eta_N") return Quantity::eta_N;
  if (s == "A_of_V") return Quantity::A_of_V;
  throw InvalidArgument("quantity must be 'eta_N' or 'A_of_V', got '" + s + "'");
}

std::vector<ConcentrationRecord> run_concentration(Quantity quantity, int p,
                                                   const std::vector<int>& n_list, int replicas,
                                                   std::uint64_t seed,
                                                   const ScheduleConfig& sched,
                                                   ConcentrationOptions options) {
  if (replicas < 1) throw InvalidArgument("concentration: replicas must be >= 1");
  if (n_list.empty()) throw InvalidArgument("concentration: empty N list");
  for (int n : n_list) {
    require_dims(p, n);
    if (quantity == Quantity::eta_N) check_enumeration_budget(p, n);
  }

  std::vector<ConcentrationRecord> out;
  for (int n : n_list) {
    const std::string tag = "concentration/" + to_string(quantity) + "/N" + std::to_string(n);
    ConcentrationRecord rec;
    rec.quantity = quantity;
    rec.N = n;
    rec.replicas = replicas;
    rec.values.assign(static_cast<std::size_t>(replicas), 0.0);
    parallel_for(rec.values.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        const std::size_t draw = options.shared_seed ? 0 : r;
        const auto a = sample_gaussian(p, n, derive_seed(seed, tag, draw));
        if (quantity == Quantity::eta_N) {
          rec.values[r] = brute_force_ground_state(a).eta_N;
        } else {
          const auto built = build_schedule(sched, p, n, derive_seed(seed, tag + "/U0", draw));
          rec.values[r] = energy(a, run_iterations(a, built.schedule, built.u0).V);
        }
      }
    });
    double sum = 0.0;
    for (double v : rec.values) sum += v;
    rec.empirical_mean = sum / replicas;
    rec.empirical_std = sample_stddev(rec.values);
    out.push_back(std::move(rec));
  }
  return out;
}

OgpReport run_ogp_experiment(const OgpConfig& cfg) {
  require_dims(cfg.p, cfg.N);
  const auto a = sample_gaussian(cfg.p, cfg.N, cfg.seed_A);
  const auto ahat = sample_gaussian(cfg.p, cfg.N, cfg.seed_Ahat);
  return ogp_scan(a, ahat, cfg.tau_grid, cfg.mu, cfg.min_width, cfg.bin_width);
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw InvalidArgument("median of an empty list");
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace pspin
