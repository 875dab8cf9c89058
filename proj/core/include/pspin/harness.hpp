#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pspin/amp.hpp"
#include "pspin/oracle.hpp"
#include "pspin/schedules.hpp"
#include "pspin/tensor.hpp"

namespace pspin {

struct RunMetadata {
  std::uint64_t master_seed = 0;
  std::string generator_id;
  std::string build_version;
  std::string timestamp;      // ISO-8601 UTC
  std::string config_digest;  // FNV-1a 64 of the canonical config, hex

  bool operator==(const RunMetadata&) const = default;
};

std::string build_version();
std::string utc_timestamp();
std::string fnv1a_hex(std::string_view bytes);

/// How U^0 is chosen: `prescribed` is q 1_N for TAP and zeros for GD.
enum class InitKind { prescribed, zeros, uniform };

std::string to_string(InitKind k);
InitKind init_kind_from_string(const std::string& s);

/// JSON-facing schedule description: {schedule, beta, q, a, eta, direction, T, M}.
struct ScheduleConfig {
  std::string schedule = "tap";  // "tap" | "gd"
  double beta = 1.0;
  double q = 0.5;
  std::vector<double> a{0.0};
  std::vector<double> eta{0.1};
  GdDirection direction = GdDirection::descent;
  int T = 5;
  double M = 1.0;
  bool data_driven_a = false;
  InitKind init = InitKind::prescribed;

  bool operator==(const ScheduleConfig&) const = default;
};

struct BuiltSchedule {
  AmpSchedule schedule;
  std::vector<double> u0;
};

/// Builds the schedule for order p and dimension n. `init_seed` feeds the
/// uniform initialization and is ignored otherwise.
BuiltSchedule build_schedule(const ScheduleConfig& cfg, int p, int n, std::uint64_t init_seed);

struct StabilityRecord {
  int pair = 0;
  int t = 0;
  double beta_N_t = 0.0;  // sqrt(sum_{s<=t} ||U^s - Uhat^s||^2)
  double v_dev_t = 0.0;   // ||Vhat^t - V^t||, V^t the clamp of U^t
  double op_dist = 0.0;   // Frobenius upper bound on ||Bhat - B||_op
  double bound = 0.0;     // max of the two variants below
  double bound_statement = 0.0;  // K^T op (zeta M sqrt(N T))^(p-1)
  double bound_proof = 0.0;      // (K (c2 + 1))^t op (zeta M sqrt(N t))^p
  double K = 0.0;
  double c2_hat = 0.0;

  bool operator==(const StabilityRecord&) const = default;
};

struct Perturbation {
  int pair_count = 10;
  double tau_small = 0.01;
  /// Draw Bhat independently instead of interpolating towards a fresh tensor.
  bool independent = false;
};

struct StabilityReport {
  std::vector<StabilityRecord> records;
  std::vector<std::string> violations;  // "pair k, step t: ..." when observed > bound
  bool all_hold() const { return violations.empty(); }
};

/// K = (1 + zeta^2)(1 + zeta c2_hat) + 1.
double stability_constant(double zeta, double c2_hat);

StabilityReport run_stability(int p, int n, const ScheduleConfig& sched,
                              const Perturbation& perturbation, std::uint64_t seed);

/// Median over `seeds` replicas of ||V(A_tau) - V(A)|| / sqrt(N), one value per tau.
std::vector<double> stability_sweep(int p, int n, const ScheduleConfig& sched,
                                    const std::vector<double>& taus, int seeds,
                                    std::uint64_t seed);

struct PathRecord {
  int n = 0;
  double tau = 0.0;
  double overlap = 0.0;  // overlap of V^{tau_n} with V^0
  double energy = 0.0;   // A_{tau_n}(V^{tau_n}) / N
  double jump = 0.0;     // |overlap_n - overlap_{n-1}|
  /// energy within mu_probe of the lowest energy seen on the path; false when disabled.
  bool within_mu = false;

  bool operator==(const PathRecord&) const = default;
};

struct PathOptions {
  /// Degenerate control: Ahat = A.
  bool identical_hat = false;
};

/// mu_probe < 0 disables the near-optimality flag.
std::vector<PathRecord> run_overlap_path(int p, int n, const ScheduleConfig& sched,
                                         double delta, double mu_probe, std::uint64_t seed,
                                         PathOptions options = {});

double max_jump(const std::vector<PathRecord>& path);

enum class Quantity { eta_N, A_of_V };

std::string to_string(Quantity q);
Quantity quantity_from_string(const std::string& s);

struct ConcentrationRecord {
  Quantity quantity = Quantity::eta_N;
  int N = 0;
  int replicas = 0;
  double empirical_mean = 0.0;
  double empirical_std = 0.0;  // sample standard deviation
  std::vector<double> values;

  bool operator==(const ConcentrationRecord&) const = default;
};

struct ConcentrationOptions {
  /// Degenerate control: every replica reuses replica 0's seeds.
  bool shared_seed = false;
};

/// eta_N uses the exhaustive ground state; A_of_V runs `sched` and reports A(V)/N.
std::vector<ConcentrationRecord> run_concentration(Quantity quantity, int p,
                                                   const std::vector<int>& n_list, int replicas,
                                                   std::uint64_t seed,
                                                   const ScheduleConfig& sched = {},
                                                   ConcentrationOptions options = {});

struct OgpConfig {
  int p = 4;
  int N = 12;
  std::uint64_t seed_A = 1;
  std::uint64_t seed_Ahat = 2;
  std::vector<double> tau_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  double mu = 0.05;
  double min_width = 0.05;
  double bin_width = 0.02;
};

OgpReport run_ogp_experiment(const OgpConfig& cfg);

double median(std::vector<double> xs);
double sample_stddev(const std::vector<double>& xs);

}  // namespace pspin
