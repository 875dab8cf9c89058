#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pspin/tensor.hpp"

namespace pspin {

/// A binary configuration sigma in {-1, +1}^N.
using Spins = std::vector<std::int8_t>;

/// Lexicographic order on configurations with -1 < +1.
bool spins_less(const Spins& a, const Spins& b);
std::vector<double> to_real(const Spins& s);

/// Limits exhaustive enumeration by its estimated cost 2^N * N^(p-1).
struct EnumerationBudget {
  double max_cost = 4.2e8;
  int max_dim = 30;
};

void set_enumeration_budget(EnumerationBudget budget);
EnumerationBudget enumeration_budget();

/// Throws BudgetExceeded with the estimated cost when (p, N) is too large.
void check_enumeration_budget(int p, int n);

struct GroundStateResult {
  double eta_N = 0.0;
  /// Every minimizer, sorted lexicographically; closed under global flip for even p.
  std::vector<Spins> minimizers;
  /// Minimizers up to global sign flip (even p keeps the lexicographically
  /// smaller of each +/- pair); equals `minimizers` for odd p.
  std::vector<Spins> representatives;
  std::uint64_t states_evaluated = 0;
};

struct NearOptimalMember {
  Spins sigma;
  double energy = 0.0;  // A(sigma) / N
};

struct NearOptimalSet {
  double mu = 0.0;
  double eta_N = 0.0;
  /// Sorted by energy ascending, ties by lexicographic sigma.
  std::vector<NearOptimalMember> members;
};

struct OverlapSample {
  int tau_i = 0;  // grid index of the first member
  int tau_j = 0;
  double energy_i = 0.0;
  double energy_j = 0.0;
  double overlap = 0.0;
};

struct OgpReport {
  std::vector<double> tau_grid;
  double mu = 0.0;
  double min_width = 0.0;
  double bin_width = 0.02;
  std::vector<std::size_t> set_sizes;  // near-optimal set size per grid point
  std::vector<double> eta_per_tau;
  std::vector<OverlapSample> samples;  // one per unordered pair, sorted by overlap
  std::optional<std::pair<double, double>> gap;
  std::vector<std::uint64_t> histogram;

  std::vector<double> overlap_values() const;
};

struct ChaosReport {
  int pairs = 0;
  int p = 0;
  int N = 0;
  std::uint64_t seed = 0;
  double mu = 0.0;
  double mean_abs_overlap = 0.0;
  double max_abs_overlap = 0.0;
  std::vector<double> overlaps;
};

/// Exhaustive minimum over {-1, 1}^N by Gray-code traversal with single-flip
/// energy deltas; candidates are re-evaluated with contract_full so reported
/// energies and ties are exact.
GroundStateResult brute_force_ground_state(const CouplingTensor& a);

/// All sigma with A(sigma)/N <= eta_N + mu.
NearOptimalSet near_optimal_set(const CouplingTensor& a, double mu);

/// |<u, v>| / (||u|| ||v||) in [0, 1].
double overlap(std::span<const double> u, std::span<const double> v);
double overlap(const Spins& a, const Spins& b);

/// Widest empty open interval between consecutive distinct values with width
/// >= min_width; ties go to the smaller left end.
std::optional<std::pair<double, double>> detect_gap(std::span<const double> overlaps,
                                                    double min_width);

/// Counts per bin of width `bin_width` over [0, 1]; the value 1 falls in the last bin.
std::vector<std::uint64_t> overlap_histogram(std::span<const double> overlaps,
                                             double bin_width);

OgpReport ogp_scan(const CouplingTensor& a, const CouplingTensor& ahat,
                   std::span<const double> tau_grid, double mu, double min_width,
                   double bin_width = 0.02);

struct ChaosOptions {
  /// Degenerate control: both tensors of a pair share one seed.
  bool identical_pairs = false;
};

ChaosReport chaos_check(int p, int n, int pairs, double mu, std::uint64_t seed,
                        ChaosOptions options = {});

/// Lowest-energy, lexicographically smallest member of the near-optimal set.
Spins chaos_representative(const CouplingTensor& a, double mu);

/// Null model: mean and standard deviation of |<s1, s2>|/N for independent
/// uniform s1, s2 in {-1, 1}^N, estimated from `trials` draws.
struct NullOverlapModel {
  double mean = 0.0;
  double stddev = 0.0;
  int trials = 0;

  /// mean + 3 * stddev / sqrt(pairs): the largest mean over `pairs`
  /// independent overlaps that is still consistent with the null.
  double threshold(int pairs) const;
};

NullOverlapModel simulate_null_overlaps(int n, int trials, std::uint64_t seed);

}  // namespace pspin
