#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pspin {

/// Where a tensor came from. Enough to regenerate it bit-for-bit within a
/// build, which is the preferred way to persist tensors.
struct Provenance {
  std::string kind;  // "gaussian", "symmetrized", "interpolated", "explicit"
  std::uint64_t seed = 0;
  std::string generator_id{};
  double variance = 0.0;
  std::optional<std::uint64_t> seed_hat{};  // second parent of an interpolation
  std::optional<double> tau{};

  bool operator==(const Provenance&) const = default;
};

/// Largest tensor (in entries) that constructors and samplers will build.
/// Defaults to 2^31.
void set_max_tensor_entries(std::uint64_t limit);
std::uint64_t max_tensor_entries();

/// N^p, or throws BudgetExceeded when it overflows or exceeds the budget.
std::uint64_t checked_entry_count(int order, int dim);

/// Dense order-p coupling tensor in row-major lexicographic index order:
/// entry (i_1, ..., i_p) lives at sum_k i_k * N^(p-k). Immutable.
class CouplingTensor {
 public:
  CouplingTensor(int order, int dim, std::vector<double> entries,
                 bool is_symmetric = false,
                 std::optional<Provenance> provenance = std::nullopt);

  static CouplingTensor zeros(int order, int dim);

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool is_symmetric() const { return is_symmetric_; }
  std::span<const double> entries() const { return entries_; }
  const std::optional<Provenance>& provenance() const { return provenance_; }

  double at(std::span<const int> index) const;
  std::size_t linear_index(std::span<const int> index) const;

  bool operator==(const CouplingTensor&) const = default;

 private:
  int order_;
  int dim_;
  std::vector<double> entries_;
  bool is_symmetric_;
  std::optional<Provenance> provenance_;
};

/// Upper and lower brackets on the operator norm plus the exact Frobenius norm.
struct NormReport {
  double frobenius = 0.0;
  double op_lower = 0.0;
  double op_upper = 0.0;
  int restarts_used = 0;
};

/// Sampled lower estimate of the Lipschitz constant of u -> A(., u) on the
/// box [-M, M]^N. Never a certified constant.
struct LipschitzEstimate {
  double c2_hat = 0.0;
  int samples = 0;
  double box_bound_M = 0.0;
};

/// I.i.d. N(0, N^-(p-1)) entries, deterministic in (p, N, seed).
CouplingTensor sample_gaussian(int p, int n, std::uint64_t seed);

/// Average over all p! index permutations. The result is exactly symmetric.
CouplingTensor symmetrize(const CouplingTensor& a);

/// A(u) = sum A_{i_1..i_p} u_{i_1} ... u_{i_p}, accumulated in lexicographic
/// index order with each monomial multiplied left to right.
double contract_full(const CouplingTensor& a, std::span<const double> u);

/// y_i = sum A_{i, i_2..i_p} u_{i_2} ... u_{i_p}. Trailing slots are reduced
/// one at a time, last slot first; coordinates may be computed in parallel.
std::vector<double> contract_marginal(const CouplingTensor& a,
                                      std::span<const double> u);

/// Full multilinear form A(u_1, ..., u_p).
double contract_multi(const CouplingTensor& a,
                      std::span<const std::vector<double>> us);

/// A(u) / N.
double energy(const CouplingTensor& a, std::span<const double> u);

/// Exact gradient of u -> A(u), i.e. p * Abar(., u). Computed as the sum of
/// the p single-slot marginals, so no symmetrized copy is materialized.
std::vector<double> gradient(const CouplingTensor& a, std::span<const double> u);

/// sqrt(1 - tau) A + sqrt(tau) Ahat.
CouplingTensor interpolate(const CouplingTensor& a, const CouplingTensor& ahat,
                           double tau);

double frobenius_norm(const CouplingTensor& a);

/// Alternating maximization of A(u_1..u_p) over unit vectors with random
/// restarts (lower bound); Frobenius norm as the certified upper bound.
NormReport norms(const CouplingTensor& a, int restarts, int iters,
                 std::uint64_t seed);

/// Running maximum of ||A(.,u) - A(.,v)|| / ||u - v|| over random pairs in
/// [-M, M]^N, alternating global pairs and nearby (adversarial) pairs.
LipschitzEstimate estimate_c2(const CouplingTensor& a, double box_bound,
                              int samples, std::uint64_t seed);

/// Entrywise a - b (used for perturbation distances).
CouplingTensor difference(const CouplingTensor& a, const CouplingTensor& b);

}  // namespace pspin
