#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pspin/tensor.hpp"

namespace pspin {

/// Per-step, vector-level information handed to F_t. Schedules that are
/// purely coordinate-wise ignore it.
struct StepContext {
  int t = 0;
  /// mean_square[s] = ||U^s||^2 / N for s < t.
  std::span<const double> mean_square;
};

/// f_t: [-M, M]^t -> R, evaluated on one coordinate's history U^0_i..U^{t-1}_i.
using HistoryMap = std::function<double(int t, std::span<const double> history)>;

/// F_t: R x [-M, M]^t -> R, first argument the marginal contraction entry.
using UpdateMap = std::function<double(int t, double y, std::span<const double> history,
                                       const StepContext& ctx)>;

/// A pluggable (f_t, F_t) family with its declared Lipschitz constant.
/// The engine never introspects the maps; verify_schedule probes them.
class AmpSchedule {
 public:
  AmpSchedule(std::string name, int horizon, double truncation_M, double zeta,
              HistoryMap f, UpdateMap F, bool needs_symmetric_tensor = false);

  const std::string& name() const { return name_; }
  int horizon() const { return horizon_; }
  double truncation_M() const { return truncation_M_; }
  double zeta() const { return zeta_; }
  bool needs_symmetric_tensor() const { return needs_symmetric_tensor_; }

  double f(int t, std::span<const double> history) const { return f_(t, history); }
  double F(int t, double y, std::span<const double> history, const StepContext& ctx) const {
    return F_(t, y, history, ctx);
  }

 private:
  std::string name_;
  int horizon_;
  double truncation_M_;
  double zeta_;
  HistoryMap f_;
  UpdateMap F_;
  bool needs_symmetric_tensor_;
};

struct IterationTrace {
  std::vector<std::vector<double>> U;  // U^0 .. U^T
  std::vector<double> V;               // clamp of U^T to [-1, 1]
  std::vector<double> step_norms;      // ||U^t||_2
  std::string schedule_name;
  std::optional<Provenance> tensor_provenance;
  double truncation_M = 0.0;

  int horizon() const { return static_cast<int>(U.size()) - 1; }
};

struct RoundingResult {
  std::vector<int> sigma;
  std::vector<double> step_multipliers;
  double objective_before = 0.0;
  double objective_after = 0.0;
  std::vector<double> distinct_index_deltas;
};

struct ScheduleCheck {
  int t = 0;
  double f_max_quotient = 0.0;
  double F_max_quotient = 0.0;
  double f_at_zero = 0.0;
  bool f_violates = false;
  bool F_violates = false;
};

struct ScheduleReport {
  std::string schedule_name;
  double zeta = 0.0;
  double tolerance = 0.0;
  int samples = 0;
  std::vector<ScheduleCheck> steps;
  bool ok = true;
  std::vector<std::string> violations;
};

/// x_M = max(-M, min(x, M)).
double truncate(double x, double M);

/// Coordinate-wise clamp to the Hilbert cube [-1, 1]^N.
std::vector<double> project_hypercube(std::span<const double> u);

/// U^t = [F_t(A(., f_t(U^0..U^{t-1})), U^0..U^{t-1})]_M for t = 1..T, then
/// V = clamp(U^T). Coordinates are independent within a step, so the result
/// does not depend on the worker count.
IterationTrace run_iterations(const CouplingTensor& a, const AmpSchedule& schedule,
                              std::span<const double> u0);

/// Sequential sign rounding of V onto {-1, +1}^N. Coordinate j is set to the
/// sign opposite its distinct-index multiplier; a zero multiplier gives +1.
RoundingResult sign_round(const CouplingTensor& a, std::span<const double> v);

/// The distinct-index multiplier of coordinate j at z: the sum over pairwise
/// distinct i_1..i_{p-1}, all different from j, of Abar_{j,i_1..} z_{i_1}...
double distinct_index_multiplier(const CouplingTensor& abar,
                                 std::span<const double> z, int j);

/// Samples difference quotients of every f_t and F_t and compares them with
/// (1 + tol) * zeta. Violations are reported, not thrown.
ScheduleReport verify_schedule(const AmpSchedule& schedule, int samples, double tol,
                               std::uint64_t seed);

}  // namespace pspin
