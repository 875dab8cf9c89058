#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pspin/amp.hpp"
#include "pspin/tensor.hpp"

namespace pspin {

/// TAP-style iteration U^t = tanh(beta A(., U^{t-1}) + a_{t-2} U^{t-2}),
/// U^0 = q 1_N, U^{-1} = 0.
struct TapConfig {
  double beta = 1.0;
  double q = 0.5;
  /// a_{-1}, a_0, ..., a_{T-2}. Shorter lists repeat their last value.
  std::vector<double> a;
  int T = 1;
  double M = 1.0;
  /// Replace a_{t-2} by 2 f'_beta(||U^{t-2}||^2 / N); needs `order`.
  bool data_driven_a = false;
  int order = 0;
};

enum class GdDirection { descent, ascent };

/// u^t = u^{t-1} -/+ eta_{t-1} grad A(u^{t-1}), then M-truncation.
struct GdConfig {
  std::vector<double> eta;  // eta_0 .. eta_{T-1}; shorter lists repeat the last value
  GdDirection direction = GdDirection::descent;
  int T = 1;
  double M = 1.0;
  int order = 2;  // order p of the tensor the schedule will run on
};

/// Returns the schedule and its prescribed initial vector U^0 = q 1_N.
std::pair<AmpSchedule, std::vector<double>> tap_schedule(const TapConfig& cfg, int n);

AmpSchedule gd_schedule(const GdConfig& cfg, int n);

/// S(x) = (1+x)/2 log(1+x) + (1-x)/2 log(1-x), with 0 log 0 = 0.
double bernoulli_entropy(double x);

/// f_beta(x) = beta^2/2 (1 - x^p - p x^{p-1} (1 - x)) on [0, 1].
double onsager_correction(double beta, int p, double x);

/// f'_beta(x) = -(beta^2/2) p (p-1) x^{p-2} (1 - x).
double onsager_correction_derivative(double beta, int p, double x);

/// F_beta(x) = beta A(x) - sum_i S(x_i) + N f_beta(||x||^2 / N).
double free_energy(const CouplingTensor& a, double beta, std::span<const double> x);

/// r(x) = x - tanh(beta grad A(x) + 2 f'_beta(q) x), q = ||x||^2 / N.
std::vector<double> tap_residual(const CouplingTensor& a, double beta,
                                 std::span<const double> x);

std::string to_string(GdDirection d);
GdDirection gd_direction_from_string(const std::string& s);

}  // namespace pspin
