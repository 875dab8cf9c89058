#include "pspin/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pspin/error.hpp"

namespace pspin {

namespace {

// Element k of a list that repeats its last value past the end.
double held(const std::vector<double>& xs, std::size_t k) {
  return xs[std::min(k, xs.size() - 1)];
}

// sup over x in [0, 1] of x^{p-2} (1 - x).
double derivative_shape_max(int p) {
  if (p == 2) return 1.0;
  const double x = static_cast<double>(p - 2) / static_cast<double>(p - 1);
  return std::pow(x, p - 2) * (1.0 - x);
}

}  // namespace

std::pair<AmpSchedule, std::vector<double>> tap_schedule(const TapConfig& cfg, int n) {
  if (!(cfg.beta >= 0.0) || !std::isfinite(cfg.beta)) {
    throw InvalidArgument("tap: beta must be finite and >= 0");
  }
  if (!(cfg.q > 0.0 && cfg.q <= 1.0)) throw InvalidArgument("tap: q must lie in (0, 1]");
  if (cfg.T < 1) throw InvalidArgument("tap: T must be >= 1");
  if (cfg.T >= 2 && cfg.a.empty() && !cfg.data_driven_a) {
    throw InvalidArgument("tap: coefficient list a is empty but T >= 2");
  }
  if (cfg.data_driven_a && cfg.order < 2) {
    throw InvalidArgument("tap: data-driven a needs the tensor order (>= 2)");
  }
  if (n < 1) throw InvalidArgument("tap: N must be >= 1");
  if (cfg.q > cfg.M) throw InvalidArgument("tap: q must not exceed M");

  double a_bound = 0.0;
  for (double x : cfg.a) a_bound = std::max(a_bound, std::abs(x));
  if (cfg.data_driven_a) {
    a_bound = std::max(a_bound, cfg.beta * cfg.beta * cfg.order * (cfg.order - 1) *
                                    derivative_shape_max(cfg.order));
  }
  // tanh is 1-Lipschitz, so |dF| <= |beta dy + a du| <= sqrt(beta^2 + a^2) ||(dy, du)||.
  const double zeta =
      std::max(1.0, std::sqrt(cfg.beta * cfg.beta + a_bound * a_bound)) * (1.0 + 1e-9);

  const std::vector<double> a = cfg.a.empty() ? std::vector<double>{0.0} : cfg.a;
  const double beta = cfg.beta;
  const bool data_driven = cfg.data_driven_a;
  const int order = cfg.order;

  HistoryMap f = [](int t, std::span<const double> history) {
    return history[static_cast<std::size_t>(t - 1)];
  };
  UpdateMap F = [a, beta, data_driven, order](int t, double y, std::span<const double> history,
                                              const StepContext& ctx) {
    // history holds U^0..U^{t-1}; U^{t-2} is history[t-2] and U^{-1} = 0.
    double memory = 0.0;
    if (t >= 2) {
      const auto k = static_cast<std::size_t>(t - 2);
      const double coeff =
          data_driven ? 2.0 * onsager_correction_derivative(
                                  beta, order, std::min(1.0, ctx.mean_square[k]))
                      : held(a, k + 1);  // a_{t-2} sits at list index t-1
      memory = coeff * history[k];
    }
    return std::tanh(beta * y + memory);
  };

  AmpSchedule schedule(data_driven ? "tap-data-driven" : "tap", cfg.T, cfg.M, zeta,
                       std::move(f), std::move(F));
  return {std::move(schedule), std::vector<double>(static_cast<std::size_t>(n), cfg.q)};
}

AmpSchedule gd_schedule(const GdConfig& cfg, int n) {
  if (cfg.T < 1) throw InvalidArgument("gd: T must be >= 1");
  if (cfg.eta.empty()) throw InvalidArgument("gd: step list eta is empty");
  for (double e : cfg.eta) {
    if (!std::isfinite(e)) throw InvalidArgument("gd: step sizes must be finite");
  }
  if (cfg.order < 2) throw InvalidArgument("gd: tensor order must be >= 2");
  if (n < 1) throw InvalidArgument("gd: N must be >= 1");

  double eta_max = 0.0;
  for (double e : cfg.eta) eta_max = std::max(eta_max, std::abs(e));
  const double gain = cfg.order * eta_max;
  const double zeta = std::max(1.0, std::sqrt(1.0 + gain * gain)) * (1.0 + 1e-9);

  const std::vector<double> eta = cfg.eta;
  const double sign = cfg.direction == GdDirection::descent ? -1.0 : 1.0;
  const double p = cfg.order;

  HistoryMap f = [](int t, std::span<const double> history) {
    return history[static_cast<std::size_t>(t - 1)];
  };
  // With a symmetric tensor, grad A(u) = p A(., u), and the engine hands F_t
  // the marginal A(., u^{t-1}) as y.
  UpdateMap F = [eta, sign, p](int t, double y, std::span<const double> history,
                               const StepContext&) {
    const auto k = static_cast<std::size_t>(t - 1);
    return history[k] + sign * held(eta, k) * p * y;
  };
  return AmpSchedule(cfg.direction == GdDirection::descent ? "gd-descent" : "gd-ascent", cfg.T,
                     cfg.M, zeta, std::move(f), std::move(F), /*needs_symmetric_tensor=*/true);
}

double bernoulli_entropy(double x) {
  if (!(std::abs(x) <= 1.0)) throw DomainError("bernoulli_entropy: |x| must be <= 1");
  auto xlogx = [](double y) { return y == 0.0 ? 0.0 : y * std::log(y); };
  return 0.5 * xlogx(1.0 + x) + 0.5 * xlogx(1.0 - x);
}

double onsager_correction(double beta, int p, double x) {
  if (p < 2) throw InvalidArgument("onsager_correction: p must be >= 2");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("onsager_correction: x must lie in [0, 1]");
  const double xp1 = std::pow(x, p - 1);
  return 0.5 * beta * beta * (1.0 - xp1 * x - p * xp1 * (1.0 - x));
}

double onsager_correction_derivative(double beta, int p, double x) {
  if (p < 2) throw InvalidArgument("onsager_correction_derivative: p must be >= 2");
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("onsager_correction_derivative: x must lie in [0, 1]");
  }
  if (x == 1.0) return 0.0;
  // x^{p-2} with x^0 = 1 at x = 0 (p = 2 gives -beta^2).
  const double shape = (p == 2) ? 1.0 : std::pow(x, p - 2);
  return -0.5 * beta * beta * p * (p - 1) * shape * (1.0 - x);
}

double free_energy(const CouplingTensor& a, double beta, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(a.dim())) {
    throw DimensionMismatch("free_energy: x has the wrong length");
  }
  double entropy = 0.0;
  double sq = 0.0;
  for (double xi : x) {
    if (!(std::abs(xi) <= 1.0)) throw DomainError("free_energy: x must lie in [-1, 1]^N");
    entropy += bernoulli_entropy(xi);
    sq += xi * xi;
  }
  const double n = a.dim();
  const double q = std::min(1.0, sq / n);
  return beta * contract_full(a, x) - entropy + n * onsager_correction(beta, a.order(), q);
}

std::vector<double> tap_residual(const CouplingTensor& a, double beta,
                                 std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(a.dim())) {
    throw DimensionMismatch("tap_residual: x has the wrong length");
  }
  double sq = 0.0;
  for (double xi : x) {
    if (!(std::abs(xi) <= 1.0)) throw DomainError("tap_residual: x must lie in [-1, 1]^N");
    sq += xi * xi;
  }
  const double q = std::min(1.0, sq / static_cast<double>(a.dim()));
  const double fprime = onsager_correction_derivative(beta, a.order(), q);
  const auto g = gradient(a, x);
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    r[i] = x[i] - std::tanh(beta * g[i] + 2.0 * fprime * x[i]);
  }
  return r;
}

std::string to_string(GdDirection d) {
  return d == GdDirection::descent ? "descent" : "ascent";
}

GdDirection gd_direction_from_string(const std::string& s) {
  if (s == "descent") return GdDirection::descent;
  if (s == "ascent") return GdDirection::ascent;
  throw InvalidArgument("direction must be 'descent' or 'ascent', got '" + s + "'");
}

}  // namespace pspin
