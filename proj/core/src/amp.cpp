#include "pspin/amp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pspin/error.hpp"
#include "pspin/parallel.hpp"
#include "pspin/rng.hpp"

namespace pspin {

namespace {

void require_finite(double x, int t, std::size_t i, const char* what) {
  if (!std::isfinite(x)) {
    std::ostringstream msg;
    msg << "non-finite " << what << " at step t=" << t << ", coordinate i=" << i
        << " (schedule bug?)";
    throw NonFiniteValue(msg.str());
  }
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace

AmpSchedule::AmpSchedule(std::string name, int horizon, double truncation_M, double zeta,
                         HistoryMap f, UpdateMap F, bool needs_symmetric_tensor)
    : name_(std::move(name)),
      horizon_(horizon),
      truncation_M_(truncation_M),
      zeta_(zeta),
      f_(std::move(f)),
      F_(std::move(F)),
      needs_symmetric_tensor_(needs_symmetric_tensor) {
  if (horizon_ < 0) throw InvalidArgument("schedule horizon must be >= 0");
  if (!(truncation_M_ >= 1.0)) throw InvalidArgument("truncation M must be >= 1");
  if (!(zeta_ > 0.0) || !std::isfinite(zeta_)) throw InvalidArgument("zeta must be finite and > 0");
  if (!f_ || !F_) throw InvalidArgument("schedule maps must be callable");
  for (int t = 1; t <= horizon_; ++t) {
    const std::vector<double> zero(static_cast<std::size_t>(t), 0.0);
    const double v = f_(t, zero);
    if (!(std::abs(v) <= 1e-12)) {
      throw InvalidArgument("schedule '" + name_ + "': f_" + std::to_string(t) +
                            "(0) = " + std::to_string(v) + ", expected 0");
    }
  }
}

double truncate(double x, double M) { return std::max(-M, std::min(x, M)); }

std::vector<double> project_hypercube(std::span<const double> u) {
  std::vector<double> v(u.size());
  std::transform(u.begin(), u.end(), v.begin(), [](double x) { return truncate(x, 1.0); });
  return v;
}

IterationTrace run_iterations(const CouplingTensor& a, const AmpSchedule& schedule,
                              std::span<const double> u0) {
  const auto n = static_cast<std::size_t>(a.dim());
  if (u0.size() != n) {
    throw DimensionMismatch("U^0 has length " + std::to_string(u0.size()) +
                            ", tensor dim is " + std::to_string(n));
  }
  const double M = schedule.truncation_M();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(u0[i]) || std::abs(u0[i]) > M) {
      throw InvalidArgument("U^0 coordinate " + std::to_string(i) + " lies outside [-M, M]");
    }
  }

  std::optional<CouplingTensor> symmetric_copy;
  if (schedule.needs_symmetric_tensor() && !a.is_symmetric()) symmetric_copy = symmetrize(a);
  const CouplingTensor& op = symmetric_copy ? *symmetric_copy : a;

  const int T = schedule.horizon();
  IterationTrace trace;
  trace.schedule_name = schedule.name();
  trace.tensor_provenance = a.provenance();
  trace.truncation_M = M;
  trace.U.reserve(static_cast<std::size_t>(T) + 1);
  trace.U.emplace_back(u0.begin(), u0.end());

  std::vector<double> mean_square;
  auto record_norm = [&](const std::vector<double>& u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    trace.step_norms.push_back(std::sqrt(s));
    mean_square.push_back(s / static_cast<double>(n));
  };
  record_norm(trace.U.back());

  std::vector<double> w(n);
  for (int t = 1; t <= T; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      std::vector<double> history(tt);
      for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t s = 0; s < tt; ++s) history[s] = trace.U[s][i];
        w[i] = schedule.f(t, history);
        require_finite(w[i], t, i, "f_t output");
      }
    }, 256);

    const auto y = contract_marginal(op, w);
    const StepContext ctx{.t = t, .mean_square = mean_square};
    std::vector<double> next(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      std::vector<double> history(tt);
      for (std::size_t i = begin; i < end; ++i) {
        require_finite(y[i], t, i, "contraction");
        for (std::size_t s = 0; s < tt; ++s) history[s] = trace.U[s][i];
        const double raw = schedule.F(t, y[i], history, ctx);
        require_finite(raw, t, i, "F_t output");
        next[i] = truncate(raw, M);
      }
    }, 256);
    trace.U.push_back(std::move(next));
    record_norm(trace.U.back());
  }
  trace.V = project_hypercube(trace.U.back());
  return trace;
}

double distinct_index_multiplier(const CouplingTensor& abar, std::span<const double> z,
                                 int j) {
  const int p = abar.order();
  const auto n = static_cast<std::size_t>(abar.dim());
  const std::size_t slice = abar.size() / n;
  const auto row = abar.entries().subspan(static_cast<std::size_t>(j) * slice, slice);
  const int depth = p - 1;

  std::vector<char> used(n, 0);
  used[static_cast<std::size_t>(j)] = 1;
  std::vector<std::size_t> idx(static_cast<std::size_t>(depth), 0);
  std::vector<double> prefix(static_cast<std::size_t>(depth), 0.0);
  double acc = 0.0;

  // Depth-first over tuples in lexicographic order, skipping repeats.
  auto visit = [&](auto&& self, int level, std::size_t offset) -> void {
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const std::size_t lin = offset * n + i;
      const double pz = (level == 0) ? z[i] : prefix[static_cast<std::size_t>(level - 1)] * z[i];
      if (level + 1 == depth) {
        acc += row[lin] * pz;
      } else {
        used[i] = 1;
        prefix[static_cast<std::size_t>(level)] = pz;
        self(self, level + 1, lin);
        used[i] = 0;
      }
    }
  };
  visit(visit, 0, 0);
  return acc;
}

RoundingResult sign_round(const CouplingTensor& a, std::span<const double> v) {
  const auto n = static_cast<std::size_t>(a.dim());
  if (v.size() != n) throw DimensionMismatch("sign_round: V has the wrong length");
  for (double x : v) {
    if (!(std::abs(x) <= 1.0)) throw InvalidArgument("sign_round: V must lie in [-1, 1]^N");
  }
  const CouplingTensor abar = symmetrize(a);
  const double p = abar.order();

  RoundingResult result;
  result.objective_before = contract_full(a, v);
  std::vector<double> z(v.begin(), v.end());
  result.step_multipliers.resize(n);
  result.distinct_index_deltas.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double m = distinct_index_multiplier(abar, z, static_cast<int>(j));
    const double next = (m > 0.0) ? -1.0 : 1.0;  // sign(0) -> +1
    result.step_multipliers[j] = m;
    result.distinct_index_deltas[j] = p * m * (next - z[j]);
    z[j] = next;
  }
  result.sigma.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) result.sigma[j] = z[j] > 0 ? 1 : -1;
  result.objective_after = contract_full(a, z);
  return result;
}

ScheduleReport verify_schedule(const AmpSchedule& schedule, int samples, double tol,
                               std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("verify_schedule: samples must be >= 1");
  const double M = schedule.truncation_M();
  const double limit = (1.0 + tol) * schedule.zeta();
  // F_t's first argument ranges over all of R; probe a window wide enough to
  // cover saturating nonlinearities on both sides.
  const double y_range = 10.0 * M;

  ScheduleReport report;
  report.schedule_name = schedule.name();
  report.zeta = schedule.zeta();
  report.tolerance = tol;
  report.samples = samples;

  for (int t = 1; t <= schedule.horizon(); ++t) {
    const auto tt = static_cast<std::size_t>(t);
    ScheduleCheck check;
    check.t = t;
    check.f_at_zero = std::abs(schedule.f(t, std::vector<double>(tt, 0.0)));

    std::vector<double> u(tt), v(tt), pu(tt + 1), pv(tt + 1), ms(tt);
    for (int s = 0; s < samples; ++s) {
      CounterStream rng(derive_seed(seed, "verify_schedule",
                                    static_cast<std::uint64_t>(t) * 0x100000000ull +
                                        static_cast<std::uint64_t>(s)));
      const bool near = (s % 2 == 1);
      const double eps = 1e-4 * M;
      for (auto& x : u) x = rng.uniform(-M, M);
      for (std::size_t k = 0; k < tt; ++k) {
        v[k] = near ? truncate(u[k] + rng.uniform(-eps, eps), M) : rng.uniform(-M, M);
      }
      const double du = l2_distance(u, v);
      if (du > 0.0) {
        const double q = std::abs(schedule.f(t, u) - schedule.f(t, v)) / du;
        check.f_max_quotient = std::max(check.f_max_quotient, q);
      }

      for (auto& x : ms) x = rng.uniform(0.0, M * M);
      const StepContext ctx{.t = t, .mean_square = ms};
      pu[0] = rng.uniform(-y_range, y_range);
      for (std::size_t k = 0; k < tt; ++k) pu[k + 1] = rng.uniform(-M, M);
      for (std::size_t k = 0; k <= tt; ++k) {
        const double base = pu[k];
        if (!near) {
          pv[k] = (k == 0) ? rng.uniform(-y_range, y_range) : rng.uniform(-M, M);
        } else {
          const double step = base + rng.uniform(-eps, eps);
          pv[k] = (k == 0) ? step : truncate(step, M);
        }
      }
      const double dp = l2_distance(pu, pv);
      if (dp > 0.0) {
        const std::span<const double> hu(pu.data() + 1, tt);
        const std::span<const double> hv(pv.data() + 1, tt);
        const double q =
            std::abs(schedule.F(t, pu[0], hu, ctx) - schedule.F(t, pv[0], hv, ctx)) / dp;
        check.F_max_quotient = std::max(check.F_max_quotient, q);
      }
    }

    check.f_violates = check.f_max_quotient > limit;
    check.F_violates = check.F_max_quotient > limit;
    if (check.f_at_zero > 1e-12) {
      report.violations.push_back("f_" + std::to_string(t) + "(0) != 0");
    }
    if (check.f_violates) {
      report.violations.push_back("f_" + std::to_string(t) + " quotient " +
                                  std::to_string(check.f_max_quotient) + " exceeds zeta");
    }
    if (check.F_violates) {
      report.violations.push_back("F_" + std::to_string(t) + " quotient " +
                                  std::to_string(check.F_max_quotient) + " exceeds zeta");
    }
    report.steps.push_back(check);
  }
  report.ok = report.violations.empty();
  return report;
}

}  // namespace pspin
