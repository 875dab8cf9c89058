#include "pspin/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include "pspin/error.hpp"
#include "pspin/parallel.hpp"
#include "pspin/rng.hpp"

namespace pspin {

namespace {

std::atomic<std::uint64_t> g_max_entries{std::uint64_t{1} << 31};

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int k = 0; k < exp; ++k) r *= base;
  return r;
}

void require_length(const CouplingTensor& a, std::span<const double> u,
                    const char* what) {
  if (u.size() != static_cast<std::size_t>(a.dim())) {
    throw DimensionMismatch(std::string(what) + ": vector length " +
                            std::to_string(u.size()) + " != tensor dim " +
                            std::to_string(a.dim()));
  }
}

// out[m] = sum_j buf[m * n + j] * u[j]; reduces the last slot.
void reduce_last(std::span<const double> buf, std::span<const double> u,
                 std::vector<double>& out) {
  const std::size_t n = u.size();
  const std::size_t rows = buf.size() / n;
  out.assign(rows, 0.0);
  for (std::size_t m = 0; m < rows; ++m) {
    const double* row = buf.data() + m * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * u[j];
    out[m] = acc;
  }
}

// out[m] = sum_j u[j] * buf[j * rest + m]; reduces the first slot.
void reduce_first(std::span<const double> buf, std::span<const double> u,
                  std::vector<double>& out) {
  const std::size_t n = u.size();
  const std::size_t rest = buf.size() / n;
  out.assign(rest, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double* block = buf.data() + j * rest;
    const double w = u[j];
    for (std::size_t m = 0; m < rest; ++m) out[m] += w * block[m];
  }
}

// Contract every slot of a dense block of N^k entries with u, last slot first.
double contract_block(std::span<const double> block, std::span<const double> u,
                      std::vector<double>& scratch_a,
                      std::vector<double>& scratch_b) {
  if (block.size() == 1) return block[0];
  reduce_last(block, u, scratch_a);
  while (scratch_a.size() > 1) {
    reduce_last(scratch_a, u, scratch_b);
    std::swap(scratch_a, scratch_b);
  }
  return scratch_a[0];
}

// z_k = A(u_1, .., e_k at slot s, .., u_p) for arbitrary per-slot vectors.
std::vector<double> slot_marginal(const CouplingTensor& a,
                                  std::span<const std::vector<double>> us,
                                  int slot) {
  const int p = a.order();
  std::vector<double> cur(a.entries().begin(), a.entries().end());
  std::vector<double> next;
  for (int s = p - 1; s > slot; --s) {
    reduce_last(cur, us[static_cast<std::size_t>(s)], next);
    std::swap(cur, next);
  }
  for (int s = 0; s < slot; ++s) {
    reduce_first(cur, us[static_cast<std::size_t>(s)], next);
    std::swap(cur, next);
  }
  return cur;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double factorial(int p) {
  double f = 1.0;
  for (int k = 2; k <= p; ++k) f *= k;
  return f;
}

// Deterministic probe that a tensor flagged symmetric really is.
bool probe_symmetric(int p, int n, std::span<const double> entries) {
  CounterStream rng(0x5EED5EEDull);
  const int probes = static_cast<int>(std::min<std::size_t>(entries.size(), 256));
  std::vector<int> idx(static_cast<std::size_t>(p));
  std::vector<std::size_t> stride(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) stride[static_cast<std::size_t>(k)] = ipow(static_cast<std::size_t>(n), p - 1 - k);
  for (int probe = 0; probe < probes; ++probe) {
    for (auto& i : idx) i = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    std::size_t base = 0;
    for (int k = 0; k < p; ++k) base += static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]) * stride[static_cast<std::size_t>(k)];
    std::vector<int> perm = idx;
    // Random transposition, then a full shuffle step.
    const auto a = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(p));
    const auto b = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(p));
    std::swap(perm[a], perm[b]);
    std::rotate(perm.begin(), perm.begin() + static_cast<long>(rng() % static_cast<std::uint64_t>(p)), perm.end());
    std::size_t other = 0;
    for (int k = 0; k < p; ++k) other += static_cast<std::size_t>(perm[static_cast<std::size_t>(k)]) * stride[static_cast<std::size_t>(k)];
    if (entries[base] != entries[other]) return false;
  }
  return true;
}

}  // namespace

void set_max_tensor_entries(std::uint64_t limit) { g_max_entries.store(limit); }

std::uint64_t max_tensor_entries() { return g_max_entries.load(); }

std::uint64_t checked_entry_count(int order, int dim) {
  if (order < 2) throw InvalidArgument("tensor order must be >= 2, got " + std::to_string(order));
  if (dim < 1) throw InvalidArgument("tensor dim must be >= 1, got " + std::to_string(dim));
  const std::uint64_t limit = max_tensor_entries();
  std::uint64_t count = 1;
  for (int k = 0; k < order; ++k) {
    if (count > limit / static_cast<std::uint64_t>(dim)) {
      throw BudgetExceeded("tensor with N=" + std::to_string(dim) + ", p=" +
                           std::to_string(order) + " exceeds the budget of " +
                           std::to_string(limit) + " entries");
    }
    count *= static_cast<std::uint64_t>(dim);
  }
  return count;
}

CouplingTensor::CouplingTensor(int order, int dim, std::vector<double> entries,
                               bool is_symmetric,
                               std::optional<Provenance> provenance)
    : order_(order),
      dim_(dim),
      entries_(std::move(entries)),
      is_symmetric_(is_symmetric),
      provenance_(std::move(provenance)) {
  const std::uint64_t expected = checked_entry_count(order, dim);
  if (entries_.size() != expected) {
    throw InvalidArgument("tensor needs " + std::to_string(expected) +
                          " entries, got " + std::to_string(entries_.size()));
  }
  for (double x : entries_) {
    if (!std::isfinite(x)) throw NonFiniteValue("tensor entries must be finite");
  }
  if (is_symmetric_ && !probe_symmetric(order_, dim_, entries_)) {
    throw InvalidArgument("tensor flagged symmetric fails a permuted-index probe");
  }
}

CouplingTensor CouplingTensor::zeros(int order, int dim) {
  const auto count = checked_entry_count(order, dim);
  return CouplingTensor(order, dim, std::vector<double>(count, 0.0), true,
                        Provenance{.kind = "explicit"});
}

std::size_t CouplingTensor::linear_index(std::span<const int> index) const {
  if (index.size() != static_cast<std::size_t>(order_)) {
    throw DimensionMismatch("index arity must equal tensor order");
  }
  std::size_t lin = 0;
  for (int i : index) {
    if (i < 0 || i >= dim_) throw InvalidArgument("index out of range");
    lin = lin * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  }
  return lin;
}

double CouplingTensor::at(std::span<const int> index) const {
  return entries_[linear_index(index)];
}

CouplingTensor sample_gaussian(int p, int n, std::uint64_t seed) {
  const auto count = checked_entry_count(p, n);
  const double variance = std::pow(static_cast<double>(n), -(p - 1));
  const double sd = std::sqrt(variance);
  std::vector<double> entries(count);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) entries[k] = sd * normal_at(seed, k);
  }, 4096);
  Provenance prov{.kind = "gaussian",
                  .seed = seed,
                  .generator_id = std::string(kGeneratorId),
                  .variance = variance};
  return CouplingTensor(p, n, std::move(entries), false, std::move(prov));
}

CouplingTensor symmetrize(const CouplingTensor& a) {
  if (a.is_symmetric()) return a;
  const int p = a.order();
  const auto n = static_cast<std::size_t>(a.dim());
  const auto src = a.entries();
  std::vector<double> out(src.size(), 0.0);
  std::vector<std::size_t> stride(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) stride[static_cast<std::size_t>(k)] = ipow(n, p - 1 - k);
  const double inv = 1.0 / factorial(p);

  std::vector<std::size_t> idx(static_cast<std::size_t>(p), 0);
  std::vector<std::size_t> perm(static_cast<std::size_t>(p));
  std::vector<std::size_t> targets;
  auto linear = [&](const std::vector<std::size_t>& order) {
    std::size_t lin = 0;
    for (int k = 0; k < p; ++k) lin += idx[order[static_cast<std::size_t>(k)]] * stride[static_cast<std::size_t>(k)];
    return lin;
  };

  for (std::size_t lin = 0; lin < src.size(); ++lin) {
    // idx is the digit expansion of lin; only sorted tuples are canonical.
    if (std::is_sorted(idx.begin(), idx.end())) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      double sum = 0.0;
      bool all_equal = true;
      targets.clear();
      do {
        const std::size_t pos = linear(perm);
        const double v = src[pos];
        all_equal = all_equal && (v == src[lin]);
        sum += v;
        targets.push_back(pos);
      } while (std::next_permutation(perm.begin(), perm.end()));
      const double avg = all_equal ? src[lin] : sum * inv;
      for (std::size_t pos : targets) out[pos] = avg;
    }
    for (int k = p - 1; k >= 0; --k) {
      if (++idx[static_cast<std::size_t>(k)] < n) break;
      idx[static_cast<std::size_t>(k)] = 0;
    }
  }

  Provenance prov = a.provenance().value_or(Provenance{});
  prov.kind = "symmetrized";
  return CouplingTensor(p, a.dim(), std::move(out), true, std::move(prov));
}

double contract_full(const CouplingTensor& a, std::span<const double> u) {
  require_length(a, u, "contract_full");
  const int p = a.order();
  const auto n = static_cast<std::size_t>(a.dim());
  const auto src = a.entries();
  std::vector<std::size_t> idx(static_cast<std::size_t>(p), 0);
  // prefix[k] = u[i_0] * ... * u[i_k], multiplied left to right.
  std::vector<double> prefix(static_cast<std::size_t>(p));
  prefix[0] = u[0];
  for (int k = 1; k < p; ++k) prefix[static_cast<std::size_t>(k)] = prefix[static_cast<std::size_t>(k - 1)] * u[0];

  double acc = 0.0;
  for (std::size_t lin = 0; lin < src.size(); ++lin) {
    acc += src[lin] * prefix[static_cast<std::size_t>(p - 1)];
    int k = p - 1;
    for (; k >= 0; --k) {
      if (++idx[static_cast<std::size_t>(k)] < n) break;
      idx[static_cast<std::size_t>(k)] = 0;
    }
    if (k < 0) break;
    for (int r = k; r < p; ++r) {
      const double ur = u[idx[static_cast<std::size_t>(r)]];
      prefix[static_cast<std::size_t>(r)] = (r == 0) ? ur : prefix[static_cast<std::size_t>(r - 1)] * ur;
    }
  }
  return acc;
}

std::vector<double> contract_marginal(const CouplingTensor& a,
                                      std::span<const double> u) {
  require_length(a, u, "contract_marginal");
  const auto n = static_cast<std::size_t>(a.dim());
  const std::size_t slice = a.size() / n;
  const auto src = a.entries();
  std::vector<double> y(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> s1;
    std::vector<double> s2;
    for (std::size_t i = begin; i < end; ++i) {
      y[i] = contract_block(src.subspan(i * slice, slice), u, s1, s2);
    }
  }, slice >= 4096 ? 1 : 64);
  return y;
}

double contract_multi(const CouplingTensor& a,
                      std::span<const std::vector<double>> us) {
  if (us.size() != static_cast<std::size_t>(a.order())) {
    throw DimensionMismatch("contract_multi needs exactly p vectors");
  }
  for (const auto& v : us) require_length(a, v, "contract_multi");
  std::vector<double> cur(a.entries().begin(), a.entries().end());
  std::vector<double> next;
  for (int s = a.order() - 1; s >= 0; --s) {
    reduce_last(cur, us[static_cast<std::size_t>(s)], next);
    std::swap(cur, next);
  }
  return cur[0];
}

double energy(const CouplingTensor& a, std::span<const double> u) {
  return contract_full(a, u) / static_cast<double>(a.dim());
}

std::vector<double> gradient(const CouplingTensor& a, std::span<const double> u) {
  require_length(a, u, "gradient");
  const int p = a.order();
  if (a.is_symmetric()) {
    auto g = contract_marginal(a, u);
    for (double& x : g) x *= p;
    return g;
  }
  const std::vector<std::vector<double>> us(static_cast<std::size_t>(p),
                                            std::vector<double>(u.begin(), u.end()));
  std::vector<double> g(u.size(), 0.0);
  for (int s = 0; s < p; ++s) {
    const auto part = slot_marginal(a, us, s);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += part[k];
  }
  return g;
}

CouplingTensor interpolate(const CouplingTensor& a, const CouplingTensor& ahat,
                           double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw InvalidArgument("interpolation tau must lie in [0, 1]");
  }
  if (a.order() != ahat.order() || a.dim() != ahat.dim()) {
    throw InvalidArgument("interpolate: tensors differ in shape");
  }
  const double wa = std::sqrt(1.0 - tau);
  const double wb = std::sqrt(tau);
  const auto x = a.entries();
  const auto y = ahat.entries();
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = wa * x[k] + wb * y[k];

  Provenance prov{.kind = "interpolated"};
  if (a.provenance()) {
    prov.seed = a.provenance()->seed;
    prov.generator_id = a.provenance()->generator_id;
    prov.variance = (1.0 - tau) * a.provenance()->variance;
  }
  if (ahat.provenance()) {
    prov.seed_hat = ahat.provenance()->seed;
    prov.variance += tau * ahat.provenance()->variance;
  }
  prov.tau = tau;
  const bool sym = a.is_symmetric() && ahat.is_symmetric();
  return CouplingTensor(a.order(), a.dim(), std::move(out), sym, std::move(prov));
}

CouplingTensor difference(const CouplingTensor& a, const CouplingTensor& b) {
  if (a.order() != b.order() || a.dim() != b.dim()) {
    throw InvalidArgument("difference: tensors differ in shape");
  }
  const auto x = a.entries();
  const auto y = b.entries();
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] - y[k];
  return CouplingTensor(a.order(), a.dim(), std::move(out), false,
                        Provenance{.kind = "explicit"});
}

double frobenius_norm(const CouplingTensor& a) {
  double s = 0.0;
  for (double x : a.entries()) s += x * x;
  return std::sqrt(s);
}

NormReport norms(const CouplingTensor& a, int restarts, int iters,
                 std::uint64_t seed) {
  if (restarts < 1 || iters < 1) {
    throw InvalidArgument("norms: restarts and iters must be >= 1");
  }
  const int p = a.order();
  const auto n = static_cast<std::size_t>(a.dim());
  NormReport report;
  report.frobenius = frobenius_norm(a);
  report.op_upper = report.frobenius;
  report.restarts_used = restarts;

  double best = 0.0;
  for (int r = 0; r < restarts; ++r) {
    CounterStream rng(derive_seed(seed, "norms", static_cast<std::uint64_t>(r)));
    std::vector<std::vector<double>> us(static_cast<std::size_t>(p), std::vector<double>(n));
    for (auto& v : us) {
      for (auto& x : v) x = rng.normal();
      const double nv = norm2(v);
      for (auto& x : v) x /= nv;
    }
    for (int it = 0; it < iters; ++it) {
      for (int s = 0; s < p; ++s) {
        auto g = slot_marginal(a, us, s);
        const double ng = norm2(g);
        if (ng == 0.0) continue;
        for (auto& x : g) x /= ng;
        us[static_cast<std::size_t>(s)] = std::move(g);
      }
    }
    best = std::max(best, contract_multi(a, us));
  }
  // A rounding-level overshoot must not break op_lower <= op_upper.
  report.op_lower = std::min(best, report.op_upper);
  return report;
}

LipschitzEstimate estimate_c2(const CouplingTensor& a, double box_bound,
                              int samples, std::uint64_t seed) {
  if (!(box_bound > 0.0)) throw InvalidArgument("estimate_c2: M must be > 0");
  if (samples < 1) throw InvalidArgument("estimate_c2: samples must be >= 1");
  const auto n = static_cast<std::size_t>(a.dim());
  LipschitzEstimate est{.c2_hat = 0.0, .samples = samples, .box_bound_M = box_bound};
  std::vector<double> u(n);
  std::vector<double> v(n);
  for (int s = 0; s < samples; ++s) {
    CounterStream rng(derive_seed(seed, "c2", static_cast<std::uint64_t>(s)));
    for (auto& x : u) x = rng.uniform(-box_bound, box_bound);
    if (s % 2 == 0) {
      for (auto& x : v) x = rng.uniform(-box_bound, box_bound);
    } else {
      const double eps = 1e-3 * box_bound;
      for (auto& x : v) x = rng.normal();
      const double nd = norm2(v);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = std::clamp(u[i] + eps * v[i] / nd, -box_bound, box_bound);
      }
    }
    double du = 0.0;
    for (std::size_t i = 0; i < n; ++i) du += (u[i] - v[i]) * (u[i] - v[i]);
    du = std::sqrt(du);
    if (du == 0.0) continue;
    const auto yu = contract_marginal(a, u);
    const auto yv = contract_marginal(a, v);
    double dy = 0.0;
    for (std::size_t i = 0; i < n; ++i) dy += (yu[i] - yv[i]) * (yu[i] - yv[i]);
    est.c2_hat = std::max(est.c2_hat, std::sqrt(dy) / du);
  }
  return est;
}

}  // namespace pspin
