#include "pspin/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>

#include "pspin/error.hpp"
#include "pspin/parallel.hpp"
#include "pspin/rng.hpp"

namespace pspin {

namespace {

std::mutex g_budget_mutex;
EnumerationBudget g_budget;

constexpr std::uint64_t kResyncInterval = 4096;
constexpr std::uint64_t kMaxOverlapPairs = 50'000'000;

Spins spins_from_mask(std::uint64_t mask, int n) {
  Spins s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = ((mask >> i) & 1u) ? -1 : 1;
  return s;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Contract a contiguous block of N^k entries with w in every slot.
double contract_block(const double* block, std::size_t len, std::span<const double> w,
                      std::vector<double>& a, std::vector<double>& b) {
  const std::size_t n = w.size();
  if (len == 1) return block[0];
  a.assign(len / n, 0.0);
  for (std::size_t m = 0; m < a.size(); ++m) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += block[m * n + j] * w[j];
    a[m] = acc;
  }
  while (a.size() > 1) {
    b.assign(a.size() / n, 0.0);
    for (std::size_t m = 0; m < b.size(); ++m) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += a[m * n + j] * w[j];
      b[m] = acc;
    }
    std::swap(a, b);
  }
  return a[0];
}

// Single-flip energy change for a symmetric tensor. Writing sigma = w + s e_k
// with w_k = 0, A(sigma) = sum_j C(p, j) s^j Abar(e_k^j, w^{p-j}); flipping s
// negates the odd-j terms.
class FlipDelta {
 public:
  explicit FlipDelta(const CouplingTensor& abar)
      : abar_(abar), p_(abar.order()), n_(static_cast<std::size_t>(abar.dim())) {
    for (int j = 1; j <= p_; j += 2) odd_.push_back(j);
    for (int j : odd_) coeff_.push_back(binomial(p_, j));
    stride_.resize(static_cast<std::size_t>(p_));
    for (int r = 0; r < p_; ++r) {
      std::size_t s = 1;
      for (int q = 0; q < p_ - 1 - r; ++q) s *= n_;
      stride_[static_cast<std::size_t>(r)] = s;
    }
  }

  double operator()(std::vector<double>& sigma, std::size_t k) {
    const double s = sigma[k];
    sigma[k] = 0.0;
    double odd_sum = 0.0;
    for (std::size_t idx = 0; idx < odd_.size(); ++idx) {
      const int j = odd_[idx];
      std::size_t offset = 0;
      for (int r = 0; r < j; ++r) offset += k * stride_[static_cast<std::size_t>(r)];
      const std::size_t len = stride_[static_cast<std::size_t>(j - 1)];
      odd_sum += coeff_[idx] *
                 contract_block(abar_.entries().data() + offset, len, sigma, a_, b_);
    }
    sigma[k] = s;
    return -2.0 * s * odd_sum;
  }

 private:
  const CouplingTensor& abar_;
  int p_;
  std::size_t n_;
  std::vector<int> odd_;
  std::vector<double> coeff_;
  std::vector<std::size_t> stride_;
  std::vector<double> a_;
  std::vector<double> b_;
};

struct Candidate {
  std::uint64_t mask;
  double running;
};

// Everything within `window` (per-N energy units) of the minimum, with exact
// energies from contract_full on the original tensor.
struct Enumeration {
  double eta = 0.0;
  std::vector<NearOptimalMember> members;  // unsorted, energy <= eta + window
  std::uint64_t states = 0;
};

Enumeration enumerate_near_optimal(const CouplingTensor& a, double window) {
  const int n = a.dim();
  const int p = a.order();
  check_enumeration_budget(p, n);
  const CouplingTensor abar = symmetrize(a);
  const double nn = n;

  double l1 = 0.0;
  for (double x : abar.entries()) l1 += std::abs(x);
  const double margin = 1e-9 * (1.0 + l1);
  const double abs_window = window * nn;

  std::vector<double> sigma(static_cast<std::size_t>(n), 1.0);
  std::uint64_t mask = 0;
  double running = contract_full(abar, sigma);
  double best = running;
  std::vector<Candidate> cands{{mask, running}};
  std::size_t prune_at = 1u << 16;

  auto prune = [&] {
    const double cut = best + abs_window + margin;
    std::erase_if(cands, [&](const Candidate& c) { return c.running > cut; });
  };

  FlipDelta delta(abar);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto k = static_cast<std::size_t>(std::countr_zero(step));
    running += delta(sigma, k);
    sigma[k] = -sigma[k];
    mask ^= std::uint64_t{1} << k;
    if (step % kResyncInterval == 0) running = contract_full(abar, sigma);
    best = std::min(best, running);
    if (running <= best + abs_window + margin) {
      cands.push_back({mask, running});
      if (cands.size() >= prune_at) {
        prune();
        prune_at = std::max(prune_at, 2 * cands.size());
      }
    }
  }
  prune();

  Enumeration out;
  out.states = total;
  std::vector<NearOptimalMember> exact;
  exact.reserve(cands.size());
  for (const auto& c : cands) {
    Spins s = spins_from_mask(c.mask, n);
    const double e = energy(a, to_real(s));
    exact.push_back({std::move(s), e});
  }
  out.eta = exact.front().energy;
  for (const auto& m : exact) out.eta = std::min(out.eta, m.energy);
  for (auto& m : exact) {
    if (m.energy <= out.eta + window) out.members.push_back(std::move(m));
  }
  return out;
}

}  // namespace

bool spins_less(const Spins& a, const Spins& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<double> to_real(const Spins& s) {
  return std::vector<double>(s.begin(), s.end());
}

void set_enumeration_budget(EnumerationBudget budget) {
  std::lock_guard lock(g_budget_mutex);
  g_budget = budget;
}

EnumerationBudget enumeration_budget() {
  std::lock_guard lock(g_budget_mutex);
  return g_budget;
}

void check_enumeration_budget(int p, int n) {
  if (p < 2 || n < 1) throw InvalidArgument("enumeration needs p >= 2 and N >= 1");
  const auto budget = enumeration_budget();
  const double cost = std::ldexp(1.0, n) * std::pow(static_cast<double>(n), p - 1);
  if (n > budget.max_dim || n > 62 || cost > budget.max_cost) {
    std::ostringstream msg;
    msg << "exhaustive enumeration for p=" << p << ", N=" << n
        << " has estimated cost 2^N * N^(p-1) = " << cost << " flip operations"
        << " (budget " << budget.max_cost << ", max N " << budget.max_dim << ")";
    throw BudgetExceeded(msg.str());
  }
}

GroundStateResult brute_force_ground_state(const CouplingTensor& a) {
  auto en = enumerate_near_optimal(a, 0.0);
  GroundStateResult r;
  r.eta_N = en.eta;
  r.states_evaluated = en.states;
  for (auto& m : en.members) r.minimizers.push_back(std::move(m.sigma));
  std::sort(r.minimizers.begin(), r.minimizers.end(), spins_less);
  for (const auto& s : r.minimizers) {
    if (a.order() % 2 == 0) {
      Spins flipped = s;
      for (auto& x : flipped) x = static_cast<std::int8_t>(-x);
      if (spins_less(flipped, s)) continue;
    }
    r.representatives.push_back(s);
  }
  return r;
}

NearOptimalSet near_optimal_set(const CouplingTensor& a, double mu) {
  if (!(mu >= 0.0)) throw InvalidArgument("near_optimal_set: mu must be >= 0");
  auto en = enumerate_near_optimal(a, mu);
  NearOptimalSet set;
  set.mu = mu;
  set.eta_N = en.eta;
  set.members = std::move(en.members);
  std::sort(set.members.begin(), set.members.end(),
            [](const NearOptimalMember& x, const NearOptimalMember& y) {
              if (x.energy != y.energy) return x.energy < y.energy;
              return spins_less(x.sigma, y.sigma);
            });
  return set;
}

double overlap(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionMismatch("overlap: length mismatch");
  // Rescale each vector by a power of two (exact) so tiny or huge inputs
  // do not under- or overflow the squared norms.
  auto exponent = [](std::span<const double> x) {
    double m = 0.0;
    for (double e : x) m = std::max(m, std::abs(e));
    int ex = 0;
    std::frexp(m, &ex);
    return m == 0.0 ? 0 : -ex;
  };
  const int eu = exponent(u), ev = exponent(v);
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = std::ldexp(u[i], eu), y = std::ldexp(v[i], ev);
    dot += x * y;
    nu += x * x;
    nv += y * y;
  }
  if (nu == 0.0 || nv == 0.0) throw DomainError("overlap of a zero vector is undefined");
  return std::min(1.0, std::abs(dot) / std::sqrt(nu * nv));
}

double overlap(const Spins& a, const Spins& b) {
  if (a.size() != b.size()) throw DimensionMismatch("overlap: length mismatch");
  if (a.empty()) throw DomainError("overlap of a zero vector is undefined");
  long dot = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return static_cast<double>(std::labs(dot)) / static_cast<double>(a.size());
}

std::optional<std::pair<double, double>> detect_gap(std::span<const double> overlaps,
                                                    double min_width) {
  if (overlaps.empty()) throw InvalidArgument("detect_gap: empty overlap multiset");
  std::vector<double> v(overlaps.begin(), overlaps.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::optional<std::pair<double, double>> best;
  double best_width = -1.0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double width = v[k] - v[k - 1];
    if (width >= min_width && width > best_width) {
      best_width = width;
      best = std::pair{v[k - 1], v[k]};
    }
  }
  return best;
}

std::vector<std::uint64_t> overlap_histogram(std::span<const double> overlaps,
                                             double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 1.0)) {
    throw InvalidArgument("histogram bin width must lie in (0, 1]");
  }
  const auto bins = static_cast<std::size_t>(std::max(1.0, std::ceil(1.0 / bin_width - 1e-9)));
  std::vector<std::uint64_t> h(bins, 0);
  for (double x : overlaps) {
    const auto b = static_cast<std::size_t>(std::max(0.0, std::floor(x / bin_width)));
    ++h[std::min(bins - 1, b)];
  }
  return h;
}

std::vector<double> OgpReport::overlap_values() const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.overlap);
  return v;
}

OgpReport ogp_scan(const CouplingTensor& a, const CouplingTensor& ahat,
                   std::span<const double> tau_grid, double mu, double min_width,
                   double bin_width) {
  if (tau_grid.empty()) throw InvalidArgument("ogp_scan: empty tau grid");
  for (double t : tau_grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("ogp_scan: tau values must lie in [0, 1]");
  }
  if (a.order() != ahat.order() || a.dim() != ahat.dim()) {
    throw InvalidArgument("ogp_scan: tensors differ in shape");
  }
  check_enumeration_budget(a.order(), a.dim());

  OgpReport report;
  report.tau_grid.assign(tau_grid.begin(), tau_grid.end());
  report.mu = mu;
  report.min_width = min_width;
  report.bin_width = bin_width;

  std::vector<NearOptimalSet> sets(tau_grid.size());
  parallel_for(tau_grid.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      sets[g] = near_optimal_set(interpolate(a, ahat, tau_grid[g]), mu);
    }
  });

  struct Entry {
    int grid;
    const NearOptimalMember* member;
  };
  std::vector<Entry> all;
  for (std::size_t g = 0; g < sets.size(); ++g) {
    report.set_sizes.push_back(sets[g].members.size());
    report.eta_per_tau.push_back(sets[g].eta_N);
    for (const auto& m : sets[g].members) all.push_back({static_cast<int>(g), &m});
  }
  const std::uint64_t pairs = all.size() * (all.size() - 1) / 2;
  if (pairs > kMaxOverlapPairs) {
    throw BudgetExceeded("ogp_scan: " + std::to_string(pairs) +
                         " overlap pairs exceed the limit; lower mu");
  }

  report.samples.reserve(pairs);
  for (std::size_t x = 0; x < all.size(); ++x) {
    for (std::size_t y = x + 1; y < all.size(); ++y) {
      report.samples.push_back({all[x].grid, all[y].grid, all[x].member->energy,
                                all[y].member->energy,
                                overlap(all[x].member->sigma, all[y].member->sigma)});
    }
  }
  std::stable_sort(report.samples.begin(), report.samples.end(),
                   [](const OverlapSample& l, const OverlapSample& r) { return l.overlap < r.overlap; });

  const auto values = report.overlap_values();
  report.histogram = overlap_histogram(values, bin_width);
  if (!values.empty()) report.gap = detect_gap(values, min_width);
  return report;
}

Spins chaos_representative(const CouplingTensor& a, double mu) {
  (void)mu;  // the lowest-energy member does not depend on the window
  return brute_force_ground_state(a).minimizers.front();
}

ChaosReport chaos_check(int p, int n, int pairs, double mu, std::uint64_t seed,
                        ChaosOptions options) {
  if (pairs < 1) throw InvalidArgument("chaos_check: pairs must be >= 1");
  check_enumeration_budget(p, n);
  ChaosReport report;
  report.pairs = pairs;
  report.p = p;
  report.N = n;
  report.seed = seed;
  report.mu = mu;
  report.overlaps.assign(static_cast<std::size_t>(pairs), 0.0);

  parallel_for(static_cast<std::size_t>(pairs), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const std::uint64_t seed_a = derive_seed(seed, "chaos/A", k);
      const std::uint64_t seed_b = options.identical_pairs ? seed_a : derive_seed(seed, "chaos/B", k);
      const Spins s1 = chaos_representative(sample_gaussian(p, n, seed_a), mu);
      const Spins s2 = chaos_representative(sample_gaussian(p, n, seed_b), mu);
      report.overlaps[k] = overlap(s1, s2);
    }
  });

  double sum = 0.0;
  for (double o : report.overlaps) {
    sum += o;
    report.max_abs_overlap = std::max(report.max_abs_overlap, o);
  }
  report.mean_abs_overlap = sum / pairs;
  return report;
}

double NullOverlapModel::threshold(int pairs) const {
  return mean + 3.0 * stddev / std::sqrt(static_cast<double>(pairs));
}

NullOverlapModel simulate_null_overlaps(int n, int trials, std::uint64_t seed) {
  if (n < 1 || n > 64 || trials < 2) {
    throw InvalidArgument("simulate_null_overlaps: need 1 <= N <= 64 and trials >= 2");
  }
  CounterStream rng(derive_seed(seed, "null-overlap"));
  const std::uint64_t keep = (n == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t x = rng() & keep;
    const std::uint64_t y = rng() & keep;
    const int disagree = std::popcount(x ^ y);
    const double o = std::abs(n - 2.0 * disagree) / n;
    sum += o;
    sumsq += o * o;
  }
  NullOverlapModel m;
  m.trials = trials;
  m.mean = sum / trials;
  m.stddev = std::sqrt(std::max(0.0, (sumsq - trials * m.mean * m.mean) / (trials - 1)));
  return m;
}

}  // namespace pspin
