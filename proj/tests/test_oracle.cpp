#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "helpers.hpp"
#include "oracles.hpp"
#include "pspin/error.hpp"
#include "pspin/oracle.hpp"
#include "pspin/parallel.hpp"

using namespace pspin;

namespace {

Spins to_spins(const std::vector<double>& s) { return Spins(s.begin(), s.end()); }

std::set<Spins> naive_within(const CouplingTensor& a, double mu, double* eta_out = nullptr) {
  const auto e = ref::all_energies(a);
  const double eta = *std::min_element(e.begin(), e.end());
  if (eta_out) *eta_out = eta;
  std::set<Spins> out;
  for (std::uint64_t s = 0; s < e.size(); ++s) {
    if (e[s] <= eta + mu) out.insert(to_spins(ref::spins_of(s, a.dim())));
  }
  return out;
}

std::optional<std::pair<double, double>> quadratic_gap(const std::vector<double>& v, double w) {
  std::optional<std::pair<double, double>> best;
  for (double x : v) {
    for (double y : v) {
      if (!(y > x) || y - x < w) continue;
      bool empty = true;
      for (double z : v) empty = empty && !(z > x && z < y);
      if (!empty) continue;
      if (!best || y - x > best->second - best->first ||
          (y - x == best->second - best->first && x < best->first)) {
        best = std::pair{x, y};
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("ground state of trivial instances") {
  const auto z = brute_force_ground_state(CouplingTensor::zeros(3, 4));
  CHECK(z.eta_N == 0.0);
  CHECK(z.minimizers.size() == 16);
  CHECK(z.states_evaluated == 16);

  const auto h = brute_force_ground_state(CouplingTensor(2, 2, {0.0, 1.0, 1.0, 0.0}));
  CHECK(h.eta_N == -1.0);
  CHECK(h.minimizers == std::vector<Spins>{{-1, 1}, {1, -1}});
  CHECK(h.representatives == std::vector<Spins>{{-1, 1}});
}

TEST_CASE("ground state equals naive enumeration") {
  for (int s = 0; s < 3; ++s) {
    for (auto [p, n] : {std::pair{4, 10}, std::pair{3, 9}, std::pair{2, 12}}) {
      const auto a = sample_gaussian(p, n, 1000 + 10 * s + p);
      double eta = 0.0;
      const auto want = naive_within(a, 0.0, &eta);
      const auto got = brute_force_ground_state(a);
      CHECK(got.eta_N == eta);
      CHECK(std::set<Spins>(got.minimizers.begin(), got.minimizers.end()) == want);
      CHECK(std::is_sorted(got.minimizers.begin(), got.minimizers.end(), spins_less));
      if (p % 2 == 0) {
        CHECK(got.representatives.size() * 2 == got.minimizers.size());
      } else {
        CHECK(got.representatives == got.minimizers);
      }
    }
  }
}

TEST_CASE("near-optimal sets") {
  const auto a = sample_gaussian(4, 10, 77);
  const auto m0 = near_optimal_set(a, 0.0);
  const auto gs = brute_force_ground_state(a);
  std::set<Spins> m0s;
  for (const auto& m : m0.members) m0s.insert(m.sigma);
  CHECK(m0s == std::set<Spins>(gs.minimizers.begin(), gs.minimizers.end()));

  std::size_t prev_size = m0s.size();
  for (double mu : {0.1, 0.5}) {
    const auto m1 = near_optimal_set(a, mu);
    std::set<Spins> got;
    for (const auto& m : m1.members) {
      got.insert(m.sigma);
      CHECK(m.energy == ref::contract_full(a, to_real(m.sigma)) / 10);
      CHECK(m.energy <= m1.eta_N + mu);
    }
    CHECK(got == naive_within(a, mu));
    CHECK(got.size() >= prev_size);
    prev_size = got.size();
    for (std::size_t k = 1; k < m1.members.size(); ++k) {
      CHECK(m1.members[k - 1].energy <= m1.members[k].energy);
    }
  }
  CHECK(prev_size > m0s.size());

  CHECK(near_optimal_set(CouplingTensor::zeros(4, 5), 0.3).members.size() == 32);
  CHECK_THROWS_AS(near_optimal_set(a, -0.1), InvalidArgument);
}

TEST_CASE("enumeration budget fails fast with the estimated cost") {
  try {
    check_enumeration_budget(4, 40);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(std::string(e.what()).find("estimated cost") != std::string::npos);
  }
  const auto saved = enumeration_budget();
  set_enumeration_budget({.max_cost = 1000.0, .max_dim = 30});
  CHECK_THROWS_AS(brute_force_ground_state(sample_gaussian(2, 10, 1)), BudgetExceeded);
  set_enumeration_budget(saved);
}

TEST_CASE("overlap") {
  const std::vector<double> u{0.3, -1.7, 2.2};
  CHECK(overlap(u, u) == 1.0);
  CHECK(overlap(std::vector<double>{1, 1}, std::vector<double>{1, -1}) == 0.0);
  CHECK(overlap(std::vector<double>{2, 0}, std::vector<double>{1, 0}) == 1.0);
  const std::vector<double> tiny{1e-160, -3e-161, 2e-162};
  CHECK(overlap(tiny, tiny) == 1.0);
  const std::vector<double> huge{1e160, 3e159};
  CHECK(overlap(huge, huge) == 1.0);
  CHECK(overlap(Spins{1, -1, 1, 1}, Spins{-1, 1, -1, -1}) == 1.0);
  CHECK(overlap(Spins{1, -1, 1, 1}, Spins{1, 1, 1, 1}) == 0.5);
  CHECK_THROWS_AS(overlap(std::vector<double>{0, 0}, std::vector<double>{1, 0}), DomainError);
  CHECK_THROWS_AS(overlap(std::vector<double>{1}, std::vector<double>{1, 0}), DimensionMismatch);
}

TEST_CASE("gap detection") {
  const std::vector<double> v{0.1, 0.15, 0.9, 1.0};
  const auto g = detect_gap(v, 0.2);
  REQUIRE(g);
  CHECK(g->first == 0.15);
  CHECK(g->second == 0.9);
  CHECK_FALSE(detect_gap(std::vector<double>{1.0}, 0.5));
  CHECK_FALSE(detect_gap(v, 0.8));
  CHECK_THROWS_AS(detect_gap(std::vector<double>{}, 0.1), InvalidArgument);

  pspin::CounterStream rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(1 + trial % 12);
    for (auto& x : xs) x = std::round(rng.uniform() * 20.0) / 20.0;
    const double w = (trial % 5) * 0.05;
    CHECK(detect_gap(xs, w) == quadratic_gap(xs, w));
  }
}

TEST_CASE("overlap histogram") {
  const auto h = overlap_histogram(std::vector<double>{0.0, 0.01, 0.5, 0.999, 1.0}, 0.02);
  REQUIRE(h.size() == 50);
  CHECK(h[0] == 2);
  CHECK(h[25] == 1);
  CHECK(h[49] == 2);
  CHECK(overlap_histogram(std::vector<double>{0.3}, 0.25).size() == 4);
  CHECK_THROWS_AS(overlap_histogram(std::vector<double>{0.3}, 0.0), InvalidArgument);
}

TEST_CASE("ogp_scan trivial and direct cases") {
  const auto a = sample_gaussian(4, 8, 3);
  const std::vector<double> g0{0.0};
  const auto same = ogp_scan(a, a, g0, 0.0, 0.1);
  CHECK_FALSE(same.samples.empty());
  for (const auto& s : same.samples) CHECK(s.overlap == 1.0);

  const auto b = sample_gaussian(4, 8, 4);
  const std::vector<double> g01{0.0, 1.0};
  const auto r = ogp_scan(a, b, g01, 0.0, 0.1);
  const auto sa = brute_force_ground_state(a).minimizers;
  const auto sb = brute_force_ground_state(b).minimizers;
  CHECK(r.set_sizes == std::vector<std::size_t>{sa.size(), sb.size()});
  for (const auto& s : r.samples) {
    if (s.tau_i != s.tau_j) CHECK(s.overlap == overlap(sa.front(), sb.front()));
  }
  CHECK_THROWS_AS(ogp_scan(a, b, std::vector<double>{1.5}, 0.0, 0.1), InvalidArgument);
}

TEST_CASE("ogp_scan does not depend on the thread count") {
  const auto a = sample_gaussian(4, 9, 13);
  const auto b = sample_gaussian(4, 9, 14);
  const std::vector<double> grid{0.0, 0.3, 0.6, 1.0};
  const int saved = num_threads();
  set_num_threads(1);
  const auto one = ogp_scan(a, b, grid, 0.05, 0.05);
  set_num_threads(4);
  const auto four = ogp_scan(a, b, grid, 0.05, 0.05);
  set_num_threads(saved);
  CHECK(one.overlap_values() == four.overlap_values());
  CHECK(one.histogram == four.histogram);
  CHECK(one.gap == four.gap);
}

TEST_CASE("chaos check and null model") {
  const auto same = chaos_check(4, 8, 5, 0.0, 3, {.identical_pairs = true});
  for (double o : same.overlaps) CHECK(o == 1.0);
  CHECK(same.mean_abs_overlap == 1.0);

  const int n = 12;
  double exact = 0.0;
  for (int k = 0; k <= n; ++k) {
    exact += std::tgamma(n + 1) / (std::tgamma(k + 1) * std::tgamma(n - k + 1)) *
             std::abs(2.0 * k - n) / n;
  }
  exact /= std::pow(2.0, n);
  const auto null = simulate_null_overlaps(n, 200000, 1);
  CHECK(std::abs(null.mean - exact) < 4.0 * null.stddev / std::sqrt(200000.0));
  CHECK(null.threshold(200) == doctest::Approx(null.mean + 3.0 * null.stddev / std::sqrt(200.0)));
}
