#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "helpers.hpp"
#include "oracles.hpp"
#include "pspin/error.hpp"
#include "pspin/rng.hpp"
#include "pspin/tensor.hpp"
#include "pspin/tensor_io.hpp"

using namespace pspin;
using testing::uniform_vector;

namespace {

CouplingTensor swap_matrix() { return CouplingTensor(2, 2, {0.0, 1.0, 1.0, 0.0}); }

}  // namespace

TEST_CASE("sample_gaussian is deterministic and has the right variance") {
  const auto a = sample_gaussian(2, 1, 42);
  CHECK(a.size() == 1);
  CHECK(a.entries()[0] == normal_at(42, 0));
  CHECK(sample_gaussian(3, 5, 9) == sample_gaussian(3, 5, 9));
  CHECK_FALSE(sample_gaussian(3, 5, 9) == sample_gaussian(3, 5, 10));

  const auto big = sample_gaussian(2, 300, 7);
  double mean = 0.0, sq = 0.0;
  for (double x : big.entries()) {
    mean += x;
    sq += x * x;
  }
  mean /= static_cast<double>(big.size());
  const double var = sq / static_cast<double>(big.size()) - mean * mean;
  CHECK(std::abs(mean) < 5.0 * std::sqrt(1.0 / 300.0 / 90000.0));
  CHECK(var == doctest::Approx(1.0 / 300.0).epsilon(0.03));
  REQUIRE(big.provenance());
  CHECK(big.provenance()->kind == "gaussian");
  CHECK(big.provenance()->variance == doctest::Approx(1.0 / 300.0));
}

TEST_CASE("tensor construction validates shape, values and budget") {
  CHECK_THROWS_AS(sample_gaussian(1, 4, 1), InvalidArgument);
  CHECK_THROWS_AS(sample_gaussian(2, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(CouplingTensor(2, 2, {1.0, 2.0, 3.0}), InvalidArgument);
  CHECK_THROWS_AS(CouplingTensor(2, 2, {1.0, std::nan(""), 3.0, 4.0}), NonFiniteValue);
  CHECK_THROWS_AS(CouplingTensor(2, 2, {0.0, 2.0, 0.0, 0.0}, true), InvalidArgument);
  CHECK_THROWS_AS(checked_entry_count(8, 1000), BudgetExceeded);

  const auto saved = max_tensor_entries();
  set_max_tensor_entries(100);
  CHECK_THROWS_AS(sample_gaussian(3, 5, 1), BudgetExceeded);
  set_max_tensor_entries(saved);
}

TEST_CASE("symmetrize averages over index permutations") {
  const CouplingTensor a(2, 2, {0.0, 2.0, 0.0, 0.0});
  const auto s = symmetrize(a);
  CHECK(s.is_symmetric());
  CHECK(std::vector<double>(s.entries().begin(), s.entries().end()) ==
        std::vector<double>{0.0, 1.0, 1.0, 0.0});

  const auto already = symmetrize(sample_gaussian(3, 4, 2));
  CHECK(symmetrize(already).entries().size() == already.entries().size());
  CHECK(std::equal(already.entries().begin(), already.entries().end(),
                   symmetrize(already).entries().begin()));

  for (int p = 2; p <= 4; ++p) {
    const auto r = sample_gaussian(p, 5, 100 + p);
    const auto expect = ref::symmetrized_entries(r);
    const auto got = symmetrize(r);
    for (std::size_t k = 0; k < expect.size(); ++k) {
      CHECK(got.entries()[k] == doctest::Approx(expect[k]).epsilon(1e-13));
    }
  }
}

TEST_CASE("contract_full hand cases and oracle") {
  CHECK(contract_full(sample_gaussian(3, 4, 1), std::vector<double>(4, 0.0)) == 0.0);
  CHECK(contract_full(swap_matrix(), std::vector<double>{1.0, 1.0}) == 2.0);
  std::vector<double> e(8, 0.0);
  e[0] = 1.0;
  const CouplingTensor single(3, 2, e);
  CHECK(contract_full(single, std::vector<double>{0.5, 3.0}) == 0.125);

  for (int p = 2; p <= 4; ++p) {
    const auto a = sample_gaussian(p, 6, 7 * p);
    const auto u = uniform_vector(6, 11 * p);
    CHECK(contract_full(a, u) == ref::contract_full(a, u));
  }
}

TEST_CASE("contract_marginal hand cases and oracle") {
  const auto zero = contract_marginal(sample_gaussian(3, 3, 1), std::vector<double>(3, 0.0));
  CHECK(zero == std::vector<double>(3, 0.0));
  const CouplingTensor id(2, 2, {1.0, 0.0, 0.0, 1.0});
  CHECK(contract_marginal(id, std::vector<double>{3.0, -1.0}) == std::vector<double>{3.0, -1.0});

  const auto a = sample_gaussian(4, 6, 5);
  const auto u = uniform_vector(6, 6);
  const auto got = contract_marginal(a, u);
  const auto want = ref::marginal(a, u);
  for (std::size_t i = 0; i < 6; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("contract_multi picks out entries and vanishes on a zero slot") {
  const std::vector<std::vector<double>> us{{1.0, 0.0}, {0.0, 1.0}};
  CHECK(contract_multi(swap_matrix(), us) == 1.0);
  const auto a = sample_gaussian(3, 3, 4);
  const std::vector<std::vector<double>> with_zero{{1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
  CHECK(contract_multi(a, with_zero) == 0.0);
  const auto u = uniform_vector(3, 8);
  const std::vector<std::vector<double>> same{u, u, u};
  CHECK(contract_multi(a, same) == doctest::Approx(ref::contract_full(a, u)).epsilon(1e-13));
}

TEST_CASE("energy divides by N") {
  CHECK(energy(CouplingTensor::zeros(3, 4), std::vector<double>{1, -1, 1, 1}) == 0.0);
  CHECK(energy(swap_matrix(), std::vector<double>{1.0, -1.0}) == -1.0);
  const auto a = sample_gaussian(4, 5, 3);
  const auto u = uniform_vector(5, 3);
  CHECK(energy(a, u) == contract_full(a, u) / 5.0);
}

TEST_CASE("gradient hand case and product-rule oracle") {
  std::vector<double> e(8, 0.0);
  e[0] = 1.0;
  const CouplingTensor single(3, 2, e);
  const auto g = gradient(single, std::vector<double>{0.5, 7.0});
  CHECK(g[0] == doctest::Approx(0.75));
  CHECK(g[1] == 0.0);
  CHECK(gradient(single, std::vector<double>{0.0, 0.0}) == std::vector<double>{0.0, 0.0});

  for (int p = 2; p <= 4; ++p) {
    const auto a = sample_gaussian(p, 5, 40 + p);
    const auto u = uniform_vector(5, 50 + p);
    const auto want = ref::gradient(a, u);
    const auto got = gradient(a, u);
    CHECK(testing::max_abs_diff(got, want) <= 1e-12 * (1.0 + testing::norm2(want)));
    const auto sym = gradient(symmetrize(a), u);
    CHECK(testing::max_abs_diff(sym, want) <= 1e-12 * (1.0 + testing::norm2(want)));
  }
}

TEST_CASE("interpolate endpoints and coefficients") {
  const auto a = sample_gaussian(3, 3, 1);
  const auto b = sample_gaussian(3, 3, 2);
  const auto at0 = interpolate(a, b, 0.0);
  const auto at1 = interpolate(a, b, 1.0);
  CHECK(std::equal(at0.entries().begin(), at0.entries().end(), a.entries().begin()));
  CHECK(std::equal(at1.entries().begin(), at1.entries().end(), b.entries().begin()));
  REQUIRE(at0.provenance());
  CHECK(at0.provenance()->kind == "interpolated");
  CHECK(at0.provenance()->seed_hat == b.provenance()->seed);

  const CouplingTensor one(2, 1, {1.0});
  const CouplingTensor two(2, 1, {2.0});
  CHECK(interpolate(one, two, 0.25).entries()[0] == doctest::Approx(1.8660254));
  CHECK_THROWS_AS(interpolate(a, b, 1.5), InvalidArgument);
  CHECK_THROWS_AS(interpolate(a, sample_gaussian(3, 4, 1), 0.5), InvalidArgument);
}

TEST_CASE("norms bracket the operator norm") {
  std::vector<double> id(25, 0.0);
  for (int i = 0; i < 5; ++i) id[static_cast<std::size_t>(i * 6)] = 1.0;
  const auto r = norms(CouplingTensor(2, 5, id, true), 4, 100, 3);
  CHECK(r.frobenius == doctest::Approx(std::sqrt(5.0)));
  CHECK(r.op_lower == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.op_upper == r.frobenius);

  // rank one v x v x v with unit v
  const std::vector<double> v{0.6, 0.0, 0.8};
  std::vector<double> e(27);
  for (std::size_t k = 0; k < 27; ++k) e[k] = v[k / 9] * v[(k / 3) % 3] * v[k % 3];
  const auto r1 = norms(CouplingTensor(3, 3, e), 4, 100, 1);
  CHECK(r1.op_lower == doctest::Approx(1.0).epsilon(1e-9));

  const auto big = norms(sample_gaussian(4, 8, 2), 3, 30, 1);
  CHECK(big.op_lower <= big.op_upper);
  CHECK(big.op_upper <= big.frobenius);
}

TEST_CASE("norms against a grid maximization, p=3 N=2") {
  const auto a = sample_gaussian(3, 2, 12);
  const int steps = 360;
  std::vector<std::vector<double>> circle;
  for (int k = 0; k < steps; ++k) {
    const double th = 2.0 * M_PI * k / steps;
    circle.push_back({std::cos(th), std::sin(th)});
  }
  const auto e = a.entries();
  double best = 0.0;
  for (const auto& x : circle) {
    for (const auto& y : circle) {
      // contract the first two slots, then the third slot maximizes to a norm
      double z0 = 0.0, z1 = 0.0;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          const double w = x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
          z0 += e[static_cast<std::size_t>(i * 4 + j * 2)] * w;
          z1 += e[static_cast<std::size_t>(i * 4 + j * 2 + 1)] * w;
        }
      }
      best = std::max(best, std::hypot(z0, z1));
    }
  }
  const auto r = norms(a, 8, 200, 4);
  CHECK(r.op_lower >= best * (1.0 - 1e-3));
  CHECK(r.op_lower <= best * (1.0 + 1e-3));
}

TEST_CASE("norms against a sphere grid for a symmetric p=4 N=3 tensor") {
  // For symmetric tensors the maximum over separate slots is attained on the diagonal.
  const auto s = symmetrize(sample_gaussian(4, 3, 21));
  double best = 0.0;
  const int nt = 200, np = 400;
  for (int a = 0; a <= nt; ++a) {
    const double th = M_PI * a / nt;
    for (int b = 0; b < np; ++b) {
      const double ph = 2.0 * M_PI * b / np;
      const std::vector<double> u{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                  std::cos(th)};
      best = std::max(best, std::abs(ref::contract_full(s, u)));
    }
  }
  const auto r = norms(s, 8, 200, 5);
  CHECK(r.op_lower >= best * 0.99);
  CHECK(r.op_lower <= best * 1.01);
}

TEST_CASE("estimate_c2") {
  CHECK(estimate_c2(CouplingTensor::zeros(3, 4), 1.0, 50, 1).c2_hat == 0.0);

  const auto m = sample_gaussian(2, 6, 3);
  CHECK(estimate_c2(m, 1.0, 200, 2).c2_hat <= norms(m, 2, 10, 1).op_upper * (1.0 + 1e-12));

  const auto a = sample_gaussian(4, 6, 8);
  const double M = 2.0;
  const auto est = estimate_c2(a, M, 200, 3);
  const double bound = 3.0 * frobenius_norm(a) * std::pow(M * std::sqrt(6.0), 2) * (1.0 + 1e-9);
  CHECK(est.c2_hat > 0.0);
  CHECK(est.c2_hat <= bound);
  CHECK(est.samples == 200);
  CHECK(estimate_c2(a, M, 100, 3).c2_hat <= est.c2_hat);
}

TEST_CASE("tensor file round trip and regeneration") {
  const auto dir = std::filesystem::temp_directory_path() / "pspin_tensor_io";
  std::filesystem::create_directories(dir);
  const auto a = sample_gaussian(3, 4, 77);
  write_tensor(dir / "a.bin", a);
  CHECK(read_tensor(dir / "a.bin") == a);
  CHECK(regenerate(tensor_header(a)) == a);
  const auto s = symmetrize(a);
  write_tensor(dir / "s.bin", s);
  CHECK(read_tensor(dir / "s.bin") == s);
  CHECK_THROWS_AS(regenerate(tensor_header(s)), InvalidArgument);
}
