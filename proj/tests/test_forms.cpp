#include <random>

#include "doctest.h"
#include "dioph/forms.hpp"
#include "support.hpp"

using namespace dioph;
using namespace dioph::forms;
using support::diagonal;
using support::product_pairs;
using support::term;
using support::vec;

namespace {

/// Random single form of degree k in n variables with coefficients in [-3, 3].
FormSystem random_form(std::mt19937_64& rng, int n, int k) {
  std::uniform_int_distribution<int> coeff(-3, 3);
  std::uniform_int_distribution<int> var(0, n - 1);
  std::vector<Monomial> terms;
  for (int t = 0; t < 4; ++t) {
    std::vector<int> e(n, 0);
    for (int d = 0; d < k; ++d) ++e[var(rng)];
    int c = coeff(rng);
    if (c == 0) c = 1;
    terms.push_back(term(e, c));
  }
  return FormSystem::from_monomials(n, {terms});
}

IVec random_vec(std::mt19937_64& rng, int n, int lo, int hi) {
  std::uniform_int_distribution<int> pick(lo, hi);
  IVec v(n);
  for (int j = 0; j < n; ++j) v[j] = pick(rng);
  return v;
}

/// F(x) = x^T A x for a symmetric integer matrix A.
FormSystem quadratic_from_matrix(const IMat& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<Monomial> terms;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Int c = i == j ? A(i, i) : 2 * A(i, j);
      if (c == 0) continue;
      std::vector<int> e(n, 0);
      ++e[i];
      ++e[j];
      terms.push_back(term(e, c));
    }
  }
  return FormSystem::from_monomials(n, {terms});
}

}  // namespace

TEST_CASE("evaluate examples") {
  CHECK(evaluate(product_pairs(2), vec({1, 2, 3, 4}))[0] == 14);
  CHECK(evaluate(diagonal({1, 1, 1}), vec({1, 1, 1}), 5)[0] == 3);
  CHECK(evaluate(diagonal({1, -1, 2}), vec({0, 0, 0}))[0] == 0);
  CHECK_THROWS_AS(evaluate(diagonal({1, 1}), vec({1, 2, 3})), Error);
}

TEST_CASE("construction validates degree and homogeneity") {
  CHECK_THROWS_AS(FormSystem::from_monomials(2, {{term({2, 0}), term({1, 0})}}), Error);
  CHECK_THROWS_AS(FormSystem::from_monomials(2, {{term({1, 0})}}), Error);
  CHECK_THROWS_AS(FormSystem::from_monomials(2, {{term({2, 0})}, {term({3, 0})}}), Error);
  CHECK_THROWS_AS(FormSystem::from_monomials(2, {{term({2, 0})}}, 3), Error);
}

TEST_CASE("homogeneity under integer scaling") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    const int k = 2 + trial % 2;
    const FormSystem F = random_form(rng, n, k);
    const IVec x = random_vec(rng, n, -9, 9);
    const Int t = 1 + trial % 4;
    Int tk = 1;
    for (int i = 0; i < k; ++i) tk *= t;
    CHECK(evaluate(F, IVec(t * x))[0] == tk * evaluate(F, x)[0]);
    CHECK(evaluate(F, x)[0] == support::naive_value(F, 0, x));
  }
}

TEST_CASE("compiled evaluation agrees with the modular path") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const FormSystem F = random_form(rng, 3, 3);
    const IVec x = random_vec(rng, 3, 0, 96);
    const Int exact = support::naive_value(F, 0, x);
    CHECK(evaluate(F, x, 97)[0] == support::floor_mod(exact, 97));
    Int out = 0;
    CompiledSystem(F).evaluate_mod(x.data(), 97, &out);
    CHECK(out == support::floor_mod(exact, 97));
  }
}

TEST_CASE("jacobian examples") {
  const auto j1 = jacobian_mod_p(diagonal({1, 1, 1}), vec({1, 0, 0}), 5);
  CHECK(j1.rank == 1);
  CHECK(j1.matrix(0, 0) == 2);
  CHECK(j1.matrix(0, 1) == 0);
  CHECK(jacobian_mod_p(diagonal({1, 1, 1}), vec({0, 0, 0}), 5).rank == 0);
  const auto j3 = jacobian_mod_p(product_pairs(1), vec({0, 1}), 3);
  CHECK(j3.rank == 1);
  CHECK(j3.matrix(0, 0) == 1);
  CHECK(j3.matrix(0, 1) == 0);
  CHECK_THROWS_AS(jacobian_mod_p(product_pairs(1), vec({0, 1}), 4), Error);
}

TEST_CASE("pairwise independence") {
  CHECK(pairwise_independent((IMat(2, 2) << 1, 0, 0, 1).finished()));
  CHECK_FALSE(pairwise_independent((IMat(2, 2) << 1, 0, 2, 0).finished()));
  CHECK(pairwise_independent((IMat(2, 2) << 1, 1, 1, -1).finished()));
  CHECK_THROWS_AS(LinearFamily::from_rows((IMat(2, 2) << 1, 0, 2, 0).finished()), Error);
  CHECK_THROWS_AS(LinearFamily::from_rows((IMat(2, 2) << 1, 0, 0, 0).finished()), Error);
}

TEST_CASE("multilinear phi examples") {
  const IVec h = vec({5, 7});
  const IMat phi = multilinear_phi(product_pairs(1), std::vector<IVec>{h});
  CHECK(phi(0, 0) == 7);
  CHECK(phi(0, 1) == 5);
  const IMat phi2 = multilinear_phi(diagonal({1, 1}), std::vector<IVec>{vec({1, 1})});
  CHECK(phi2(0, 0) == 2);
  CHECK(phi2(0, 1) == 2);
  const FormSystem cube = FormSystem::from_monomials(1, {{term({3})}});
  CHECK(multilinear_phi(cube, std::vector<IVec>{vec({1}), vec({2})})(0, 0) == 12);
}

TEST_CASE("multilinear phi is symmetric in its arguments") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const FormSystem F = random_form(rng, 3, 3);
    const IVec a = random_vec(rng, 3, -4, 4);
    const IVec b = random_vec(rng, 3, -4, 4);
    CHECK(multilinear_phi(F, std::vector<IVec>{a, b}) == multilinear_phi(F, std::vector<IVec>{b, a}));
  }
}

TEST_CASE("iterated difference identity") {
  CHECK(difference_identity_check(product_pairs(1), std::vector<IVec>{vec({2, 3})}, vec({4, 5})));
  CHECK(difference_identity_check(diagonal({1, 1}), std::vector<IVec>{vec({-1, 6})}, vec({2, 2})));

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    const int k = 2 + trial % 2;
    const FormSystem F = random_form(rng, n, k);
    std::vector<IVec> h;
    for (int i = 0; i < k - 1; ++i) h.push_back(random_vec(rng, n, -3, 3));
    const IVec x = random_vec(rng, n, -5, 5);
    CHECK(difference_identity_check(F, h, x));

    // independent oracle: iterate differences with the naive evaluator
    auto delta = [&](const IVec& y) {
      Int total = 0;
      for (int mask = 0; mask < (1 << (k - 1)); ++mask) {
        IVec z = y;
        int bits = 0;
        for (int i = 0; i < k - 1; ++i) {
          if (mask >> i & 1) {
            z += h[i];
            ++bits;
          }
        }
        const int sign = (k - 1 - bits) % 2 == 0 ? 1 : -1;
        total += sign * support::naive_value(F, 0, z);
      }
      return total;
    };
    const IMat phi = multilinear_phi(F, h);
    Int linear = 0;
    for (int j = 0; j < n; ++j) linear += x[j] * phi(0, j);
    CHECK(delta(x) - delta(IVec::Zero(n)) == linear);
  }
}

TEST_CASE("rank of quadratic forms") {
  CHECK(rank_quadratic(diagonal({1, 1, 1, 1, 1})) == 5);
  CHECK(rank_quadratic(product_pairs(1)) == 2);
  CHECK(rank_quadratic(diagonal({1, 0, 0})) == 1);
  const FormSystem cube = FormSystem::from_monomials(1, {{term({3})}});
  CHECK_THROWS_AS(rank_quadratic(cube), Error);
}

TEST_CASE("quadratic rank is invariant under unimodular substitutions") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> entry(-2, 2);
  for (int trial = 0; trial < 40; ++trial) {
    IMat B(3, 2);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 2; ++j) B(i, j) = entry(rng);
    }
    const IMat A = B * B.transpose();  // symmetric, rank <= 2
    // unimodular U as a product of elementary shears
    IMat U = IMat::Identity(3, 3);
    for (int s = 0; s < 4; ++s) {
      IMat E = IMat::Identity(3, 3);
      const int i = s % 3, j = (s + 1 + trial % 2) % 3;
      E(i, j) = entry(rng);
      U = U * E;
    }
    const IMat A2 = U.transpose() * A * U;
    const int expected = static_cast<int>(A.cast<double>().fullPivLu().rank());
    if (A.isZero()) continue;
    CHECK(rank_quadratic(quadratic_from_matrix(A)) == expected);
    CHECK(rank_quadratic(quadratic_from_matrix(A2)) == expected);
  }
}

TEST_CASE("singular points mod p") {
  CHECK(count_singular_points_mod_p(diagonal({1, 1, 1}), vec({0}), 3) == 1);
  CHECK(count_singular_points_mod_p(product_pairs(1), vec({1}), 3) == 0);
  CHECK(count_singular_points_mod_p(product_pairs(1), vec({0}), 3) == 1);
  ExecutionLimits tight;
  tight.budget = 100;
  CHECK_THROWS_AS(count_singular_points_mod_p(diagonal({1, 1, 1, 1, 1}), vec({0}), 7, tight),
                  BudgetExceeded);
}

TEST_CASE("separability and isolated last variable") {
  CHECK(diagonal({1, 2}).separable());
  CHECK_FALSE(product_pairs(1).separable());
  const FormSystem mixed = FormSystem::from_monomials(3, {{term({1, 1, 0}), term({0, 0, 2}, 3)}});
  CHECK(mixed.last_variable_isolated());
  CHECK(mixed.pure_power_coefficient(0, 2) == 3);
  CHECK_FALSE(product_pairs(1).last_variable_isolated());
}
