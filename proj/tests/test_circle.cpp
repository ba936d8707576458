#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dioph/arith.hpp"
#include "dioph/circle.hpp"
#include "dioph/counter.hpp"
#include "dioph/padic.hpp"
#include "support.hpp"

using namespace dioph;
using namespace dioph::circle;
using forms::FormSystem;
using support::diagonal;
using support::product_pairs;
using support::vec;

namespace {

RVec rvec(std::initializer_list<double> values) {
  RVec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

Complex naive_e(double t) {
  return std::exp(Complex(0, 2 * std::numbers::pi * t));
}

/// Σ_{x in Z_q^n} e(a F(dx + s)/q) with the textbook exponential.
Complex naive_gauss(const FormSystem& F, Int a, Int q, Int d, const IVec& s) {
  Complex total = 0;
  support::residues(F.variables(), q, [&](const IVec& x) {
    const Int value = support::floor_mod(a * support::naive_value(F, 0, IVec(d * x + s)), q);
    total += naive_e(static_cast<double>(value) / q);
  });
  return total;
}

}  // namespace

TEST_CASE("exponential sum examples") {
  const FormSystem F = diagonal({1});
  CHECK(std::abs(exp_sum(F, 1, vec({0}), rvec({0}), 7) - 7.0) < 1e-12);
  CHECK(std::abs(exp_sum(diagonal({1, 1}), 1, vec({0, 0}), rvec({0}), 5) - 25.0) < 1e-12);
  CHECK(std::abs(exp_sum(F, 1, vec({0}), rvec({0.5}), 4)) < 1e-12);
}

TEST_CASE("exponential sums over a full residue system are Gauss sums") {
  const std::vector<FormSystem> systems = {diagonal({1, 1}), product_pairs(1), diagonal({1, 2, -1})};
  for (const auto& F : systems) {
    const int n = F.variables();
    for (Int q : {3, 4, 5, 7}) {
      for (Int d : {1, 2}) {
        IVec s = IVec::Zero(n);
        s[0] = 1;
        for (Int a = 1; a < q; ++a) {
          if (std::gcd(a, q) != 1) continue;
          const Complex e = exp_sum(F, d, s, rvec({static_cast<double>(a) / q}), d * q);
          const Complex g = gauss_sum(F, vec({a}), q, d, s);
          CHECK(std::abs(e - g) <= 1e-9);
          CHECK(std::abs(g - naive_gauss(F, a, q, d, s)) <= 1e-9);
          CHECK(std::abs(e) <= std::pow(static_cast<double>(q), n) + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("Gauss sum examples") {
  const FormSystem F = diagonal({1});
  CHECK(std::abs(gauss_sum(F, vec({1}), 1, 1, vec({0})) - 1.0) < 1e-12);
  CHECK(std::abs(gauss_sum(F, vec({1}), 2, 1, vec({0}))) < 1e-12);
  CHECK(std::abs(std::abs(gauss_sum(F, vec({1}), 5, 1, vec({0}))) - std::sqrt(5.0)) < 1e-9);
}

TEST_CASE("Weyl right-hand side") {
  const FormSystem F = diagonal({1, 1});
  for (Int N1 : {1, 3, 5}) {
    const double expected = std::pow(double(N1), -4) * std::pow(2.0 * N1 + 1, 2) * std::pow(double(N1), 2);
    CHECK(weyl_rhs(F, 1, rvec({0}), N1) == doctest::Approx(expected));
  }

  // x1x2 at N1 = 2: Φ(h) = (h2, h1), so the sum factors into two 1-D sums
  const double alpha = 0.3;
  double one_dim = 0;
  for (int h = -2; h <= 2; ++h) {
    const double t = alpha * h;
    const double dist = std::abs(t - std::round(t));
    one_dim += dist * 2 <= 1 ? 2.0 : 1 / dist;
  }
  CHECK(weyl_rhs(product_pairs(1), 1, rvec({alpha}), 2) == doctest::Approx(one_dim * one_dim / 16));
}

TEST_CASE("Weyl inequality on tiny random instances") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unit(0, 1);
  std::uniform_int_distribution<int> coeff(-2, 2), side(2, 8), dims(1, 3);
  double C = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = dims(rng);
    std::vector<Int> c(n);
    for (auto& x : c) {
      x = coeff(rng);
      if (x == 0) x = 1;
    }
    const FormSystem F = diagonal(c);
    const Int N1 = side(rng);
    const RVec a = rvec({unit(rng)});
    const double lhs = std::pow(std::abs(exp_sum(F, 1, IVec::Zero(n), a, N1)) / std::pow(double(N1), n), 2);
    const double rhs = weyl_rhs(F, 1, a, N1);
    C = std::max(C, lhs / rhs);
  }
  MESSAGE("fitted Weyl constant C = " << C);
  CHECK(C <= 1.0 + 1e-9);
}

TEST_CASE("major arcs") {
  MajorArcParams params;
  params.theta = 0.4;
  params.N1 = 1000;
  params.r = 1;
  params.k = 2;
  // κ = 0.4, q <= 1000^0.4 ≈ 15.8
  const auto center = major_arc_membership(rvec({3.0 / 7}), params);
  REQUIRE(center.has_value());
  CHECK(center->q == 7);
  CHECK(center->a[0] == 3);
  const auto zero = major_arc_membership(rvec({0}), params);
  REQUIRE(zero.has_value());
  CHECK(zero->q == 1);
  CHECK(zero->a[0] == 0);

  // an irrational far from every center with q <= 15
  const double alpha = std::numbers::sqrt2 - 1 + 0.004;
  bool near_any = false;
  for (Int q = 1; q <= 15; ++q) {
    const double width = std::pow(1000.0, -2 + 0.4) / q;
    if (std::abs(alpha - std::round(alpha * q) / q) <= width) near_any = true;
  }
  CHECK_FALSE(near_any);
  CHECK_FALSE(major_arc_membership(rvec({alpha}), params).has_value());
}

TEST_CASE("local factors from Gauss sums") {
  const FormSystem F = product_pairs(1);
  CHECK(local_factor_via_gauss(F, vec({1}), 3, 1, 1, vec({0, 0})) == doctest::Approx(2.0 / 3));
  CHECK(local_factor_via_gauss(F, vec({1}), 3, 0, 1, vec({0, 0})) == doctest::Approx(1.0));
  const FormSystem G = diagonal({1, 1, 1});
  CHECK(local_factor_via_gauss(G, vec({0}), 3, 2, 1, vec({0, 0, 0})) ==
        doctest::Approx(to_double(padic::sigma_p_l(G, vec({0}), 3, 2, 1, vec({0, 0, 0})).value)).epsilon(1e-12));
  for (Int v : {0, 1, 2}) {
    for (Int d : {1, 2, 3}) {
      const IVec s = vec({1, 2, 0, 1});
      const double a = local_factor_via_gauss(product_pairs(2), vec({v}), 2, 2, d, s);
      const double b = to_double(padic::sigma_p_l(product_pairs(2), vec({v}), 2, 2, d, s).value);
      CHECK(std::abs(a - b) <= 1e-9);
    }
  }
}

TEST_CASE("singular series") {
  const FormSystem F = diagonal({1, 1, 1, 1, 1});
  const IVec zero = IVec::Zero(5);
  const auto one = singular_series(F, vec({0}), 1, zero, 1);
  CHECK(std::abs(one.value - 1.0) < 1e-12);

  const auto s = singular_series(F, vec({0}), 1, zero, 20);
  CHECK(std::abs(s.value.imag()) <= 1e-8);
  CHECK(s.terms.size() == 20);
  double product = 1;
  for (UInt p : arith::primes_up_to(20)) {
    product *= to_double(padic::sigma_p_l(F, vec({0}), p, 2, 1, zero).value);
  }
  MESSAGE("series " << s.value.real() << ", product " << product << ", tail " << s.tail);
  CHECK(std::abs(s.value.real() - product) <= 2 * s.tail);
}

TEST_CASE("oscillatory integral") {
  const FormSystem F = diagonal({1, 1});
  CHECK(std::abs(oscillatory_integral(F, rvec({0})) - 1.0) <= 1e-14);
  // a mixed form goes through the tensor route
  const FormSystem mixed = FormSystem::from_monomials(
      2, {{support::term({2, 0}), support::term({1, 1}), support::term({0, 2})}});
  CHECK(std::abs(oscillatory_integral(mixed, rvec({0})) - 1.0) <= 1e-13);
  // ∫_0^1 e(γ y^2) dy against a fine midpoint rule
  const double gamma = 1.7;
  Complex reference = 0;
  const int M = 200000;
  for (int i = 0; i < M; ++i) {
    const double y = (i + 0.5) / M;
    reference += naive_e(gamma * y * y);
  }
  reference /= M;
  CHECK(std::abs(oscillatory_integral(diagonal({1}), rvec({gamma})) - reference) <= 1e-8);
  CHECK(std::abs(oscillatory_integral(F, rvec({gamma})) - reference * reference) <= 1e-8);
}

TEST_CASE("singular integral estimates") {
  const FormSystem F = diagonal({1, 1});
  const auto J = singular_integral_J(F, rvec({0.5}));
  CHECK(std::abs(J.value - std::numbers::pi / 4) <= 0.02 * std::numbers::pi / 4);
  CHECK(J.standard_error > 0);
  CHECK(std::abs(J.half_delta_value - J.value) <= 4 * J.standard_error * std::sqrt(2.0));
  CHECK(singular_integral_J(F, rvec({3})).value == 0);

  IntegralControls other;
  other.seed = 7;
  other.limits.workers = 3;
  const auto J2 = singular_integral_J(F, rvec({0.5}), other);
  CHECK(std::abs(J.value - J2.value) <= 3 * std::hypot(J.standard_error, J2.standard_error));
  other.limits.workers = 1;
  CHECK(singular_integral_J(F, rvec({0.5}), other).value == J2.value);

  IntegralControls osc;
  osc.method = IntegralMethod::oscillatory;
  osc.Phi = 20;
  const auto J3 = singular_integral_J(F, rvec({0.5}), osc);
  MESSAGE("oscillatory J(0.5; 20) = " << J3.value);
  CHECK(std::abs(J3.value - std::numbers::pi / 4) <= 0.05);
}

TEST_CASE("Birch prediction") {
  const FormSystem F = diagonal({1, 1, 1, -1, -1});
  const IVec zero = IVec::Zero(5);
  BirchOptions options;
  const auto pred = birch_prediction(F, vec({0}), 40, 1, zero, options);
  const auto count = counter::last_variable_accelerated_count(
      F, vec({0}), {40, 5}, counter::CongruenceRestriction::none(5));
  CHECK(std::abs(static_cast<double>(count.count) / pred.value - 1) <= 0.3);
  CHECK(pred.factors.size() == arith::primes_up_to(50).size());

  // no real solutions: J = 0 forces a zero prediction
  const FormSystem G = diagonal({1, 1});
  const auto none = birch_prediction(G, vec({1000}), 10, 1, vec({0, 0}), options);
  CHECK(none.J.value == 0);
  CHECK(none.value == 0);
}

TEST_CASE("Birch prediction scales with D through the local factors") {
  // D = 3, s nonsingular mod 3: σ_3(3, s) = 3^r replaces σ_3(1, 0); the
  // other factors are unchanged, so prediction(D) D^n = prediction(1) 3 / σ_3
  const FormSystem F = diagonal({1, 1, 1, -1, -1});
  const IVec v = vec({0});
  const IVec s = vec({1, 0, 0, 1, 0});
  BirchOptions options;
  const auto base = birch_prediction(F, v, 30, 1, IVec::Zero(5), options);
  const auto shifted = birch_prediction(F, v, 30, 3, s, options);
  const double sigma3 = base.factors[1].value;
  CHECK(shifted.factors[1].value == doctest::Approx(3.0));
  CHECK(shifted.value * std::pow(3.0, 5) == doctest::Approx(base.value * 3.0 / sigma3).epsilon(1e-12));
  const auto identity = padic::lemma21_check(F, v, 3, 3, 1, s, s, IVec::Zero(5), 2);
  CHECK(identity.divides_D.value());
}
