#include <cmath>
#include <random>

#include "doctest.h"
#include "dioph/arith.hpp"
#include "dioph/counter.hpp"
#include "support.hpp"

using namespace dioph;
using namespace dioph::counter;
using forms::FormSystem;
using forms::LinearFamily;
using support::diagonal;
using support::vec;

namespace {

LinearFamily coordinates(int n) {
  return LinearFamily::from_rows(IMat::Identity(n, n));
}

/// Plain nested enumeration over {1..N}^n.
template <typename Visit>
void box_points(int n, Int N, Visit&& visit) {
  IVec x = IVec::Ones(n);
  while (true) {
    visit(x);
    int t = 0;
    while (t < n && ++x[t] > N) x[t++] = 1;
    if (t >= n) return;
  }
}

UInt naive_count(const FormSystem& F, Int v, Int N, Int D, const IVec& s) {
  UInt count = 0;
  box_points(F.variables(), N, [&](const IVec& x) {
    for (int j = 0; j < x.size(); ++j) {
      if (support::floor_mod(x[j] - s[j], D) != 0) return;
    }
    if (support::naive_value(F, 0, x) == v) ++count;
  });
  return count;
}

}  // namespace

TEST_CASE("congruent solution counts") {
  const FormSystem F = diagonal({1, 1});
  CHECK(count_congruent_solutions(F, vec({25}), {25, 2}, CongruenceRestriction::none(2)).count == 2);
  CHECK(count_congruent_solutions(F, vec({3}), {10, 2}, CongruenceRestriction::none(2)).count == 0);
  CHECK(count_congruent_solutions(F, vec({8}), {10, 2}, {2, vec({0, 0})}).count == 1);
}

TEST_CASE("counts agree with naive enumeration") {
  const FormSystem F = diagonal({1, 2, -1});
  for (Int v : {0, 5, 17}) {
    for (Int D : {1, 2, 3}) {
      const IVec s = vec({1, 0, 2});
      CHECK(count_congruent_solutions(F, vec({v}), {12, 3}, {D, s}).count ==
            naive_count(F, v, 12, D, s));
    }
  }
}

TEST_CASE("count is additive over residue classes") {
  const FormSystem F = diagonal({1, 1, -1});
  const Int N = 30;
  const UInt total =
      count_congruent_solutions(F, vec({0}), {N, 3}, CongruenceRestriction::none(3)).count;
  UInt parts = 0;
  support::residues(3, 3, [&](const IVec& s) {
    parts += count_congruent_solutions(F, vec({0}), {N, 3}, {3, s}).count;
  });
  CHECK(total > 0);
  CHECK(parts == total);
}

TEST_CASE("result does not depend on the worker count") {
  const FormSystem F = diagonal({1, 1, 1, -1});
  ExecutionLimits one, four;
  four.workers = 4;
  const auto a = count_congruent_solutions(F, vec({3}), {25, 4}, CongruenceRestriction::none(4), one);
  const auto b = count_congruent_solutions(F, vec({3}), {25, 4}, CongruenceRestriction::none(4), four);
  CHECK(a.count == b.count);
}

TEST_CASE("budget refusal names the cost") {
  ExecutionLimits tight;
  tight.budget = 1000;
  try {
    count_congruent_solutions(diagonal({1, 1, 1}), vec({3}), {20, 3}, CongruenceRestriction::none(3), tight);
    FAIL("expected refusal");
  } catch (const BudgetExceeded& e) {
    CHECK(e.required() == doctest::Approx(8000));
    CHECK(e.ceiling() == doctest::Approx(1000));
  }
}

TEST_CASE("almost-prime counts") {
  const FormSystem F = diagonal({1, 1});
  const auto L = coordinates(2);
  CHECK(count_almost_prime_solutions(F, L, vec({25}), {25, 2}, 0.2).count == 2);
  CHECK(count_almost_prime_solutions(F, L, vec({25}), {25, 2}, 0.3).count == 0);
  CHECK(count_almost_prime_solutions(F, L, vec({3}), {25, 2}, 0.3).count == 0);
}

TEST_CASE("almost-prime count is monotone in eps and excludes zeros") {
  const FormSystem F = diagonal({1, 1, -1});
  const auto L = LinearFamily::from_rows((IMat(2, 3) << 1, 0, 0, 4, -3, 0).finished());
  UInt previous = UINT64_MAX;
  for (double eps : {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9}) {
    const auto r = count_almost_prime_solutions(F, L, vec({0}), {40, 3}, eps);
    CHECK(r.count <= previous);
    previous = r.count;
    CHECK(r.zero_exclusions > 0);  // 4x1 = 3x2 on (3k, 4k, 5k) makes l_2 vanish
  }
}

TEST_CASE("accelerated count matches full enumeration") {
  CHECK(last_variable_accelerated_count(diagonal({1, 1}), vec({25}), {25, 2},
                                        CongruenceRestriction::none(2)).count == 2);
  CHECK(last_variable_accelerated_count(diagonal({1, 1}), vec({3}), {10, 2},
                                        CongruenceRestriction::none(2)).count == 0);
  const FormSystem five = diagonal({1, 1, 1, -1, -1});
  CHECK(last_variable_accelerated_count(five, vec({0}), {12, 5}, CongruenceRestriction::none(5)).count ==
        count_congruent_solutions(five, vec({0}), {12, 5}, CongruenceRestriction::none(5)).count);

  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> coeff(-3, 3), dim(2, 4), side(3, 12), mod(1, 3), target(-20, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = dim(rng);
    std::vector<Int> c(n);
    for (auto& x : c) x = coeff(rng);
    if (c.back() == 0) c.back() = 2;
    if (std::all_of(c.begin(), c.end() - 1, [](Int x) { return x == 0; })) c[0] = 1;
    const FormSystem F = diagonal(c);
    const Int N = side(rng), D = mod(rng);
    IVec s(n);
    for (int j = 0; j < n; ++j) s[j] = mod(rng);
    const IVec v = vec({target(rng)});
    CHECK(last_variable_accelerated_count(F, v, {N, n}, {D, s}).count ==
          count_congruent_solutions(F, v, {N, n}, {D, s}).count);
  }
}

TEST_CASE("accelerated count refuses unsupported systems") {
  CHECK_THROWS_AS(last_variable_accelerated_count(support::product_pairs(1), vec({6}), {10, 2},
                                                  CongruenceRestriction::none(2)),
                  Error);
}

TEST_CASE("weighted sum examples") {
  const FormSystem F = diagonal({1, 1});
  const auto L = coordinates(2);
  const sieve::WeightFunction f(1);
  auto plan = sieve::SievePlan::with_level(1, 26, 2);
  CHECK(sieve_weighted_sum(F, L, vec({3}), {25, 2}, plan).value == 0.0);
  CHECK(sieve_weighted_sum(F, L, vec({25}), {25, 2}, plan).value == 0.0);

  plan = sieve::SievePlan::with_level(1, 169, 1);
  const double lambda = sieve::lambda_R(6, f, 169);
  const auto r = sieve_weighted_sum(F, L, vec({13}), {13, 2}, plan);
  CHECK(r.value == doctest::Approx(2 * lambda * lambda).epsilon(1e-14));
  CHECK(r.solutions == 2);
}

TEST_CASE("unit weight with W = 1 reproduces the plain count") {
  const FormSystem F = diagonal({1, 1, -1});
  const auto L = coordinates(3);
  const auto plan = sieve::SievePlan::with_level(1, 10, 1);
  WeightedSumOptions opts;
  opts.mode = WeightMode::unit;
  for (Int v : {1, 7, 20}) {
    const auto r = sieve_weighted_sum(F, L, vec({v}), {30, 3}, plan, opts);
    CHECK(r.value == static_cast<double>(
                         count_congruent_solutions(F, vec({v}), {30, 3}, CongruenceRestriction::none(3)).count));
  }
}

TEST_CASE("residue-class sums aggregate to the coprime sum") {
  const FormSystem F = diagonal({1, 1, -1});
  const auto L = coordinates(3);
  const auto plan = sieve::SievePlan::with_level(1, 50, 3);  // W = 6
  const IVec v = vec({1});
  const BoxSpec box{40, 3};
  const double aggregate = sieve_weighted_sum(F, L, v, box, plan).value;
  double parts = 0;
  int admissible = 0;
  support::residues(3, 6, [&](const IVec& b) {
    const IVec lb = L.evaluate(b);
    if (!arith::coprime_to_W({lb.data(), 3}, 6)) return;
    ++admissible;
    WeightedSumOptions opts;
    opts.b = b;
    parts += sieve_weighted_sum(F, L, v, box, plan, opts).value;
  });
  CHECK(admissible == 8);
  CHECK(parts == doctest::Approx(aggregate).epsilon(1e-12));

  WeightedSumOptions bad;
  bad.b = vec({2, 1, 1});
  CHECK_THROWS_AS(sieve_weighted_sum(F, L, v, box, plan, bad), Error);
  WeightedSumOptions small_q;
  small_q.q = 3;
  CHECK_THROWS_AS(sieve_weighted_sum(F, L, v, box, plan, small_q), Error);
}
