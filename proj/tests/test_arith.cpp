#include <random>

#include "doctest.h"
#include "dioph/arith.hpp"

using namespace dioph;
using namespace dioph::arith;

namespace {

// trial-division oracles, independent of the prime table
int naive_mobius(UInt n) {
  int sign = 1;
  for (UInt p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return 0;
    sign = -sign;
  }
  return n > 1 ? -sign : sign;
}

UInt naive_spf(UInt n) {
  for (UInt p = 2; p * p <= n; ++p) {
    if (n % p == 0) return p;
  }
  return n;
}

}  // namespace

TEST_CASE("mobius examples") {
  CHECK(mobius(1) == 1);
  CHECK(mobius(30) == -1);
  CHECK(mobius(12) == 0);
}

TEST_CASE("mobius agrees with trial division") {
  for (UInt n = 1; n <= 20000; ++n) REQUIRE(mobius(n) == naive_mobius(n));
}

TEST_CASE("mobius is multiplicative on coprime pairs") {
  for (UInt a = 1; a <= 10000; a += 7) {
    for (UInt b = 1; b <= 10000; b += 97) {
      if (std::gcd(a, b) != 1) continue;
      REQUIRE(mobius(a * b) == mobius(a) * mobius(b));
    }
  }
}

TEST_CASE("divisor sum of mobius is the indicator of 1") {
  for (UInt n = 1; n <= 10000; ++n) {
    int sum = 0;
    for (UInt d = 1; d * d <= n; ++d) {
      if (n % d) continue;
      sum += mobius(d);
      if (d * d != n) sum += mobius(n / d);
    }
    REQUIRE(sum == (n == 1 ? 1 : 0));
  }
}

TEST_CASE("primorial examples") {
  CHECK(primorial(10) == 210);
  CHECK(primorial(2) == 2);
  CHECK(primorial(1) == 1);
}

TEST_CASE("primorial is squarefree with exactly the small primes") {
  const BigInt W = primorial(100);
  BigInt expected = 1;
  for (UInt p = 2; p <= 100; ++p) {
    if (naive_spf(p) == p) expected *= p;
  }
  CHECK(W == expected);
  for (UInt p = 2; p <= 100; ++p) {
    bool squarefree = true;
    for (UInt d = 2; d * d <= p; ++d) squarefree = squarefree && p % (d * d) != 0;
    CHECK((W % p == 0) == squarefree);
  }
  CHECK(primorial(1000) % 997 == 0);  // far beyond 64 bits
}

TEST_CASE("is_rough examples") {
  CHECK(is_rough(7, 3.0));
  CHECK_FALSE(is_rough(10, 3.0));
  CHECK(is_rough(1, 100.0));
}

TEST_CASE("is_rough matches the smallest prime factor") {
  for (UInt x = 2; x <= 100000; ++x) {
    const auto spf = static_cast<double>(factorize(x).factors.front().first);
    for (double bound : {1.5, 2.0, 3.0, 10.0, 31.6, 317.0}) {
      REQUIRE(is_rough(x, bound) == (spf >= bound));
    }
  }
}

TEST_CASE("coprime_to_W examples") {
  const std::vector<Int> a{5, 7}, b{4, 9}, c{1}, zero{0};
  CHECK(coprime_to_W(a, 6));
  CHECK_FALSE(coprime_to_W(b, 6));
  CHECK(coprime_to_W(c, 1));
  CHECK_FALSE(coprime_to_W(zero, 6));
  const std::vector<Int> negative{-5, 7};
  CHECK(coprime_to_W(negative, 6));
}

TEST_CASE("factorization reproduces its value") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<UInt> pick(1, 1'000'000'000'000ULL);
  for (int i = 0; i < 300; ++i) {
    const UInt n = pick(rng);
    const auto fac = factorize(n);
    UInt product = 1;
    UInt previous = 1;
    for (auto [p, e] : fac.factors) {
      CHECK(p > previous);
      CHECK(e >= 1);
      CHECK(is_prime(p));
      for (int k = 0; k < e; ++k) product *= p;
      previous = p;
    }
    CHECK(product == n);
  }
}

TEST_CASE("prime table is complete and strictly increasing") {
  const PrimeTable table(10000);
  const auto& primes = table.primes();
  std::size_t idx = 0;
  for (UInt n = 2; n <= 10000; ++n) {
    if (naive_spf(n) == n) {
      REQUIRE(idx < primes.size());
      CHECK(primes[idx++] == n);
    }
  }
  CHECK(idx == primes.size());
}

TEST_CASE("modular helpers") {
  CHECK(mod(-7, 5) == 3);
  CHECK(pow_mod(3, 200, 1000000007) == 3 * pow_mod(3, 199, 1000000007) % 1000000007);
  for (Int a = 1; a < 13; ++a) CHECK(a * inverse_mod(a, 13) % 13 == 1);
  CHECK(valuation(72, 2) == 3);
  CHECK(valuation(72, 3) == 2);
  CHECK(radical(72) == 6);
  CHECK(euler_phi(210) == 48);
  CHECK_THROWS_AS(ipow(Int{10}, 19u), Error);
}
