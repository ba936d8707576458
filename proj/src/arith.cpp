#include "dioph/arith.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dioph::arith {

PrimeTable::PrimeTable(UInt limit) : limit_(limit) {
  if (limit < 2) return;
  std::vector<bool> composite(limit + 1, false);
  for (UInt i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes_.push_back(i);
    for (UInt j = i * i; j <= limit; j += i) composite[j] = true;
  }
}

bool PrimeTable::contains(UInt n) const {
  return std::binary_search(primes_.begin(), primes_.end(), n);
}

const PrimeTable& small_primes() {
  static const PrimeTable table(1'000'000);
  return table;
}

std::vector<UInt> Factorization::primes() const {
  std::vector<UInt> out;
  out.reserve(factors.size());
  for (const auto& [p, e] : factors) out.push_back(p);
  return out;
}

bool Factorization::squarefree() const {
  return std::all_of(factors.begin(), factors.end(),
                     [](const auto& f) { return f.second == 1; });
}

Factorization factorize(UInt n) {
  require(n >= 1, "factorize: argument must be positive");
  Factorization out;
  out.value = n;
  for (UInt p : small_primes().primes()) {
    if (p * p > n) break;
    if (n % p != 0) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.factors.emplace_back(p, e);
  }
  if (n > 1) {
    const UInt cap = small_primes().limit();
    if (n > cap && n / cap > cap) {
      fail("factorize: argument beyond trial-division range (10^12)");
    }
    out.factors.emplace_back(n, 1);
  }
  return out;
}

bool is_prime(UInt n) {
  if (n < 2) return false;
  if (n <= small_primes().limit()) return small_primes().contains(n);
  return smallest_prime_factor(n) == n;
}

std::vector<UInt> primes_up_to(UInt limit) {
  if (limit <= small_primes().limit()) {
    const auto& all = small_primes().primes();
    return {all.begin(), std::upper_bound(all.begin(), all.end(), limit)};
  }
  return PrimeTable(limit).primes();
}

UInt smallest_prime_factor(UInt n) {
  require(n >= 1, "smallest_prime_factor: argument must be positive");
  if (n == 1) return 1;
  for (UInt p : small_primes().primes()) {
    if (p * p > n) return n;
    if (n % p == 0) return p;
  }
  return factorize(n).factors.front().first;
}

int mobius(UInt n) {
  const auto f = factorize(n);
  if (!f.squarefree()) return 0;
  return f.factors.size() % 2 == 0 ? 1 : -1;
}

UInt radical(UInt n) {
  UInt out = 1;
  for (const auto& [p, e] : factorize(n).factors) out *= p;
  return out;
}

bool is_squarefree(UInt n) { return factorize(n).squarefree(); }

UInt euler_phi(UInt n) {
  UInt out = n;
  for (const auto& [p, e] : factorize(n).factors) out = out / p * (p - 1);
  return out;
}

BigInt primorial(UInt omega) {
  require(omega >= 1, "primorial: omega must be positive");
  BigInt out = 1;
  for (UInt p : primes_up_to(omega)) out *= p;
  return out;
}

bool is_rough(UInt x, double bound) {
  require(x >= 1, "is_rough: argument must be positive");
  if (x == 1) return true;
  return static_cast<double>(smallest_prime_factor(x)) >= bound;
}

bool coprime_to_W(std::span<const Int> values, UInt W) {
  require(W >= 1, "coprime_to_W: W must be positive");
  return std::all_of(values.begin(), values.end(), [W](Int v) {
    const UInt a = static_cast<UInt>(v < 0 ? -v : v);
    return std::gcd(a, W) == 1;
  });
}

Int pow_mod(Int base, UInt exponent, Int modulus) {
  Int result = 1 % modulus;
  base = mod(base, modulus);
  while (exponent > 0) {
    if (exponent & 1) result = mul_mod(result, base, modulus);
    base = mul_mod(base, base, modulus);
    exponent >>= 1;
  }
  return result;
}

Int inverse_mod(Int a, Int p) {
  require(mod(a, p) != 0, "inverse_mod: not invertible");
  return pow_mod(a, static_cast<UInt>(p - 2), p);
}

Int ipow(Int base, unsigned exponent) {
  Int result = 1;
  for (unsigned i = 0; i < exponent; ++i) {
    if (__builtin_mul_overflow(result, base, &result)) {
      throw Error(ErrorKind::internal, "ipow: integer overflow");
    }
  }
  return result;
}

UInt ipow(UInt base, unsigned exponent) {
  UInt result = 1;
  for (unsigned i = 0; i < exponent; ++i) {
    if (__builtin_mul_overflow(result, base, &result)) {
      throw Error(ErrorKind::internal, "ipow: integer overflow");
    }
  }
  return result;
}

int valuation(Int n, UInt p) {
  require(n != 0, "valuation: argument must be nonzero");
  int e = 0;
  const Int pp = static_cast<Int>(p);
  while (n % pp == 0) {
    n /= pp;
    ++e;
  }
  return e;
}

}  // namespace dioph::arith
