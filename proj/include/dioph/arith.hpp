#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dioph/core.hpp"

namespace dioph::arith {

/// All primes up to `limit`, ascending. Immutable once built.
class PrimeTable {
 public:
  explicit PrimeTable(UInt limit);

  UInt limit() const { return limit_; }
  const std::vector<UInt>& primes() const { return primes_; }
  bool contains(UInt n) const;

 private:
  UInt limit_;
  std::vector<UInt> primes_;
};

/// Process-wide table of primes below 10^6; enough for trial division of
/// anything up to 10^12.
const PrimeTable& small_primes();

struct Factorization {
  UInt value = 1;
  std::vector<std::pair<UInt, int>> factors;  // ascending primes, exponent >= 1

  std::vector<UInt> primes() const;
  bool squarefree() const;
};

Factorization factorize(UInt n);

bool is_prime(UInt n);
std::vector<UInt> primes_up_to(UInt limit);
UInt smallest_prime_factor(UInt n);  // returns 1 for n == 1

int mobius(UInt n);
UInt radical(UInt n);
bool is_squarefree(UInt n);
UInt euler_phi(UInt n);

/// Product of all primes <= omega.
BigInt primorial(UInt omega);

/// Every prime divisor of x is >= bound. x == 1 is rough.
bool is_rough(UInt x, double bound);

/// gcd(|v|, W) == 1 for every v.
bool coprime_to_W(std::span<const Int> values, UInt W);

// Modular helpers. `modulus` must be positive.
inline Int mod(Int a, Int modulus) {
  Int r = a % modulus;
  return r < 0 ? r + modulus : r;
}

inline Int mul_mod(Int a, Int b, Int modulus) {
  return static_cast<Int>((static_cast<__int128>(a) * b) % modulus);
}

Int pow_mod(Int base, UInt exponent, Int modulus);
Int inverse_mod(Int a, Int p);  // p prime, a not divisible by p

/// Checked integer power; throws on overflow.
Int ipow(Int base, unsigned exponent);
UInt ipow(UInt base, unsigned exponent);

/// Largest e with p^e | n (n != 0).
int valuation(Int n, UInt p);

}  // namespace dioph::arith
