#pragma once

#include <optional>

#include "dioph/core.hpp"
#include "dioph/forms.hpp"
#include "dioph/sieve.hpp"

namespace dioph::counter {

/// The integer cube {1, ..., N}^n.
struct BoxSpec {
  Int N = 1;
  int n = 1;
};

/// x = s (mod D) coordinatewise.
struct CongruenceRestriction {
  Int D = 1;
  IVec s;

  static CongruenceRestriction none(int n) { return {1, IVec::Zero(n)}; }
};

struct CountResult {
  UInt count = 0;
  double cost = 0;  // points visited
};

/// |{x in [N]^n : x = s mod D, F(x) = v}|.
CountResult count_congruent_solutions(const forms::FormSystem& F, const IVec& v,
                                      const BoxSpec& box, const CongruenceRestriction& c,
                                      const ExecutionLimits& limits = {});

/// Enumerates x_1..x_{n-1} and solves F_i = v_i for x_n, valid when x_n only
/// appears through pure powers c_i x_n^k. Throws Error(unsupported) otherwise.
CountResult last_variable_accelerated_count(const forms::FormSystem& F, const IVec& v,
                                            const BoxSpec& box, const CongruenceRestriction& c,
                                            const ExecutionLimits& limits = {});

struct AlmostPrimeResult {
  UInt count = 0;
  UInt solutions = 0;        // before the roughness filter
  UInt zero_exclusions = 0;  // solutions with some l_i(x) = 0
  double bound = 0;          // N^eps
};

/// Solutions whose linear form values |l_i(x)| are all N^eps-rough.
AlmostPrimeResult count_almost_prime_solutions(const forms::FormSystem& F,
                                               const forms::LinearFamily& L, const IVec& v,
                                               const BoxSpec& box, double eps,
                                               const ExecutionLimits& limits = {});

enum class WeightMode {
  gpy,   // Λ_R^2
  unit,  // constant 1, the R -> ∞ degenerate weight
};

struct WeightedSumOptions {
  std::optional<IVec> b;  // residue class mod W; aggregate over admissible b if absent
  std::optional<UInt> q;  // restrict to q | l_1(x)···l_m(x)
  WeightMode mode = WeightMode::gpy;
};

struct WeightedSumResult {
  double value = 0;
  UInt solutions = 0;  // solutions contributing (after W and q conditions)
  UInt zero_exclusions = 0;
};

/// Σ Λ_R^2(l_1(x)···l_m(x)) over solutions x in the box with x = b (mod W),
/// or with (L(x), W) = 1 when b is absent.
WeightedSumResult sieve_weighted_sum(const forms::FormSystem& F, const forms::LinearFamily& L,
                                     const IVec& v, const BoxSpec& box,
                                     const sieve::SievePlan& plan,
                                     const WeightedSumOptions& options = {},
                                     const ExecutionLimits& limits = {});

/// Estimated points visited by full enumeration.
double enumeration_cost(const BoxSpec& box, const CongruenceRestriction& c);

}  // namespace dioph::counter
