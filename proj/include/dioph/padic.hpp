#pragma once

#include <optional>

#include "dioph/core.hpp"
#include "dioph/forms.hpp"

namespace dioph::padic {

/// σ_p^l-type value p^{-l(n-r)} · (solution count mod p^l).
struct LocalDensity {
  Rational value;
  UInt p = 0;
  int level = 0;
  bool stabilized = false;
};

struct EulerFactor {
  Rational value;
  UInt p = 0;
  int level = 0;
  bool degenerate = false;  // σ_p(v) vanished at this level; value set to 0
  UInt nonsingular_points = 0;
  UInt singular_points = 0;
};

enum class Method {
  automatic,    // separable fast path when it applies, else enumeration
  enumeration,  // plain residue enumeration
};

struct Options {
  ExecutionLimits limits;
  Method method = Method::automatic;
};

/// Elementary steps sigma_p_l spends on (p, l, D) with the given method.
double density_cost(const forms::FormSystem& F, UInt p, int l, Int D,
                    Method method = Method::automatic);

/// σ_p^l(D, s, v) = p^{-l(n-r)} |{x in Z_{p^l}^n : F(Dx + s) = v mod p^l}|.
LocalDensity sigma_p_l(const forms::FormSystem& F, const IVec& v, UInt p, int l, Int D,
                       const IVec& s, const Options& options = {});

/// σ_p^l for l = 1, 2, ... until two consecutive levels agree or l_max.
LocalDensity sigma_p_stabilized(const forms::FormSystem& F, const IVec& v, UInt p, Int D,
                                const IVec& s, int l_max, const Options& options = {});

/// (p/(p-1))^m p^{-l(n-r)} |{x in Z_{p^l}^n : F(x) = v, p ∤ l_i(x) for all i}|.
LocalDensity sigma_star_p(const forms::FormSystem& F, const forms::LinearFamily& L,
                          const IVec& v, UInt p, int l, const Options& options = {});

/// σ_p^l(p, s, v): p^r when s is a nonsingular solution mod p (no
/// enumeration), otherwise the level-l count over the fiber above s.
LocalDensity hybrid_sigma(const forms::FormSystem& F, const IVec& v, UInt p, const IVec& s,
                          int l = 2, const Options& options = {});

enum class GammaRoute { hybrid, brute_force };

/// γ_p(v) = p^{-n}/σ_p(v) Σ_{s mod p, F(s)=v, p | l_1(s)···l_m(s)} σ_p(p, s, v)
/// with inner densities at level l, and σ_p(v) = p^{-n} Σ_s σ_p^l(p, s, v).
EulerFactor gamma_p(const forms::FormSystem& F, const forms::LinearFamily& L, const IVec& v,
                    UInt p, int l, GammaRoute route = GammaRoute::hybrid,
                    const Options& options = {});

/// γ_D = ∏_{p | D} γ_p for squarefree D.
Rational gamma_D(const forms::FormSystem& F, const forms::LinearFamily& L, const IVec& v,
                 UInt D, int level, const Options& options = {});

/// Outcome of the three local-factor identities; only the case matching p is
/// evaluated, the others stay empty.
struct Lemma21Outcome {
  std::optional<bool> coprime;    // (p, DW) = 1: σ(DW, t) = σ(1, 0)
  std::optional<bool> divides_D;  // p | D: σ(DW, t) = σ(p, t) = σ(p, s)
  std::optional<bool> divides_W;  // p | W: σ(DW, t) = σ(p, t) = σ(p, b)
};

Lemma21Outcome lemma21_check(const forms::FormSystem& F, const IVec& v, UInt p, UInt D,
                             UInt W, const IVec& t, const IVec& s, const IVec& b, int level,
                             const Options& options = {});

/// (p^{m-n}/(p-1)^m) Σ_{b mod p, (L(b), p) = 1} σ_p^l(p, b, v); equals
/// sigma_star_p at the same level.
Rational aggregated_unit_density(const forms::FormSystem& F, const forms::LinearFamily& L,
                                 const IVec& v, UInt p, int l, const Options& options = {});

}  // namespace dioph::padic
