#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dioph/core.hpp"
#include "dioph/forms.hpp"

namespace dioph::circle {

/// e(t) = exp(2πi t), with t reduced mod 1 before the trigonometric call.
Complex unit_phase(double t);

/// S_N(d, s, α) = Σ e(α·F(dx + s)) over x with dx + s in {1..N}^n.
Complex exp_sum(const forms::FormSystem& F, Int d, const IVec& s, const RVec& alpha, Int N,
                const ExecutionLimits& limits = {});

/// S_{a,q}(d, s) = Σ_{x in Z_q^n} e(a·F(dx + s)/q).
Complex gauss_sum(const forms::FormSystem& F, const IVec& a, Int q, Int d, const IVec& s,
                  const ExecutionLimits& limits = {});

/// N1^{-kn} Σ_{h_1..h_{k-1} in [-N1, N1]^n} ∏_j min(N1, ‖d^k α·Φ_j(h)‖^{-1}).
double weyl_rhs(const forms::FormSystem& F, Int d, const RVec& alpha, Int N1,
                const ExecutionLimits& limits = {});

struct MajorArcParams {
  double theta = 0.1;
  double N1 = 1;
  int r = 1;
  int k = 2;

  double kappa() const { return r * (k - 1) * theta; }
};

struct ArcCenter {
  IVec a;
  Int q = 1;
};

/// Smallest q <= N1^κ with some a, gcd(a, q) = 1, |α_i - a_i/q| <= q^{-1} N1^{-k+κ}.
std::optional<ArcCenter> major_arc_membership(const RVec& alpha, const MajorArcParams& params);

struct SingularSeriesTruncation {
  Complex value;
  Int Q_max = 1;
  std::vector<Complex> terms;  // terms[q-1] = Σ_{(a,q)=1} q^{-n} e(-a·v/q) S_{a,q}(d, s)
  double tail = 0;             // Σ_{Q/2 < q <= Q} |terms|
};

SingularSeriesTruncation singular_series(const forms::FormSystem& F, const IVec& v, Int d,
                                         const IVec& s, Int Q_max,
                                         const ExecutionLimits& limits = {});

/// Σ_{t=0}^{l} p^{-tn} Σ_{a primitive mod p^t} e(-a·v/p^t) S_{a,p^t}(d, s); equals σ_p^l(d, s, v).
double local_factor_via_gauss(const forms::FormSystem& F, const IVec& v, UInt p, int l, Int d,
                              const IVec& s, const ExecutionLimits& limits = {});

/// I(γ) = ∫_{[0,1]^n} e(γ·F(y)) dy by composite Gauss-Legendre quadrature;
/// factorized over variables for separable single forms.
Complex oscillatory_integral(const forms::FormSystem& F, const RVec& gamma,
                             const ExecutionLimits& limits = {});

/// J(μ; Φ) = ∫_{|γ| <= Φ} I(γ) e(-γμ) dγ for a single form.
double truncated_singular_integral(const forms::FormSystem& F, double mu, double Phi,
                                   const ExecutionLimits& limits = {});

enum class IntegralMethod { monte_carlo, oscillatory };

struct IntegralControls {
  IntegralMethod method = IntegralMethod::monte_carlo;
  std::uint64_t samples = 1'000'000;
  std::optional<double> delta;  // default 0.02 max(1, |u|_∞)
  std::uint64_t seed = 20240601;
  double Phi = 20;  // oscillatory route cutoff
  ExecutionLimits limits;
};

struct SingularIntegralEstimate {
  double value = 0;
  IntegralMethod method = IntegralMethod::monte_carlo;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double delta = 0;
  double standard_error = 0;
  double half_delta_value = 0;  // same samples, slab width δ/2
  double Phi = 0;
};

/// Density of real solutions of F(y) = u on [0,1]^n.
SingularIntegralEstimate singular_integral_J(const forms::FormSystem& F, const RVec& u,
                                             const IntegralControls& controls = {});

enum class LocalProductMethod { padic, singular_series };

struct BirchOptions {
  LocalProductMethod method = LocalProductMethod::padic;
  UInt P_max = 50;          // primes in the local product
  int max_level = 6;        // per-prime level ceiling
  double level_cost = 2e6;  // the level is the largest one within this cost
  Int Q_max = 20;           // singular-series route
  IntegralControls J;
};

struct LocalFactorRecord {
  UInt p = 0;
  int level = 0;
  double value = 0;
};

struct BirchPrediction {
  double value = 0;
  double scale = 0;           // N^{n-rk} D^{-n}
  double local_product = 0;   // ∏ σ_p or the truncated singular series
  SingularIntegralEstimate J;
  std::vector<LocalFactorRecord> factors;
  std::optional<SingularSeriesTruncation> series;
};

/// N^{n-rk} D^{-n} J(N^{-k} v) ∏_p σ_p(D, s, v).
BirchPrediction birch_prediction(const forms::FormSystem& F, const IVec& v, Int N, Int D,
                                 const IVec& s, const BirchOptions& options = {});

/// Largest level l <= max_level whose σ_p^l evaluation stays within `cost`.
int affordable_level(const forms::FormSystem& F, UInt p, Int D, int max_level, double cost);

}  // namespace dioph::circle
