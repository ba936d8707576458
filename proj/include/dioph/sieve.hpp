#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>

#include "dioph/core.hpp"

namespace dioph::sieve {

/// f(x) = (1 - x)_+^{8m}.
class WeightFunction {
 public:
  explicit WeightFunction(int m);

  int m() const { return m_; }
  int exponent() const { return 8 * m_; }

  double operator()(double x) const;
  /// f^{(order)}(x); zero for x >= 1.
  double derivative(int order, double x) const;
  /// c with f^{(order)}(x) = c (1-x)^{8m-order} on [0, 1).
  BigInt derivative_scale(int order) const;

 private:
  int m_;
};

/// Sieve configuration binding the level R, the W-trick modulus and the
/// roughness exponent.
struct SievePlan {
  int m = 1;
  double N = 0;
  double R = 2;
  std::optional<double> eta;
  std::optional<double> eps;
  UInt omega = 1;
  UInt W = 1;

  /// R = N^eta; requires 0 < eps < eta < 1.
  static SievePlan from_exponents(int m, double N, double eta, double eps, UInt omega);
  /// Explicit level R >= 2.
  static SievePlan with_level(int m, double R, UInt omega, double N = 0);

  double log_R() const;
  /// φ(W)/W
  double coprime_density() const;
};

/// Λ_R(M) = Σ_{d | M} μ(d) f(log d / log R). Depends only on rad(M).
double lambda_R(UInt M, const WeightFunction& f, double R);
/// Λ_R evaluated on the squarefree kernel given by its distinct primes.
double lambda_R_from_primes(std::span<const UInt> primes, const WeightFunction& f, double R);

/// Σ over ordered pairs with [d1, d2] = D of μ(d1)μ(d2) w(d1) w(d2), enumerating
/// the 3^{ω(D)} pairs directly. `primes` are the distinct primes of D.
double lcm_pair_sum(std::span<const UInt> primes, const std::function<double(UInt)>& weight);

/// h_D(R) for squarefree D.
double h_D(UInt D, const WeightFunction& f, double R);

/// ∏_{p | D} (w(p)^2 - 2 w(p)); equals lcm_pair_sum only for completely
/// multiplicative weights with w(1) = 1.
double multiplicative_pair_product(std::span<const UInt> primes,
                                   const std::function<double(UInt)>& weight);

/// Source of the local factors γ_p; γ_D = ∏_{p | D} γ_p.
class GammaModel {
 public:
  /// γ_p = m / p
  static GammaModel synthetic(int m);
  static GammaModel table(std::map<UInt, double> values, std::optional<int> fallback_m = {});
  static GammaModel from_function(std::function<double(UInt)> fn, std::string label);

  double operator()(UInt p) const;
  const std::string& label() const { return label_; }

 private:
  std::function<double(UInt)> fn_;
  std::string label_;
};

struct EulerSumResult {
  double value = 0;
  double D_max = 0;
  std::size_t terms = 0;
};

/// S_W(f, γ) = Σ'_{(D,W)=1, D <= D_max} γ_D h_D(R), or the q-variant with
/// γ_{[D,q]}. Sums over pairs d1, d2 < R using γ_{[d1,d2]} = γ_{d1} γ_{d2/(d1,d2)}.
EulerSumResult euler_sieve_sum(const GammaModel& gamma, const WeightFunction& f, double R,
                               UInt W, std::optional<UInt> q = {},
                               std::optional<double> D_max = {});

/// Same sum enumerated by modulus: squarefree D coprime to W built depth first
/// from primes below R, each with its directly enumerated h_D.
EulerSumResult euler_sieve_sum_by_modulus(const GammaModel& gamma, const WeightFunction& f,
                                          double R, UInt W, std::optional<UInt> q = {},
                                          std::optional<double> D_max = {});

struct SieveConstants {
  Rational c_m;      // ∫ f^{(m)}(x)^2 x^{m-1}/(m-1)! dx
  Rational c_prime;  // 2m ∫ f^{(m+1)}(x)^2 x^{m-1}/(m-1)! dx
};

/// Exact values through ∫_0^1 (1-x)^a x^b dx = a! b! / (a+b+1)!.
SieveConstants sieve_constants(int m);

/// The same two integrals by adaptive Gauss-Kronrod quadrature.
std::pair<double, double> sieve_constants_quadrature(int m);

/// ∫_0^∞ (f^{(m)}(x) - f^{(m)}(x + tau))^2 x^{m-1}/(m-1)! dx by quadrature.
double shifted_derivative_integral(const WeightFunction& f, double tau);

enum class MainTermKind { sieve_sum, sieve_sum_q, thm121, thm122 };

struct MainTermInputs {
  int m = 1;
  std::optional<double> log_R;
  std::optional<double> coprime_density;  // φ(W)/W
  std::optional<UInt> q;
  std::optional<double> N;
  std::optional<int> exponent;             // n - r k
  std::optional<double> singular_product;  // Σ*(N, v) = J · ∏ σ*_p
  std::optional<double> eps;
  std::optional<double> eta;
};

double predicted_main_term(MainTermKind kind, const MainTermInputs& in);

enum class EpsilonVariant { theorem_statement, proof };

struct ExponentParameters {
  Rational eta;        // (8 r^2 (r+1)(r+2) k (k+1))^{-1}
  Rational eta_prime;  // (4 r^2 (r+1)(r+2) k^2)^{-1}
  double epsilon = 0;
  std::optional<Rational> epsilon_exact;  // when m is a perfect square
};

ExponentParameters exponent_parameters(int m, int r, int k,
                                       EpsilonVariant variant = EpsilonVariant::theorem_statement);

/// Largest ε/η with (c'_{m+1}/c_m)(ε/η)^2 <= 1/2.
double safe_eps_over_eta(int m);

}  // namespace dioph::sieve
