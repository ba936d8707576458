#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dioph/core.hpp"

namespace dioph::forms {

/// coefficient * prod_j x_j^exponents[j]
struct Monomial {
  std::vector<int> exponents;
  Int coefficient = 0;
};

/// r integral forms of common degree k in n variables.
///
/// Each form is kept twice: as a list of monomials (for evaluation) and as the
/// symmetric coefficient tensor a^i scaled by k!, which is always integral
/// since a monomial c*x^e spreads c*prod(e_j!)/k! over its k!/prod(e_j!)
/// index tuples.
class FormSystem {
 public:
  static FormSystem from_monomials(int n, std::vector<std::vector<Monomial>> forms,
                                   std::optional<int> declared_rank = std::nullopt);

  int variables() const { return n_; }
  int forms() const { return r_; }
  int degree() const { return k_; }
  std::optional<int> declared_rank() const { return declared_rank_; }

  const std::vector<Monomial>& monomials(int form) const { return monomials_[form]; }

  /// k! * a^i_{j_1..j_k}; indices in [0, n).
  Int scaled_coefficient(int form, std::span<const int> indices) const;

  /// Every monomial involves a single variable.
  bool separable() const;
  /// Every monomial containing x_{n-1} is c * x_{n-1}^k.
  bool last_variable_isolated() const;
  /// Coefficient of x_j^k in form i.
  Int pure_power_coefficient(int form, int variable) const;

  /// The system restricted to terms not involving x_j; x_j set to zero.
  FormSystem without_variable_terms(int variable) const;

  /// Single-variable polynomial of variable j in form i (separable systems);
  /// entry e is the coefficient of x_j^e.
  std::vector<Int> univariate_terms(int form, int variable) const;

 private:
  int n_ = 0;
  int r_ = 0;
  int k_ = 0;
  std::optional<int> declared_rank_;
  std::vector<std::vector<Monomial>> monomials_;
  std::vector<std::vector<Int>> tensor_;  // per form, flattened n^k (empty if too large)
};

/// Exact values F_i(x). Throws on overflow of 64-bit arithmetic.
IVec evaluate(const FormSystem& F, const IVec& x);
/// F_i(x) mod modulus, in [0, modulus).
IVec evaluate(const FormSystem& F, const IVec& x, Int modulus);
/// Real-valued evaluation.
RVec evaluate_real(const FormSystem& F, const RVec& y);

/// Flat monomial program for tight enumeration loops.
class CompiledSystem {
 public:
  explicit CompiledSystem(const FormSystem& F);

  int variables() const { return n_; }
  int forms() const { return r_; }

  /// out[i] = F_i(x) exactly (no overflow check; callers bound the box).
  void evaluate(const Int* x, Int* out) const;
  /// out[i] = F_i(x) mod modulus for residues 0 <= x_j < modulus < 2^31.
  void evaluate_mod(const Int* x, Int modulus, Int* out) const;
  void evaluate_real(const double* y, double* out) const;

 private:
  struct Term {
    int form;
    Int coefficient;
    int begin;  // into factors_
    int end;
  };
  int n_;
  int r_;
  std::vector<Term> terms_;
  std::vector<int> factors_;  // variable indices, repeated by exponent
};

/// Pairwise linearly independent integral linear forms l_1..l_m (rows).
class LinearFamily {
 public:
  static LinearFamily from_rows(IMat rows);
  static LinearFamily empty(int n);

  int size() const { return static_cast<int>(rows_.rows()); }
  int variables() const { return static_cast<int>(rows_.cols()); }
  const IMat& matrix() const { return rows_; }

  IVec evaluate(const IVec& x) const { return rows_ * x; }
  /// Row i is c * e_j with a single nonzero entry; returns j.
  std::optional<int> coordinate_of(int row) const;

 private:
  IMat rows_;
};

bool pairwise_independent(const IMat& rows);

struct JacobianMod {
  IMat matrix;  // r x n, entries in [0, p)
  int rank = 0;
};

JacobianMod jacobian_mod_p(const FormSystem& F, const IVec& s, Int p);

/// Rank over Z/p of an integer matrix.
int rank_mod_p(IMat m, Int p);

/// Rank over Q, fraction free elimination in big integers.
int rank_exact(const IMat& m);

/// (i, j) entry: Φ_j^i(h^1..h^{k-1}) = k! Σ a^i_{j_1..j_{k-1}, j} h^1_{j_1}···h^{k-1}_{j_{k-1}}.
IMat multilinear_phi(const FormSystem& F, std::span<const IVec> h);

/// Compares the x-linear part of the iterated difference D_{h_{k-1}}···D_{h_1} F
/// at x, evaluated directly, with Σ_j x_j Φ_j(h).
bool difference_identity_check(const FormSystem& F, std::span<const IVec> h,
                               const IVec& x);

/// Rank of the coefficient matrix of a single quadratic form.
int rank_quadratic(const FormSystem& F);

/// |{s in Z_p^n : F(s) = v mod p, rank Jac_F(s) < r}|.
UInt count_singular_points_mod_p(const FormSystem& F, const IVec& v, Int p,
                                 const ExecutionLimits& limits = {});

}  // namespace dioph::forms
