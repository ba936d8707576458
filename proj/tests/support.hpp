#pragma once

#include <vector>

#include "dioph/forms.hpp"

namespace support {

using dioph::Int;
using dioph::IVec;
using dioph::forms::FormSystem;
using dioph::forms::Monomial;

inline Monomial term(std::vector<int> exponents, Int coefficient = 1) {
  return {std::move(exponents), coefficient};
}

/// Σ c_j x_j^2
inline FormSystem diagonal(const std::vector<Int>& coefficients) {
  const int n = static_cast<int>(coefficients.size());
  std::vector<Monomial> terms;
  for (int j = 0; j < n; ++j) {
    std::vector<int> e(n, 0);
    e[j] = 2;
    terms.push_back(term(e, coefficients[j]));
  }
  return FormSystem::from_monomials(n, {terms});
}

/// x1x2 + x3x4 + ...
inline FormSystem product_pairs(int pairs) {
  const int n = 2 * pairs;
  std::vector<Monomial> terms;
  for (int i = 0; i < pairs; ++i) {
    std::vector<int> e(n, 0);
    e[2 * i] = e[2 * i + 1] = 1;
    terms.push_back(term(e));
  }
  return FormSystem::from_monomials(n, {terms});
}

inline IVec vec(std::initializer_list<Int> values) {
  IVec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (Int x : values) v[i++] = x;
  return v;
}

/// Plain recursive evaluation of a single-form system, independent of the
/// library's compiled programs.
inline Int naive_value(const FormSystem& F, int form, const IVec& x) {
  Int total = 0;
  for (const auto& mono : F.monomials(form)) {
    Int value = mono.coefficient;
    for (int j = 0; j < F.variables(); ++j) {
      for (int e = 0; e < mono.exponents[j]; ++e) value *= x[j];
    }
    total += value;
  }
  return total;
}

inline Int floor_mod(Int a, Int m) { return ((a % m) + m) % m; }

/// Calls visit(x) for x in {0..q-1}^n.
template <typename Visit>
void residues(int n, Int q, Visit&& visit) {
  IVec x = IVec::Zero(n);
  while (true) {
    visit(x);
    int t = 0;
    while (t < n && ++x[t] == q) x[t++] = 0;
    if (t >= n) return;
  }
}

}  // namespace support
