#include "dioph/forms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dioph/arith.hpp"
#include "dioph/parallel.hpp"

namespace dioph::forms {

namespace {

constexpr std::size_t kMaxTensorEntries = std::size_t{1} << 20;

Int factorial(int n) {
  Int out = 1;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

Int checked_mul(Int a, Int b) {
  Int out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw Error(ErrorKind::internal, "form evaluation overflows 64-bit integers");
  }
  return out;
}

Int checked_add(Int a, Int b) {
  Int out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(ErrorKind::internal, "form evaluation overflows 64-bit integers");
  }
  return out;
}

std::size_t flat_index(std::span<const int> indices, int n) {
  std::size_t idx = 0;
  for (auto it = indices.rbegin(); it != indices.rend(); ++it) {
    idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(*it);
  }
  return idx;
}

}  // namespace

FormSystem FormSystem::from_monomials(int n, std::vector<std::vector<Monomial>> forms,
                                      std::optional<int> declared_rank) {
  require(n >= 1, "FormSystem: need at least one variable");
  require(!forms.empty(), "FormSystem: need at least one form");
  FormSystem F;
  F.n_ = n;
  F.r_ = static_cast<int>(forms.size());
  F.declared_rank_ = declared_rank;
  if (declared_rank) {
    require(*declared_rank >= 0 && *declared_rank <= n,
            "FormSystem: declared rank must lie in [0, n]");
  }

  int degree = -1;
  for (auto& form : forms) {
    std::map<std::vector<int>, Int> merged;
    for (const auto& mono : form) {
      require(static_cast<int>(mono.exponents.size()) == n,
              "FormSystem: monomial exponent vector has wrong length");
      int total = 0;
      for (int e : mono.exponents) {
        require(e >= 0, "FormSystem: negative exponent");
        total += e;
      }
      if (mono.coefficient == 0) continue;
      if (degree < 0) degree = total;
      require(total == degree, "FormSystem: forms must be homogeneous of common degree");
      merged[mono.exponents] += mono.coefficient;
    }
    std::vector<Monomial> cleaned;
    for (auto& [e, c] : merged) {
      if (c != 0) cleaned.push_back({e, c});
    }
    F.monomials_.push_back(std::move(cleaned));
  }
  require(degree >= 2, "FormSystem: degree must be at least 2");
  F.k_ = degree;

  double entries = 1;
  for (int t = 0; t < degree; ++t) entries *= n;
  if (entries <= static_cast<double>(kMaxTensorEntries)) {
    const auto size = static_cast<std::size_t>(entries);
    for (const auto& form : F.monomials_) {
      std::vector<Int> tensor(size, 0);
      for (const auto& mono : form) {
        std::vector<int> tuple;
        Int weight = mono.coefficient;
        for (int j = 0; j < n; ++j) {
          tuple.insert(tuple.end(), mono.exponents[j], j);
          weight *= factorial(mono.exponents[j]);
        }
        do {
          tensor[flat_index(tuple, n)] += weight;
        } while (std::next_permutation(tuple.begin(), tuple.end()));
      }
      F.tensor_.push_back(std::move(tensor));
    }
  }
  return F;
}

Int FormSystem::scaled_coefficient(int form, std::span<const int> indices) const {
  require(!tensor_.empty(), "FormSystem: coefficient tensor too large to materialize");
  require(static_cast<int>(indices.size()) == k_, "FormSystem: tensor index arity");
  return tensor_[form][flat_index(indices, n_)];
}

bool FormSystem::separable() const {
  for (const auto& form : monomials_) {
    for (const auto& mono : form) {
      const auto nonzero = std::count_if(mono.exponents.begin(), mono.exponents.end(),
                                         [](int e) { return e > 0; });
      if (nonzero > 1) return false;
    }
  }
  return true;
}

bool FormSystem::last_variable_isolated() const {
  const int last = n_ - 1;
  bool present = false;
  for (const auto& form : monomials_) {
    for (const auto& mono : form) {
      if (mono.exponents[last] == 0) continue;
      if (mono.exponents[last] != k_) return false;
      present = true;
    }
  }
  return present;
}

Int FormSystem::pure_power_coefficient(int form, int variable) const {
  for (const auto& mono : monomials_[form]) {
    if (mono.exponents[variable] == k_) return mono.coefficient;
  }
  return 0;
}

FormSystem FormSystem::without_variable_terms(int variable) const {
  std::vector<std::vector<Monomial>> kept;
  for (const auto& form : monomials_) {
    std::vector<Monomial> rest;
    for (const auto& mono : form) {
      if (mono.exponents[variable] == 0) rest.push_back(mono);
    }
    kept.push_back(std::move(rest));
  }
  FormSystem out = *this;
  out.monomials_ = std::move(kept);
  out.tensor_.clear();
  return out;
}

std::vector<Int> FormSystem::univariate_terms(int form, int variable) const {
  std::vector<Int> poly(k_ + 1, 0);
  for (const auto& mono : monomials_[form]) {
    const int e = mono.exponents[variable];
    if (e == 0) continue;
    poly[e] += mono.coefficient;
  }
  return poly;
}

IVec evaluate(const FormSystem& F, const IVec& x) {
  require(x.size() == F.variables(), "evaluate: point has wrong dimension");
  IVec out = IVec::Zero(F.forms());
  for (int i = 0; i < F.forms(); ++i) {
    Int acc = 0;
    for (const auto& mono : F.monomials(i)) {
      Int term = mono.coefficient;
      for (int j = 0; j < F.variables(); ++j) {
        for (int e = 0; e < mono.exponents[j]; ++e) term = checked_mul(term, x[j]);
      }
      acc = checked_add(acc, term);
    }
    out[i] = acc;
  }
  return out;
}

IVec evaluate(const FormSystem& F, const IVec& x, Int modulus) {
  require(modulus >= 1, "evaluate: modulus must be positive");
  require(x.size() == F.variables(), "evaluate: point has wrong dimension");
  IVec out = IVec::Zero(F.forms());
  for (int i = 0; i < F.forms(); ++i) {
    Int acc = 0;
    for (const auto& mono : F.monomials(i)) {
      Int term = arith::mod(mono.coefficient, modulus);
      for (int j = 0; j < F.variables(); ++j) {
        const Int xj = arith::mod(x[j], modulus);
        for (int e = 0; e < mono.exponents[j]; ++e) term = arith::mul_mod(term, xj, modulus);
      }
      acc = arith::mod(acc + term, modulus);
    }
    out[i] = acc;
  }
  return out;
}

RVec evaluate_real(const FormSystem& F, const RVec& y) {
  require(y.size() == F.variables(), "evaluate_real: point has wrong dimension");
  RVec out = RVec::Zero(F.forms());
  CompiledSystem(F).evaluate_real(y.data(), out.data());
  return out;
}

CompiledSystem::CompiledSystem(const FormSystem& F) : n_(F.variables()), r_(F.forms()) {
  for (int i = 0; i < r_; ++i) {
    for (const auto& mono : F.monomials(i)) {
      Term t{i, mono.coefficient, static_cast<int>(factors_.size()), 0};
      for (int j = 0; j < n_; ++j) factors_.insert(factors_.end(), mono.exponents[j], j);
      t.end = static_cast<int>(factors_.size());
      terms_.push_back(t);
    }
  }
}

void CompiledSystem::evaluate(const Int* x, Int* out) const {
  std::fill(out, out + r_, Int{0});
  for (const auto& t : terms_) {
    Int v = t.coefficient;
    for (int f = t.begin; f < t.end; ++f) v *= x[factors_[f]];
    out[t.form] += v;
  }
}

void CompiledSystem::evaluate_mod(const Int* x, Int modulus, Int* out) const {
  std::fill(out, out + r_, Int{0});
  for (const auto& t : terms_) {
    Int v = arith::mod(t.coefficient, modulus);
    for (int f = t.begin; f < t.end; ++f) v = (v * x[factors_[f]]) % modulus;
    out[t.form] += v;
  }
  for (int i = 0; i < r_; ++i) out[i] %= modulus;
}

void CompiledSystem::evaluate_real(const double* y, double* out) const {
  std::fill(out, out + r_, 0.0);
  for (const auto& t : terms_) {
    double v = static_cast<double>(t.coefficient);
    for (int f = t.begin; f < t.end; ++f) v *= y[factors_[f]];
    out[t.form] += v;
  }
}

LinearFamily LinearFamily::from_rows(IMat rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    require(!rows.row(i).isZero(), "LinearFamily: zero linear form");
  }
  require(pairwise_independent(rows), "LinearFamily: forms are not pairwise independent");
  LinearFamily L;
  L.rows_ = std::move(rows);
  return L;
}

LinearFamily LinearFamily::empty(int n) {
  LinearFamily L;
  L.rows_ = IMat::Zero(0, n);
  return L;
}

std::optional<int> LinearFamily::coordinate_of(int row) const {
  std::optional<int> found;
  for (Eigen::Index j = 0; j < rows_.cols(); ++j) {
    if (rows_(row, j) == 0) continue;
    if (found) return std::nullopt;
    found = static_cast<int>(j);
  }
  return found;
}

bool pairwise_independent(const IMat& rows) {
  for (Eigen::Index a = 0; a < rows.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < rows.rows(); ++b) {
      bool independent = false;
      for (Eigen::Index i = 0; i < rows.cols() && !independent; ++i) {
        for (Eigen::Index j = i + 1; j < rows.cols() && !independent; ++j) {
          const __int128 minor = static_cast<__int128>(rows(a, i)) * rows(b, j) -
                                 static_cast<__int128>(rows(a, j)) * rows(b, i);
          independent = minor != 0;
        }
      }
      if (!independent) return false;
    }
  }
  return true;
}

JacobianMod jacobian_mod_p(const FormSystem& F, const IVec& s, Int p) {
  require(s.size() == F.variables(), "jacobian_mod_p: point has wrong dimension");
  require(p >= 2 && arith::is_prime(static_cast<UInt>(p)), "jacobian_mod_p: modulus must be prime");
  JacobianMod out;
  out.matrix = IMat::Zero(F.forms(), F.variables());
  for (int i = 0; i < F.forms(); ++i) {
    for (const auto& mono : F.monomials(i)) {
      for (int j = 0; j < F.variables(); ++j) {
        if (mono.exponents[j] == 0) continue;
        Int term = arith::mod(mono.coefficient * mono.exponents[j], p);
        for (int t = 0; t < F.variables(); ++t) {
          const int e = mono.exponents[t] - (t == j ? 1 : 0);
          const Int st = arith::mod(s[t], p);
          for (int u = 0; u < e; ++u) term = arith::mul_mod(term, st, p);
        }
        out.matrix(i, j) = arith::mod(out.matrix(i, j) + term, p);
      }
    }
  }
  out.rank = rank_mod_p(out.matrix, p);
  return out;
}

int rank_mod_p(IMat m, Int p) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = arith::mod(m(i, j), p);
  }
  int rank = 0;
  for (Eigen::Index col = 0; col < m.cols() && rank < m.rows(); ++col) {
    Eigen::Index pivot = -1;
    for (Eigen::Index i = rank; i < m.rows(); ++i) {
      if (m(i, col) != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot < 0) continue;
    m.row(pivot).swap(m.row(rank));
    const Int inv = arith::inverse_mod(m(rank, col), p);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i == rank || m(i, col) == 0) continue;
      const Int factor = arith::mul_mod(m(i, col), inv, p);
      for (Eigen::Index j = col; j < m.cols(); ++j) {
        m(i, j) = arith::mod(m(i, j) - arith::mul_mod(factor, m(rank, j), p), p);
      }
    }
    ++rank;
  }
  return rank;
}

int rank_exact(const IMat& m) {
  const auto rows = static_cast<std::size_t>(m.rows());
  const auto cols = static_cast<std::size_t>(m.cols());
  std::vector<std::vector<BigInt>> a(rows, std::vector<BigInt>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) a[i][j] = m(i, j);
  }
  BigInt previous = 1;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rows;
    for (std::size_t i = rank; i < rows; ++i) {
      if (a[i][col] != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot == rows) continue;
    std::swap(a[pivot], a[rank]);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = col + 1; j < cols; ++j) {
        a[i][j] = (a[rank][col] * a[i][j] - a[i][col] * a[rank][j]) / previous;
      }
      a[i][col] = 0;
    }
    previous = a[rank][col];
    ++rank;
  }
  return static_cast<int>(rank);
}

IMat multilinear_phi(const FormSystem& F, std::span<const IVec> h) {
  const int n = F.variables();
  const int k = F.degree();
  require(static_cast<int>(h.size()) == k - 1, "multilinear_phi: need k-1 difference vectors");
  for (const auto& v : h) require(v.size() == n, "multilinear_phi: vector has wrong dimension");

  IMat phi = IMat::Zero(F.forms(), n);
  std::vector<int> idx(k, 0);
  for (int i = 0; i < F.forms(); ++i) {
    for (int j = 0; j < n; ++j) {
      Int acc = 0;
      // odometer over (j_1..j_{k-1})
      std::fill(idx.begin(), idx.end(), 0);
      idx[k - 1] = j;
      while (true) {
        Int term = F.scaled_coefficient(i, idx);
        if (term != 0) {
          for (int t = 0; t < k - 1; ++t) term = checked_mul(term, h[t][idx[t]]);
          acc = checked_add(acc, term);
        }
        int t = 0;
        while (t < k - 1 && ++idx[t] == n) idx[t++] = 0;
        if (t == k - 1) break;
      }
      phi(i, j) = acc;
    }
  }
  return phi;
}

namespace {

IVec iterated_difference(const FormSystem& F, std::span<const IVec> h, const IVec& x) {
  const int steps = static_cast<int>(h.size());
  IVec total = IVec::Zero(F.forms());
  for (unsigned mask = 0; mask < (1u << steps); ++mask) {
    IVec point = x;
    int chosen = 0;
    for (int t = 0; t < steps; ++t) {
      if (mask & (1u << t)) {
        point += h[t];
        ++chosen;
      }
    }
    const IVec value = evaluate(F, point);
    if ((steps - chosen) % 2 == 0) {
      total += value;
    } else {
      total -= value;
    }
  }
  return total;
}

}  // namespace

bool difference_identity_check(const FormSystem& F, std::span<const IVec> h, const IVec& x) {
  require(x.size() == F.variables(), "difference_identity_check: point has wrong dimension");
  const IVec at_x = iterated_difference(F, h, x);
  const IVec at_zero = iterated_difference(F, h, IVec::Zero(F.variables()));
  const IMat phi = multilinear_phi(F, h);
  return (at_x - at_zero) == phi * x;
}

int rank_quadratic(const FormSystem& F) {
  if (F.forms() != 1 || F.degree() != 2) {
    fail("rank_quadratic: only defined for a single quadratic form; declare the rank instead");
  }
  const int n = F.variables();
  IMat a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int idx[2] = {i, j};
      a(i, j) = F.scaled_coefficient(0, idx);
    }
  }
  return rank_exact(a);
}

UInt count_singular_points_mod_p(const FormSystem& F, const IVec& v, Int p,
                                 const ExecutionLimits& limits) {
  require(p >= 2 && arith::is_prime(static_cast<UInt>(p)),
          "count_singular_points_mod_p: modulus must be prime");
  require(v.size() == F.forms(), "count_singular_points_mod_p: target has wrong dimension");
  const int n = F.variables();
  limits.charge("count_singular_points_mod_p", std::pow(static_cast<double>(p), n));

  const CompiledSystem program(F);
  IVec target(F.forms());
  for (int i = 0; i < F.forms(); ++i) target[i] = arith::mod(v[i], p);

  const auto partials = run_chunks<UInt>(static_cast<std::size_t>(p), limits.workers,
                                         [&](std::size_t lead) {
    IVec s = IVec::Zero(n);
    s[0] = static_cast<Int>(lead);
    IVec value(F.forms());
    UInt count = 0;
    while (true) {
      program.evaluate_mod(s.data(), p, value.data());
      if (value == target && jacobian_mod_p(F, s, p).rank < F.forms()) ++count;
      int t = 1;
      while (t < n && ++s[t] == p) s[t++] = 0;
      if (t >= n) break;
    }
    return count;
  });
  return std::accumulate(partials.begin(), partials.end(), UInt{0});
}

}  // namespace dioph::forms
