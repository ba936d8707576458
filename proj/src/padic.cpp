#include "dioph/padic.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "dioph/arith.hpp"
#include "dioph/parallel.hpp"

namespace dioph::padic {

namespace {

using forms::CompiledSystem;
using forms::FormSystem;
using forms::LinearFamily;
using Wide = unsigned __int128;

constexpr Int kMaxModulus = Int{1} << 31;
constexpr double kMaxDenseTable = double(1 << 22);

BigInt to_big(Wide w) {
  BigInt out = static_cast<UInt>(w >> 64);
  out <<= 64;
  out += static_cast<UInt>(w);
  return out;
}

Rational power(UInt p, Int exponent) {
  BigInt base = 1;
  for (Int i = 0; i < std::abs(exponent); ++i) base *= p;
  return exponent >= 0 ? Rational(base) : Rational(BigInt(1), base);
}

void check_prime(UInt p) {
  require(arith::is_prime(p), "local density: p must be prime");
}

/// Counting problem: x in Z_{p^l}^n with F(p^e x + s) = v mod p^l and, for
/// every row of `units`, p ∤ l_i(p^e x + s).
struct ResidueProblem {
  const FormSystem* F;
  IVec v;
  UInt p;
  int l;
  int e;  // valuation of the dilation, clamped to [0, l]
  IVec s;
  const LinearFamily* units = nullptr;
};

bool unit_condition(const ResidueProblem& prob, const IVec& y) {
  if (!prob.units || prob.units->size() == 0) return true;
  const IVec values = prob.units->evaluate(y);
  const Int p = static_cast<Int>(prob.p);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (arith::mod(values[i], p) == 0) return false;
  }
  return true;
}

/// Plain enumeration over x in Z_{p^{l-e}}^n; the count over Z_{p^l}^n is
/// p^{en} times larger since F(p^e x + s) mod p^l has period p^{l-e}.
BigInt count_by_enumeration(const ResidueProblem& prob, const ExecutionLimits& limits) {
  const FormSystem& F = *prob.F;
  const int n = F.variables();
  const int r = F.forms();
  const Int M = arith::ipow(static_cast<Int>(prob.p), static_cast<unsigned>(prob.l));
  require(M < kMaxModulus, "local density: p^l must stay below 2^31");
  const Int period = arith::ipow(static_cast<Int>(prob.p), static_cast<unsigned>(prob.l - prob.e));
  const Int step = M / period;  // p^e
  limits.charge("local density enumeration", std::pow(static_cast<double>(period), n));

  IVec target(r);
  for (int i = 0; i < r; ++i) target[i] = arith::mod(prob.v[i], M);
  IVec base(n);
  for (int j = 0; j < n; ++j) base[j] = arith::mod(prob.s[j], M);

  const CompiledSystem program(F);
  const auto partials = run_chunks<UInt>(static_cast<std::size_t>(period), limits.workers,
                                         [&](std::size_t lead) {
    IVec x = IVec::Zero(n);
    IVec y(n);
    IVec value(r);
    x[0] = static_cast<Int>(lead);
    UInt count = 0;
    while (true) {
      for (int j = 0; j < n; ++j) y[j] = (step * x[j] + base[j]) % M;
      program.evaluate_mod(y.data(), M, value.data());
      if (value == target && unit_condition(prob, y)) ++count;
      int t = 1;
      while (t < n && ++x[t] == period) x[t++] = 0;
      if (t >= n) break;
    }
    return count;
  });
  BigInt total = 0;
  for (UInt c : partials) total += c;
  for (int j = 0; j < n * prob.e; ++j) total *= prob.p;
  return total;
}

bool separable_applies(const FormSystem& F, UInt p, int l) {
  if (!F.separable()) return false;
  const double M = std::pow(static_cast<double>(p), l);
  return M < static_cast<double>(kMaxModulus) && std::pow(M, F.forms()) <= kMaxDenseTable;
}

bool separable_applies(const ResidueProblem& prob) {
  if (prob.units) {
    for (int i = 0; i < prob.units->size(); ++i) {
      if (!prob.units->coordinate_of(i)) return false;
    }
  }
  return separable_applies(*prob.F, prob.p, prob.l);
}

/// Separable systems: the value vector is a sum of per-variable
/// contributions, so the count is a convolution of per-variable distributions.
BigInt count_separable(const ResidueProblem& prob, const ExecutionLimits& limits) {
  const FormSystem& F = *prob.F;
  const int n = F.variables();
  const int r = F.forms();
  const Int M = arith::ipow(static_cast<Int>(prob.p), static_cast<unsigned>(prob.l));
  const Int period = arith::ipow(static_cast<Int>(prob.p), static_cast<unsigned>(prob.l - prob.e));
  const Int step = M / period;
  std::size_t table = 1;
  for (int i = 0; i < r; ++i) table *= static_cast<std::size_t>(M);
  limits.charge("local density convolution",
                static_cast<double>(n) * static_cast<double>(period) * static_cast<double>(table));

  // coordinates whose value must be a unit; a row c*e_j with p | c kills everything
  std::vector<bool> unit_coord(n, false);
  if (prob.units) {
    for (int i = 0; i < prob.units->size(); ++i) {
      const int j = *prob.units->coordinate_of(i);
      if (arith::mod(prob.units->matrix()(i, j), static_cast<Int>(prob.p)) == 0) return 0;
      unit_coord[j] = true;
    }
  }

  auto encode = [&](const std::vector<Int>& digits) {
    std::size_t idx = 0;
    for (int i = r - 1; i >= 0; --i) idx = idx * static_cast<std::size_t>(M) + digits[i];
    return idx;
  };
  auto add_index = [&](std::size_t a, std::size_t b) {
    if (r == 1) return (a + b) % static_cast<std::size_t>(M);
    std::size_t out = 0, scale = 1;
    for (int i = 0; i < r; ++i) {
      const std::size_t da = a % M, db = b % M;
      out += ((da + db) % M) * scale;
      scale *= M;
      a /= M;
      b /= M;
    }
    return out;
  };

  std::vector<Wide> acc(table, 0);
  acc[0] = 1;
  std::vector<std::vector<Int>> polys(r);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < r; ++i) polys[i] = F.univariate_terms(i, j);
    std::map<std::size_t, Wide> dist;
    std::vector<Int> digits(r);
    for (Int x = 0; x < period; ++x) {
      const Int y = (step * x + arith::mod(prob.s[j], M)) % M;
      if (unit_coord[j] && y % static_cast<Int>(prob.p) == 0) continue;
      for (int i = 0; i < r; ++i) {
        Int value = 0, pw = 1;
        for (std::size_t d = 0; d < polys[i].size(); ++d) {
          value = (value + arith::mod(polys[i][d], M) * pw) % M;
          pw = pw * y % M;
        }
        digits[i] = value;
      }
      dist[encode(digits)] += 1;
    }
    std::vector<Wide> next(table, 0);
    for (std::size_t a = 0; a < table; ++a) {
      if (acc[a] == 0) continue;
      for (const auto& [b, c] : dist) next[add_index(a, b)] += acc[a] * c;
    }
    acc.swap(next);
  }
  std::vector<Int> target(r);
  for (int i = 0; i < r; ++i) target[i] = arith::mod(prob.v[i], M);
  BigInt total = to_big(acc[encode(target)]);
  for (int j = 0; j < n * prob.e; ++j) total *= prob.p;
  return total;
}

BigInt count_solutions(const ResidueProblem& prob, const Options& options) {
  if (options.method == Method::automatic && separable_applies(prob)) {
    return count_separable(prob, options.limits);
  }
  if (prob.e >= prob.l) {
    // F(p^l x + s) = F(s) mod p^l for every x
    const FormSystem& F = *prob.F;
    const Int M = arith::ipow(static_cast<Int>(prob.p), static_cast<unsigned>(prob.l));
    IVec y(F.variables());
    for (int j = 0; j < F.variables(); ++j) y[j] = arith::mod(prob.s[j], M);
    const IVec value = forms::evaluate(F, y, M);
    for (int i = 0; i < F.forms(); ++i) {
      if (value[i] != arith::mod(prob.v[i], M)) return 0;
    }
    if (!unit_condition(prob, y)) return 0;
    BigInt total = 1;
    for (int j = 0; j < F.variables() * prob.l; ++j) total *= prob.p;
    return total;
  }
  return count_by_enumeration(prob, options.limits);
}

LocalDensity density_from_count(const FormSystem& F, const BigInt& count, UInt p, int l) {
  LocalDensity out;
  out.value = Rational(count) * power(p, -Int{l} * (F.variables() - F.forms()));
  out.p = p;
  out.level = l;
  return out;
}

void check_point(const FormSystem& F, const IVec& v, const IVec& s) {
  require(v.size() == F.forms(), "local density: target has wrong dimension");
  require(s.size() == F.variables(), "local density: shift has wrong dimension");
}

}  // namespace

double density_cost(const FormSystem& F, UInt p, int l, Int D, Method method) {
  const int e = std::min(arith::valuation(D, p), l);
  const double period = std::pow(static_cast<double>(p), l - e);
  if (method == Method::automatic && separable_applies(F, p, l)) {
    return F.variables() * period * std::pow(static_cast<double>(p), l * F.forms());
  }
  return e >= l ? 1.0 : std::pow(period, F.variables());
}

LocalDensity sigma_p_l(const FormSystem& F, const IVec& v, UInt p, int l, Int D, const IVec& s,
                       const Options& options) {
  check_prime(p);
  check_point(F, v, s);
  require(l >= 1, "sigma_p_l: level must be at least 1");
  require(D >= 1, "sigma_p_l: D must be positive");
  // D = p^e D' with p ∤ D'; x -> D'x permutes Z_{p^l}^n
  const int e = std::min(arith::valuation(D, p), l);
  const ResidueProblem prob{&F, v, p, l, e, s, nullptr};
  return density_from_count(F, count_solutions(prob, options), p, l);
}

LocalDensity sigma_p_stabilized(const FormSystem& F, const IVec& v, UInt p, Int D, const IVec& s,
                                int l_max, const Options& options) {
  require(l_max >= 1, "sigma_p_stabilized: l_max must be at least 1");
  LocalDensity current = sigma_p_l(F, v, p, 1, D, s, options);
  for (int l = 2; l <= l_max; ++l) {
    LocalDensity next = sigma_p_l(F, v, p, l, D, s, options);
    if (next.value == current.value) {
      next.stabilized = true;
      return next;
    }
    current = std::move(next);
  }
  return current;
}

LocalDensity sigma_star_p(const FormSystem& F, const LinearFamily& L, const IVec& v, UInt p,
                          int l, const Options& options) {
  check_prime(p);
  require(l >= 1, "sigma_star_p: level must be at least 1");
  require(L.variables() == F.variables(), "sigma_star_p: linear family has wrong variable count");
  const IVec zero = IVec::Zero(F.variables());
  check_point(F, v, zero);
  const ResidueProblem prob{&F, v, p, l, 0, zero, &L};
  LocalDensity out = density_from_count(F, count_solutions(prob, options), p, l);
  out.value *= power(p, L.size()) / power(p - 1, L.size());
  return out;
}

LocalDensity hybrid_sigma(const FormSystem& F, const IVec& v, UInt p, const IVec& s, int l,
                          const Options& options) {
  check_prime(p);
  check_point(F, v, s);
  require(l >= 1, "hybrid_sigma: level must be at least 1");
  const Int pp = static_cast<Int>(p);
  const IVec value = forms::evaluate(F, s, pp);
  for (int i = 0; i < F.forms(); ++i) {
    if (value[i] != arith::mod(v[i], pp)) return {Rational(0), p, l, true};
  }
  if (forms::jacobian_mod_p(F, s, pp).rank == F.forms()) {
    return {power(p, F.forms()), p, l, true};
  }
  LocalDensity out = sigma_p_l(F, v, p, l, pp, s, options);
  if (l >= 2) {
    out.stabilized = sigma_p_l(F, v, p, l - 1, pp, s, options).value == out.value;
  }
  return out;
}

EulerFactor gamma_p(const FormSystem& F, const LinearFamily& L, const IVec& v, UInt p, int l,
                    GammaRoute route, const Options& options) {
  check_prime(p);
  require(l >= 1, "gamma_p: level must be at least 1");
  require(v.size() == F.forms(), "gamma_p: target has wrong dimension");
  require(L.variables() == F.variables(), "gamma_p: linear family has wrong variable count");
  const int n = F.variables();
  const Int pp = static_cast<Int>(p);
  options.limits.charge("gamma_p outer residues", std::pow(static_cast<double>(p), n));

  struct Part {
    Rational numerator{0}, denominator{0};
    UInt nonsingular = 0, singular = 0;
  };
  const CompiledSystem program(F);
  IVec target(F.forms());
  for (int i = 0; i < F.forms(); ++i) target[i] = arith::mod(v[i], pp);
  Options inner = options;
  inner.method = Method::enumeration;

  const auto parts = run_chunks<Part>(p, options.limits.workers, [&](std::size_t lead) {
    Part part;
    IVec s = IVec::Zero(n);
    IVec value(F.forms());
    s[0] = static_cast<Int>(lead);
    while (true) {
      program.evaluate_mod(s.data(), pp, value.data());
      if (value == target) {
        Rational sigma;
        const bool nonsingular = forms::jacobian_mod_p(F, s, pp).rank == F.forms();
        if (route == GammaRoute::hybrid && nonsingular) {
          sigma = power(p, F.forms());
        } else {
          sigma = sigma_p_l(F, v, p, l, pp, s, inner).value;
        }
        ++(nonsingular ? part.nonsingular : part.singular);
        part.denominator += sigma;
        const IVec lv = L.evaluate(s);
        if ((lv.array().unaryExpr([pp](Int x) { return arith::mod(x, pp); }) == 0).any()) {
          part.numerator += sigma;
        }
      }
      int t = 1;
      while (t < n && ++s[t] == pp) s[t++] = 0;
      if (t >= n) break;
    }
    return part;
  });

  EulerFactor out;
  out.p = p;
  out.level = l;
  Rational numerator = 0, denominator = 0;
  for (const auto& part : parts) {
    numerator += part.numerator;
    denominator += part.denominator;
    out.nonsingular_points += part.nonsingular;
    out.singular_points += part.singular;
  }
  if (denominator == 0) {
    out.value = 0;
    out.degenerate = true;
  } else {
    out.value = numerator / denominator;
  }
  return out;
}

Rational gamma_D(const FormSystem& F, const LinearFamily& L, const IVec& v, UInt D, int level,
                 const Options& options) {
  require(D >= 1, "gamma_D: D must be positive");
  const auto fac = arith::factorize(D);
  require(fac.squarefree(), "gamma_D: D must be squarefree");
  Rational out = 1;
  for (UInt p : fac.primes()) out *= gamma_p(F, L, v, p, level, GammaRoute::hybrid, options).value;
  return out;
}

Lemma21Outcome lemma21_check(const FormSystem& F, const IVec& v, UInt p, UInt D, UInt W,
                             const IVec& t, const IVec& s, const IVec& b, int level,
                             const Options& options) {
  check_prime(p);
  require(D >= 1 && W >= 1, "lemma21_check: D and W must be positive");
  require(arith::is_squarefree(D) && arith::is_squarefree(W),
          "lemma21_check: D and W must be squarefree");
  require(std::gcd(D, W) == 1, "lemma21_check: D and W must be coprime");
  const int n = F.variables();
  require(t.size() == n && s.size() == n && b.size() == n, "lemma21_check: wrong dimension");
  for (int j = 0; j < n; ++j) {
    require(arith::mod(t[j] - s[j], static_cast<Int>(D)) == 0, "lemma21_check: t != s mod D");
    require(arith::mod(t[j] - b[j], static_cast<Int>(W)) == 0, "lemma21_check: t != b mod W");
  }
  const Int pp = static_cast<Int>(p);
  const Rational full = sigma_p_l(F, v, p, level, static_cast<Int>(D * W), t, options).value;
  Lemma21Outcome out;
  if (D % p != 0 && W % p != 0) {
    const IVec zero = IVec::Zero(n);
    out.coprime = full == sigma_p_l(F, v, p, level, 1, zero, options).value;
  } else if (D % p == 0) {
    const Rational at_t = sigma_p_l(F, v, p, level, pp, t, options).value;
    const Rational at_s = sigma_p_l(F, v, p, level, pp, s, options).value;
    out.divides_D = full == at_t && at_t == at_s;
  } else {
    const Rational at_t = sigma_p_l(F, v, p, level, pp, t, options).value;
    const Rational at_b = sigma_p_l(F, v, p, level, pp, b, options).value;
    out.divides_W = full == at_t && at_t == at_b;
  }
  return out;
}

Rational aggregated_unit_density(const FormSystem& F, const LinearFamily& L, const IVec& v,
                                 UInt p, int l, const Options& options) {
  check_prime(p);
  const int n = F.variables();
  const Int pp = static_cast<Int>(p);
  options.limits.charge("aggregated_unit_density", std::pow(static_cast<double>(p), n));
  Rational sum = 0;
  IVec b = IVec::Zero(n);
  while (true) {
    const IVec lb = L.evaluate(b);
    bool units = true;
    for (Eigen::Index i = 0; i < lb.size(); ++i) units = units && arith::mod(lb[i], pp) != 0;
    if (units) sum += sigma_p_l(F, v, p, l, pp, b, options).value;
    int t = 0;
    while (t < n && ++b[t] == pp) b[t++] = 0;
    if (t >= n) break;
  }
  const int m = L.size();
  return sum * power(p, m - n) / power(p - 1, m);
}

}  // namespace dioph::padic
