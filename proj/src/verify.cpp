#include "dioph/verify.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "dioph/arith.hpp"
#include "dioph/circle.hpp"
#include "dioph/counter.hpp"
#include "dioph/forms.hpp"
#include "dioph/padic.hpp"
#include "dioph/sieve.hpp"

namespace dioph::verify {

namespace {

using forms::FormSystem;
using forms::LinearFamily;
using forms::Monomial;

FormSystem diagonal(const std::vector<Int>& coefficients) {
  const int n = static_cast<int>(coefficients.size());
  std::vector<Monomial> terms;
  for (int j = 0; j < n; ++j) {
    std::vector<int> e(n, 0);
    e[j] = 2;
    terms.push_back({e, coefficients[j]});
  }
  return FormSystem::from_monomials(n, {terms});
}

FormSystem product_pairs(int pairs) {
  const int n = 2 * pairs;
  std::vector<Monomial> terms;
  for (int i = 0; i < pairs; ++i) {
    std::vector<int> e(n, 0);
    e[2 * i] = e[2 * i + 1] = 1;
    terms.push_back({e, 1});
  }
  return FormSystem::from_monomials(n, {terms});
}

LinearFamily coordinates(int n, int m) {
  IMat rows = IMat::Zero(m, n);
  for (int i = 0; i < m; ++i) rows(i, i) = 1;
  return LinearFamily::from_rows(rows);
}

IVec scalar(Int value) {
  IVec v(1);
  v << value;
  return v;
}

/// Calls `visit(s)` for every s in Z_q^n.
template <typename Visit>
void for_each_residue(int n, Int q, Visit&& visit) {
  IVec s = IVec::Zero(n);
  while (true) {
    visit(s);
    int t = 0;
    while (t < n && ++s[t] == q) s[t++] = 0;
    if (t >= n) return;
  }
}

std::optional<IVec> nonsingular_point(const FormSystem& F, const IVec& v, Int p) {
  std::optional<IVec> found;
  for_each_residue(F.variables(), p, [&](const IVec& s) {
    if (found) return;
    const IVec value = forms::evaluate(F, s, p);
    if (value[0] != arith::mod(v[0], p)) return;
    if (forms::jacobian_mod_p(F, s, p).rank == F.forms()) found = s;
  });
  return found;
}

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void check(bool condition, const std::string& what) {
    if (!condition && passed) detail << "first failure: " << what << "; ";
    passed = passed && condition;
  }
};

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

void gauss_identity(Outcome& out, const SuiteOptions&) {
  const std::vector<std::pair<std::string, FormSystem>> systems = {
      {"x1x2", product_pairs(1)},
      {"x1^2+x2^2+x3^2", diagonal({1, 1, 1})},
      {"x1x2+x3x4", product_pairs(2)},
  };
  int cases = 0;
  double worst = 0;
  for (const auto& [name, F] : systems) {
    for (Int target : {0, 1}) {
      const IVec v = scalar(target);
      for (UInt p : {2, 3, 5}) {
        const Int pp = static_cast<Int>(p);
        std::vector<IVec> shifts = {IVec::Zero(F.variables())};
        if (auto s = nonsingular_point(F, v, pp)) shifts.push_back(*s);
        for (int l = 1; l <= 2; ++l) {
          for (Int d : {Int{1}, pp}) {
            for (const IVec& s : shifts) {
              const double gauss = circle::local_factor_via_gauss(F, v, p, l, d, s);
              padic::Options opts;
              opts.method = padic::Method::enumeration;
              const double direct = to_double(padic::sigma_p_l(F, v, p, l, d, s, opts).value);
              worst = std::max(worst, std::abs(gauss - direct));
              ++cases;
              out.check(std::abs(gauss - direct) <= 1e-9,
                        name + " p=" + std::to_string(p) + " l=" + std::to_string(l));
            }
          }
        }
      }
    }
  }
  out.detail << cases << " cases, max |gauss - sigma| = " << worst;
}

void nonsingular_lemma(Outcome& out, const SuiteOptions&) {
  const std::vector<std::pair<std::string, FormSystem>> systems = {
      {"x1x2", product_pairs(1)},
      {"x1^2+x2^2+x3^2", diagonal({1, 1, 1})},
  };
  int cases = 0;
  for (const auto& [name, F] : systems) {
    const IVec v = scalar(1);
    for (UInt p : {3, 5, 7}) {
      const Int pp = static_cast<Int>(p);
      for_each_residue(F.variables(), pp, [&](const IVec& s) {
        if (forms::evaluate(F, s, pp)[0] != 1) return;
        if (forms::jacobian_mod_p(F, s, pp).rank != F.forms()) return;
        for (int l = 1; l <= 3; ++l) {
          if (l == 3 && (F.variables() > 3 || p > 5)) continue;
          padic::Options opts;
          opts.method = padic::Method::enumeration;
          const Rational sigma = padic::sigma_p_l(F, v, p, l, pp, s, opts).value;
          ++cases;
          out.check(sigma == Rational(pp), name + " p=" + std::to_string(p) +
                                               " l=" + std::to_string(l));
        }
      });
    }
  }
  out.detail << cases << " nonsingular (s, l) cases equal p^r";
}

void euler_factor_decay(Outcome& out, const SuiteOptions& options) {
  const FormSystem F = diagonal({1, 1, 1, 1, 1});
  const LinearFamily L = coordinates(5, 2);
  const IVec v = scalar(1);
  padic::Options opts;
  opts.limits.workers = options.workers;
  double worst = 0;
  for (UInt p : arith::primes_up_to(13)) {
    if (p < 3) continue;
    const auto gamma = padic::gamma_p(F, L, v, p, 2, padic::GammaRoute::hybrid, opts);
    const double scaled = double(p * p) * std::abs(to_double(gamma.value) - 2.0 / double(p));
    worst = std::max(worst, scaled);
    out.check(!gamma.degenerate && scaled <= 10, "p=" + std::to_string(p));
  }
  const auto hybrid = padic::gamma_p(F, L, v, 3, 2, padic::GammaRoute::hybrid, opts);
  const auto brute = padic::gamma_p(F, L, v, 3, 2, padic::GammaRoute::brute_force, opts);
  out.check(hybrid.value == brute.value, "hybrid vs brute force at p=3");
  out.detail << "max p^2|gamma_p - 2/p| = " << worst << " (p <= 13), gamma_3 = " << hybrid.value
             << " on both routes";
}

void divisor_identity(Outcome& out, const SuiteOptions& options) {
  const sieve::WeightFunction f(1);
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<UInt> pick(1, 1'000'000);
  double worst = 0;
  for (double R : {10.0, 100.0}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const UInt M = pick(rng);
      const double lambda = sieve::lambda_R(M, f, R);
      const auto primes = arith::factorize(arith::radical(M)).primes();
      // Σ_{D | rad M} h_D over subsets of the primes of M
      double sum = 0;
      const std::size_t w = primes.size();
      for (std::size_t mask = 0; mask < (std::size_t{1} << w); ++mask) {
        UInt D = 1;
        for (std::size_t i = 0; i < w; ++i) {
          if (mask >> i & 1) D *= primes[i];
        }
        sum += sieve::h_D(D, f, R);
      }
      const double gap = relative_gap(sum, lambda * lambda);
      worst = std::max(worst, gap);
      out.check(gap <= 1e-12, "M=" + std::to_string(M));
    }
  }
  // pair-set structure: for a completely multiplicative weight the lcm-pair
  // sum factors over coprime moduli
  const auto weight = [](UInt d) { return std::pow(static_cast<double>(d), -0.3); };
  int structure_cases = 0;
  for (UInt D1 : {3u, 10u, 21u, 77u}) {
    for (UInt D2 : {1u, 13u, 34u, 95u}) {
      if (std::gcd(D1, D2) != 1) continue;
      const auto p1 = arith::factorize(D1).primes();
      const auto p2 = arith::factorize(D2).primes();
      auto p12 = arith::factorize(D1 * D2).primes();
      const double joint = sieve::lcm_pair_sum(p12, weight);
      const double split = sieve::lcm_pair_sum(p1, weight) * sieve::lcm_pair_sum(p2, weight);
      const double local = sieve::multiplicative_pair_product(p12, weight);
      ++structure_cases;
      out.check(relative_gap(joint, split) <= 1e-12 && relative_gap(joint, local) <= 1e-12,
                "pair structure D1=" + std::to_string(D1) + " D2=" + std::to_string(D2));
    }
  }
  out.detail << "2000 identities, max relative gap " << worst << "; " << structure_cases
             << " multiplicative pair-structure cases";
}

void constants(Outcome& out, const SuiteOptions&) {
  const auto exact = sieve::sieve_constants(1);
  const auto [c1, c2] = sieve::sieve_constants_quadrature(1);
  out.check(exact.c_m == Rational(64, 15), "c_1 = 64/15");
  out.check(exact.c_prime == Rational(6272, 13), "c'_2 = 6272/13");
  const double r1 = std::abs(c1 - to_double(exact.c_m)) / to_double(exact.c_m);
  const double r2 = std::abs(c2 - to_double(exact.c_prime)) / to_double(exact.c_prime);
  out.check(r1 <= 1e-9 && r2 <= 1e-9, "quadrature agreement");
  out.detail << "c_1 = " << exact.c_m << ", c'_2 = " << exact.c_prime
             << ", quadrature rel. gaps " << r1 << ", " << r2 << "; c'_2/c_1 = "
             << std::setprecision(6) << to_double(exact.c_prime / exact.c_m) << " (> 32)";
}

double main_term_ratio(double R, std::optional<UInt> q = {}) {
  const sieve::WeightFunction f(1);
  const auto plan = sieve::SievePlan::with_level(1, R, 7);
  const auto sum = sieve::euler_sieve_sum(sieve::GammaModel::synthetic(1), f, R, plan.W, q);
  sieve::MainTermInputs in;
  in.m = 1;
  in.log_R = plan.log_R();
  in.coprime_density = plan.coprime_density();
  in.q = q;
  const auto kind = q ? sieve::MainTermKind::sieve_sum_q : sieve::MainTermKind::sieve_sum;
  return sum.value / sieve::predicted_main_term(kind, in);
}

void gpy_main_term(Outcome& out, const SuiteOptions&) {
  const double r3 = main_term_ratio(1e3);
  const double r4 = main_term_ratio(1e4);
  out.check(r3 >= 0.6 && r3 <= 1.4, "ratio at R=1e3 in [0.6, 1.4]");
  out.check(std::abs(r4 - 1) <= std::abs(r3 - 1) + 0.05, "trend toward 1 at R=1e4");
  out.detail << "ratio " << r3 << " at R=1e3, " << r4 << " at R=1e4";
}

void birch_count(Outcome& out, const SuiteOptions& options) {
  const FormSystem F = diagonal({1, 1, 1, -1, -1});
  const IVec v = scalar(0);
  const IVec s = IVec::Zero(5);
  circle::BirchOptions birch;
  birch.J.seed = options.seed;
  birch.J.limits.workers = options.workers;
  ExecutionLimits limits;
  limits.workers = options.workers;
  double deviation[2] = {0, 0};
  int idx = 0;
  for (Int N : {20, 40}) {
    const auto count = counter::last_variable_accelerated_count(
        F, v, {N, 5}, counter::CongruenceRestriction::none(5), limits);
    const auto prediction = circle::birch_prediction(F, v, N, 1, s, birch);
    deviation[idx++] = std::abs(static_cast<double>(count.count) / prediction.value - 1);
    out.detail << "N=" << N << ": count " << count.count << ", prediction "
               << std::setprecision(7) << prediction.value << "; ";
  }
  out.check(deviation[1] <= 0.30, "within 30% at N=40");
  out.check(deviation[1] <= deviation[0] + 0.05, "deviation does not grow");
  out.detail << "relative deviations " << deviation[0] << ", " << deviation[1];
}

void gauss_magnitude(Outcome& out, const SuiteOptions&) {
  const FormSystem F = diagonal({1});
  const IVec zero = IVec::Zero(1);
  int cases = 0;
  double worst = 0;
  for (UInt p : arith::primes_up_to(50)) {
    if (p == 2) continue;
    for (Int a = 1; a < static_cast<Int>(p); ++a) {
      const double gap = std::abs(std::abs(circle::gauss_sum(F, scalar(a), p, 1, zero)) -
                                  std::sqrt(static_cast<double>(p)));
      worst = std::max(worst, gap);
      ++cases;
      out.check(gap <= 1e-9, "p=" + std::to_string(p) + " a=" + std::to_string(a));
    }
  }
  out.detail << cases << " sums, max ||S| - sqrt(p)| = " << worst;
}

void local_identities(Outcome& out, const SuiteOptions&) {
  const FormSystem F = product_pairs(1);
  const IVec v = scalar(1);
  int cases = 0;
  for (auto [D, W] : {std::pair<UInt, UInt>{3, 2}, {5, 6}}) {
    const Int DW = static_cast<Int>(D * W);
    for (UInt p : {2, 3, 5, 7}) {
      for (int level = 1; level <= 2; ++level) {
        // t runs over Z_{DW}^2, s and b are its reductions
        for_each_residue(2, DW, [&](const IVec& t) {
          const IVec s = t.unaryExpr([D](Int x) { return x % static_cast<Int>(D); });
          const IVec b = t.unaryExpr([W](Int x) { return x % static_cast<Int>(W); });
          const auto outcome = padic::lemma21_check(F, v, p, D, W, t, s, b, level);
          const bool ok = outcome.coprime.value_or(true) && outcome.divides_D.value_or(true) &&
                          outcome.divides_W.value_or(true);
          ++cases;
          out.check(ok, "D=" + std::to_string(D) + " W=" + std::to_string(W) +
                            " p=" + std::to_string(p));
        });
      }
    }
  }
  out.detail << cases << " (D, W, p, l, t) cases";
}

void singular_integral(Outcome& out, const SuiteOptions& options) {
  const FormSystem F = diagonal({1, 1});
  RVec u(1);
  u << 0.5;
  circle::IntegralControls controls;
  controls.seed = options.seed;
  controls.limits.workers = options.workers;
  const auto a = circle::singular_integral_J(F, u, controls);
  controls.seed = options.seed + 1;
  const auto b = circle::singular_integral_J(F, u, controls);
  controls.limits.workers = options.workers + 1;
  const auto c = circle::singular_integral_J(F, u, controls);
  const double target = std::numbers::pi / 4;
  const double rel = std::abs(a.value - target) / target;
  const double spread = std::abs(a.value - b.value);
  const double bar = 3 * std::hypot(a.standard_error, b.standard_error);
  RVec zero(1);
  zero << 0;
  const Complex I0 = circle::oscillatory_integral(F, zero);
  out.check(rel <= 0.02, "J within 2% of pi/4");
  out.check(spread <= bar, "seed change within 3 standard errors");
  out.check(b.value == c.value, "worker count invariance");
  out.check(std::abs(I0 - 1.0) <= 1e-14, "I(0) = 1");
  out.detail << "J = " << a.value << " +- " << a.standard_error << " (rel. error " << rel
             << "), other seed " << b.value << ", I(0) = " << I0.real();
}

void concentration(Outcome& out, const SuiteOptions&) {
  const FormSystem F = diagonal({1, 1});
  const LinearFamily L = coordinates(2, 2);
  const IVec v = scalar(13);
  const Int N = 13;
  const UInt q = 3;
  const auto plan = sieve::SievePlan::with_level(1, 169, 1);
  counter::WeightedSumOptions opts;
  opts.q = q;
  const auto sum = counter::sieve_weighted_sum(F, L, v, {N, 2}, plan, opts);

  // direct evaluation of the q-restricted weighted sum, point by point
  const sieve::WeightFunction f(1);
  double direct = 0;
  int terms = 0;
  for (Int x1 = 1; x1 <= N; ++x1) {
    for (Int x2 = 1; x2 <= N; ++x2) {
      if (x1 * x1 + x2 * x2 != 13) continue;
      const UInt product = static_cast<UInt>(x1 * x2);
      if (product % q != 0) continue;
      const double lambda = sieve::lambda_R(product, f, plan.R);
      direct += lambda * lambda;
      ++terms;
    }
  }
  out.check(std::abs(sum.value - direct) <= 1e-12, "weighted sum equals direct evaluation");
  out.check(sum.solutions == static_cast<UInt>(terms), "same contributing solutions");
  out.detail << "sum = " << std::setprecision(15) << sum.value << ", direct = " << direct << " over "
             << terms << " solutions";
}

struct Criterion {
  const char* title;
  double limit;
  void (*run)(Outcome&, const SuiteOptions&);
};

const Criterion kTable[kCriteria] = {
    {"Gauss-sum identity for local densities", 60, gauss_identity},
    {"nonsingular lifting: sigma_p^l(p,s,v) = p^r", 120, nonsingular_lemma},
    {"Euler factor decay gamma_p = m/p + O(p^-2)", 300, euler_factor_decay},
    {"divisor identity for Lambda_R^2", 60, divisor_identity},
    {"sieve constants c_1, c'_2", 1, constants},
    {"GPY main term for synthetic gamma", 300, gpy_main_term},
    {"Birch count vs prediction", 600, birch_count},
    {"Gauss-sum magnitude sqrt(p)", 1, gauss_magnitude},
    {"local-factor identities for D, W", 60, local_identities},
    {"Monte Carlo singular integral", 60, singular_integral},
    {"q-restricted weighted sum vs direct evaluation", 1, concentration},
};

}  // namespace

CriterionResult run_criterion(int id, const SuiteOptions& options) {
  require(id >= 1 && id <= kCriteria, "criterion id out of range");
  const Criterion& c = kTable[id - 1];
  CriterionResult result;
  result.id = id;
  result.title = c.title;
  result.limit_seconds = c.limit;
  Outcome outcome;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.run(outcome, options);
  } catch (const std::exception& e) {
    outcome.passed = false;
    outcome.detail << "error: " << e.what();
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.passed = outcome.passed && result.seconds <= c.limit;
  result.detail = outcome.detail.str();
  if (result.seconds > c.limit) result.detail += "; exceeded runtime limit";
  return result;
}

std::vector<CriterionResult> run_suite(const SuiteOptions& options,
                                       const std::function<void(const CriterionResult&)>& progress) {
  std::vector<CriterionResult> results;
  for (int id = 1; id <= kCriteria; ++id) {
    results.push_back(run_criterion(id, options));
    if (progress) progress(results.back());
  }
  return results;
}

std::vector<Diagnostic> diagnostics(const SuiteOptions&) {
  std::vector<Diagnostic> out;
  for (UInt q : {11u, 101u}) {
    std::ostringstream detail;
    detail << "q-restricted Euler sum / main term at R=1e3: " << main_term_ratio(1e3, q);
    out.push_back({"q-variant main term, q=" + std::to_string(q), detail.str()});
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream line;
  line << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title << ": " << r.detail
       << " (" << std::fixed << std::setprecision(2) << r.seconds << " s, limit " << r.limit_seconds
       << " s)";
  return line.str();
}

}  // namespace dioph::verify
