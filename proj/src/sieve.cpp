#include "dioph/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dioph/arith.hpp"
#include "dioph/parallel.hpp"

namespace dioph::sieve {

namespace {

BigInt factorial(int n) {
  BigInt out = 1;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

double integrate(const std::function<double(double)>& g, double a, double b) {
  if (!(b > a)) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(g, a, b, 15, 1e-13);
}

double inverse_factorial(int n) {
  double out = 1;
  for (int i = 2; i <= n; ++i) out /= i;
  return out;
}

}  // namespace

WeightFunction::WeightFunction(int m) : m_(m) {
  require(m >= 1, "WeightFunction: m must be positive");
}

double WeightFunction::operator()(double x) const {
  if (x >= 1.0) return 0.0;
  return std::pow(1.0 - x, exponent());
}

double WeightFunction::derivative(int order, double x) const {
  require(order >= 0, "WeightFunction: negative derivative order");
  if (x >= 1.0 || order > exponent()) return 0.0;
  double scale = order % 2 == 0 ? 1.0 : -1.0;
  for (int i = 0; i < order; ++i) scale *= exponent() - i;
  return scale * std::pow(1.0 - x, exponent() - order);
}

BigInt WeightFunction::derivative_scale(int order) const {
  if (order > exponent()) return 0;
  BigInt scale = 1;
  for (int i = 0; i < order; ++i) scale *= exponent() - i;
  return order % 2 == 0 ? scale : BigInt(-scale);
}

SievePlan SievePlan::from_exponents(int m, double N, double eta, double eps, UInt omega) {
  require(N >= 1, "SievePlan: N must be at least 1");
  require(0 < eps && eps < eta && eta < 1, "SievePlan: need 0 < eps < eta < 1");
  SievePlan plan = with_level(m, std::pow(N, eta), omega, N);
  plan.eta = eta;
  plan.eps = eps;
  return plan;
}

SievePlan SievePlan::with_level(int m, double R, UInt omega, double N) {
  require(m >= 1, "SievePlan: m must be positive");
  require(R >= 2, "SievePlan: level R must be at least 2");
  require(omega >= 1, "SievePlan: omega must be positive");
  const BigInt W = arith::primorial(omega);
  require(W <= BigInt(std::numeric_limits<UInt>::max()), "SievePlan: W does not fit 64 bits");
  SievePlan plan;
  plan.m = m;
  plan.N = N;
  plan.R = R;
  plan.omega = omega;
  plan.W = W.convert_to<UInt>();
  return plan;
}

double SievePlan::log_R() const { return std::log(R); }

double SievePlan::coprime_density() const {
  return static_cast<double>(arith::euler_phi(W)) / static_cast<double>(W);
}

double lambda_R_from_primes(std::span<const UInt> primes, const WeightFunction& f, double R) {
  require(R >= 2, "lambda_R: R must be at least 2");
  std::vector<UInt> sorted(primes.begin(), primes.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const double log_R = std::log(R);

  CompensatedSum<double> sum;
  // depth-first over squarefree divisors below R; f vanishes from R on
  auto visit = [&](auto&& self, std::size_t start, UInt d, int sign) -> void {
    sum.add(sign * f(std::log(static_cast<double>(d)) / log_R));
    for (std::size_t i = start; i < sorted.size(); ++i) {
      const UInt next = d * sorted[i];
      if (static_cast<double>(next) >= R) break;
      self(self, i + 1, next, -sign);
    }
  };
  visit(visit, 0, 1, 1);
  return sum.value();
}

double lambda_R(UInt M, const WeightFunction& f, double R) {
  require(M >= 1, "lambda_R: argument must be positive");
  const auto primes = arith::factorize(M).primes();
  return lambda_R_from_primes(primes, f, R);
}

double lcm_pair_sum(std::span<const UInt> primes, const std::function<double(UInt)>& weight) {
  const std::size_t w = primes.size();
  std::size_t pairs = 1;
  for (std::size_t i = 0; i < w; ++i) pairs *= 3;
  CompensatedSum<double> sum;
  for (std::size_t code = 0; code < pairs; ++code) {
    // digit 0: p | d1 only, 1: p | d2 only, 2: both
    UInt d1 = 1, d2 = 1;
    int sign = 1;
    std::size_t c = code;
    for (std::size_t i = 0; i < w; ++i, c /= 3) {
      switch (c % 3) {
        case 0: d1 *= primes[i]; sign = -sign; break;
        case 1: d2 *= primes[i]; sign = -sign; break;
        default: d1 *= primes[i]; d2 *= primes[i]; break;
      }
    }
    sum.add(sign * weight(d1) * weight(d2));
  }
  return sum.value();
}

double h_D(UInt D, const WeightFunction& f, double R) {
  require(D >= 1, "h_D: D must be positive");
  const auto fac = arith::factorize(D);
  require(fac.squarefree(), "h_D: D must be squarefree");
  const double log_R = std::log(R);
  const auto primes = fac.primes();
  return lcm_pair_sum(primes, [&](UInt d) {
    return f(std::log(static_cast<double>(d)) / log_R);
  });
}

double multiplicative_pair_product(std::span<const UInt> primes,
                                   const std::function<double(UInt)>& weight) {
  double out = 1;
  for (UInt p : primes) {
    const double w = weight(p);
    out *= w * w - 2 * w;
  }
  return out;
}

GammaModel GammaModel::synthetic(int m) {
  require(m >= 1, "GammaModel: m must be positive");
  GammaModel g;
  g.fn_ = [m](UInt p) { return static_cast<double>(m) / static_cast<double>(p); };
  g.label_ = "synthetic m/p, m=" + std::to_string(m);
  return g;
}

GammaModel GammaModel::table(std::map<UInt, double> values, std::optional<int> fallback_m) {
  GammaModel g;
  g.fn_ = [values = std::move(values), fallback_m](UInt p) {
    if (auto it = values.find(p); it != values.end()) return it->second;
    if (fallback_m) return static_cast<double>(*fallback_m) / static_cast<double>(p);
    fail("GammaModel: no value for prime " + std::to_string(p));
  };
  g.label_ = "table";
  return g;
}

GammaModel GammaModel::from_function(std::function<double(UInt)> fn, std::string label) {
  GammaModel g;
  g.fn_ = std::move(fn);
  g.label_ = std::move(label);
  return g;
}

double GammaModel::operator()(UInt p) const { return fn_(p); }

namespace {

struct SieveIndex {
  std::vector<UInt> d;          // squarefree, coprime to W, ascending
  std::vector<int> mu;
  std::vector<double> weight;   // f(log d / log R)
  std::vector<double> gamma;    // γ'_d
};

/// Squarefree d < R coprime to W, with multiplicative data from a smallest
/// prime factor sieve.
SieveIndex build_index(const GammaModel& gamma, const WeightFunction& f, double R, UInt W,
                       std::optional<UInt> q) {
  const auto limit = static_cast<UInt>(std::ceil(R));  // d < R
  std::vector<UInt> spf(limit + 1, 0);
  for (UInt i = 2; i <= limit; ++i) {
    if (spf[i] != 0) continue;
    for (UInt j = i; j <= limit; j += i) {
      if (spf[j] == 0) spf[j] = i;
    }
  }
  std::map<UInt, double> gamma_p;
  const double log_R = std::log(R);
  SieveIndex idx;
  for (UInt d = 1; d <= limit; ++d) {
    if (static_cast<double>(d) >= R) break;
    UInt rest = d;
    int mu = 1;
    double g = 1;
    bool ok = true;
    while (rest > 1) {
      const UInt p = spf[rest];
      rest /= p;
      if (rest % p == 0 || W % p == 0) {
        ok = false;
        break;
      }
      mu = -mu;
      if (q && p == *q) continue;
      auto it = gamma_p.find(p);
      if (it == gamma_p.end()) it = gamma_p.emplace(p, gamma(p)).first;
      g *= it->second;
    }
    if (!ok) continue;
    idx.d.push_back(d);
    idx.mu.push_back(mu);
    idx.weight.push_back(f(std::log(static_cast<double>(d)) / log_R));
    idx.gamma.push_back(g);
  }
  return idx;
}

void validate_sum_inputs(double R, UInt W, std::optional<UInt> q) {
  require(R >= 2, "euler_sieve_sum: R must be at least 2");
  require(W >= 1, "euler_sieve_sum: W must be positive");
  if (q) {
    require(arith::is_prime(*q), "euler_sieve_sum: q must be prime");
    require(W % *q != 0, "euler_sieve_sum: q must exceed omega (coprime to W)");
  }
}

}  // namespace

EulerSumResult euler_sieve_sum(const GammaModel& gamma, const WeightFunction& f, double R,
                               UInt W, std::optional<UInt> q, std::optional<double> D_max) {
  validate_sum_inputs(R, W, q);
  const double cap = D_max.value_or(R * R);
  const SieveIndex idx = build_index(gamma, f, R, W, q);

  // γ'_{d2/g} for the cofactor: look up by value
  std::vector<double> gamma_by_value(idx.d.empty() ? 1 : idx.d.back() + 1, 0.0);
  for (std::size_t i = 0; i < idx.d.size(); ++i) gamma_by_value[idx.d[i]] = idx.gamma[i];

  const std::size_t count = idx.d.size();
  const auto partials = run_chunks<CompensatedSum<double>>(count, 1, [&](std::size_t i) {
    CompensatedSum<double> row;
    const UInt d1 = idx.d[i];
    const double a1 = idx.mu[i] * idx.weight[i] * idx.gamma[i];
    for (std::size_t j = 0; j < count; ++j) {
      const UInt d2 = idx.d[j];
      const UInt g = std::gcd(d1, d2);
      const UInt cofactor = d2 / g;
      if (static_cast<double>(d1) * static_cast<double>(cofactor) > cap) continue;
      row.add(a1 * idx.mu[j] * idx.weight[j] * gamma_by_value[cofactor]);
    }
    return row;
  });
  CompensatedSum<double> total;
  for (const auto& p : partials) total.merge(p);

  EulerSumResult out;
  out.value = total.value() * (q ? gamma(*q) : 1.0);
  out.D_max = cap;
  out.terms = count * count;
  return out;
}

EulerSumResult euler_sieve_sum_by_modulus(const GammaModel& gamma, const WeightFunction& f,
                                          double R, UInt W, std::optional<UInt> q,
                                          std::optional<double> D_max) {
  validate_sum_inputs(R, W, q);
  const double cap = D_max.value_or(R * R);
  std::vector<UInt> primes;
  for (UInt p : arith::primes_up_to(static_cast<UInt>(std::ceil(R)))) {
    if (static_cast<double>(p) < R && W % p != 0) primes.push_back(p);
  }
  const double log_R = std::log(R);
  const auto weight = [&](UInt d) { return f(std::log(static_cast<double>(d)) / log_R); };

  CompensatedSum<double> total;
  std::size_t terms = 0;
  std::vector<UInt> chosen;
  auto visit = [&](auto&& self, std::size_t start, UInt D, double gamma_D) -> void {
    total.add(gamma_D * lcm_pair_sum(chosen, weight));
    ++terms;
    for (std::size_t i = start; i < primes.size(); ++i) {
      const UInt p = primes[i];
      if (static_cast<double>(D) * static_cast<double>(p) > cap) break;
      chosen.push_back(p);
      self(self, i + 1, D * p, gamma_D * (q && p == *q ? 1.0 : gamma(p)));
      chosen.pop_back();
    }
  };
  visit(visit, 0, 1, 1.0);

  EulerSumResult out;
  out.value = total.value() * (q ? gamma(*q) : 1.0);
  out.D_max = cap;
  out.terms = terms;
  return out;
}

SieveConstants sieve_constants(int m) {
  require(m >= 1, "sieve_constants: m must be positive");
  const WeightFunction f(m);
  // ∫_0^1 c^2 (1-x)^{2a} x^{m-1}/(m-1)! dx = c^2 (2a)! / (2a+m)!
  auto moment = [&](int order) {
    const BigInt scale = f.derivative_scale(order);
    const int a = f.exponent() - order;
    return Rational(scale * scale * factorial(2 * a), factorial(2 * a + m));
  };
  return {moment(m), Rational(2 * m) * moment(m + 1)};
}

std::pair<double, double> sieve_constants_quadrature(int m) {
  const WeightFunction f(m);
  const double norm = inverse_factorial(m - 1);
  const double c = integrate([&](double x) {
    const double d = f.derivative(m, x);
    return d * d * std::pow(x, m - 1) * norm;
  }, 0.0, 1.0);
  const double cp = 2.0 * m * integrate([&](double x) {
    const double d = f.derivative(m + 1, x);
    return d * d * std::pow(x, m - 1) * norm;
  }, 0.0, 1.0);
  return {c, cp};
}

double shifted_derivative_integral(const WeightFunction& f, double tau) {
  require(tau >= 0, "shifted_derivative_integral: shift must be nonnegative");
  const int m = f.m();
  const double norm = inverse_factorial(m - 1);
  auto integrand = [&](double x) {
    const double d = f.derivative(m, x) - f.derivative(m, x + tau);
    return d * d * std::pow(x, m - 1) * norm;
  };
  const double split = std::clamp(1.0 - tau, 0.0, 1.0);
  return integrate(integrand, 0.0, split) + integrate(integrand, split, 1.0);
}

double predicted_main_term(MainTermKind kind, const MainTermInputs& in) {
  auto need = [](const auto& field, const char* name) {
    if (!field) fail(std::string("predicted_main_term: missing input ") + name);
    return *field;
  };
  const int m = in.m;
  const double log_R = need(in.log_R, "log_R");
  const auto constants = sieve_constants(m);
  switch (kind) {
    case MainTermKind::sieve_sum: {
      const double density = need(in.coprime_density, "coprime_density");
      return std::pow(density * log_R, -m) * to_double(constants.c_m);
    }
    case MainTermKind::sieve_sum_q: {
      const double density = need(in.coprime_density, "coprime_density");
      const auto q = static_cast<double>(need(in.q, "q"));
      const double tau = std::log(q) / log_R;
      return m / q * std::pow(density * log_R, -m) *
             shifted_derivative_integral(WeightFunction(m), tau);
    }
    case MainTermKind::thm121:
    case MainTermKind::thm122: {
      const double N = need(in.N, "N");
      const int exponent = need(in.exponent, "exponent");
      const double sigma = need(in.singular_product, "singular_product");
      const double base = std::pow(N, exponent) * std::pow(log_R, -m) * sigma;
      if (kind == MainTermKind::thm121) return to_double(constants.c_m) * base;
      const double ratio = need(in.eps, "eps") / need(in.eta, "eta");
      return to_double(constants.c_prime) * ratio * ratio * base;
    }
  }
  throw Error(ErrorKind::internal, "predicted_main_term: unknown kind");
}

ExponentParameters exponent_parameters(int m, int r, int k, EpsilonVariant variant) {
  require(m >= 1 && r >= 1 && k >= 2, "exponent_parameters: need m, r >= 1 and k >= 2");
  const Int base = Int{r} * r * (r + 1) * (r + 2);
  ExponentParameters out;
  out.eta = Rational(1, 8 * base * k * (k + 1));
  out.eta_prime = Rational(1, 4 * base * k * k);

  const double m32 = std::pow(static_cast<double>(m), 1.5);
  const Int root = static_cast<Int>(std::llround(std::sqrt(static_cast<double>(m))));
  const bool square = root * root == m;
  if (variant == EpsilonVariant::theorem_statement) {
    out.epsilon = 1.0 / (256.0 * m32 * static_cast<double>(base * k * (k + 1)));
    if (square) out.epsilon_exact = Rational(1, 256 * root * root * root * base * k * (k + 1));
  } else {
    out.epsilon = to_double(out.eta) / (64.0 * m32);
    if (square) out.epsilon_exact = out.eta / Rational(64 * root * root * root);
  }
  return out;
}

double safe_eps_over_eta(int m) {
  const auto c = sieve_constants(m);
  return std::sqrt(0.5 / to_double(c.c_prime / c.c_m));
}

}  // namespace dioph::sieve
