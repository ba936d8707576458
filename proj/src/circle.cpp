#include "dioph/circle.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/quadrature/gauss.hpp>

#include "dioph/arith.hpp"
#include "dioph/padic.hpp"
#include "dioph/parallel.hpp"

namespace dioph::circle {

namespace {

using forms::CompiledSystem;
using forms::FormSystem;
using Quadrature = boost::math::quadrature::gauss<double, 20>;

constexpr std::size_t kMaxHistogram = std::size_t{1} << 24;
constexpr std::uint64_t kBlock = std::uint64_t{1} << 16;

/// Joint distribution of F(dx + s) mod q over x in Z_q^n, indexed by
/// Σ_i value_i q^i.
std::vector<UInt> residue_histogram(const FormSystem& F, Int q, Int d, const IVec& s,
                                    const ExecutionLimits& limits) {
  const int n = F.variables();
  const int r = F.forms();
  require(q >= 1 && q < (Int{1} << 31), "modulus q out of range");
  require(s.size() == n, "shift s has wrong dimension");
  const double cells = std::pow(static_cast<double>(q), r);
  require(cells <= static_cast<double>(kMaxHistogram), "q^r too large for a residue histogram");
  limits.charge("residue histogram", std::pow(static_cast<double>(q), n));

  IVec base(n);
  for (int j = 0; j < n; ++j) base[j] = arith::mod(s[j], q);
  const Int step = arith::mod(d, q);
  const CompiledSystem program(F);
  const auto table = static_cast<std::size_t>(cells);
  const auto partials = run_chunks<std::vector<UInt>>(
      static_cast<std::size_t>(q), limits.workers, [&](std::size_t lead) {
        std::vector<UInt> hist(table, 0);
        IVec x = IVec::Zero(n);
        IVec y(n);
        IVec value(r);
        x[0] = static_cast<Int>(lead);
        while (true) {
          for (int j = 0; j < n; ++j) y[j] = (arith::mul_mod(step, x[j], q) + base[j]) % q;
          program.evaluate_mod(y.data(), q, value.data());
          std::size_t idx = 0;
          for (int i = r - 1; i >= 0; --i) idx = idx * static_cast<std::size_t>(q) + value[i];
          ++hist[idx];
          int t = 1;
          while (t < n && ++x[t] == q) x[t++] = 0;
          if (t >= n) break;
        }
        return hist;
      });
  std::vector<UInt> hist(table, 0);
  for (const auto& part : partials) {
    for (std::size_t i = 0; i < table; ++i) hist[i] += part[i];
  }
  return hist;
}

std::vector<Complex> phase_table(Int q) {
  std::vector<Complex> table(static_cast<std::size_t>(q));
  for (Int j = 0; j < q; ++j) table[j] = unit_phase(static_cast<double>(j) / static_cast<double>(q));
  return table;
}

Int digit(std::size_t idx, int i, Int q) {
  for (int t = 0; t < i; ++t) idx /= static_cast<std::size_t>(q);
  return static_cast<Int>(idx % static_cast<std::size_t>(q));
}

/// Σ_{a mod q, gcd(a, q) = 1} q^{-n} e(-a·v/q) S_{a,q}(d, s).
Complex series_term(const FormSystem& F, const IVec& v, Int q, Int d, const IVec& s,
                    const ExecutionLimits& limits) {
  const int n = F.variables();
  const int r = F.forms();
  if (q == 1) return 1.0;
  const auto hist = residue_histogram(F, q, d, s, limits);
  const auto phases = phase_table(q);
  const std::size_t cells = hist.size();
  limits.charge("singular series characters", static_cast<double>(cells) * static_cast<double>(cells));

  // residue digits of every histogram cell, shifted by -v
  std::vector<Int> shifted(cells * r);
  for (std::size_t c = 0; c < cells; ++c) {
    for (int i = 0; i < r; ++i) shifted[c * r + i] = arith::mod(digit(c, i, q) - v[i], q);
  }
  CompensatedSum<Complex> total;
  std::vector<Int> a(r, 0);
  for (std::size_t ai = 0; ai < cells; ++ai) {
    Int g = q;
    for (int i = 0; i < r; ++i) {
      a[i] = digit(ai, i, q);
      g = std::gcd(g, a[i]);
    }
    if (g != 1) continue;
    CompensatedSum<Complex> inner;
    for (std::size_t c = 0; c < cells; ++c) {
      if (hist[c] == 0) continue;
      Int phase = 0;
      for (int i = 0; i < r; ++i) phase = (phase + arith::mul_mod(a[i], shifted[c * r + i], q)) % q;
      inner.add(static_cast<double>(hist[c]) * phases[static_cast<std::size_t>(phase)]);
    }
    total.add(inner.value());
  }
  return total.value() * std::pow(static_cast<double>(q), -n);
}

std::vector<std::vector<Int>> fiber_values(Int N, int n, Int d, const IVec& s) {
  require(N >= 1, "box side N must be positive");
  require(d >= 1, "dilation d must be positive");
  require(s.size() == n, "shift s has wrong dimension");
  std::vector<std::vector<Int>> values(n);
  for (int j = 0; j < n; ++j) {
    Int first = arith::mod(s[j], d);
    if (first == 0) first = d;
    for (Int y = first; y <= N; y += d) values[j].push_back(y);
  }
  return values;
}

/// 1-D ∫_0^1 g(y) dy for an oscillating integrand with derivative bound `speed`.
template <typename G>
Complex composite_integral(G&& g, double speed) {
  const int panels = 4 + static_cast<int>(std::ceil(speed));
  CompensatedSum<Complex> total;
  for (int k = 0; k < panels; ++k) {
    const double a = static_cast<double>(k) / panels;
    const double b = static_cast<double>(k + 1) / panels;
    const double re = Quadrature::integrate([&](double y) { return g(y).real(); }, a, b);
    const double im = Quadrature::integrate([&](double y) { return g(y).imag(); }, a, b);
    total.add({re, im});
  }
  return total.value();
}

double phase_speed(const FormSystem& F, const RVec& gamma) {
  double speed = 0;
  for (int i = 0; i < F.forms(); ++i) {
    double coeffs = 0;
    for (const auto& mono : F.monomials(i)) coeffs += std::abs(static_cast<double>(mono.coefficient));
    speed += std::abs(gamma[i]) * coeffs * F.degree();
  }
  return speed;
}

}  // namespace

Complex unit_phase(double t) {
  const double frac = t - std::floor(t);
  return std::polar(1.0, 2 * std::numbers::pi * frac);
}

Complex exp_sum(const FormSystem& F, Int d, const IVec& s, const RVec& alpha, Int N,
                const ExecutionLimits& limits) {
  const int n = F.variables();
  const int r = F.forms();
  require(alpha.size() == r, "alpha has wrong dimension");
  require(std::pow(static_cast<double>(N), F.degree()) < 1e15,
          "exp_sum: box too large for exact form values");
  const auto values = fiber_values(N, n, d, s);
  double cost = 1;
  for (const auto& vals : values) cost *= static_cast<double>(vals.size());
  limits.charge("exp_sum", cost);
  if (cost == 0) return 0.0;

  const CompiledSystem program(F);
  const auto partials = run_chunks<CompensatedSum<Complex>>(
      values[0].size(), limits.workers, [&](std::size_t lead) {
        CompensatedSum<Complex> part;
        IVec y(n);
        IVec value(r);
        std::vector<std::size_t> idx(n, 0);
        y[0] = values[0][lead];
        for (int j = 1; j < n; ++j) y[j] = values[j][0];
        while (true) {
          program.evaluate(y.data(), value.data());
          long double t = 0;
          for (int i = 0; i < r; ++i) {
            const long double term = static_cast<long double>(alpha[i]) * value[i];
            t += term - std::floor(term);
          }
          part.add(unit_phase(static_cast<double>(t - std::floor(t))));
          int j = 1;
          while (j < n) {
            if (++idx[j] < values[j].size()) {
              y[j] = values[j][idx[j]];
              break;
            }
            idx[j] = 0;
            y[j] = values[j][0];
            ++j;
          }
          if (j >= n) break;
        }
        return part;
      });
  CompensatedSum<Complex> total;
  for (const auto& part : partials) total.merge(part);
  return total.value();
}

Complex gauss_sum(const FormSystem& F, const IVec& a, Int q, Int d, const IVec& s,
                  const ExecutionLimits& limits) {
  require(a.size() == F.forms(), "gauss_sum: a has wrong dimension");
  require(q >= 1, "gauss_sum: q must be positive");
  const auto hist = residue_histogram(F, q, d, s, limits);
  const auto phases = phase_table(q);
  CompensatedSum<Complex> total;
  for (std::size_t c = 0; c < hist.size(); ++c) {
    if (hist[c] == 0) continue;
    Int phase = 0;
    for (int i = 0; i < F.forms(); ++i) {
      phase = (phase + arith::mul_mod(arith::mod(a[i], q), digit(c, i, q), q)) % q;
    }
    total.add(static_cast<double>(hist[c]) * phases[static_cast<std::size_t>(phase)]);
  }
  return total.value();
}

double weyl_rhs(const FormSystem& F, Int d, const RVec& alpha, Int N1,
                const ExecutionLimits& limits) {
  const int n = F.variables();
  const int k = F.degree();
  require(alpha.size() == F.forms(), "weyl_rhs: alpha has wrong dimension");
  require(N1 >= 1, "weyl_rhs: N1 must be positive");
  const int dims = (k - 1) * n;
  const Int side = 2 * N1 + 1;
  limits.charge("weyl_rhs", std::pow(static_cast<double>(side), dims));

  const double dk = std::pow(static_cast<double>(d), k);
  std::vector<IVec> h(k - 1, IVec::Constant(n, -N1));
  CompensatedSum<double> total;
  while (true) {
    const IMat phi = forms::multilinear_phi(F, h);
    double product = 1;
    for (int j = 0; j < n; ++j) {
      double t = 0;
      for (int i = 0; i < F.forms(); ++i) t += alpha[i] * static_cast<double>(phi(i, j));
      t *= dk;
      const double dist = std::abs(t - std::round(t));
      product *= dist * static_cast<double>(N1) <= 1 ? static_cast<double>(N1) : 1 / dist;
    }
    total.add(product);
    int c = 0;
    for (; c < dims; ++c) {
      Int& coord = h[c / n][c % n];
      if (++coord <= N1) break;
      coord = -N1;
    }
    if (c >= dims) break;
  }
  return total.value() * std::pow(static_cast<double>(N1), -k * n);
}

std::optional<ArcCenter> major_arc_membership(const RVec& alpha, const MajorArcParams& params) {
  require(params.theta > 0 && params.theta < 1, "major arcs: theta must lie in (0, 1)");
  require(params.N1 >= 1, "major arcs: N1 must be at least 1");
  require(alpha.size() == params.r, "major arcs: alpha has wrong dimension");
  const double kappa = params.kappa();
  const auto Q = static_cast<Int>(std::floor(std::pow(params.N1, kappa) + 1e-12));
  for (Int q = 1; q <= Q; ++q) {
    const double width = std::pow(params.N1, -params.k + kappa) / static_cast<double>(q);
    ArcCenter center{IVec(params.r), q};
    Int g = q;
    bool inside = true;
    for (int i = 0; i < params.r && inside; ++i) {
      center.a[i] = static_cast<Int>(std::llround(alpha[i] * static_cast<double>(q)));
      inside = std::abs(alpha[i] - static_cast<double>(center.a[i]) / static_cast<double>(q)) <=
               width * (1 + 1e-12);
      g = std::gcd(g, center.a[i]);
    }
    if (inside && g == 1) return center;
  }
  return std::nullopt;
}

SingularSeriesTruncation singular_series(const FormSystem& F, const IVec& v, Int d, const IVec& s,
                                         Int Q_max, const ExecutionLimits& limits) {
  require(v.size() == F.forms(), "singular_series: target has wrong dimension");
  require(Q_max >= 1, "singular_series: Q_max must be at least 1");
  SingularSeriesTruncation out;
  out.Q_max = Q_max;
  CompensatedSum<Complex> total;
  CompensatedSum<double> tail;
  for (Int q = 1; q <= Q_max; ++q) {
    const Complex term = series_term(F, v, q, d, s, limits);
    out.terms.push_back(term);
    total.add(term);
    if (2 * q > Q_max) tail.add(std::abs(term));
  }
  out.value = total.value();
  out.tail = tail.value();
  return out;
}

double local_factor_via_gauss(const FormSystem& F, const IVec& v, UInt p, int l, Int d,
                              const IVec& s, const ExecutionLimits& limits) {
  require(arith::is_prime(p), "local_factor_via_gauss: p must be prime");
  require(l >= 0, "local_factor_via_gauss: level must be nonnegative");
  require(v.size() == F.forms(), "local_factor_via_gauss: target has wrong dimension");
  CompensatedSum<Complex> total;
  Int q = 1;
  for (int t = 0; t <= l; ++t) {
    total.add(series_term(F, v, q, d, s, limits));
    q *= static_cast<Int>(p);
  }
  return total.value().real();
}

Complex oscillatory_integral(const FormSystem& F, const RVec& gamma, const ExecutionLimits& limits) {
  const int n = F.variables();
  const int r = F.forms();
  require(gamma.size() == r, "oscillatory_integral: gamma has wrong dimension");
  if (F.separable()) {
    Complex product = 1;
    for (int j = 0; j < n; ++j) {
      std::vector<std::vector<Int>> polys(r);
      double speed = 0;
      for (int i = 0; i < r; ++i) {
        polys[i] = F.univariate_terms(i, j);
        for (std::size_t e = 0; e < polys[i].size(); ++e) {
          speed += std::abs(gamma[i] * static_cast<double>(polys[i][e])) * static_cast<double>(e);
        }
      }
      product *= composite_integral(
          [&](double y) {
            double t = 0;
            for (int i = 0; i < r; ++i) {
              double value = 0;
              for (std::size_t e = polys[i].size(); e-- > 0;) value = value * y + static_cast<double>(polys[i][e]);
              t += gamma[i] * value;
            }
            return unit_phase(t);
          },
          speed);
    }
    return product;
  }

  const double speed = phase_speed(F, gamma);
  const int panels = 4 + static_cast<int>(std::ceil(speed));
  limits.charge("oscillatory_integral tensor quadrature", std::pow(20.0 * panels, n));
  const CompiledSystem program(F);
  std::vector<double> y(n);
  std::vector<double> value(r);
  std::function<Complex(int)> nested = [&](int dim) -> Complex {
    if (dim == n) {
      program.evaluate_real(y.data(), value.data());
      double t = 0;
      for (int i = 0; i < r; ++i) t += gamma[i] * value[i];
      return unit_phase(t);
    }
    return composite_integral(
        [&](double yd) {
          y[dim] = yd;
          return nested(dim + 1);
        },
        speed);
  };
  return nested(0);
}

double truncated_singular_integral(const FormSystem& F, double mu, double Phi,
                                   const ExecutionLimits& limits) {
  require(F.forms() == 1, "truncated_singular_integral: only single forms are supported");
  require(Phi > 0, "truncated_singular_integral: Phi must be positive");
  RVec gamma(1);
  // I(-γ) = conj I(γ), so J(μ; Φ) = 2 Re ∫_0^Φ I(γ) e(-γμ) dγ
  const int panels = static_cast<int>(std::ceil(4 * Phi * (1 + std::abs(mu))));
  CompensatedSum<double> total;
  for (int k = 0; k < panels; ++k) {
    const double a = Phi * k / panels;
    const double b = Phi * (k + 1) / panels;
    total.add(Quadrature::integrate(
        [&](double g) {
          gamma[0] = g;
          return (oscillatory_integral(F, gamma, limits) * unit_phase(-g * mu)).real();
        },
        a, b));
  }
  return 2 * total.value();
}

SingularIntegralEstimate singular_integral_J(const FormSystem& F, const RVec& u,
                                             const IntegralControls& controls) {
  const int n = F.variables();
  const int r = F.forms();
  require(u.size() == r, "singular_integral_J: u has wrong dimension");
  SingularIntegralEstimate out;
  out.method = controls.method;

  if (controls.method == IntegralMethod::oscillatory) {
    out.value = truncated_singular_integral(F, u[0], controls.Phi, controls.limits);
    out.Phi = controls.Phi;
    return out;
  }

  require(controls.samples >= 1, "singular_integral_J: need at least one sample");
  const double delta = controls.delta.value_or(0.02 * std::max(1.0, u.cwiseAbs().maxCoeff()));
  require(delta > 0, "singular_integral_J: delta must be positive");
  controls.limits.charge("singular_integral_J", static_cast<double>(controls.samples) * n);

  struct Hits {
    UInt full = 0, half = 0;
  };
  const CompiledSystem program(F);
  const std::uint64_t blocks = (controls.samples + kBlock - 1) / kBlock;
  const auto partials = run_chunks<Hits>(blocks, controls.limits.workers, [&](std::size_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(controls.seed),
                      static_cast<std::uint32_t>(controls.seed >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::mt19937_64 engine(seq);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const std::uint64_t count = std::min<std::uint64_t>(kBlock, controls.samples - b * kBlock);
    std::vector<double> y(n), value(r);
    Hits hits;
    for (std::uint64_t i = 0; i < count; ++i) {
      for (int j = 0; j < n; ++j) y[j] = uniform(engine);
      program.evaluate_real(y.data(), value.data());
      double worst = 0;
      for (int c = 0; c < r; ++c) worst = std::max(worst, std::abs(value[c] - u[c]));
      if (worst <= delta) {
        ++hits.full;
        if (worst <= delta / 2) ++hits.half;
      }
    }
    return hits;
  });
  Hits hits;
  for (const auto& h : partials) {
    hits.full += h.full;
    hits.half += h.half;
  }
  const double S = static_cast<double>(controls.samples);
  const double fraction = static_cast<double>(hits.full) / S;
  const double volume = std::pow(2 * delta, r);
  out.value = fraction / volume;
  out.standard_error = std::sqrt(fraction * (1 - fraction) / S) / volume;
  out.half_delta_value = static_cast<double>(hits.half) / S / std::pow(delta, r);
  out.samples = controls.samples;
  out.seed = controls.seed;
  out.delta = delta;
  return out;
}

int affordable_level(const FormSystem& F, UInt p, Int D, int max_level, double cost) {
  int level = 1;
  for (int l = 2; l <= max_level; ++l) {
    if (std::pow(static_cast<double>(p), l) >= double(Int{1} << 31)) break;
    if (padic::density_cost(F, p, l, D) > cost) break;
    level = l;
  }
  return level;
}

BirchPrediction birch_prediction(const FormSystem& F, const IVec& v, Int N, Int D, const IVec& s,
                                 const BirchOptions& options) {
  const int n = F.variables();
  const int r = F.forms();
  const int k = F.degree();
  require(N >= 1, "birch_prediction: N must be positive");
  require(D >= 1, "birch_prediction: D must be positive");
  require(v.size() == r && s.size() == n, "birch_prediction: wrong dimensions");

  BirchPrediction out;
  const RVec u = v.cast<double>() * std::pow(static_cast<double>(N), -k);
  out.J = singular_integral_J(F, u, options.J);
  out.scale = std::pow(static_cast<double>(N), n - r * k) * std::pow(static_cast<double>(D), -n);

  if (options.method == LocalProductMethod::singular_series) {
    out.series = singular_series(F, v, D, s, options.Q_max, options.J.limits);
    out.local_product = out.series->value.real();
  } else {
    padic::Options popts{options.J.limits, padic::Method::automatic};
    double product = 1;
    for (UInt p : arith::primes_up_to(options.P_max)) {
      const int level = affordable_level(F, p, D, options.max_level, options.level_cost);
      const double sigma = to_double(padic::sigma_p_l(F, v, p, level, D, s, popts).value);
      out.factors.push_back({p, level, sigma});
      product *= sigma;
    }
    out.local_product = product;
  }
  out.value = out.scale * out.J.value * out.local_product;
  return out;
}

}  // namespace dioph::circle
