#include "dioph/counter.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "dioph/arith.hpp"
#include "dioph/parallel.hpp"

namespace dioph::counter {

namespace {

using forms::CompiledSystem;
using forms::FormSystem;
using forms::LinearFamily;

std::vector<std::vector<Int>> coordinate_values(const BoxSpec& box,
                                                const CongruenceRestriction& c) {
  require(box.N >= 1, "box side N must be positive");
  require(c.D >= 1, "congruence modulus D must be positive");
  require(c.s.size() == box.n, "congruence representative has wrong dimension");
  std::vector<std::vector<Int>> values(box.n);
  for (int j = 0; j < box.n; ++j) {
    Int first = arith::mod(c.s[j], c.D);
    if (first == 0) first = c.D;
    for (Int t = first; t <= box.N; t += c.D) values[j].push_back(t);
  }
  return values;
}

constexpr int kMaxForms = 16;

void check_inputs(const FormSystem& F, const IVec& v, const BoxSpec& box) {
  require(F.forms() <= kMaxForms, "at most 16 forms are supported by the enumerators");
  require(box.n == F.variables(), "box dimension differs from variable count");
  require(v.size() == F.forms(), "target vector length differs from form count");
  // exact evaluation must stay inside 64 bits
  double bound = 0;
  for (int i = 0; i < F.forms(); ++i) {
    for (const auto& mono : F.monomials(i)) {
      bound += std::abs(static_cast<double>(mono.coefficient)) *
               std::pow(static_cast<double>(box.N), F.degree());
    }
  }
  if (bound > 4e18) fail("box too large for exact 64-bit evaluation");
}

/// Visits every point of the product of `values[0..depth)`, in parallel over
/// the first coordinate. `visit(x, partial)` sees x with the first `depth`
/// coordinates filled.
template <typename Partial, typename Visit>
Partial enumerate(const std::vector<std::vector<Int>>& values, int depth, int n,
                  const ExecutionLimits& limits, Visit&& visit) {
  Partial total{};
  if (depth == 0) {
    IVec x = IVec::Zero(n);
    visit(x, total);
    return total;
  }
  for (int j = 0; j < depth; ++j) {
    if (values[j].empty()) return total;
  }
  auto partials = run_chunks<Partial>(values[0].size(), limits.workers, [&](std::size_t lead) {
    Partial part{};
    IVec x = IVec::Zero(n);
    std::vector<std::size_t> idx(depth, 0);
    x[0] = values[0][lead];
    for (int j = 1; j < depth; ++j) x[j] = values[j][0];
    while (true) {
      visit(x, part);
      int t = 1;
      while (t < depth) {
        if (++idx[t] < values[t].size()) {
          x[t] = values[t][idx[t]];
          break;
        }
        idx[t] = 0;
        x[t] = values[t][0];
        ++t;
      }
      if (t >= depth) break;
    }
    return part;
  });
  for (auto& p : partials) total.merge(p);
  return total;
}

struct Tally {
  UInt count = 0;
  void merge(const Tally& o) { count += o.count; }
};

/// Positive integer t with t^k = y, if any.
std::optional<Int> positive_root(Int y, int k) {
  if (y <= 0) return std::nullopt;
  auto t = static_cast<Int>(std::llround(std::pow(static_cast<double>(y), 1.0 / k)));
  for (Int cand = std::max<Int>(1, t - 1); cand <= t + 1; ++cand) {
    Int power = 1;
    bool overflow = false;
    for (int e = 0; e < k && !overflow; ++e) overflow = __builtin_mul_overflow(power, cand, &power);
    if (!overflow && power == y) return cand;
  }
  return std::nullopt;
}

}  // namespace

double enumeration_cost(const BoxSpec& box, const CongruenceRestriction& c) {
  double cost = 1;
  for (const auto& vals : coordinate_values(box, c)) cost *= static_cast<double>(vals.size());
  return cost;
}

CountResult count_congruent_solutions(const FormSystem& F, const IVec& v, const BoxSpec& box,
                                      const CongruenceRestriction& c,
                                      const ExecutionLimits& limits) {
  check_inputs(F, v, box);
  const auto values = coordinate_values(box, c);
  const double cost = enumeration_cost(box, c);
  limits.charge("count_congruent_solutions", cost);

  const CompiledSystem program(F);
  const int r = F.forms();
  const Tally tally = enumerate<Tally>(values, box.n, box.n, limits,
                                       [&](const IVec& x, Tally& part) {
    std::array<Int, kMaxForms> value;
    program.evaluate(x.data(), value.data());
    for (int i = 0; i < r; ++i) {
      if (value[i] != v[i]) return;
    }
    ++part.count;
  });
  return {tally.count, cost};
}

CountResult last_variable_accelerated_count(const FormSystem& F, const IVec& v,
                                            const BoxSpec& box, const CongruenceRestriction& c,
                                            const ExecutionLimits& limits) {
  check_inputs(F, v, box);
  if (!F.last_variable_isolated()) {
    throw Error(ErrorKind::unsupported,
                "last_variable_accelerated_count: last variable is not isolated as c*x^k");
  }
  const int n = box.n;
  const int last = n - 1;
  const int k = F.degree();
  const auto values = coordinate_values(box, c);
  double cost = 1;
  for (int j = 0; j < last; ++j) cost *= static_cast<double>(values[j].size());
  limits.charge("last_variable_accelerated_count", cost);

  const int r = F.forms();
  std::vector<Int> coeff(r);
  int pivot = -1;
  for (int i = 0; i < r; ++i) {
    coeff[i] = F.pure_power_coefficient(i, last);
    if (pivot < 0 && coeff[i] != 0) pivot = i;
  }
  const CompiledSystem program(F);
  const Int residue = arith::mod(c.s[last], c.D);

  const Tally tally = enumerate<Tally>(values, last, n, limits, [&](const IVec& x, Tally& part) {
    std::array<Int, kMaxForms> rest;
    program.evaluate(x.data(), rest.data());  // x_n = 0
    const Int rhs = v[pivot] - rest[pivot];
    if (rhs % coeff[pivot] != 0) return;
    const auto t = positive_root(rhs / coeff[pivot], k);
    if (!t || *t > box.N || arith::mod(*t, c.D) != residue) return;
    const Int tk = arith::ipow(*t, static_cast<unsigned>(k));
    for (int i = 0; i < r; ++i) {
      if (rest[i] + coeff[i] * tk != v[i]) return;
    }
    ++part.count;
  });
  return {tally.count, cost};
}

AlmostPrimeResult count_almost_prime_solutions(const FormSystem& F, const LinearFamily& L,
                                               const IVec& v, const BoxSpec& box, double eps,
                                               const ExecutionLimits& limits) {
  check_inputs(F, v, box);
  require(L.variables() == F.variables(), "linear family has wrong variable count");
  require(0 < eps && eps < 1, "eps must lie in (0, 1)");
  const auto c = CongruenceRestriction::none(box.n);
  const auto values = coordinate_values(box, c);
  limits.charge("count_almost_prime_solutions", enumeration_cost(box, c));

  struct Part {
    UInt count = 0, solutions = 0, zeros = 0;
    void merge(const Part& o) {
      count += o.count;
      solutions += o.solutions;
      zeros += o.zeros;
    }
  };
  const double bound = std::pow(static_cast<double>(box.N), eps);
  const CompiledSystem program(F);
  const int r = F.forms();
  const Part total = enumerate<Part>(values, box.n, box.n, limits, [&](const IVec& x, Part& part) {
    std::array<Int, kMaxForms> value;
    program.evaluate(x.data(), value.data());
    for (int i = 0; i < r; ++i) {
      if (value[i] != v[i]) return;
    }
    ++part.solutions;
    const IVec l = L.evaluate(x);
    if ((l.array() == 0).any()) {
      ++part.zeros;
      return;
    }
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      if (!arith::is_rough(static_cast<UInt>(std::abs(l[i])), bound)) return;
    }
    ++part.count;
  });
  return {total.count, total.solutions, total.zeros, bound};
}

WeightedSumResult sieve_weighted_sum(const FormSystem& F, const LinearFamily& L, const IVec& v,
                                     const BoxSpec& box, const sieve::SievePlan& plan,
                                     const WeightedSumOptions& options,
                                     const ExecutionLimits& limits) {
  check_inputs(F, v, box);
  require(L.variables() == F.variables(), "linear family has wrong variable count");
  const UInt W = plan.W;
  if (options.b) {
    require(options.b->size() == box.n, "residue b has wrong dimension");
    const IVec lb = L.evaluate(*options.b);
    if (!arith::coprime_to_W({lb.data(), static_cast<std::size_t>(lb.size())}, W)) {
      fail("sieve_weighted_sum: residue b is not admissible, (L(b), W) != 1");
    }
  }
  if (options.q) {
    require(arith::is_prime(*options.q), "sieve_weighted_sum: q must be prime");
    require(*options.q > plan.omega, "sieve_weighted_sum: q must exceed omega");
  }
  const auto c = options.b ? CongruenceRestriction{static_cast<Int>(W), *options.b}
                           : CongruenceRestriction::none(box.n);
  const auto values = coordinate_values(box, c);
  limits.charge("sieve_weighted_sum", enumeration_cost(box, c));

  struct Part {
    CompensatedSum<double> sum;
    UInt solutions = 0, zeros = 0;
    void merge(const Part& o) {
      sum.merge(o.sum);
      solutions += o.solutions;
      zeros += o.zeros;
    }
  };
  const sieve::WeightFunction f(plan.m);
  const CompiledSystem program(F);
  const int r = F.forms();
  const Part total = enumerate<Part>(values, box.n, box.n, limits, [&](const IVec& x, Part& part) {
    std::array<Int, kMaxForms> value;
    program.evaluate(x.data(), value.data());
    for (int i = 0; i < r; ++i) {
      if (value[i] != v[i]) return;
    }
    const IVec l = L.evaluate(x);
    if ((l.array() == 0).any()) {
      ++part.zeros;
      return;
    }
    if (!arith::coprime_to_W({l.data(), static_cast<std::size_t>(l.size())}, W)) return;
    if (options.q) {
      const Int q = static_cast<Int>(*options.q);
      if (((l.array() / q) * q != l.array()).all()) return;
    }
    ++part.solutions;
    if (options.mode == WeightMode::unit) {
      part.sum.add(1.0);
      return;
    }
    std::vector<UInt> primes;
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      const auto fac = arith::factorize(static_cast<UInt>(std::abs(l[i])));
      for (UInt p : fac.primes()) primes.push_back(p);
    }
    const double lambda = sieve::lambda_R_from_primes(primes, f, plan.R);
    part.sum.add(lambda * lambda);
  });
  return {total.sum.value(), total.solutions, total.zeros};
}

}  // namespace dioph::counter
