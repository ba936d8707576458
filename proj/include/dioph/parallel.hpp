#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dioph {

/// Neumaier-compensated accumulator. Merging partials in a fixed order gives
/// results that do not depend on how work was scheduled.
template <typename Real>
class CompensatedSum {
 public:
  void add(Real x) {
    const Real t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.carry_);
  }
  Real value() const { return sum_ + carry_; }

 private:
  Real sum_{0};
  Real carry_{0};
};

template <typename Real>
class CompensatedSum<std::complex<Real>> {
 public:
  void add(std::complex<Real> z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  void merge(const CompensatedSum& other) {
    re_.merge(other.re_);
    im_.merge(other.im_);
  }
  std::complex<Real> value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum<Real> re_;
  CompensatedSum<Real> im_;
};

/// Evaluates `task(chunk)` for chunk = 0..chunks-1 on up to `workers`
/// threads and returns the partials in chunk order. The chunk decomposition
/// is fixed by the caller, so merged results are schedule independent.
template <typename Partial, typename Task>
std::vector<Partial> run_chunks(std::size_t chunks, unsigned workers,
                                Task&& task) {
  std::vector<Partial> partials(chunks);
  const unsigned threads = static_cast<unsigned>(
      std::max<std::size_t>(1, std::min<std::size_t>(workers, chunks)));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) partials[c] = task(c);
    return partials;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = next++; c < chunks; c = next++) {
          partials[c] = task(c);
        }
      } catch (...) {
        errors[t] = std::current_exception();
        next = chunks;
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return partials;
}

}  // namespace dioph
