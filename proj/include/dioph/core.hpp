#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

namespace dioph {

using Int = std::int64_t;
using UInt = std::uint64_t;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using IVec = Vector<Int>;
using IMat = Matrix<Int>;
using RVec = Vector<double>;

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;

enum class ErrorKind {
  validation,   // bad input or violated precondition
  budget,       // enumeration cost above the configured ceiling
  unsupported,  // structural precondition of a fast path not met
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& operation, double required, double ceiling)
      : Error(ErrorKind::budget,
              operation + ": estimated cost " + std::to_string(required) +
                  " exceeds budget " + std::to_string(ceiling)),
        operation_(operation),
        required_(required),
        ceiling_(ceiling) {}
  const std::string& operation() const noexcept { return operation_; }
  double required() const noexcept { return required_; }
  double ceiling() const noexcept { return ceiling_; }

 private:
  std::string operation_;
  double required_;
  double ceiling_;
};

[[noreturn]] inline void fail(const std::string& what) {
  throw Error(ErrorKind::validation, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(what);
}

/// Elementary-step ceiling plus worker count shared by every enumerating
/// operation. Results never depend on `workers`.
struct ExecutionLimits {
  double budget = 1e9;
  unsigned workers = 1;

  void charge(const std::string& operation, double cost) const {
    if (!(cost <= budget)) throw BudgetExceeded(operation, cost, budget);
  }
};

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace dioph
