#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hofa {

using cplx = std::complex<double>;

// Malformed or mismatched inputs (wrong group, bad dimensions, broken
// tables). The CLI maps this to exit code 2.
class structural_error : public std::runtime_error {
 public:
  explicit structural_error(const std::string& what)
      : std::runtime_error(what) {}
};

// An exhaustive enumeration would exceed the configured cap. Exit code 3.
class budget_error : public std::runtime_error {
 public:
  explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

// A certified computation failed its own guarantee (retry exhaustion,
// certification mismatch). Exit code 4.
class invariant_error : public std::runtime_error {
 public:
  explicit invariant_error(const std::string& what)
      : std::runtime_error(what) {}
};

// e(y) = exp(2 pi i y)
inline cplx unit_phase(double y) {
  const double a = 2.0 * std::numbers::pi * y;
  return {std::cos(a), std::sin(a)};
}

inline double sqr(double x) { return x * x; }

// Neumaier-compensated running sum. The summation order is fixed by the
// caller and must not depend on thread count or input layout.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class KahanCSum {
 public:
  void add(cplx z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  cplx value() const { return {re_.value(), im_.value()}; }

 private:
  KahanSum re_;
  KahanSum im_;
};

// Enumeration budget shared by all exhaustive evaluators. The default cap
// of 1e8 index tuples keeps every exact path at desk scale.
struct Budget {
  std::uint64_t cap = 100'000'000ULL;

  static constexpr std::uint64_t kUnbounded =
      std::numeric_limits<std::uint64_t>::max();

  // base^exp, saturating at kUnbounded instead of wrapping.
  static std::uint64_t pow_saturating(std::uint64_t base, unsigned exp) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < exp; ++i) {
      if (base != 0 && r > kUnbounded / base) return kUnbounded;
      r *= base;
    }
    return r;
  }

  void require(std::uint64_t work, const char* what) const {
    if (work > cap) {
      throw budget_error(std::string(what) + ": enumeration size " +
                         (work == kUnbounded ? std::string("overflow")
                                             : std::to_string(work)) +
                         " exceeds budget cap " + std::to_string(cap));
    }
  }
};

}  // namespace hofa
