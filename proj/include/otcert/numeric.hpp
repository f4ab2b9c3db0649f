#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace otcert {

/// Neumaier compensated summation. Exact enough that marginal checks at
/// 1e-12 are limited by the inputs, not by the accumulation order.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double kahan_sum(std::span<const double> xs) {
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// Radical-inverse (van der Corput) value of `index` in base `base`.
inline double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base, scale = inv, value = 0.0;
  while (index > 0) {
    value += double(index % base) * scale;
    index /= base;
    scale *= inv;
  }
  return value;
}

/// d-dimensional Halton point in [0,1)^d. Supports up to 10 dimensions,
/// which covers product neighborhoods in up to 5 ambient dimensions.
inline std::vector<double> halton_point(std::uint64_t index, int dim) {
  static constexpr unsigned primes[10] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  std::vector<double> p(dim);
  for (int d = 0; d < dim; ++d) p[d] = radical_inverse(index, primes[d % 10]);
  return p;
}

inline bool nearly_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

/// |a-b| relative to max(|a|,|b|), or absolute when both are tiny.
inline double rel_err(double a, double b) {
  double denom = std::max(std::abs(a), std::abs(b));
  if (denom < 1e-300) return 0.0;
  return std::abs(a - b) / denom;
}

}  // namespace otcert
