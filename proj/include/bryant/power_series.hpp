#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bryant {

/// Truncated power series sum_k c_k s^k, kept to a fixed number of terms.
class PowerSeries {
public:
  PowerSeries() = default;
  explicit PowerSeries(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  static PowerSeries constant(double v, std::size_t terms) {
    std::vector<double> c(terms, 0.0);
    if (terms > 0) c[0] = v;
    return PowerSeries(std::move(c));
  }

  std::size_t terms() const { return c_.size(); }
  double operator[](std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
  double& operator[](std::size_t k) { return c_.at(k); }
  const std::vector<double>& coeffs() const { return c_; }

  double operator()(double s) const {
    double acc = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) acc = acc * s + c_[k];
    return acc;
  }

  PowerSeries derivative() const {
    std::vector<double> d(c_.size(), 0.0);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return PowerSeries(std::move(d));
  }

  /// Exact division by s^k; the k leading coefficients must vanish.
  PowerSeries divide_by_power(std::size_t k, double zero_tol = 1e-14) const {
    for (std::size_t i = 0; i < std::min(k, c_.size()); ++i)
      if (std::abs(c_[i]) > zero_tol) throw std::domain_error("PowerSeries: nonzero leading coefficient");
    std::vector<double> d(c_.size(), 0.0);
    for (std::size_t i = k; i < c_.size(); ++i) d[i - k] = c_[i];
    return PowerSeries(std::move(d));
  }

  /// Series quotient; the divisor needs a nonzero constant term.
  PowerSeries divided_by(const PowerSeries& den) const {
    if (den[0] == 0.0) throw std::domain_error("PowerSeries: divisor has zero constant term");
    const std::size_t n = std::min(c_.size(), den.terms());
    std::vector<double> q(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      double acc = c_[k];
      for (std::size_t j = 1; j <= k; ++j) acc -= den[j] * q[k - j];
      q[k] = acc / den[0];
    }
    return PowerSeries(std::move(q));
  }

  friend PowerSeries operator+(const PowerSeries& a, const PowerSeries& b) {
    const std::size_t n = std::min(a.terms(), b.terms());
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = a[k] + b[k];
    return PowerSeries(std::move(r));
  }
  friend PowerSeries operator-(const PowerSeries& a, const PowerSeries& b) {
    const std::size_t n = std::min(a.terms(), b.terms());
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = a[k] - b[k];
    return PowerSeries(std::move(r));
  }
  friend PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
    const std::size_t n = std::min(a.terms(), b.terms());
    std::vector<double> r(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; i + j < n; ++j) r[i + j] += a[i] * b[j];
    return PowerSeries(std::move(r));
  }
  friend PowerSeries operator*(double a, const PowerSeries& b) {
    std::vector<double> r(b.coeffs());
    for (double& v : r) v *= a;
    return PowerSeries(std::move(r));
  }

private:
  std::vector<double> c_;
};

}  // namespace bryant
