#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bryant {

struct RateFit {
  double exponent = 0.0;   ///< slope of log|q| against log r
  double constant = 0.0;   ///< q ~ constant * r^exponent
  double rms_residual = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  std::size_t samples = 0;

  /// q vanished at every sample; the rate is reported as -infinity.
  bool is_zero_sentinel() const { return std::isinf(exponent) && exponent < 0; }
};

/// `count` geometrically spaced points covering [lo, hi].
inline std::vector<double> geometric_samples(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) throw std::invalid_argument("geometric_samples: bad window");
  std::vector<double> r(count);
  const double ratio = std::log(hi / lo);
  for (std::size_t k = 0; k < count; ++k)
    r[k] = lo * std::exp(ratio * static_cast<double>(k) / static_cast<double>(count - 1));
  r.back() = hi;
  return r;
}

/// Least-squares fit of log|q| = log C + p log r. Zero samples are skipped; if every
/// sample is zero the fit is the -infinity sentinel.
inline RateFit fit_power_law(std::span<const double> r, std::span<const double> q,
                             std::size_t min_samples = 20) {
  if (r.size() != q.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  RateFit fit;
  if (!r.empty()) fit.window = {r.front(), r.back()};
  std::vector<double> x, y;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!std::isfinite(q[i])) throw std::domain_error("fit_power_law: non-finite sample");
    if (q[i] == 0.0) continue;
    x.push_back(std::log(r[i]));
    y.push_back(std::log(std::abs(q[i])));
  }
  if (x.empty() && !r.empty()) {
    fit.exponent = -std::numeric_limits<double>::infinity();
    fit.constant = 0.0;
    fit.samples = r.size();
    return fit;
  }
  if (x.size() < min_samples) throw std::invalid_argument("fit_power_law: too few nonzero samples");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.constant = std::exp(intercept);
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (intercept + fit.exponent * x[i]);
    ss += e * e;
  }
  fit.rms_residual = std::sqrt(ss / n);
  fit.samples = x.size();
  return fit;
}

}  // namespace bryant
