#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <nlohmann/json.hpp>

#include "bryant/power_series.hpp"
#include "bryant/rate_fit.hpp"
#include "bryant/sphere/quadrature.hpp"
#include "bryant/warped_soliton.hpp"

namespace bryant {

/// Per-node curvature of ds^2 + phi^2 g_round in the orthonormal frame (radial, spherical).
struct CurvatureReport {
  std::vector<double> s, f, f_prime, f_second, phi, phi_prime, phi_second;
  std::vector<double> R, R_prime, R_second;
  std::vector<double> ric_rad, ric_sph, ric_sph_prime;
  std::vector<double> sec_rad, sec_sph, ricci_norm_sq;
  std::vector<double> H;  ///< NaN where |f'| < 1e-6
  std::vector<double> lambda_principal, K_intrinsic;
  std::vector<double> T_rad, T_sph, T_rad_prime, T_sph_prime;
  std::vector<double> mu_level;

  std::size_t size() const { return s.size(); }
};

namespace detail {

/// Cubic B-spline in x = log s on a uniform log grid, differentiated back to s.
class LogSpline {
 public:
  LogSpline(const std::vector<double>& y, double x0, double h) : sp_(y.begin(), y.end(), x0, h) {}
  double d1(double s) const { return sp_.prime(std::log(s)) / s; }
  double d2(double s) const {
    const double x = std::log(s);
    return (sp_.double_prime(x) - sp_.prime(x)) / (s * s);
  }

 private:
  boost::math::interpolators::cardinal_cubic_b_spline<double> sp_;
};

inline std::pair<double, double> log_grid_spacing(const std::vector<double>& s) {
  const double x0 = std::log(s.front());
  const double h = (std::log(s.back()) - x0) / static_cast<double>(s.size() - 1);
  for (std::size_t i = 1; i < s.size(); ++i)
    if (std::abs(std::log(s[i]) - std::log(s[i - 1]) - h) > 1e-6 * h)
      throw std::invalid_argument("curvature_fields: profile grid is not uniform in log s");
  return {x0, h};
}

inline std::vector<double> derivative(const std::vector<double>& y, const std::vector<double>& s, double x0, double h,
                                      int order) {
  const LogSpline sp(y, x0, h);
  std::vector<double> d(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = order == 1 ? sp.d1(s[i]) : sp.d2(s[i]);
  return d;
}

}  // namespace detail

/// Curvature from phi, phi', f' and spline derivatives of the tabulated columns.
inline CurvatureReport curvature_fields(const SolitonProfile& p) {
  CurvatureReport r;
  r.s = p.s();
  r.f = p.f();
  r.f_prime = p.f_prime();
  r.phi = p.phi();
  r.phi_prime = p.phi_prime();
  const auto [x0, h] = detail::log_grid_spacing(r.s);
  r.phi_second = detail::derivative(r.phi_prime, r.s, x0, h, 1);
  r.f_second = detail::derivative(r.f_prime, r.s, x0, h, 1);
  const std::size_t n = r.size();
  for (auto* v : {&r.R, &r.ric_rad, &r.ric_sph, &r.sec_rad, &r.sec_sph, &r.ricci_norm_sq, &r.H, &r.lambda_principal,
                  &r.K_intrinsic, &r.T_rad, &r.T_sph, &r.mu_level})
    v->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = r.phi[i], p1 = r.phi_prime[i], p2 = r.phi_second[i], f1 = r.f_prime[i];
    r.sec_rad[i] = -p2 / phi;
    r.sec_sph[i] = (1.0 - p1 * p1) / (phi * phi);
    r.ric_rad[i] = 2.0 * r.sec_rad[i];
    r.ric_sph[i] = r.sec_rad[i] + r.sec_sph[i];
    r.R[i] = r.ric_rad[i] + 2.0 * r.ric_sph[i];
    r.ricci_norm_sq[i] = r.ric_rad[i] * r.ric_rad[i] + 2.0 * r.ric_sph[i] * r.ric_sph[i];
    r.lambda_principal[i] = p1 / phi;
    r.K_intrinsic[i] = 1.0 / (phi * phi);
    // mean curvature of {f = const}: R/|df| - Ric(df, df)/|df|^3
    r.H[i] = std::abs(f1) < 1e-6 ? std::numeric_limits<double>::quiet_NaN() : (r.R[i] - r.ric_rad[i]) / f1;
    r.T_rad[i] = 2.0 * r.ric_rad[i] - r.R[i] + r.R[i] * f1 * f1;
    r.T_sph[i] = 2.0 * r.ric_sph[i] - r.R[i];
    r.mu_level[i] = r.R[i];
  }
  r.R_prime = detail::derivative(r.R, r.s, x0, h, 1);
  r.R_second = detail::derivative(r.R, r.s, x0, h, 2);
  r.ric_sph_prime = detail::derivative(r.ric_sph, r.s, x0, h, 1);
  r.T_rad_prime = detail::derivative(r.T_rad, r.s, x0, h, 1);
  r.T_sph_prime = detail::derivative(r.T_sph, r.s, x0, h, 1);
  return r;
}

struct Window {
  double lo;
  double hi;
};

inline constexpr Window kIdentityWindow{2.0, 100.0};
inline constexpr Window kRateWindow{1e2, 1e4};

namespace detail {
template <class Fn>
double max_over_window(const CurvatureReport& r, Window w, Fn&& residual) {
  double m = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r.f[i] < w.lo || r.f[i] > w.hi) continue;
    const double v = residual(i);
    if (std::isnan(v)) continue;
    m = std::max(m, std::abs(v));
    ++used;
  }
  if (used == 0) throw std::invalid_argument("window contains no profile nodes");
  return m;
}
}  // namespace detail

/// f' R' + R'' + 2 (phi'/phi) R' + 2 |Ric|^2, i.e. -<X, grad R> - Laplacian R - 2|Ric|^2 with X = -grad f.
inline double scalar_evolution_residual(const CurvatureReport& r, std::size_t i) {
  return r.f_prime[i] * r.R_prime[i] + r.R_second[i] + 2.0 * r.lambda_principal[i] * r.R_prime[i] +
         2.0 * r.ricci_norm_sq[i];
}

inline double check_scalar_evolution(const CurvatureReport& r, Window w = kIdentityWindow) {
  return detail::max_over_window(r, w, [&](std::size_t i) { return scalar_evolution_residual(r, i); });
}

/// R' + 2 Ric_rad f'  (grad R = 2 Ric(X))
inline double check_gradient_identity(const CurvatureReport& r, Window w = kIdentityWindow) {
  return detail::max_over_window(r, w, [&](std::size_t i) { return r.R_prime[i] + 2.0 * r.ric_rad[i] * r.f_prime[i]; });
}

/// Laplacian f + |grad f|^2 - 1, with Laplacian f = f'' + 2 (phi'/phi) f'.
inline double check_trace_identity(const CurvatureReport& r, Window w = kIdentityWindow) {
  return detail::max_over_window(r, w, [&](std::size_t i) {
    const double f1 = r.f_prime[i];
    return r.f_second[i] + 2.0 * r.lambda_principal[i] * f1 + f1 * f1 - 1.0;
  });
}

/// Contractions of 2 (D_i Ric_jk - D_j Ric_ik) D^j f against the T-tensor form of the same
/// expression, in the radial-radial and spherical-spherical directions.
inline double T_radial_residual(const CurvatureReport& r, std::size_t i) {
  const double f1 = r.f_prime[i];
  return f1 * f1 * r.T_rad[i] + r.R_prime[i] * f1 + r.R[i] * r.R[i] * f1 * f1;
}

inline double T_spherical_residual(const CurvatureReport& r, std::size_t i) {
  const double f1 = r.f_prime[i];
  const double lhs = 2.0 * f1 * (r.lambda_principal[i] * (r.ric_rad[i] - r.ric_sph[i]) - r.ric_sph_prime[i]);
  return lhs - (r.T_sph[i] * f1 * f1 - r.R_prime[i] * f1);
}

enum class RateQuantity {
  fR_minus_1,
  grad_R,
  H_minus_1_over_r,
  principal_dev,
  gauss_dev,
  warp_drift,
  T_norm,
  DT_norm,
  evolution_defect,
};

inline std::string to_string(RateQuantity q) {
  switch (q) {
    case RateQuantity::fR_minus_1: return "fR_minus_1";
    case RateQuantity::grad_R: return "grad_R";
    case RateQuantity::H_minus_1_over_r: return "H_minus_1_over_r";
    case RateQuantity::principal_dev: return "principal_dev";
    case RateQuantity::gauss_dev: return "gauss_dev";
    case RateQuantity::warp_drift: return "warp_drift";
    case RateQuantity::T_norm: return "T_norm";
    case RateQuantity::DT_norm: return "DT_norm";
    case RateQuantity::evolution_defect: return "evolution_defect";
  }
  return "unknown";
}

inline const std::vector<RateQuantity>& all_rate_quantities() {
  static const std::vector<RateQuantity> q{
      RateQuantity::fR_minus_1,  RateQuantity::grad_R, RateQuantity::H_minus_1_over_r,
      RateQuantity::principal_dev, RateQuantity::gauss_dev, RateQuantity::warp_drift,
      RateQuantity::T_norm,      RateQuantity::DT_norm, RateQuantity::evolution_defect};
  return q;
}

/// Exponent bound asserted for each quantity (fitted exponent must not exceed it plus slack).
inline std::optional<double> rate_bound(RateQuantity q) {
  switch (q) {
    case RateQuantity::fR_minus_1: return -0.25;
    case RateQuantity::grad_R: return -1.75;
    case RateQuantity::principal_dev: return -1.25;
    case RateQuantity::gauss_dev: return -1.25;
    case RateQuantity::warp_drift: return -1.125;
    case RateQuantity::T_norm: return -1.5;
    case RateQuantity::DT_norm: return -2.0;
    case RateQuantity::evolution_defect: return -2.25;
    case RateQuantity::H_minus_1_over_r: return std::nullopt;
  }
  return std::nullopt;
}

inline constexpr double kRateSlack = 0.05;

/// Pointwise value of a rate quantity at node i (r = f there).
inline double rate_quantity(const CurvatureReport& rep, RateQuantity q, std::size_t i) {
  const double r = rep.f[i];
  switch (q) {
    case RateQuantity::fR_minus_1: return std::abs(r * rep.R[i] - 1.0);
    case RateQuantity::grad_R: return std::abs(rep.R_prime[i]) * std::max(1.0, rep.f_prime[i]);
    case RateQuantity::H_minus_1_over_r: return std::abs(rep.H[i] - 1.0 / r);
    case RateQuantity::principal_dev: return std::abs(rep.lambda_principal[i] - 0.5 / r);
    case RateQuantity::gauss_dev: return std::abs(rep.K_intrinsic[i] - 0.5 / r);
    case RateQuantity::warp_drift: {
      // d/dr (phi^2 / 2r) along the level sets, dr = f' ds
      const double phi = rep.phi[i];
      return std::abs(phi * rep.phi_prime[i] / (r * rep.f_prime[i]) - phi * phi / (2.0 * r * r));
    }
    case RateQuantity::T_norm: return std::hypot(rep.T_rad[i], std::sqrt(2.0) * rep.T_sph[i]);
    case RateQuantity::DT_norm: return std::hypot(rep.T_rad_prime[i], std::sqrt(2.0) * rep.T_sph_prime[i]);
    case RateQuantity::evolution_defect: return std::abs(rep.f_prime[i] * rep.R_prime[i] + rep.R[i] * rep.R[i]);
  }
  throw std::invalid_argument("rate_quantity: unknown quantity");
}

/// Four-point Lagrange interpolation in f of a per-node function.
template <class Fn>
double at_level(const CurvatureReport& rep, double r, Fn&& value) {
  const auto& f = rep.f;
  if (!(r >= f.front() && r <= f.back())) throw std::out_of_range("at_level: level outside the profile");
  std::size_t i = static_cast<std::size_t>(std::upper_bound(f.begin(), f.end(), r) - f.begin());
  i = std::clamp<std::size_t>(i, 2, f.size() - 2);
  const std::size_t j0 = i - 2;
  double acc = 0.0;
  for (std::size_t a = j0; a < j0 + 4; ++a) {
    double w = 1.0;
    for (std::size_t b = j0; b < j0 + 4; ++b)
      if (b != a) w *= (r - f[b]) / (f[a] - f[b]);
    acc += w * value(a);
  }
  return acc;
}

inline RateFit fit_asymptotic_rate(const CurvatureReport& rep, RateQuantity q, Window w = kRateWindow,
                                   std::size_t samples = 40) {
  if (w.lo < 1e2) throw std::invalid_argument("fit_asymptotic_rate: window must start at r >= 100");
  if (w.hi > rep.f.back()) throw std::invalid_argument("fit_asymptotic_rate: window exceeds the profile");
  const auto r = geometric_samples(w.lo, w.hi, samples);
  std::vector<double> v(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) v[k] = at_level(rep, r[k], [&](std::size_t i) { return rate_quantity(rep, q, i); });
  return fit_power_law(r, v);
}

// T identity and level-set geometry.

struct TIdentityResult {
  double radial;
  double spherical;
  RateFit T_fit;
  RateFit DT_fit;
};

inline TIdentityResult check_T_identity(const CurvatureReport& r, Window w = kIdentityWindow, Window rates = kRateWindow) {
  return {detail::max_over_window(r, w, [&](std::size_t i) { return T_radial_residual(r, i); }),
          detail::max_over_window(r, w, [&](std::size_t i) { return T_spherical_residual(r, i); }),
          fit_asymptotic_rate(r, RateQuantity::T_norm, rates), fit_asymptotic_rate(r, RateQuantity::DT_norm, rates)};
}

struct LevelSetResult {
  double gauss_frame;    ///< K - sec_sph - lambda^2 with lambda = phi'/phi (surface of revolution)
  double gauss_soliton;  ///< same with lambda = Ric_sph / f' read off the soliton equation
  double h_formula;      ///< (R - Ric_rad)/f' - 2 phi'/phi
};

inline LevelSetResult check_level_set_geometry(const CurvatureReport& r, Window w = kIdentityWindow) {
  LevelSetResult out{};
  out.gauss_frame = detail::max_over_window(r, w, [&](std::size_t i) {
    const double lam = r.lambda_principal[i];
    return r.K_intrinsic[i] - r.sec_sph[i] - lam * lam;
  });
  out.gauss_soliton = detail::max_over_window(r, w, [&](std::size_t i) {
    if (std::abs(r.f_prime[i]) < 1e-6) return std::numeric_limits<double>::quiet_NaN();
    const double lam = r.ric_sph[i] / r.f_prime[i];
    return r.K_intrinsic[i] - r.sec_sph[i] - lam * lam;
  });
  out.h_formula = detail::max_over_window(r, w, [&](std::size_t i) { return r.H[i] - 2.0 * r.lambda_principal[i]; });
  return out;
}

// Tip limits from the series.

struct TipLimits {
  double sec_rad;
  double sec_sph;
  double R0;
  double R2;                 ///< R = R0 + R2 s^2 + ...
  double evolution_lhs;      ///< -<X, grad R> at the tip
  double evolution_rhs;      ///< Laplacian R + 2|Ric|^2 at the tip
  double gradient_lhs;       ///< R'(0)
  double gradient_rhs;       ///< -2 Ric_rad f'(0)
};

inline TipLimits tip_limits(const TipExpansion& e) {
  const std::size_t n = e.phi_coeffs.size() + 2;
  const PowerSeries phi = e.phi_series(n), f1 = e.f_series(n).derivative();
  const PowerSeries phi_over_s = phi.divide_by_power(1);
  const PowerSeries phi1 = phi.derivative(), phi2 = phi1.derivative();
  const PowerSeries sec_rad = -1.0 * phi2.divide_by_power(1).divided_by(phi_over_s);
  const PowerSeries one_minus = PowerSeries::constant(1.0, n) - phi1 * phi1;
  const PowerSeries sec_sph = one_minus.divide_by_power(2, 1e-12).divided_by(phi_over_s * phi_over_s);
  const PowerSeries R = 4.0 * sec_rad + 2.0 * sec_sph;
  TipLimits t{};
  t.sec_rad = sec_rad[0];
  t.sec_sph = sec_sph[0];
  t.R0 = R[0];
  t.R2 = R[2];
  const double ric = 2.0 * t.sec_rad;  // all Ricci eigenvalues coincide at the tip
  t.evolution_lhs = -f1[0] * R.derivative()[0];
  // Laplacian of R = R'' + 2 (phi'/phi) R' -> 3 R''(0) = 6 R2
  t.evolution_rhs = 6.0 * t.R2 + 2.0 * 3.0 * ric * ric;
  t.gradient_lhs = R.derivative()[0];
  t.gradient_rhs = -2.0 * ric * f1[0];
  return t;
}

// Roundness of R on level sets.

/// Shifted level-set mean and the two roundness measures at f = r, sampled on a sphere rule.
struct Roundness {
  double mu;
  double l2;   ///< integral of (R - mu)^2 over the unit-sphere rule
  double sup;  ///< max |R - mu|
};

inline Roundness roundness_at(const CurvatureReport& rep, double r, const sphere::SphereQuadrature& q) {
  // R depends on the radial coordinate only; every node of {f = r} sees the same value.
  std::vector<double> values(q.size(), at_level(rep, r, [&](std::size_t i) { return rep.R[i]; }));
  const double base = values.front();
  double sw = 0.0, sv = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    sw += q.weights[i];
    sv += q.weights[i] * (values[i] - base);
  }
  Roundness out{base + sv / sw, 0.0, 0.0};
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double d = values[i] - out.mu;
    out.l2 += q.weights[i] * d * d;
    out.sup = std::max(out.sup, std::abs(d));
  }
  return out;
}

inline RateFit fit_roundness(const CurvatureReport& rep, bool sup_norm, Window w = kRateWindow, std::size_t samples = 40) {
  const auto q = sphere::product_rule(8);
  const auto r = geometric_samples(w.lo, w.hi, samples);
  std::vector<double> v(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    const auto rd = roundness_at(rep, r[k], q);
    v[k] = sup_norm ? rd.sup : rd.l2;
  }
  return fit_power_law(r, v);
}

// Corruption helper for detector sensitivity checks.

enum class ProfileColumn { phi, phi_prime, f, f_prime };

inline SolitonProfile with_scaled_column(const SolitonProfile& p, ProfileColumn c, double factor) {
  auto phi = p.phi(), phi1 = p.phi_prime(), f = p.f(), f1 = p.f_prime();
  auto& col = c == ProfileColumn::phi ? phi : c == ProfileColumn::phi_prime ? phi1 : c == ProfileColumn::f ? f : f1;
  for (double& v : col) v *= factor;
  return SolitonProfile(p.s(), phi, phi1, f, f1, p.settings());
}

/// phi replaced by factor * phi as a function, so phi' is scaled too.
inline SolitonProfile with_scaled_warping(const SolitonProfile& p, double factor) {
  return with_scaled_column(with_scaled_column(p, ProfileColumn::phi, factor), ProfileColumn::phi_prime, factor);
}

// Reports.

struct CheckRecord {
  std::string check;
  Window window;
  double value;
  double threshold;
  bool pass;
};

inline nlohmann::json to_json(const CheckRecord& c) {
  return {{"check", c.check}, {"window", {c.window.lo, c.window.hi}}, {"value", c.value}, {"threshold", c.threshold},
          {"pass", c.pass}};
}

inline void write_check_csv(const std::vector<CheckRecord>& records, std::ostream& out) {
  out << "check,window_lo,window_hi,value,threshold,pass\n";
  out.precision(17);
  for (const auto& c : records)
    out << c.check << ',' << c.window.lo << ',' << c.window.hi << ',' << c.value << ',' << c.threshold << ','
        << (c.pass ? "true" : "false") << '\n';
}

inline constexpr double kIdentityThreshold = 1e-6;
inline constexpr double kCorruptionThreshold = 1e-3;
inline constexpr double kGaussFrameThreshold = 1e-8;

/// Residual checks on the identity window, each against its threshold.
inline std::vector<CheckRecord> identity_records(const CurvatureReport& r, Window w = kIdentityWindow) {
  std::vector<CheckRecord> out;
  auto add = [&](std::string name, double v, double thr) { out.push_back({std::move(name), w, v, thr, v <= thr}); };
  add("scalar_evolution", check_scalar_evolution(r, w), kIdentityThreshold);
  add("gradient_identity", check_gradient_identity(r, w), kIdentityThreshold);
  add("trace_identity", check_trace_identity(r, w), kIdentityThreshold);
  add("T_identity_radial", detail::max_over_window(r, w, [&](std::size_t i) { return T_radial_residual(r, i); }),
      kIdentityThreshold);
  add("T_identity_spherical", detail::max_over_window(r, w, [&](std::size_t i) { return T_spherical_residual(r, i); }),
      kIdentityThreshold);
  const auto g = check_level_set_geometry(r, w);
  add("gauss_equation_frame", g.gauss_frame, kGaussFrameThreshold);
  add("gauss_equation_soliton", g.gauss_soliton, kIdentityThreshold);
  add("mean_curvature_formula", g.h_formula, kIdentityThreshold);
  return out;
}

/// Detector sensitivity: every identity except the frame form of the Gauss equation (an algebraic
/// tautology) must exceed 1e-3 under a 1% change of phi. The phi column alone and phi as a
/// function are both tried; the trace identity depends only on phi'/phi and is blind to the latter.
inline std::vector<CheckRecord> corruption_records(const SolitonProfile& p, Window w = kIdentityWindow,
                                                   double factor = 1.01) {
  const auto column = identity_records(curvature_fields(with_scaled_column(p, ProfileColumn::phi, factor)), w);
  const auto function = identity_records(curvature_fields(with_scaled_warping(p, factor)), w);
  std::vector<CheckRecord> out;
  for (std::size_t k = 0; k < column.size(); ++k) {
    if (column[k].check == "gauss_equation_frame") continue;
    const double v = std::max(column[k].value, function[k].value);
    out.push_back({column[k].check + "_corrupted", w, v, kCorruptionThreshold, v >= kCorruptionThreshold});
  }
  return out;
}

/// Fitted exponents on the rate window; quantities without an asserted bound report threshold +inf.
inline std::vector<CheckRecord> rate_records(const CurvatureReport& r, Window w = kRateWindow) {
  std::vector<CheckRecord> out;
  for (RateQuantity q : all_rate_quantities()) {
    const RateFit fit = fit_asymptotic_rate(r, q, w);
    const auto bound = rate_bound(q);
    const double thr = bound ? *bound + kRateSlack : std::numeric_limits<double>::infinity();
    out.push_back({to_string(q), w, fit.exponent, thr, fit.exponent <= thr});
  }
  return out;
}

}  // namespace bryant
