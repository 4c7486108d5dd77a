#pragma once

// Rotationally symmetric steady gradient Ricci soliton g = ds^2 + phi(s)^2 g_{S^2}
// with Ric = D^2 f, normalized so that R + |grad f|^2 = 1 and f = 1 at the tip.
//
// Reduced system (orthonormal frame, radial / spherical components):
//   phi'' = (1 - phi'^2 - phi phi' f') / phi
//   f''   = -2 phi'' / phi

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include "bryant/power_series.hpp"

namespace bryant {

class IntegrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ProfileFormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Tip expansion
// ---------------------------------------------------------------------------

struct TipExpansion {
  int order = 0;
  std::vector<double> phi_coeffs;  ///< indexed by power of s; odd powers only
  std::vector<double> f_coeffs;    ///< indexed by power of s; even powers only
  double f0 = 1.0;

  PowerSeries phi_series(std::size_t terms) const { return padded(phi_coeffs, terms); }
  PowerSeries f_series(std::size_t terms) const { return padded(f_coeffs, terms); }

  double phi(double s) const { return PowerSeries(phi_coeffs)(s); }
  double phi_prime(double s) const { return PowerSeries(phi_coeffs).derivative()(s); }
  double f(double s) const { return PowerSeries(f_coeffs)(s); }
  double f_prime(double s) const { return PowerSeries(f_coeffs).derivative()(s); }

  double a(int power) const { return coeff(phi_coeffs, power); }
  double b(int power) const { return coeff(f_coeffs, power); }

  /// Max of the two ODE residuals of the truncated polynomials at s.
  double ode_residual(double s) const {
    const PowerSeries p(phi_coeffs), q(f_coeffs);
    const double ph = p(s), ph1 = p.derivative()(s), ph2 = p.derivative().derivative()(s);
    const double f1 = q.derivative()(s), f2 = q.derivative().derivative()(s);
    const double e1 = ph * ph2 - (1.0 - ph1 * ph1 - ph * ph1 * f1);
    const double e2 = ph * f2 + 2.0 * ph2;
    return std::max(std::abs(e1), std::abs(e2));
  }

private:
  static double coeff(const std::vector<double>& c, int power) {
    return power >= 0 && static_cast<std::size_t>(power) < c.size() ? c[power] : 0.0;
  }
  static PowerSeries padded(const std::vector<double>& c, std::size_t terms) {
    std::vector<double> v(terms, 0.0);
    std::copy_n(c.begin(), std::min(terms, c.size()), v.begin());
    return PowerSeries(std::move(v));
  }
};

namespace detail {

// Coefficients of the two soliton ODE residuals as truncated series.
inline std::pair<PowerSeries, PowerSeries> soliton_residual_series(const TipExpansion& e,
                                                                   std::size_t terms) {
  const PowerSeries phi = e.phi_series(terms);
  const PowerSeries f = e.f_series(terms);
  const PowerSeries phi1 = phi.derivative(), phi2 = phi1.derivative();
  const PowerSeries f1 = f.derivative(), f2 = f1.derivative();
  const PowerSeries one = PowerSeries::constant(1.0, terms);
  const PowerSeries e1 = phi * phi2 - (one - phi1 * phi1 - phi * phi1 * f1);
  const PowerSeries e2 = phi * f2 + 2.0 * phi2;
  return {e1, e2};
}

}  // namespace detail

/// Series solution at the tip, normalized by R(0) = 1 and f(0) = 1.
inline TipExpansion tip_series(int order) {
  if (order < 3) throw std::invalid_argument("tip_series: order must be >= 3");
  TipExpansion e;
  e.order = order;
  e.phi_coeffs.assign(order + 1, 0.0);
  e.f_coeffs.assign(order + 1, 0.0);
  e.f0 = 1.0;
  e.f_coeffs[0] = 1.0;
  e.phi_coeffs[1] = 1.0;
  // The s^2 balance leaves one free parameter (scaling): 12 a3 + 2 b2 = 0.
  // R(0) = 6 * sectional curvature = -36 a3 = 1 fixes it.
  e.phi_coeffs[3] = -1.0 / 36.0;
  e.f_coeffs[2] = 1.0 / 6.0;

  const std::size_t terms = static_cast<std::size_t>(order) + 3;
  for (int k = 2; 2 * k + 1 <= order; ++k) {
    const int pa = 2 * k + 1, pb = 2 * k;
    // Residual is affine in the new pair (a, b) at orders s^{2k} and s^{2k-1}.
    auto probe = [&](double a, double b) {
      e.phi_coeffs[pa] = a;
      e.f_coeffs[pb] = b;
      auto [r1, r2] = detail::soliton_residual_series(e, terms);
      return std::array<double, 2>{r1[2 * k], r2[2 * k - 1]};
    };
    const auto r0 = probe(0.0, 0.0);
    const auto ra = probe(1.0, 0.0);
    const auto rb = probe(0.0, 1.0);
    const double m11 = ra[0] - r0[0], m12 = rb[0] - r0[0];
    const double m21 = ra[1] - r0[1], m22 = rb[1] - r0[1];
    const double det = m11 * m22 - m12 * m21;
    if (det == 0.0) throw std::logic_error("tip_series: singular recursion");
    e.phi_coeffs[pa] = (-r0[0] * m22 + r0[1] * m12) / det;
    e.f_coeffs[pb] = (-r0[1] * m11 + r0[0] * m21) / det;
  }
  return e;
}

// ---------------------------------------------------------------------------
// Profile
// ---------------------------------------------------------------------------

struct ProfileSettings {
  double s_start = 1e-2;
  double s_max = 2e4;
  double tolerance = 1e-10;
  int series_order = 9;
  int nodes_per_decade = 1000;
};

/// Radial samples of the soliton. Immutable once built.
class SolitonProfile {
public:
  SolitonProfile(std::vector<double> s, std::vector<double> phi, std::vector<double> phi_prime,
                 std::vector<double> f, std::vector<double> f_prime, ProfileSettings settings)
      : s_(std::move(s)), phi_(std::move(phi)), phi_prime_(std::move(phi_prime)), f_(std::move(f)),
        f_prime_(std::move(f_prime)), settings_(settings), tip_(tip_series(settings.series_order)) {
    const std::size_t n = s_.size();
    if (n < 8) throw ProfileFormatError("profile: need at least 8 nodes");
    if (phi_.size() != n || phi_prime_.size() != n || f_.size() != n || f_prime_.size() != n)
      throw ProfileFormatError("profile: column length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s_[i]) || !std::isfinite(phi_[i]) || !std::isfinite(phi_prime_[i]) ||
          !std::isfinite(f_[i]) || !std::isfinite(f_prime_[i]))
        throw ProfileFormatError("profile: non-finite value at row " + std::to_string(i));
      if (i > 0 && !(s_[i] > s_[i - 1])) throw ProfileFormatError("profile: s not strictly increasing");
      if (!(phi_[i] > 0.0)) throw ProfileFormatError("profile: phi must be positive");
    }
  }

  std::size_t size() const { return s_.size(); }
  const std::vector<double>& s() const { return s_; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<double>& phi_prime() const { return phi_prime_; }
  const std::vector<double>& f() const { return f_; }
  const std::vector<double>& f_prime() const { return f_prime_; }
  const ProfileSettings& settings() const { return settings_; }
  double integrator_tolerance() const { return settings_.tolerance; }
  const TipExpansion& tip() const { return tip_; }

  /// phi'' from the reduced ODE at node i.
  double phi_second_ode(std::size_t i) const {
    return (1.0 - phi_prime_[i] * phi_prime_[i] - phi_[i] * phi_prime_[i] * f_prime_[i]) / phi_[i];
  }
  double f_second_ode(std::size_t i) const { return -2.0 * phi_second_ode(i) / phi_[i]; }

  /// R evaluated from the state through the ODE (integrator monitor).
  double scalar_curvature_ode(std::size_t i) const {
    const double p = phi_[i], p1 = phi_prime_[i];
    return -4.0 * phi_second_ode(i) / p + 2.0 * (1.0 - p1 * p1) / (p * p);
  }

  double first_integral_residual(std::size_t i) const {
    return scalar_curvature_ode(i) + f_prime_[i] * f_prime_[i] - 1.0;
  }

  double first_integral_drift() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m = std::max(m, std::abs(first_integral_residual(i)));
    return m;
  }

private:
  std::vector<double> s_, phi_, phi_prime_, f_, f_prime_;
  ProfileSettings settings_;
  TipExpansion tip_;
};

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

/// Allowed |R + f'^2 - 1|: 10 * tolerance, but never below the rounding floor of
/// (1 - phi'^2) / phi^2 at the first node.
inline double first_integral_bound(const ProfileSettings& cfg) {
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() / (cfg.s_start * cfg.s_start);
  return std::max(10.0 * cfg.tolerance, floor);
}

/// Log-uniform node placement from s_start to s_max (both included).
inline std::vector<double> log_uniform_grid(double s_start, double s_max, int nodes_per_decade) {
  const double span = std::log(s_max / s_start);
  const auto intervals =
      static_cast<std::size_t>(std::ceil(span / (std::log(10.0) / nodes_per_decade)));
  std::vector<double> s(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k)
    s[k] = s_start * std::exp(span * static_cast<double>(k) / static_cast<double>(intervals));
  s.front() = s_start;
  s.back() = s_max;
  return s;
}

inline SolitonProfile integrate_profile(const TipExpansion& expansion, const ProfileSettings& cfg) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 4>;  // phi, phi', f, f'

  if (!(cfg.s_start > 0.0 && cfg.s_start < cfg.s_max))
    throw std::invalid_argument("integrate_profile: need 0 < s_start < s_max");
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("integrate_profile: tolerance must be positive");
  if (cfg.nodes_per_decade < 10) throw std::invalid_argument("integrate_profile: nodes_per_decade < 10");
  if (expansion.order != cfg.series_order)
    throw std::invalid_argument("integrate_profile: expansion order differs from settings");
  // Residual terms scale like s^2 near the tip; 1 - phi'^2 sets a rounding floor.
  const double series_bound =
      cfg.tolerance * cfg.s_start * cfg.s_start + 16.0 * std::numeric_limits<double>::epsilon();
  if (expansion.ode_residual(cfg.s_start) > series_bound)
    throw std::invalid_argument("integrate_profile: series not accurate at s_start; raise the order");

  const std::vector<double> grid = log_uniform_grid(cfg.s_start, cfg.s_max, cfg.nodes_per_decade);

  auto rhs = [](const State& y, State& dy, double) {
    const double phi = y[0], p1 = y[1], f1 = y[3];
    if (!(phi > 0.0)) throw IntegrationError("integrate_profile: phi <= 0 encountered");
    const double p2 = (1.0 - p1 * p1 - phi * p1 * f1) / phi;
    dy[0] = p1;
    dy[1] = p2;
    dy[2] = f1;
    dy[3] = -2.0 * p2 / phi;
  };

  State y{expansion.phi(cfg.s_start), expansion.phi_prime(cfg.s_start), expansion.f(cfg.s_start),
          expansion.f_prime(cfg.s_start)};

  std::vector<double> s, phi, phi1, f, f1;
  s.reserve(grid.size());
  phi.reserve(grid.size());
  phi1.reserve(grid.size());
  f.reserve(grid.size());
  f1.reserve(grid.size());
  auto observe = [&](const State& x, double t) {
    s.push_back(t);
    phi.push_back(x[0]);
    phi1.push_back(x[1]);
    f.push_back(x[2]);
    f1.push_back(x[3]);
  };

  auto stepper = odeint::make_controlled(cfg.tolerance, cfg.tolerance, odeint::runge_kutta_dopri5<State>());
  const double dt0 = 1e-3 * cfg.s_start;
  try {
    odeint::integrate_times(stepper, rhs, y, grid.begin(), grid.end(), dt0, observe,
                            odeint::max_step_checker(100000));
  } catch (const odeint::no_progress_error& e) {
    throw IntegrationError(std::string("integrate_profile: step-size underflow: ") + e.what());
  } catch (const odeint::step_adjustment_error& e) {
    throw IntegrationError(std::string("integrate_profile: step-size underflow: ") + e.what());
  }
  if (s.size() != grid.size()) throw IntegrationError("integrate_profile: integration stopped early");
  s = grid;  // observer times equal the grid; keep the exact values

  SolitonProfile profile(std::move(s), std::move(phi), std::move(phi1), std::move(f), std::move(f1), cfg);
  const double drift = profile.first_integral_drift();
  if (!(drift <= first_integral_bound(cfg)))
    throw IntegrationError("integrate_profile: first integral drift " + std::to_string(drift) +
                           " exceeds bound " + std::to_string(first_integral_bound(cfg)));
  return profile;
}

inline SolitonProfile integrate_profile(const ProfileSettings& cfg) {
  return integrate_profile(tip_series(cfg.series_order), cfg);
}

// ---------------------------------------------------------------------------
// Level sets {f = r}
// ---------------------------------------------------------------------------

struct LevelSetPoint {
  double s = 0.0;
  double phi = 0.0;
  double phi_prime = 0.0;
  double f_prime = 0.0;
};

namespace detail {

struct Hermite {
  // cubic Hermite on [0, h] with t = x / h
  static double value(double y0, double y1, double d0, double d1, double h, double t) {
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * h * d1;
  }
  static double slope(double y0, double y1, double d0, double d1, double h, double t) {
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * y1 +
            (3 * t2 - 2 * t) * h * d1) /
           h;
  }
};

}  // namespace detail

/// Point on the level set {f = r}. Below the first node the tip series is inverted.
inline LevelSetPoint level_set_lookup(const SolitonProfile& p, double r) {
  const double tol = p.integrator_tolerance();
  const auto& f = p.f();
  const TipExpansion& tip = p.tip();
  if (!(r >= tip.f0) || r > f.back() + tol)
    throw std::out_of_range("level_set_lookup: r outside [f0, f(s_max)]");

  if (r <= f.front()) {
    if (r == tip.f0) return {0.0, 0.0, 1.0, 0.0};
    // f(s) = 1 + b2 s^2 + ... is increasing on [0, s_start]
    double lo = 0.0, hi = p.s().front();
    double s = std::min(hi, std::sqrt((r - tip.f0) / tip.b(2)));
    for (int it = 0; it < 100; ++it) {
      const double g = tip.f(s) - r;
      if (std::abs(g) <= 0.1 * tol) break;
      (g > 0 ? hi : lo) = s;
      const double d = tip.f_prime(s);
      double next = d > 0 ? s - g / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      s = next;
    }
    return {s, tip.phi(s), tip.phi_prime(s), tip.f_prime(s)};
  }

  const std::size_t n = p.size();
  std::size_t i = static_cast<std::size_t>(std::upper_bound(f.begin(), f.end(), r) - f.begin());
  if (i >= n) return {p.s()[n - 1], p.phi()[n - 1], p.phi_prime()[n - 1], p.f_prime()[n - 1]};
  i = i - 1;  // f[i] <= r < f[i+1]
  const double h = p.s()[i + 1] - p.s()[i];
  auto f_at = [&](double t) {
    return detail::Hermite::value(f[i], f[i + 1], p.f_prime()[i], p.f_prime()[i + 1], h, t);
  };
  double lo = 0.0, hi = 1.0, t = (r - f[i]) / (f[i + 1] - f[i]);
  for (int it = 0; it < 100; ++it) {
    const double g = f_at(t) - r;
    if (std::abs(g) <= 0.1 * tol) break;
    (g > 0 ? hi : lo) = t;
    const double d = detail::Hermite::slope(f[i], f[i + 1], p.f_prime()[i], p.f_prime()[i + 1], h, t) * h;
    double next = d > 0 ? t - g / d : 0.5 * (lo + hi);
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-16) break;
    t = next;
  }
  LevelSetPoint out;
  out.s = p.s()[i] + t * h;
  out.phi = detail::Hermite::value(p.phi()[i], p.phi()[i + 1], p.phi_prime()[i], p.phi_prime()[i + 1], h, t);
  out.phi_prime = detail::Hermite::value(p.phi_prime()[i], p.phi_prime()[i + 1], p.phi_second_ode(i),
                                         p.phi_second_ode(i + 1), h, t);
  out.f_prime = detail::Hermite::value(p.f_prime()[i], p.f_prime()[i + 1], p.f_second_ode(i),
                                       p.f_second_ode(i + 1), h, t);
  return out;
}

// ---------------------------------------------------------------------------
// CSV + JSON sidecar
// ---------------------------------------------------------------------------

inline constexpr const char* kProfileHeader = "s,phi,phi_prime,f,f_prime";

inline std::filesystem::path metadata_path(const std::filesystem::path& csv) {
  std::filesystem::path m = csv;
  m.replace_extension(".meta.json");
  return m;
}

inline nlohmann::json profile_metadata(const SolitonProfile& p) {
  const auto& c = p.settings();
  return {{"tolerance", c.tolerance},
          {"s_start", c.s_start},
          {"s_max", c.s_max},
          {"series_order", c.series_order},
          {"nodes_per_decade", c.nodes_per_decade},
          {"first_integral_drift", p.first_integral_drift()},
          {"nodes", p.size()}};
}

inline void write_profile_csv(const SolitonProfile& p, std::ostream& out) {
  out << kProfileHeader << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < p.size(); ++i)
    out << p.s()[i] << ',' << p.phi()[i] << ',' << p.phi_prime()[i] << ',' << p.f()[i] << ','
        << p.f_prime()[i] << '\n';
}

/// Writes `path` and the metadata sidecar; `extra` is merged into the sidecar.
inline void save_profile(const SolitonProfile& p, const std::filesystem::path& path,
                         const nlohmann::json& extra = nlohmann::json::object()) {
  std::ofstream csv(path);
  if (!csv) throw std::runtime_error("cannot write " + path.string());
  write_profile_csv(p, csv);
  nlohmann::json meta = profile_metadata(p);
  meta.update(extra);
  std::ofstream js(metadata_path(path));
  if (!js) throw std::runtime_error("cannot write " + metadata_path(path).string());
  js << meta.dump(2) << '\n';
}

inline SolitonProfile read_profile_csv(std::istream& in, const ProfileSettings& settings) {
  std::string line;
  if (!std::getline(in, line)) throw ProfileFormatError("profile: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kProfileHeader) throw ProfileFormatError("profile: bad header '" + line + "'");
  std::array<std::vector<double>, 5> cols;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= 5) throw ProfileFormatError("profile: too many columns at row " + std::to_string(row));
      try {
        std::size_t used = 0;
        cols[c].push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::logic_error&) {
        throw ProfileFormatError("profile: bad number at row " + std::to_string(row));
      }
      ++c;
    }
    if (c != 5) throw ProfileFormatError("profile: expected 5 columns at row " + std::to_string(row));
  }
  return SolitonProfile(std::move(cols[0]), std::move(cols[1]), std::move(cols[2]), std::move(cols[3]),
                        std::move(cols[4]), settings);
}

/// Reads a profile CSV; settings come from the sidecar when present.
inline SolitonProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProfileFormatError("cannot open profile " + path.string());
  ProfileSettings settings;
  if (std::ifstream js(metadata_path(path)); js) {
    try {
      const auto meta = nlohmann::json::parse(js);
      settings.tolerance = meta.value("tolerance", settings.tolerance);
      settings.s_start = meta.value("s_start", settings.s_start);
      settings.s_max = meta.value("s_max", settings.s_max);
      settings.series_order = meta.value("series_order", settings.series_order);
      settings.nodes_per_decade = meta.value("nodes_per_decade", settings.nodes_per_decade);
    } catch (const nlohmann::json::exception& e) {
      throw ProfileFormatError(std::string("profile metadata: ") + e.what());
    }
  }
  if (settings.series_order < 3) throw ProfileFormatError("profile metadata: series_order < 3");
  return read_profile_csv(in, settings);
}

}  // namespace bryant
