#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "bryant/sphere_spectral.hpp"

namespace bryant::cylinder {

using sphere::BasisElement;
using sphere::Family;
using sphere::HarmonicBasis;

struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shrinking cylinder (2 - 2t) g_round + dz^2; Ric = g_round for every t.
struct Background {
  double t;
  double sphere_factor;
  double scalar_curvature;
  double ric_norm_squared;  ///< |Ric|^2 in the evolving metric
};

inline void require_open_time(double t, const char* who) {
  if (!(t > 0.0 && t < 1.0)) throw std::out_of_range(std::string(who) + ": t must lie in (0, 1)");
}

inline Background cylinder_background(double t) {
  require_open_time(t, "cylinder_background");
  const double a = 2.0 - 2.0 * t;
  return {t, a, 1.0 / (1.0 - t), 2.0 / (a * a)};
}

/// Element values at the nodes of a basis, one column per element. Rows: one-forms 2i + a,
/// scalars i, tensors 4i + 2a + b (frame components at node i).
struct SampleTables {
  std::size_t nodes = 0;
  Eigen::MatrixXd one_form, scalar, trace, tracefree;
};

inline SampleTables sample_tables(const HarmonicBasis& B, const std::vector<BasisElement>& one_form,
                                  const std::vector<BasisElement>& scalar, const std::vector<BasisElement>& trace,
                                  const std::vector<BasisElement>& tracefree) {
  const std::size_t n = B.node_count();
  SampleTables T;
  T.nodes = n;
  T.one_form.resize(2 * n, one_form.size());
  T.scalar.resize(n, scalar.size());
  T.trace.resize(4 * n, trace.size());
  T.tracefree.resize(4 * n, tracefree.size());
  auto fill_tensor = [&](Eigen::MatrixXd& M, const std::vector<BasisElement>& el) {
    for (std::size_t e = 0; e < el.size(); ++e)
      for (std::size_t i = 0; i < n; ++i) {
        const auto t = sphere::tensor_sample(B, i, el[e], false);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) M(4 * i + 2 * a + b, e) = t.x[a][b];
      }
  };
  for (std::size_t e = 0; e < one_form.size(); ++e)
    for (std::size_t i = 0; i < n; ++i) {
      const auto o = sphere::one_form_sample(B, i, one_form[e]);
      T.one_form(2 * i, e) = o.s[0];
      T.one_form(2 * i + 1, e) = o.s[1];
    }
  for (std::size_t e = 0; e < scalar.size(); ++e)
    for (std::size_t i = 0; i < n; ++i) T.scalar(i, e) = B.value(i, scalar[e].harmonic);
  fill_tensor(T.trace, trace);
  fill_tensor(T.tracefree, tracefree);
  return T;
}

/// Degree of the product rule whose nodes carry sup norms. Node-sup error falls roughly
/// quadratically in the degree; 12 l + 16 keeps it under 1% for band-limited random fields.
inline int sup_rule_degree(int l_max) { return 12 * l_max + 16; }

/// Mode tables shared by the fields of one band limit: element lists, spatial eigenvalues
/// read off the (diagonal) Galerkin matrices, and the node set used for sup norms.
class CylinderModes {
 public:
  explicit CylinderModes(int l_max) : l_max_(l_max), sup_basis_(l_max, sphere::product_rule(sup_rule_degree(l_max)), 2) {
    if (l_max < 1) throw std::invalid_argument("CylinderModes: l_max must be positive");
    const auto basis = sphere::spectral_basis(l_max);
    const auto one = sphere::assemble_one_form(basis);
    const auto ten = sphere::assemble_tensor(basis);
    one_form_ = one.elements;
    nu_one_form_ = diagonal_eigenvalues(one);
    for (std::size_t e = 0; e < ten.elements.size(); ++e) {
      if (ten.elements[e].family == Family::trace) {
        trace_.push_back(ten.elements[e]);
        nu_trace_.push_back(ten.stiffness(e, e) / ten.mass(e, e));
      } else {
        tracefree_.push_back(ten.elements[e]);
        nu_tracefree_.push_back(ten.stiffness(e, e) / ten.mass(e, e));
      }
    }
    diagonal_eigenvalues(ten);
    scalar_ = sphere::scalar_elements(l_max);
    for (const auto& e : scalar_) nu_scalar_.push_back(e.l * (e.l + 1.0));
    sup_tables_ = tables_for(sup_basis_);
  }

  SampleTables tables_for(const HarmonicBasis& B) const {
    if (B.l_max() < l_max_ || B.order() < 2) throw std::invalid_argument("evaluation basis too small for the field");
    return sample_tables(B, one_form_, scalar_, trace_, tracefree_);
  }

  int l_max() const { return l_max_; }
  const HarmonicBasis& sup_basis() const { return sup_basis_; }
  const SampleTables& sup_tables() const { return sup_tables_; }
  const std::vector<BasisElement>& scalar() const { return scalar_; }
  const std::vector<BasisElement>& one_form() const { return one_form_; }
  const std::vector<BasisElement>& trace() const { return trace_; }
  const std::vector<BasisElement>& tracefree() const { return tracefree_; }
  const std::vector<double>& nu_scalar() const { return nu_scalar_; }
  const std::vector<double>& nu_one_form() const { return nu_one_form_; }
  const std::vector<double>& nu_trace() const { return nu_trace_; }
  const std::vector<double>& nu_tracefree() const { return nu_tracefree_; }

 private:
  static std::vector<double> diagonal_eigenvalues(const sphere::GalerkinSystem& sys) {
    const Eigen::Index n = sys.stiffness.rows();
    const double scale = std::max(1.0, sys.stiffness.cwiseAbs().maxCoeff());
    std::vector<double> nu(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && (std::abs(sys.stiffness(i, j)) > 1e-8 * scale || std::abs(sys.mass(i, j)) > 1e-8))
          throw sphere::AssemblyError("mode basis does not diagonalize the operator");
      nu[i] = sys.stiffness(i, i) / sys.mass(i, i);
    }
    return nu;
  }

  int l_max_;
  HarmonicBasis sup_basis_;
  SampleTables sup_tables_;
  std::vector<BasisElement> scalar_, one_form_, trace_, tracefree_;
  std::vector<double> nu_scalar_, nu_one_form_, nu_trace_, nu_tracefree_;
};

using ModesPtr = std::shared_ptr<const CylinderModes>;

/// V = xi + eta d/dz, xi over the one-form elements, eta over the scalar harmonics.
struct CylinderVectorField {
  ModesPtr modes;
  Eigen::VectorXd xi, eta;
  double time = 0.5;

  static CylinderVectorField zero(ModesPtr m, double t) {
    CylinderVectorField f{m, Eigen::VectorXd::Zero(m->one_form().size()), Eigen::VectorXd::Zero(m->scalar().size()), t};
    return f;
  }
  /// eta = c (constant), xi = 0
  static CylinderVectorField axial(ModesPtr m, double c, double t) {
    auto f = zero(m, t);
    f.eta[0] = c * std::sqrt(4.0 * std::numbers::pi);
    return f;
  }
};

/// h = chi + dz*sigma + sigma*dz + beta dz^2, chi split into trace and trace-free elements.
struct CylinderTensorField {
  ModesPtr modes;
  Eigen::VectorXd chi_trace, chi_tracefree, sigma, beta;
  double time = 0.5;

  static CylinderTensorField zero(ModesPtr m, double t) {
    return {m,
            Eigen::VectorXd::Zero(m->trace().size()),
            Eigen::VectorXd::Zero(m->tracefree().size()),
            Eigen::VectorXd::Zero(m->one_form().size()),
            Eigen::VectorXd::Zero(m->scalar().size()),
            t};
  }
  /// h = c Ric = c g_round
  static CylinderTensorField multiple_of_ricci(ModesPtr m, double c, double t) {
    auto f = zero(m, t);
    f.chi_trace[0] = c * std::sqrt(2.0) * std::sqrt(4.0 * std::numbers::pi);
    return f;
  }
};

// Decay exponents p for c(t) = c(t0) ((1 - t) / (1 - t0))^p.
inline double xi_exponent(double nu) { return 0.5 * (nu - 1.0); }
inline double eta_exponent(double nu) { return 0.5 * nu; }
inline double chi_exponent(double nu_l) { return 0.5 * nu_l; }
inline double sigma_exponent(double nu) { return 0.5 * (nu + 1.0); }
inline double beta_exponent(double nu) { return 0.5 * nu; }

inline double decay_factor(double p, double t0, double t1) { return std::pow((1.0 - t1) / (1.0 - t0), p); }

namespace detail {
inline Eigen::VectorXd scale_modes(const Eigen::VectorXd& c, const std::vector<double>& nu, double (*exponent)(double),
                                   double t0, double t1) {
  Eigen::VectorXd out = c;
  for (Eigen::Index i = 0; i < c.size(); ++i) out[i] *= decay_factor(exponent(nu[i]), t0, t1);
  return out;
}
}  // namespace detail

/// Closed-form value at any t in (0, 1), forward or backward.
inline CylinderVectorField vector_at(const CylinderVectorField& f, double t) {
  require_open_time(t, "vector_at");
  const auto& m = *f.modes;
  return {f.modes, detail::scale_modes(f.xi, m.nu_one_form(), xi_exponent, f.time, t),
          detail::scale_modes(f.eta, m.nu_scalar(), eta_exponent, f.time, t), t};
}

inline CylinderTensorField tensor_at(const CylinderTensorField& f, double t) {
  require_open_time(t, "tensor_at");
  const auto& m = *f.modes;
  return {f.modes,
          detail::scale_modes(f.chi_trace, m.nu_trace(), chi_exponent, f.time, t),
          detail::scale_modes(f.chi_tracefree, m.nu_tracefree(), chi_exponent, f.time, t),
          detail::scale_modes(f.sigma, m.nu_one_form(), sigma_exponent, f.time, t),
          detail::scale_modes(f.beta, m.nu_scalar(), beta_exponent, f.time, t),
          t};
}

inline CylinderVectorField evolve_vector(const CylinderVectorField& f, double t1) {
  if (!(f.time < t1 && t1 < 1.0)) throw std::invalid_argument("evolve_vector: need field.time < t1 < 1");
  return vector_at(f, t1);
}

inline CylinderTensorField evolve_tensor(const CylinderTensorField& f, double t1) {
  if (!(f.time < t1 && t1 < 1.0)) throw std::invalid_argument("evolve_tensor: need field.time < t1 < 1");
  return tensor_at(f, t1);
}

/// RK4 integration of dc/dt = -p c / (1 - t) directly in t, with steps shrinking toward t = 1.
inline double rk4_mode(double p, double c0, double t0, double t1, double step_fraction = 0.005) {
  using State = std::array<double, 1>;
  boost::numeric::odeint::runge_kutta4<State> stepper;
  auto rhs = [p](const State& c, State& dc, double t) { dc[0] = -p * c[0] / (1.0 - t); };
  State c{c0};
  double t = t0;
  while (t < t1) {
    const double h = std::min(t1 - t, step_fraction * (1.0 - t) / std::max(std::abs(p), 1.0));
    stepper.do_step(rhs, c, t, h);
    t += h;
  }
  return c[0];
}

// Pointwise values in the node frame.

struct VectorPoint {
  Eigen::Vector2d xi = Eigen::Vector2d::Zero();
  double eta = 0.0;
};

struct TensorPoint {
  Eigen::Matrix2d chi = Eigen::Matrix2d::Zero();
  Eigen::Vector2d sigma = Eigen::Vector2d::Zero();
  double beta = 0.0;
};

inline std::vector<VectorPoint> vector_samples(const CylinderVectorField& f, const SampleTables& T) {
  const Eigen::VectorXd xi = T.one_form * f.xi;
  const Eigen::VectorXd eta = T.scalar * f.eta;
  std::vector<VectorPoint> out(T.nodes);
  for (std::size_t i = 0; i < T.nodes; ++i) {
    out[i].xi = xi.segment<2>(2 * i);
    out[i].eta = eta[i];
  }
  return out;
}

inline std::vector<TensorPoint> tensor_samples(const CylinderTensorField& f, const SampleTables& T) {
  const Eigen::VectorXd chi = T.trace * f.chi_trace + T.tracefree * f.chi_tracefree;
  const Eigen::VectorXd sigma = T.one_form * f.sigma;
  const Eigen::VectorXd beta = T.scalar * f.beta;
  std::vector<TensorPoint> out(T.nodes);
  for (std::size_t i = 0; i < T.nodes; ++i) {
    out[i].chi << chi[4 * i], chi[4 * i + 1], chi[4 * i + 2], chi[4 * i + 3];
    out[i].sigma = sigma.segment<2>(2 * i);
    out[i].beta = beta[i];
  }
  return out;
}

inline std::vector<VectorPoint> vector_samples(const CylinderVectorField& f, const HarmonicBasis& B) {
  return vector_samples(f, f.modes->tables_for(B));
}

inline std::vector<TensorPoint> tensor_samples(const CylinderTensorField& f, const HarmonicBasis& B) {
  return tensor_samples(f, f.modes->tables_for(B));
}

/// |V|^2 in the evolving metric: xi is a tangent vector (weight 2 - 2t), d/dz is unit.
inline double vector_norm_squared(const VectorPoint& p, double t) {
  return (2.0 - 2.0 * t) * p.xi.squaredNorm() + p.eta * p.eta;
}

/// |h|^2 in the evolving metric: chi weight (2 - 2t)^-2, the two mixed terms (2 - 2t)^-1 each.
inline double tensor_norm_squared(const TensorPoint& p, double t) {
  const double a = 2.0 - 2.0 * t;
  return p.chi.squaredNorm() / (a * a) + 2.0 * p.sigma.squaredNorm() / a + p.beta * p.beta;
}

inline double gauge_norm(const CylinderVectorField& f, double t) {
  require_open_time(t, "gauge_norm");
  double s = 0.0;
  for (const auto& p : vector_samples(vector_at(f, t), f.modes->sup_tables())) s = std::max(s, vector_norm_squared(p, t));
  return std::sqrt(s);
}

inline double gauge_norm(const CylinderTensorField& f, double t) {
  require_open_time(t, "gauge_norm");
  double s = 0.0;
  for (const auto& p : tensor_samples(tensor_at(f, t), f.modes->sup_tables())) s = std::max(s, tensor_norm_squared(p, t));
  return std::sqrt(s);
}

struct ProjectionGap {
  double lambda_star;
  double gap;
};

namespace detail {
/// Golden-section search for a convex function of lambda on [-10 scale, 10 scale], run to
/// machine resolution (the minimum is typically a corner, so tolerances near sqrt(eps) are too loose).
template <class F>
ProjectionGap minimize_gap(F&& gap_of, double scale) {
  if (scale == 0.0) return {0.0, gap_of(0.0)};
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -10.0 * scale, b = 10.0 * scale;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = gap_of(c), fd = gap_of(d);
  for (int it = 0; it < 200 && (b - a) > 4.0 * std::numeric_limits<double>::epsilon() * scale; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = gap_of(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = gap_of(d);
    }
  }
  return fc <= fd ? ProjectionGap{c, fc} : ProjectionGap{d, fd};
}
}  // namespace detail

inline ProjectionGap axial_projection_gap(const CylinderVectorField& f, double t) {
  if (!(t >= 0.5 && t < 1.0)) throw std::out_of_range("axial_projection_gap: t must lie in [1/2, 1)");
  const auto pts = vector_samples(vector_at(f, t), f.modes->sup_tables());
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, std::sqrt(vector_norm_squared(p, t)));
  return detail::minimize_gap(
      [&](double lam) {
        double s = 0.0;
        for (const auto& p : pts) s = std::max(s, (2.0 - 2.0 * t) * p.xi.squaredNorm() + (p.eta - lam) * (p.eta - lam));
        return std::sqrt(s);
      },
      scale);
}

inline ProjectionGap ric_projection_gap(const CylinderTensorField& f, double t) {
  if (!(t >= 0.5 && t < 1.0)) throw std::out_of_range("ric_projection_gap: t must lie in [1/2, 1)");
  const auto pts = tensor_samples(tensor_at(f, t), f.modes->sup_tables());
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, std::sqrt(tensor_norm_squared(p, t)));
  return detail::minimize_gap(
      [&](double lam) {
        double s = 0.0;
        for (auto p : pts) {
          p.chi -= lam * Eigen::Matrix2d::Identity();
          s = std::max(s, tensor_norm_squared(p, t));
        }
        return std::sqrt(s);
      },
      scale);
}

/// inf over lambda of sup |chi - lambda g_round| measured in g_round.
inline ProjectionGap chi_deviation(const CylinderTensorField& f, double t) {
  const auto pts = tensor_samples(tensor_at(f, t), f.modes->sup_tables());
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.chi.norm());
  return detail::minimize_gap(
      [&](double lam) {
        double s = 0.0;
        for (const auto& p : pts) s = std::max(s, (p.chi - lam * Eigen::Matrix2d::Identity()).squaredNorm());
        return std::sqrt(s);
      },
      scale);
}

/// sup |sigma| measured in g_round.
inline double sigma_sup(const CylinderTensorField& f, double t) {
  double s = 0.0;
  for (const auto& p : tensor_samples(tensor_at(f, t), f.modes->sup_tables())) s = std::max(s, p.sigma.norm());
  return s;
}

// Random band-limited data and hypothesis normalization.

inline Eigen::VectorXd gaussian_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

/// Times in (0, 1/2] at which the lemma hypotheses are enforced.
inline std::vector<double> hypothesis_times() {
  std::vector<double> t{1e-9};
  for (int k = 1; k <= 50; ++k) t.push_back(0.5 * k / 50.0);
  return t;
}

/// Random field scaled so that sup over (0, 1/2] of |V|_g(t) equals 1.
inline CylinderVectorField random_vector_field(ModesPtr m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto f = CylinderVectorField::zero(m, hypothesis_times().front());
  f.xi = gaussian_vector(m->one_form().size(), rng);
  f.eta = gaussian_vector(m->scalar().size(), rng);
  double worst = 0.0;
  for (double t : hypothesis_times()) worst = std::max(worst, gauge_norm(f, t));
  f.xi /= worst;
  f.eta /= worst;
  return f;
}

/// Random field scaled so that sup over (0, 1/2] of (1 - t)|h|_g(t) equals 1.
inline CylinderTensorField random_tensor_field(ModesPtr m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto f = CylinderTensorField::zero(m, hypothesis_times().front());
  f.chi_trace = gaussian_vector(m->trace().size(), rng);
  f.chi_tracefree = gaussian_vector(m->tracefree().size(), rng);
  f.sigma = gaussian_vector(m->one_form().size(), rng);
  f.beta = gaussian_vector(m->scalar().size(), rng);
  double worst = 0.0;
  for (double t : hypothesis_times()) worst = std::max(worst, (1.0 - t) * gauge_norm(f, t));
  f.chi_trace /= worst;
  f.chi_tracefree /= worst;
  f.sigma /= worst;
  f.beta /= worst;
  return f;
}

// Mode trajectories.

struct ModeTrajectory {
  std::string mode_id;
  double nu;
  double p;
  double t0;
  double c0;
  double at(double t) const { return c0 * decay_factor(p, t0, t); }
};

namespace detail {
inline std::string mode_name(const std::string& block, const BasisElement& e) {
  static const char* fam[] = {"scalar", "exact", "coexact", "trace", "electric", "magnetic"};
  return block + ":" + fam[static_cast<int>(e.family)] + ":" + std::to_string(e.l) + ":" + std::to_string(e.m);
}
inline void push_modes(std::vector<ModeTrajectory>& out, const std::string& block, const std::vector<BasisElement>& el,
                       const std::vector<double>& nu, double (*exponent)(double), const Eigen::VectorXd& c, double t0) {
  for (std::size_t i = 0; i < el.size(); ++i) out.push_back({mode_name(block, el[i]), nu[i], exponent(nu[i]), t0, c[i]});
}
}  // namespace detail

inline std::vector<ModeTrajectory> trajectories(const CylinderVectorField& f) {
  std::vector<ModeTrajectory> out;
  const auto& m = *f.modes;
  detail::push_modes(out, "xi", m.one_form(), m.nu_one_form(), xi_exponent, f.xi, f.time);
  detail::push_modes(out, "eta", m.scalar(), m.nu_scalar(), eta_exponent, f.eta, f.time);
  return out;
}

inline std::vector<ModeTrajectory> trajectories(const CylinderTensorField& f) {
  std::vector<ModeTrajectory> out;
  const auto& m = *f.modes;
  detail::push_modes(out, "chi", m.trace(), m.nu_trace(), chi_exponent, f.chi_trace, f.time);
  detail::push_modes(out, "chi", m.tracefree(), m.nu_tracefree(), chi_exponent, f.chi_tracefree, f.time);
  detail::push_modes(out, "sigma", m.one_form(), m.nu_one_form(), sigma_exponent, f.sigma, f.time);
  detail::push_modes(out, "beta", m.scalar(), m.nu_scalar(), beta_exponent, f.beta, f.time);
  return out;
}

// Anderson-Chow check in parabolic form: u = |h|^2 / R^2 should satisfy d_t u <= Laplacian u.

/// Analysis basis for u: u is band-limited to 2 l_max, analysed up to 2 l_max + 4.
inline HarmonicBasis anderson_chow_basis(int field_l_max) {
  const int lu = 2 * field_l_max + 4;
  return HarmonicBasis(lu, sphere::product_rule(2 * lu + 4), 2);
}

/// u = |h|^2 (1 - t)^2 = |chi|^2 / 4 + (1 - t)|sigma|^2 + (1 - t)^2 beta^2, with the
/// metric weights cancelled by hand so a constant u is reproduced exactly.
inline std::vector<double> chow_u(const CylinderTensorField& f, double t, const SampleTables& B) {
  const double r = 1.0 - t;
  std::vector<double> u;
  for (const auto& p : tensor_samples(tensor_at(f, t), B))
    u.push_back(0.25 * p.chi.squaredNorm() + r * p.sigma.squaredNorm() + r * r * p.beta * p.beta);
  return u;
}

inline double anderson_chow_violation_at_step(const CylinderTensorField& f, const std::vector<double>& t_grid, double dt,
                                               const HarmonicBasis& B) {
  const SampleTables T = f.modes->tables_for(B);
  double worst = -std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    if (!(t - dt > 0.0 && t + dt < 1.0)) throw std::out_of_range("anderson_chow_violation: t +- dt leaves (0, 1)");
    const auto u0 = chow_u(f, t, T);
    const auto up = chow_u(f, t + dt, T);
    const auto um = chow_u(f, t - dt, T);
    std::vector<double> shifted(u0);
    for (double& v : shifted) v -= u0.front();  // Laplacian ignores constants; this keeps roundoff out
    Eigen::VectorXd c = B.analyse(shifted);
    for (int l = 0; l <= B.l_max(); ++l)
      for (int m = -l; m <= l; ++m) c[sphere::harmonic_index(l, m)] *= -l * (l + 1.0) / (2.0 - 2.0 * t);
    const auto lap = B.synthesise(c);
    for (std::size_t i = 0; i < u0.size(); ++i) worst = std::max(worst, (up[i] - um[i]) / (2.0 * dt) - lap[i]);
  }
  return worst;
}

/// Max over nodes and grid times of d_t u - Laplacian u. Repeats with dt / 2 and throws
/// GridError when the two disagree (finite-difference error would dominate).
inline double anderson_chow_violation(const CylinderTensorField& f, const std::vector<double>& t_grid, double dt = 1e-3) {
  const auto B = anderson_chow_basis(f.modes->l_max());
  const double v = anderson_chow_violation_at_step(f, t_grid, dt, B);
  const double v2 = anderson_chow_violation_at_step(f, t_grid, 0.5 * dt, B);
  if (std::abs(v - v2) > 1e-6 + 1e-2 * std::abs(v))
    throw GridError("anderson_chow_violation: time step too coarse (" + std::to_string(v) + " vs " + std::to_string(v2) + ")");
  return v;
}

}  // namespace bryant::cylinder
