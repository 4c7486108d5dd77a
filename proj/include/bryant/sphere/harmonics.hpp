#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "bryant/sphere/quadrature.hpp"

namespace bryant::sphere {

/// Value plus ambient derivatives through third order of a function on R^3.
struct Jet3 {
  double v = 0.0;
  std::array<double, 3> d{};
  std::array<double, 9> h{};
  std::array<double, 27> t{};

  static Jet3 constant(double c) {
    Jet3 j;
    j.v = c;
    return j;
  }
  static Jet3 coordinate(int axis, double value) {
    Jet3 j;
    j.v = value;
    j.d[axis] = 1.0;
    return j;
  }
};

inline Jet3 operator+(const Jet3& a, const Jet3& b) {
  Jet3 r;
  r.v = a.v + b.v;
  for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] + b.d[i];
  for (int i = 0; i < 9; ++i) r.h[i] = a.h[i] + b.h[i];
  for (int i = 0; i < 27; ++i) r.t[i] = a.t[i] + b.t[i];
  return r;
}

inline Jet3 operator*(double s, const Jet3& a) {
  Jet3 r;
  r.v = s * a.v;
  for (int i = 0; i < 3; ++i) r.d[i] = s * a.d[i];
  for (int i = 0; i < 9; ++i) r.h[i] = s * a.h[i];
  for (int i = 0; i < 27; ++i) r.t[i] = s * a.t[i];
  return r;
}

inline Jet3 operator-(const Jet3& a, const Jet3& b) { return a + (-1.0) * b; }

/// Leibniz rule; `order` limits how many derivative levels are formed.
inline Jet3 multiply(const Jet3& a, const Jet3& b, int order = 3) {
  Jet3 r;
  r.v = a.v * b.v;
  if (order < 1) return r;
  for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  if (order < 2) return r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r.h[3 * i + j] = a.h[3 * i + j] * b.v + a.d[i] * b.d[j] + a.d[j] * b.d[i] + a.v * b.h[3 * i + j];
  if (order < 3) return r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        r.t[9 * i + 3 * j + k] = a.t[9 * i + 3 * j + k] * b.v + a.h[3 * i + j] * b.d[k] + a.h[3 * i + k] * b.d[j] +
                                 a.h[3 * j + k] * b.d[i] + a.d[i] * b.h[3 * j + k] + a.d[j] * b.h[3 * i + k] +
                                 a.d[k] * b.h[3 * i + j] + a.v * b.t[9 * i + 3 * j + k];
  return r;
}

inline int harmonic_index(int l, int m) { return l * l + l + m; }
inline int harmonic_count(int l_max) { return (l_max + 1) * (l_max + 1); }

/// Orthonormal real spherical harmonics (as homogeneous harmonic polynomials) at x,
/// built with the standard real solid-harmonic recursion.
inline std::vector<Jet3> solid_harmonic_jets(const Eigen::Vector3d& x, int l_max, int order = 3) {
  std::vector<Jet3> s(harmonic_count(l_max));
  const Jet3 X = Jet3::coordinate(0, x.x()), Y = Jet3::coordinate(1, x.y()), Z = Jet3::coordinate(2, x.z());
  const Jet3 r2 = multiply(X, X, order) + multiply(Y, Y, order) + multiply(Z, Z, order);
  s[0] = Jet3::constant(1.0);
  for (int l = 0; l < l_max; ++l) {
    const double c = std::sqrt((l == 0 ? 2.0 : 1.0) * (2.0 * l + 1.0) / (2.0 * l + 2.0));
    const Jet3& top = s[harmonic_index(l, l)];
    const Jet3& bottom = s[harmonic_index(l, -l)];
    if (l == 0) {
      s[harmonic_index(1, 1)] = c * multiply(X, top, order);
      s[harmonic_index(1, -1)] = c * multiply(Y, top, order);
    } else {
      s[harmonic_index(l + 1, l + 1)] = c * (multiply(X, top, order) - multiply(Y, bottom, order));
      s[harmonic_index(l + 1, -l - 1)] = c * (multiply(Y, top, order) + multiply(X, bottom, order));
    }
    for (int m = -l; m <= l; ++m) {
      Jet3 next = (2.0 * l + 1.0) * multiply(Z, s[harmonic_index(l, m)], order);
      if (std::abs(m) < l) {
        const double back = std::sqrt(static_cast<double>((l + m) * (l - m)));
        next = next - back * multiply(r2, s[harmonic_index(l - 1, m)], order);
      }
      s[harmonic_index(l + 1, m)] = (1.0 / std::sqrt(static_cast<double>((l + m + 1) * (l - m + 1)))) * next;
    }
  }
  for (int l = 0; l <= l_max; ++l) {
    const double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi));
    for (int m = -l; m <= l; ++m) s[harmonic_index(l, m)] = norm * s[harmonic_index(l, m)];
  }
  return s;
}

/// Orthonormal tangent frame (w1, w2 = x cross w1) at a unit vector.
inline std::pair<Eigen::Vector3d, Eigen::Vector3d> tangent_frame(const Eigen::Vector3d& x) {
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  int axis = 0;
  x.cwiseAbs().minCoeff(&axis);
  a[axis] = 1.0;
  const Eigen::Vector3d w1 = (a - a.dot(x) * x).normalized();
  return {w1, x.cross(w1)};
}

/// Real harmonics Y_lm, l <= l_max, tabulated at quadrature nodes together with their
/// covariant derivatives expressed in a per-node orthonormal frame:
///   grad   g_a     = dY(w_a)
///   hess   H_ab    = Hess Y(w_a, w_b)          stored as (11, 12, 22)
///   third  D_abc   = (nabla_c Hess Y)(w_a, w_b) stored as (11c, 12c, 22c), c = 1, 2
class HarmonicBasis {
 public:
  HarmonicBasis(int l_max, SphereQuadrature q, int order = 3) : l_max_(l_max), order_(order), q_(std::move(q)) {
    if (l_max < 0) throw std::invalid_argument("HarmonicBasis: negative l_max");
    if (order < 0 || order > 3) throw std::invalid_argument("HarmonicBasis: order must be in [0, 3]");
    const std::size_t n = q_.size(), k = harmonic_count(l_max);
    frames_.reserve(n);
    value_.assign(n * k, 0.0);
    if (order >= 1) grad_.assign(2 * n * k, 0.0);
    if (order >= 2) hess_.assign(3 * n * k, 0.0);
    if (order >= 3) third_.assign(6 * n * k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d& x = q_.nodes[i];
      const auto fr = tangent_frame(x);
      frames_.push_back(fr);
      const std::array<Eigen::Vector3d, 2> w{fr.first, fr.second};
      const auto jets = solid_harmonic_jets(x, l_max, order);
      for (int l = 0; l <= l_max; ++l) {
        for (int m = -l; m <= l; ++m) {
          const std::size_t j = harmonic_index(l, m);
          const Jet3& J = jets[j];
          const std::size_t at = i * k + j;
          value_[at] = J.v;
          if (order < 1) continue;
          std::array<double, 2> g{};
          for (int a = 0; a < 2; ++a)
            for (int p = 0; p < 3; ++p) g[a] += J.d[p] * w[a][p];
          grad_[2 * at] = g[0];
          grad_[2 * at + 1] = g[1];
          if (order < 2) continue;
          auto H = [&](int a, int b) {
            double s = 0.0;
            for (int p = 0; p < 3; ++p)
              for (int r = 0; r < 3; ++r) s += J.h[3 * p + r] * w[a][p] * w[b][r];
            return s - (a == b ? l * J.v : 0.0);
          };
          hess_[3 * at] = H(0, 0);
          hess_[3 * at + 1] = H(0, 1);
          hess_[3 * at + 2] = H(1, 1);
          if (order < 3) continue;
          auto D = [&](int a, int b, int c) {
            double s = 0.0;
            for (int p = 0; p < 3; ++p)
              for (int r = 0; r < 3; ++r)
                for (int u = 0; u < 3; ++u) s += J.t[9 * p + 3 * r + u] * w[a][p] * w[b][r] * w[c][u];
            s -= (l - 1.0) * ((a == c ? g[b] : 0.0) + (b == c ? g[a] : 0.0));
            s -= (a == b ? l * g[c] : 0.0);
            return s;
          };
          double* out = &third_[6 * at];
          out[0] = D(0, 0, 0);
          out[1] = D(0, 0, 1);
          out[2] = D(0, 1, 0);
          out[3] = D(0, 1, 1);
          out[4] = D(1, 1, 0);
          out[5] = D(1, 1, 1);
        }
      }
    }
  }

  explicit HarmonicBasis(int l_max) : HarmonicBasis(l_max, product_rule(2 * l_max + 4)) {}

  int l_max() const { return l_max_; }
  int order() const { return order_; }
  const SphereQuadrature& quadrature() const { return q_; }
  std::size_t node_count() const { return q_.size(); }
  std::size_t count() const { return harmonic_count(l_max_); }
  const std::pair<Eigen::Vector3d, Eigen::Vector3d>& frame(std::size_t node) const { return frames_[node]; }

  double value(std::size_t node, int j) const { return value_[node * count() + j]; }
  double grad(std::size_t node, int j, int a) const {
    require(1);
    return grad_[2 * (node * count() + j) + a];
  }
  double hess(std::size_t node, int j, int a, int b) const {
    require(2);
    return hess_[3 * (node * count() + j) + a + b];
  }
  /// (nabla_c Hess Y)(w_a, w_b)
  double third(std::size_t node, int j, int a, int b, int c) const {
    require(3);
    const int pair = a + b;  // 0 -> 11, 1 -> 12, 2 -> 22
    return third_[6 * (node * count() + j) + 2 * pair + c];
  }

  /// Ambient surface gradient of Y_j at a node.
  Eigen::Vector3d ambient_grad(std::size_t node, int j) const {
    return grad(node, j, 0) * frames_[node].first + grad(node, j, 1) * frames_[node].second;
  }

  /// Coefficients c_j = sum_i w_i f(x_i) Y_j(x_i) for samples at the nodes.
  Eigen::VectorXd analyse(const std::vector<double>& samples) const {
    if (samples.size() != node_count()) throw std::invalid_argument("analyse: sample count mismatch");
    Eigen::VectorXd c = Eigen::VectorXd::Zero(count());
    for (std::size_t i = 0; i < node_count(); ++i) {
      const double fw = samples[i] * q_.weights[i];
      for (std::size_t j = 0; j < count(); ++j) c[j] += fw * value_[i * count() + j];
    }
    return c;
  }

  std::vector<double> synthesise(const Eigen::VectorXd& coeffs) const {
    if (static_cast<std::size_t>(coeffs.size()) > count()) throw std::invalid_argument("synthesise: too many coefficients");
    std::vector<double> f(node_count(), 0.0);
    for (std::size_t i = 0; i < node_count(); ++i)
      for (Eigen::Index j = 0; j < coeffs.size(); ++j) f[i] += coeffs[j] * value_[i * count() + j];
    return f;
  }

 private:
  void require(int o) const {
    if (order_ < o) throw std::logic_error("HarmonicBasis: derivative order not tabulated");
  }

  int l_max_;
  int order_;
  SphereQuadrature q_;
  std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> frames_;
  std::vector<double> value_, grad_, hess_, third_;
};

}  // namespace bryant::sphere
