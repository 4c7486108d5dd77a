#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bryant::sphere {

/// Node/weight rule on the unit sphere (weights sum to 4 pi).
struct SphereQuadrature {
  std::vector<Eigen::Vector3d> nodes;
  std::vector<double> weights;
  int degree = 0;  ///< polynomials of total degree <= degree integrate exactly

  std::size_t size() const { return nodes.size(); }

  SphereQuadrature rotated(const Eigen::Matrix3d& rotation) const {
    SphereQuadrature q = *this;
    for (auto& x : q.nodes) x = rotation * x;
    return q;
  }
};

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

/// Gauss-Legendre in z times the trapezoid rule in azimuth; exact through `degree`.
inline SphereQuadrature product_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("product_rule: negative degree");
  const int n_lat = degree / 2 + 1;
  const int n_lon = degree + 1;
  std::vector<double> z, wz;
  gauss_legendre(n_lat, z, wz);
  SphereQuadrature q;
  q.degree = degree;
  q.nodes.reserve(static_cast<std::size_t>(n_lat) * n_lon);
  q.weights.reserve(static_cast<std::size_t>(n_lat) * n_lon);
  for (int i = 0; i < n_lat; ++i) {
    const double rho = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
    for (int j = 0; j < n_lon; ++j) {
      const double az = 2.0 * std::numbers::pi * (j + 0.5) / n_lon;
      q.nodes.emplace_back(rho * std::cos(az), rho * std::sin(az), z[i]);
      q.weights.push_back(wz[i] * 2.0 * std::numbers::pi / n_lon);
    }
  }
  return q;
}

/// Rotation matrix from a unit quaternion built from three uniform numbers in [0,1).
inline Eigen::Matrix3d rotation_from_uniform(double u1, double u2, double u3) {
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const Eigen::Quaterniond q(a * std::sin(2 * std::numbers::pi * u2), a * std::cos(2 * std::numbers::pi * u2),
                             b * std::sin(2 * std::numbers::pi * u3), b * std::cos(2 * std::numbers::pi * u3));
  return q.normalized().toRotationMatrix();
}

// Plain-text format: optional "# degree D" line, then one "x y z w" row per node.

inline void save_quadrature(const SphereQuadrature& q, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# degree " << q.degree << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < q.size(); ++i)
    out << q.nodes[i].x() << ' ' << q.nodes[i].y() << ' ' << q.nodes[i].z() << ' ' << q.weights[i] << '\n';
}

inline SphereQuadrature load_quadrature(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open quadrature file " + path.string());
  SphereQuadrature q;
  q.degree = -1;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      int d = 0;
      if (hs >> key >> d && key == "degree") q.degree = d;
      continue;
    }
    std::istringstream ls(line);
    double x, y, z, w;
    if (!(ls >> x >> y >> z >> w)) throw std::runtime_error("quadrature file: bad row " + std::to_string(row));
    const double r = std::sqrt(x * x + y * y + z * z);
    if (std::abs(r - 1.0) > 1e-12) throw std::runtime_error("quadrature file: node off the unit sphere");
    q.nodes.emplace_back(x / r, y / r, z / r);
    q.weights.push_back(w);
  }
  if (q.nodes.empty()) throw std::runtime_error("quadrature file: no nodes");
  if (q.degree < 0) throw std::runtime_error("quadrature file: missing '# degree' header");
  return q;
}

}  // namespace bryant::sphere
