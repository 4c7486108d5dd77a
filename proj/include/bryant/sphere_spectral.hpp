#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "bryant/sphere/harmonics.hpp"
#include "bryant/sphere/quadrature.hpp"

namespace bryant::sphere {

struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PrecisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OperatorKind { scalar_laplacian, one_form_rough, tensor_operator };

inline std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::scalar_laplacian: return "scalar_laplacian";
    case OperatorKind::one_form_rough: return "one_form_rough";
    case OperatorKind::tensor_operator: return "tensor_operator";
  }
  return "unknown";
}

/// scalar: Y; exact: dY; coexact: *dY; trace: Y g; electric: trace-free Hess Y; magnetic: its rotation.
enum class Family { scalar, exact, coexact, trace, electric, magnetic };

struct BasisElement {
  Family family;
  int l;
  int m;
  int harmonic;  ///< index into HarmonicBasis
  double scale;  ///< makes the element L2-unit
};

inline std::vector<BasisElement> scalar_elements(int l_max) {
  std::vector<BasisElement> out;
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m) out.push_back({Family::scalar, l, m, harmonic_index(l, m), 1.0});
  return out;
}

inline std::vector<BasisElement> one_form_elements(int l_max) {
  std::vector<BasisElement> out;
  for (Family fam : {Family::exact, Family::coexact})
    for (int l = 1; l <= l_max; ++l)
      for (int m = -l; m <= l; ++m) out.push_back({fam, l, m, harmonic_index(l, m), 1.0 / std::sqrt(l * (l + 1.0))});
  return out;
}

inline std::vector<BasisElement> tensor_elements(int l_max) {
  std::vector<BasisElement> out;
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m) out.push_back({Family::trace, l, m, harmonic_index(l, m), 1.0 / std::sqrt(2.0)});
  for (Family fam : {Family::electric, Family::magnetic})
    for (int l = 2; l <= l_max; ++l) {
      const double lam = l * (l + 1.0);
      for (int m = -l; m <= l; ++m)
        out.push_back({fam, l, m, harmonic_index(l, m), 1.0 / std::sqrt(lam * (lam - 2.0) / 2.0)});
    }
  return out;
}

/// One-form in the node frame: s[a] = sigma(w_a), ds[a][c] = (nabla_c sigma)(w_a).
struct OneFormSample {
  std::array<double, 2> s{};
  std::array<std::array<double, 2>, 2> ds{};
};

/// Symmetric 2-tensor in the node frame: x[a][b], dx[a][b][c] = (nabla_c chi)(w_a, w_b).
struct TensorSample {
  std::array<std::array<double, 2>, 2> x{};
  std::array<std::array<std::array<double, 2>, 2>, 2> dx{};
};

inline OneFormSample one_form_sample(const HarmonicBasis& B, std::size_t node, const BasisElement& e) {
  OneFormSample o;
  const int j = e.harmonic;
  std::array<double, 2> g{B.grad(node, j, 0), B.grad(node, j, 1)};
  std::array<std::array<double, 2>, 2> h{};
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c) h[a][c] = B.order() >= 2 ? B.hess(node, j, a, c) : 0.0;
  if (e.family == Family::exact) {
    o.s = g;
    o.ds = h;
  } else if (e.family == Family::coexact) {
    // rotation by the outward normal: (v1, v2) -> (-v2, v1)
    o.s = {-g[1], g[0]};
    for (int c = 0; c < 2; ++c) {
      o.ds[0][c] = -h[1][c];
      o.ds[1][c] = h[0][c];
    }
  } else {
    throw std::invalid_argument("one_form_sample: not a one-form family");
  }
  for (int a = 0; a < 2; ++a) {
    o.s[a] *= e.scale;
    for (int c = 0; c < 2; ++c) o.ds[a][c] *= e.scale;
  }
  return o;
}

inline TensorSample tensor_sample(const HarmonicBasis& B, std::size_t node, const BasisElement& e, bool derivative = true) {
  TensorSample t;
  const int j = e.harmonic;
  const double lam = e.l * (e.l + 1.0);
  if (e.family == Family::trace) {
    const double v = B.value(node, j);
    t.x[0][0] = t.x[1][1] = v;
    if (derivative)
      for (int c = 0; c < 2; ++c) t.dx[0][0][c] = t.dx[1][1][c] = B.grad(node, j, c);
  } else if (e.family == Family::electric || e.family == Family::magnetic) {
    std::array<std::array<double, 2>, 2> E{};
    std::array<std::array<std::array<double, 2>, 2>, 2> dE{};
    const double v = B.value(node, j);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        E[a][b] = B.hess(node, j, a, b) + (a == b ? 0.5 * lam * v : 0.0);
        if (derivative)
          for (int c = 0; c < 2; ++c)
            dE[a][b][c] = B.third(node, j, a, b, c) + (a == b ? 0.5 * lam * B.grad(node, j, c) : 0.0);
      }
    if (e.family == Family::electric) {
      t.x = E;
      t.dx = dE;
    } else {
      for (int b = 0; b < 2; ++b) {
        t.x[0][b] = -E[1][b];
        t.x[1][b] = E[0][b];
        for (int c = 0; c < 2; ++c) {
          t.dx[0][b][c] = -dE[1][b][c];
          t.dx[1][b][c] = dE[0][b][c];
        }
      }
    }
  } else {
    throw std::invalid_argument("tensor_sample: not a tensor family");
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      t.x[a][b] *= e.scale;
      for (int c = 0; c < 2; ++c) t.dx[a][b][c] *= e.scale;
    }
  return t;
}

/// Galerkin pair: stiffness(i, j) = <L e_i, e_j>, mass(i, j) = <e_i, e_j>.
struct GalerkinSystem {
  OperatorKind kind;
  std::vector<BasisElement> elements;
  Eigen::MatrixXd stiffness;
  Eigen::MatrixXd mass;
  int l_max = 0;
  int quadrature_degree = 0;
};

namespace detail {

// Accumulates F^T F over node chunks, where each node contributes `rows` feature rows per element.
template <class Fill>
Eigen::MatrixXd gram_from_features(std::size_t nodes, std::size_t elements, int rows, Fill&& fill) {
  const std::size_t chunk = 32;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(elements, elements);
  Eigen::MatrixXd F(chunk * rows, elements);
  for (std::size_t start = 0; start < nodes; start += chunk) {
    const std::size_t count = std::min(chunk, nodes - start);
    F.setZero();
    for (std::size_t k = 0; k < count; ++k)
      for (std::size_t e = 0; e < elements; ++e) fill(start + k, e, F.col(e).segment(k * rows, rows));
    G.noalias() += F.transpose() * F;
  }
  return G;
}

}  // namespace detail

inline GalerkinSystem assemble_scalar(const HarmonicBasis& B) {
  GalerkinSystem sys{OperatorKind::scalar_laplacian, scalar_elements(B.l_max()), {}, {}, B.l_max(), B.quadrature().degree};
  const auto& q = B.quadrature();
  const auto& el = sys.elements;
  sys.stiffness = detail::gram_from_features(B.node_count(), el.size(), 2, [&](std::size_t i, std::size_t e, auto out) {
    const double sw = std::sqrt(q.weights[i]);
    out[0] = sw * B.grad(i, el[e].harmonic, 0);
    out[1] = sw * B.grad(i, el[e].harmonic, 1);
  });
  sys.mass = detail::gram_from_features(B.node_count(), el.size(), 1, [&](std::size_t i, std::size_t e, auto out) {
    out[0] = std::sqrt(q.weights[i]) * B.value(i, el[e].harmonic);
  });
  return sys;
}

inline GalerkinSystem assemble_one_form(const HarmonicBasis& B) {
  GalerkinSystem sys{OperatorKind::one_form_rough, one_form_elements(B.l_max()), {}, {}, B.l_max(), B.quadrature().degree};
  const auto& q = B.quadrature();
  const auto& el = sys.elements;
  sys.stiffness = detail::gram_from_features(B.node_count(), el.size(), 4, [&](std::size_t i, std::size_t e, auto out) {
    const double sw = std::sqrt(q.weights[i]);
    const auto o = one_form_sample(B, i, el[e]);
    for (int a = 0; a < 2; ++a)
      for (int c = 0; c < 2; ++c) out[2 * a + c] = sw * o.ds[a][c];
  });
  sys.mass = detail::gram_from_features(B.node_count(), el.size(), 2, [&](std::size_t i, std::size_t e, auto out) {
    const double sw = std::sqrt(q.weights[i]);
    const auto o = one_form_sample(B, i, el[e]);
    out[0] = sw * o.s[0];
    out[1] = sw * o.s[1];
  });
  return sys;
}

/// L chi = -Delta chi + 4 (trace-free part of chi), in weak form.
inline GalerkinSystem assemble_tensor(const HarmonicBasis& B) {
  GalerkinSystem sys{OperatorKind::tensor_operator, tensor_elements(B.l_max()), {}, {}, B.l_max(), B.quadrature().degree};
  const auto& q = B.quadrature();
  const auto& el = sys.elements;
  sys.stiffness = detail::gram_from_features(B.node_count(), el.size(), 12, [&](std::size_t i, std::size_t e, auto out) {
    const double sw = std::sqrt(q.weights[i]);
    const auto t = tensor_sample(B, i, el[e]);
    int r = 0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) out[r++] = sw * t.dx[a][b][c];
    const double half_trace = 0.5 * (t.x[0][0] + t.x[1][1]);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) out[r++] = 2.0 * sw * (t.x[a][b] - (a == b ? half_trace : 0.0));
  });
  sys.mass = detail::gram_from_features(B.node_count(), el.size(), 4, [&](std::size_t i, std::size_t e, auto out) {
    const double sw = std::sqrt(q.weights[i]);
    const auto t = tensor_sample(B, i, el[e], false);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) out[2 * a + b] = sw * t.x[a][b];
  });
  return sys;
}

inline double asymmetry(const Eigen::MatrixXd& A) {
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  return (A - A.transpose()).cwiseAbs().maxCoeff() / scale;
}

struct EigenCluster {
  double value;
  int multiplicity;
};

inline std::vector<EigenCluster> cluster_eigenvalues(const std::vector<double>& sorted, double tol = 1e-6) {
  std::vector<EigenCluster> out;
  for (double v : sorted) {
    if (!out.empty() && std::abs(v - out.back().value) <= tol * std::max(1.0, std::abs(v))) {
      auto& c = out.back();
      c.value = (c.value * c.multiplicity + v) / (c.multiplicity + 1);
      ++c.multiplicity;
    } else {
      out.push_back({v, 1});
    }
  }
  return out;
}

struct SpectralTable {
  OperatorKind operator_kind;
  int l_max = 0;
  int quadrature_degree = 0;
  std::vector<double> eigenvalues;
  std::vector<EigenCluster> clusters;
  Eigen::MatrixXd kernel_basis;  ///< element coefficients, one column per zero eigenvalue
  std::vector<BasisElement> elements;
  double discretization_error = 0.0;
  std::vector<double> trace_block;      ///< tensor operator only
  std::vector<double> tracefree_block;  ///< tensor operator only

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : clusters)
      rows.push_back({{"operator", to_string(operator_kind)}, {"eigenvalue", c.value}, {"multiplicity", c.multiplicity}});
    return rows;
  }
};

/// Generalized symmetric eigensolve; also returns eigenvectors.
inline std::pair<std::vector<double>, Eigen::MatrixXd> solve_galerkin(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M) {
  if (asymmetry(A) > 1e-8 || asymmetry(M) > 1e-8) throw AssemblyError("Galerkin matrix is not symmetric");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M);
  if (es.info() != Eigen::Success) throw AssemblyError("generalized eigensolve failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  return {std::vector<double>(ev.data(), ev.data() + ev.size()), es.eigenvectors()};
}

inline std::vector<double> block_eigenvalues(const GalerkinSystem& sys, const std::vector<int>& idx) {
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd A(n, n), M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      A(i, j) = sys.stiffness(idx[i], idx[j]);
      M(i, j) = sys.mass(idx[i], idx[j]);
    }
  return solve_galerkin(A, M).first;
}

inline GalerkinSystem assemble(OperatorKind kind, const HarmonicBasis& B) {
  switch (kind) {
    case OperatorKind::scalar_laplacian: return assemble_scalar(B);
    case OperatorKind::one_form_rough: return assemble_one_form(B);
    case OperatorKind::tensor_operator: return assemble_tensor(B);
  }
  throw std::invalid_argument("assemble: unknown operator");
}

inline SpectralTable spectral_table(const GalerkinSystem& sys) {
  SpectralTable t;
  t.operator_kind = sys.kind;
  t.l_max = sys.l_max;
  t.quadrature_degree = sys.quadrature_degree;
  t.elements = sys.elements;
  auto [ev, vec] = solve_galerkin(sys.stiffness, sys.mass);
  t.eigenvalues = ev;
  t.clusters = cluster_eigenvalues(ev);
  const double zero_tol = 1e-8 * std::max(1.0, std::abs(ev.back()));
  std::vector<Eigen::Index> zero;
  for (std::size_t i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) <= zero_tol) zero.push_back(static_cast<Eigen::Index>(i));
  t.kernel_basis.resize(vec.rows(), static_cast<Eigen::Index>(zero.size()));
  for (std::size_t k = 0; k < zero.size(); ++k) t.kernel_basis.col(k) = vec.col(zero[k]);
  if (sys.kind == OperatorKind::tensor_operator) {
    std::vector<int> tr, tf;
    for (std::size_t i = 0; i < sys.elements.size(); ++i)
      (sys.elements[i].family == Family::trace ? tr : tf).push_back(static_cast<int>(i));
    t.trace_block = block_eigenvalues(sys, tr);
    t.tracefree_block = block_eigenvalues(sys, tf);
  }
  return t;
}

/// Round-sphere eigenvalue carried by a basis element: each (family, l) is one SO(3) irrep.
inline double closed_form_value(const BasisElement& e) {
  const double ll = e.l * (e.l + 1.0);
  return e.family == Family::exact || e.family == Family::coexact ? ll - 1.0 : ll;
}

/// Multiplicity a cluster must have if it is a union of whole irreps: 2l+1 per (family, l)
/// whose closed-form value matches.
inline int irrep_multiplicity(const std::vector<BasisElement>& elements, double value, double tol = 1e-6) {
  int n = 0;
  for (const auto& e : elements)
    if (std::abs(closed_form_value(e) - value) <= tol * std::max(1.0, std::abs(value))) ++n;
  return n;
}

inline void check_l_max(OperatorKind kind, int l_max) {
  const int need = kind == OperatorKind::scalar_laplacian ? 2 : 3;
  if (l_max < need) throw std::invalid_argument(to_string(kind) + ": l_max must be at least " + std::to_string(need));
}

/// Assembly quadrature degree used when none is supplied.
inline int default_assembly_degree(int l_max) { return 2 * l_max + 12; }

/// Solves on `basis` and estimates the discretization error by repeating the assembly on a
/// rule of degree + 4 and comparing eigenvalue lists.
inline SpectralTable operator_spectrum(OperatorKind kind, const HarmonicBasis& basis) {
  check_l_max(kind, basis.l_max());
  if (basis.order() < (kind == OperatorKind::tensor_operator ? 3 : kind == OperatorKind::one_form_rough ? 2 : 1))
    throw std::invalid_argument("operator_spectrum: basis lacks the derivatives this operator needs");
  const GalerkinSystem sys = assemble(kind, basis);
  SpectralTable t = spectral_table(sys);
  const HarmonicBasis finer(basis.l_max(), product_rule(basis.quadrature().degree + 4), basis.order());
  const GalerkinSystem fine = assemble(kind, finer);
  const auto ref = solve_galerkin(fine.stiffness, fine.mass).first;
  double diff = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) diff = std::max(diff, std::abs(ref[i] - t.eigenvalues[i]));
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, sys.stiffness.cwiseAbs().maxCoeff());
  t.discretization_error = std::max(diff, floor);
  return t;
}

inline SpectralTable scalar_spectrum(const HarmonicBasis& b) { return operator_spectrum(OperatorKind::scalar_laplacian, b); }
inline SpectralTable one_form_operator_spectrum(const HarmonicBasis& b) { return operator_spectrum(OperatorKind::one_form_rough, b); }
inline SpectralTable tensor_operator_spectrum(const HarmonicBasis& b) { return operator_spectrum(OperatorKind::tensor_operator, b); }

/// Basis with the assembly rule used by default for the operator spectra.
inline HarmonicBasis spectral_basis(int l_max) { return HarmonicBasis(l_max, product_rule(default_assembly_degree(l_max)), 3); }

/// Singular values of the shifted operator (L - mu) in mass-orthonormal coordinates.
inline Eigen::VectorXd shifted_singular_values(const GalerkinSystem& sys, double mu) {
  Eigen::LLT<Eigen::MatrixXd> llt(sys.mass);
  if (llt.info() != Eigen::Success) throw AssemblyError("mass matrix is not positive definite");
  Eigen::MatrixXd C = sys.stiffness - mu * sys.mass;
  const Eigen::MatrixXd L = llt.matrixL();
  C = L.triangularView<Eigen::Lower>().solve(C);
  C = L.triangularView<Eigen::Lower>().solve(C.transpose()).transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(C);
  return svd.singularValues();
}

/// Dimension of the Galerkin solution space of L chi = mu chi.
inline int shifted_nullity(const GalerkinSystem& sys, double mu, double tol = 1e-8) {
  const Eigen::VectorXd s = shifted_singular_values(sys, mu);
  return static_cast<int>((s.array() <= tol).count());
}

// Hodge splitting of one-forms given as ambient tangent vectors at the basis nodes.

struct HodgeSplit {
  Eigen::VectorXd exact_coeffs, coexact_coeffs;  ///< against normalized dY_lm and *dY_lm, l >= 1
  std::vector<Eigen::Vector3d> exact, coexact, remainder;
  double norm_total = 0.0, norm_exact = 0.0, norm_coexact = 0.0, norm_remainder = 0.0;
};

inline Eigen::Vector3d ambient_one_form(const HarmonicBasis& B, std::size_t node, const BasisElement& e) {
  const auto o = one_form_sample(B, node, e);
  return o.s[0] * B.frame(node).first + o.s[1] * B.frame(node).second;
}

inline double l2_norm(const HarmonicBasis& B, const std::vector<Eigen::Vector3d>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += B.quadrature().weights[i] * v[i].squaredNorm();
  return std::sqrt(s);
}

inline HodgeSplit hodge_decompose(const std::vector<Eigen::Vector3d>& sigma, const HarmonicBasis& B) {
  if (sigma.size() != B.node_count()) throw std::invalid_argument("hodge_decompose: sample count mismatch");
  const auto el = one_form_elements(B.l_max());
  const std::size_t half = el.size() / 2;
  HodgeSplit h;
  h.exact_coeffs = Eigen::VectorXd::Zero(half);
  h.coexact_coeffs = Eigen::VectorXd::Zero(half);
  h.exact.assign(sigma.size(), Eigen::Vector3d::Zero());
  h.coexact.assign(sigma.size(), Eigen::Vector3d::Zero());
  const auto& w = B.quadrature().weights;
  std::vector<std::vector<Eigen::Vector3d>> fields(el.size());
  for (std::size_t e = 0; e < el.size(); ++e) {
    fields[e].resize(sigma.size());
    double c = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      fields[e][i] = ambient_one_form(B, i, el[e]);
      c += w[i] * sigma[i].dot(fields[e][i]);
    }
    (e < half ? h.exact_coeffs[e] : h.coexact_coeffs[e - half]) = c;
  }
  for (std::size_t e = 0; e < el.size(); ++e) {
    const double c = e < half ? h.exact_coeffs[e] : h.coexact_coeffs[e - half];
    auto& target = e < half ? h.exact : h.coexact;
    for (std::size_t i = 0; i < sigma.size(); ++i) target[i] += c * fields[e][i];
  }
  h.remainder.resize(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) h.remainder[i] = sigma[i] - h.exact[i] - h.coexact[i];
  h.norm_total = l2_norm(B, sigma);
  h.norm_exact = l2_norm(B, h.exact);
  h.norm_coexact = l2_norm(B, h.coexact);
  h.norm_remainder = l2_norm(B, h.remainder);
  return h;
}

/// d of a scalar harmonic, as ambient vectors at the nodes.
inline std::vector<Eigen::Vector3d> exact_field(const HarmonicBasis& B, int l, int m) {
  std::vector<Eigen::Vector3d> out(B.node_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = B.ambient_grad(i, harmonic_index(l, m));
  return out;
}

/// d*(Y vol) = -x cross grad Y.
inline std::vector<Eigen::Vector3d> coexact_field(const HarmonicBasis& B, int l, int m) {
  std::vector<Eigen::Vector3d> out(B.node_count());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = -B.quadrature().nodes[i].cross(B.ambient_grad(i, harmonic_index(l, m)));
  return out;
}

// Kazdan-Warner identity for g = exp(2u) g_round.

struct ConformalMetric {
  Eigen::VectorXd u_coeffs;  ///< indexed by harmonic_index(l, m)

  int l_max() const {
    int top = 0;
    for (Eigen::Index j = 0; j < u_coeffs.size(); ++j)
      if (u_coeffs[j] != 0.0) top = static_cast<int>(std::floor(std::sqrt(static_cast<double>(j)) + 1e-12));
    return top;
  }

  static ConformalMetric single(int l, int m, double amplitude) {
    ConformalMetric g;
    g.u_coeffs = Eigen::VectorXd::Zero(harmonic_count(l));
    g.u_coeffs[harmonic_index(l, m)] = amplitude;
    return g;
  }
};

/// Harmonic basis on a rule of the given degree, band limit chosen so 2 l_max + 4 <= degree.
inline HarmonicBasis kazdan_warner_basis(int quadrature_degree) {
  if (quadrature_degree < 8) throw std::invalid_argument("kazdan_warner_basis: degree too small");
  return HarmonicBasis((quadrature_degree - 4) / 2, product_rule(quadrature_degree), 1);
}

/// Integrals of <grad K, grad x_j> exp(2u) dA for the coordinate functions x_j. grad K is the
/// gradient of the band-limited projection of K onto the basis.
inline std::array<double, 3> kazdan_warner_residual(const ConformalMetric& g, const HarmonicBasis& B) {
  const int lu = g.l_max();
  if (lu > B.l_max() - 2) throw std::invalid_argument("kazdan_warner_residual: u must satisfy l <= l_max - 2");
  const std::size_t n = B.node_count();
  std::vector<double> u(n, 0.0), K(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double lap = 0.0;
    for (Eigen::Index j = 0; j < g.u_coeffs.size(); ++j) {
      if (g.u_coeffs[j] == 0.0) continue;
      const int l = static_cast<int>(std::floor(std::sqrt(static_cast<double>(j)) + 1e-12));
      u[i] += g.u_coeffs[j] * B.value(i, static_cast<int>(j));
      lap -= l * (l + 1.0) * g.u_coeffs[j] * B.value(i, static_cast<int>(j));
    }
    K[i] = std::exp(-2.0 * u[i]) * (1.0 - lap);
  }
  std::array<double, 3> out{0.0, 0.0, 0.0};
  if (std::all_of(K.begin(), K.end(), [&](double k) { return k == K[0]; })) return out;
  const Eigen::VectorXd Kc = B.analyse(K);
  const auto& q = B.quadrature();
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d gradK = Eigen::Vector3d::Zero();
    for (std::size_t j = 1; j < B.count(); ++j) gradK += Kc[j] * B.ambient_grad(i, static_cast<int>(j));
    const Eigen::Vector3d& x = q.nodes[i];
    const double weight = q.weights[i] * std::exp(2.0 * u[i]);
    for (int a = 0; a < 3; ++a) {
      const Eigen::Vector3d grad_xa = Eigen::Vector3d::Unit(a) - x[a] * x;
      out[a] += weight * gradK.dot(grad_xa);
    }
  }
  return out;
}

/// Evaluates at `degree` and 2 * degree; throws PrecisionError if they disagree beyond `tol`.
inline std::array<double, 3> kazdan_warner_residual_checked(const ConformalMetric& g, int degree, double tol = 1e-6) {
  const auto lo = kazdan_warner_residual(g, kazdan_warner_basis(degree));
  const auto hi = kazdan_warner_residual(g, kazdan_warner_basis(2 * degree));
  for (int a = 0; a < 3; ++a)
    if (std::abs(lo[a] - hi[a]) > tol)
      throw PrecisionError("kazdan_warner_residual: quadrature degree " + std::to_string(degree) + " is insufficient");
  return lo;
}

}  // namespace bryant::sphere
