#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "bryant/sphere_spectral.hpp"

using namespace bryant::sphere;
using doctest::Approx;

namespace {

// Closed form of the integral of x^a y^b z^c over the unit sphere (zero unless all even).
double monomial_integral(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  auto g = [](double x) { return std::tgamma(x); };
  const double A = (a + 1) / 2.0, B = (b + 1) / 2.0, C = (c + 1) / 2.0;
  return 2.0 * g(A) * g(B) * g(C) / g(A + B + C);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t n) {
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

const SpectralTable& one_form_table() {
  static const SpectralTable t = one_form_operator_spectrum(spectral_basis(8));
  return t;
}

const SpectralTable& tensor_table() {
  static const SpectralTable t = tensor_operator_spectrum(spectral_basis(6));
  return t;
}

}  // namespace

TEST_CASE("product rule integrates polynomials exactly up to its degree") {
  const SphereQuadrature q = product_rule(12);
  double wsum = 0.0;
  for (double w : q.weights) wsum += w;
  CHECK(wsum == Approx(4.0 * std::numbers::pi).epsilon(1e-14));
  for (int a = 0; a <= 12; ++a)
    for (int b = 0; a + b <= 12; ++b)
      for (int c = 0; a + b + c <= 12; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i)
          s += q.weights[i] * std::pow(q.nodes[i].x(), a) * std::pow(q.nodes[i].y(), b) * std::pow(q.nodes[i].z(), c);
        CHECK(std::abs(s - monomial_integral(a, b, c)) < 1e-13);
      }
}

TEST_CASE("quadrature files round trip and reject bad input") {
  const auto dir = std::filesystem::temp_directory_path() / "bryant_tests";
  std::filesystem::create_directories(dir);
  const SphereQuadrature q = product_rule(6);
  save_quadrature(q, dir / "q.txt");
  const SphereQuadrature r = load_quadrature(dir / "q.txt");
  CHECK(r.degree == 6);
  REQUIRE(r.size() == q.size());
  CHECK((r.nodes[3] - q.nodes[3]).norm() < 1e-15);
  std::ofstream(dir / "bad.txt") << "# degree 2\n1 0 0\n";
  CHECK_THROWS(load_quadrature(dir / "bad.txt"));
  std::ofstream(dir / "off.txt") << "# degree 2\n2 0 0 1\n";
  CHECK_THROWS(load_quadrature(dir / "off.txt"));
  std::ofstream(dir / "nodeg.txt") << "1 0 0 1\n";
  CHECK_THROWS(load_quadrature(dir / "nodeg.txt"));
  CHECK_THROWS(load_quadrature(dir / "absent.txt"));
}

TEST_CASE("harmonics: orthonormality, addition theorem, Laplacian and gradient") {
  const HarmonicBasis B(8, product_rule(20), 3);
  const std::size_t k = B.count();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < B.node_count(); ++i)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) G(a, b) += B.quadrature().weights[i] * B.value(i, a) * B.value(i, b);
  CHECK((G - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-13);

  for (std::size_t i = 0; i < B.node_count(); i += 17)
    for (int l = 0; l <= 8; ++l) {
      double s = 0.0;
      for (int m = -l; m <= l; ++m) s += std::pow(B.value(i, harmonic_index(l, m)), 2);
      CHECK(s == Approx((2 * l + 1) / (4 * std::numbers::pi)).epsilon(1e-12));
      const int j = harmonic_index(l, l > 0 ? 1 - l : 0);
      CHECK(B.hess(i, j, 0, 0) + B.hess(i, j, 1, 1) == Approx(-l * (l + 1.0) * B.value(i, j)).epsilon(1e-10).scale(1.0));
    }

  // gradient against a central difference along a great circle
  const std::size_t i = 11;
  const Eigen::Vector3d x = B.quadrature().nodes[i];
  const Eigen::Vector3d w = B.frame(i).first;
  const double h = 1e-5;
  const auto plus = solid_harmonic_jets(std::cos(h) * x + std::sin(h) * w, 8, 0);
  const auto minus = solid_harmonic_jets(std::cos(h) * x - std::sin(h) * w, 8, 0);
  for (int j : {1, 5, 20, 70}) CHECK((plus[j].v - minus[j].v) / (2 * h) == Approx(B.grad(i, j, 0)).epsilon(1e-7));
}

TEST_CASE("scalar Laplacian spectrum is l(l+1) with multiplicity 2l+1") {
  const SpectralTable t = scalar_spectrum(spectral_basis(6));
  REQUIRE(t.clusters.size() == 7);
  for (int l = 0; l <= 6; ++l) {
    CHECK(t.clusters[l].value == Approx(l * (l + 1.0)).epsilon(1e-10).scale(1.0));
    CHECK(t.clusters[l].multiplicity == 2 * l + 1);
  }
  CHECK(t.to_json()[1]["multiplicity"] == 3);
  CHECK(t.to_json()[1]["operator"] == "scalar_laplacian");
  CHECK_THROWS_AS(scalar_spectrum(spectral_basis(1)), std::invalid_argument);
}

TEST_CASE("one-form rough Laplacian: bottom of the spectrum is 1") {
  const auto& t = one_form_table();
  CHECK(t.eigenvalues.front() == Approx(1.0).epsilon(1e-8));
  CHECK(t.eigenvalues.front() >= 1.0 - 10.0 * t.discretization_error);
  CHECK(t.discretization_error < 1e-9);
  // exact and coexact families are degenerate: l(l+1) - 1 with multiplicity 2(2l+1)
  for (int l = 1; l <= 8; ++l) {
    CHECK(t.clusters[l - 1].value == Approx(l * (l + 1.0) - 1.0).epsilon(1e-9));
    CHECK(t.clusters[l - 1].multiplicity == 2 * (2 * l + 1));
    CHECK(t.clusters[l - 1].multiplicity == irrep_multiplicity(t.elements, t.clusters[l - 1].value));
  }
  CHECK_THROWS_AS(one_form_operator_spectrum(spectral_basis(2)), std::invalid_argument);
}

TEST_CASE("spectra are invariant under a random rotation of the quadrature grid") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Matrix3d R = rotation_from_uniform(u(rng), u(rng), u(rng));
  CHECK((R * R.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-14);
  const int l = 8;
  const HarmonicBasis rotated(l, product_rule(default_assembly_degree(l)).rotated(R), 3);
  const SpectralTable t = one_form_operator_spectrum(rotated);
  CHECK(max_abs_diff(t.eigenvalues, one_form_table().eigenvalues, t.eigenvalues.size()) < 1e-8);
  const SpectralTable tt = tensor_operator_spectrum(HarmonicBasis(6, product_rule(default_assembly_degree(6)).rotated(R), 3));
  CHECK(max_abs_diff(tt.eigenvalues, tensor_table().eigenvalues, tt.eigenvalues.size()) < 1e-8);
}

TEST_CASE("tensor operator: kernel is the metric, then 2, trace-free part at least 4") {
  const auto& t = tensor_table();
  REQUIRE(t.kernel_basis.cols() == 1);
  Eigen::Index top = 0;
  t.kernel_basis.col(0).cwiseAbs().maxCoeff(&top);
  CHECK(t.elements[top].family == Family::trace);
  CHECK(t.elements[top].l == 0);
  CHECK(std::abs(t.kernel_basis(top, 0)) == Approx(t.kernel_basis.col(0).norm()).epsilon(1e-10));
  CHECK(t.clusters[0].multiplicity == 1);
  CHECK(t.clusters[1].value == Approx(2.0).epsilon(1e-9));
  CHECK(t.clusters[1].multiplicity == 3);
  CHECK(t.tracefree_block.front() >= 4.0 - 10.0 * t.discretization_error);
  CHECK(t.tracefree_block.front() == Approx(6.0).epsilon(1e-9));
  CHECK(t.trace_block.front() == Approx(0.0).scale(1.0));
  for (const auto& c : t.clusters) CHECK(c.multiplicity == irrep_multiplicity(t.elements, c.value));
}

TEST_CASE("resolution convergence: l_max and l_max + 4 agree on the lowest eigenvalues") {
  for (OperatorKind kind : {OperatorKind::one_form_rough, OperatorKind::tensor_operator}) {
    const SpectralTable a = operator_spectrum(kind, spectral_basis(4));
    const SpectralTable b = operator_spectrum(kind, spectral_basis(8));
    CHECK(max_abs_diff(a.eigenvalues, b.eigenvalues, 10) < 1e-6);
  }
}

TEST_CASE("assembled systems are symmetric and asymmetric input is rejected") {
  const HarmonicBasis B = spectral_basis(4);
  for (OperatorKind kind : {OperatorKind::scalar_laplacian, OperatorKind::one_form_rough, OperatorKind::tensor_operator}) {
    const GalerkinSystem s = assemble(kind, B);
    CHECK(asymmetry(s.stiffness) < 1e-8);
    CHECK(asymmetry(s.mass) < 1e-8);
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
  A(0, 1) = 1e-3;
  CHECK_THROWS_AS(solve_galerkin(A, Eigen::MatrixXd::Identity(3, 3)), AssemblyError);
}

TEST_CASE("no nonzero one-form solves the shifted equation below 1") {
  const GalerkinSystem s = assemble_one_form(spectral_basis(6));
  for (double mu : {-1.0, 0.0, 0.5, 0.9}) {
    const Eigen::VectorXd sv = shifted_singular_values(s, mu);
    CHECK(sv.minCoeff() >= 1.0 - mu - 1e-6);
    CHECK(shifted_nullity(s, mu) == 0);
  }
  CHECK(shifted_nullity(s, 1.0) == 6);
}

TEST_CASE("tensor shifted equation below 2 is solved only by multiples of the metric") {
  const GalerkinSystem s = assemble_tensor(spectral_basis(5));
  CHECK(shifted_nullity(s, 0.0) == 1);
  for (double mu : {-1.0, 1.0, 1.9}) CHECK(shifted_nullity(s, mu) == 0);
  CHECK(shifted_nullity(s, 2.0) == 3);
}

TEST_CASE("Hodge splitting of one-forms") {
  const HarmonicBasis B = spectral_basis(6);
  const auto ex = hodge_decompose(exact_field(B, 1, 0), B);
  CHECK(ex.norm_coexact <= 1e-8);
  CHECK(ex.norm_remainder <= 1e-8);
  const auto co = hodge_decompose(coexact_field(B, 1, 0), B);
  CHECK(co.norm_exact <= 1e-8);
  CHECK(co.norm_remainder <= 1e-8);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Eigen::Vector3d> sigma(B.node_count(), Eigen::Vector3d::Zero());
  for (int l = 1; l <= 4; ++l)
    for (int m = -l; m <= l; ++m) {
      const double a = n(rng), b = n(rng);
      const auto e = exact_field(B, l, m), c = coexact_field(B, l, m);
      for (std::size_t i = 0; i < sigma.size(); ++i) sigma[i] += a * e[i] + b * c[i];
    }
  const auto h = hodge_decompose(sigma, B);
  CHECK(h.norm_remainder <= 1e-8 * h.norm_total);
  CHECK(std::abs(h.norm_total * h.norm_total - h.norm_exact * h.norm_exact - h.norm_coexact * h.norm_coexact) <=
        1e-8 * h.norm_total * h.norm_total);
  // same split at doubled band limit
  const HarmonicBasis B2 = spectral_basis(12);
  std::vector<Eigen::Vector3d> sigma2(B2.node_count(), Eigen::Vector3d::Zero());
  std::mt19937_64 rng2(3);
  for (int l = 1; l <= 4; ++l)
    for (int m = -l; m <= l; ++m) {
      const double a = n(rng2), b = n(rng2);
      const auto e = exact_field(B2, l, m), c = coexact_field(B2, l, m);
      for (std::size_t i = 0; i < sigma2.size(); ++i) sigma2[i] += a * e[i] + b * c[i];
    }
  CHECK(hodge_decompose(sigma2, B2).norm_exact == Approx(h.norm_exact).epsilon(1e-10));
  CHECK_THROWS_AS(hodge_decompose(std::vector<Eigen::Vector3d>(3), B), std::invalid_argument);
}

TEST_CASE("Kazdan-Warner residuals vanish up to quadrature error") {
  const auto zero = kazdan_warner_residual(ConformalMetric::single(2, 0, 0.0), kazdan_warner_basis(30));
  for (double v : zero) CHECK(v == 0.0);
  for (const auto& g : {ConformalMetric::single(2, 0, 0.1), ConformalMetric::single(3, 1, 0.2)}) {
    const auto r = kazdan_warner_residual_checked(g, 30);
    for (double v : r) CHECK(std::abs(v) <= 1e-6);
  }
  // below the roundoff floor the error falls by orders of magnitude when the degree doubles
  auto worst = [](const std::array<double, 3>& r) { return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])}); };
  const auto g = ConformalMetric::single(3, 1, 0.2);
  CHECK(worst(kazdan_warner_residual(g, kazdan_warner_basis(30))) >=
        4.0 * worst(kazdan_warner_residual(g, kazdan_warner_basis(60))));
  CHECK_THROWS_AS(kazdan_warner_residual_checked(ConformalMetric::single(1, 1, 2.0), 12), PrecisionError);
  CHECK_THROWS_AS(kazdan_warner_residual(ConformalMetric::single(6, 0, 0.1), kazdan_warner_basis(16)),
                  std::invalid_argument);
}
