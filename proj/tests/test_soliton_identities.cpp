#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "bryant/soliton_identities.hpp"

using namespace bryant;
using doctest::Approx;

namespace {

const SolitonProfile& profile() {
  static const SolitonProfile p = integrate_profile(ProfileSettings{});
  return p;
}

const CurvatureReport& report() {
  static const CurvatureReport r = curvature_fields(profile());
  return r;
}

// Warped metric with prescribed closed-form phi and f on a log-uniform grid.
template <class Phi, class DPhi, class F, class DF>
SolitonProfile synthetic(Phi phi, DPhi dphi, F f, DF df) {
  const auto s = log_uniform_grid(1e-1, 1e3, 400);
  std::vector<double> a, b, c, d;
  for (double x : s) {
    a.push_back(phi(x));
    b.push_back(dphi(x));
    c.push_back(f(x));
    d.push_back(df(x));
  }
  ProfileSettings cfg;
  cfg.s_start = 1e-1;
  cfg.s_max = 1e3;
  cfg.nodes_per_decade = 400;
  return SolitonProfile(s, a, b, c, d, cfg);
}

}  // namespace

TEST_CASE("flat space: all curvature vanishes and the soliton identities detect a non-soliton") {
  const auto p = synthetic([](double s) { return s; }, [](double) { return 1.0; },
                           [](double s) { return 1.0 + s * s / 4.0; }, [](double s) { return s / 2.0; });
  const auto r = curvature_fields(p);
  for (std::size_t i = 50; i < r.size() - 50; i += 101) {
    CHECK(std::abs(r.R[i]) < 1e-9);
    CHECK(std::abs(r.sec_rad[i]) < 1e-9);
    CHECK(std::abs(r.sec_sph[i]) < 1e-9);
    CHECK(r.lambda_principal[i] == Approx(1.0 / r.s[i]));
    CHECK(r.K_intrinsic[i] == Approx(1.0 / (r.s[i] * r.s[i])));
  }
  CHECK(check_trace_identity(r) > 0.1);
}

TEST_CASE("round cylinder: R = 2/c^2 and the Gauss equation holds") {
  const double c = 3.0;
  const auto p = synthetic([&](double) { return c; }, [](double) { return 0.0; }, [](double s) { return s; },
                           [](double) { return 1.0; });
  const auto r = curvature_fields(p);
  for (std::size_t i = 50; i < r.size() - 50; i += 101) {
    CHECK(r.R[i] == Approx(2.0 / (c * c)).epsilon(1e-9));
    CHECK(r.sec_sph[i] == Approx(1.0 / (c * c)).epsilon(1e-9));
    CHECK(std::abs(r.ric_rad[i]) < 1e-9);
  }
  CHECK(check_level_set_geometry(r).gauss_frame < 1e-12);
}

TEST_CASE("report curvature agrees with the ODE values on the Bryant profile") {
  const auto& p = profile();
  const auto& r = report();
  for (std::size_t i : {500ul, 2000ul, 4000ul, 6000ul}) {
    CHECK(r.R[i] == Approx(p.scalar_curvature_ode(i)).epsilon(1e-6));
    CHECK(r.R[i] + r.f_prime[i] * r.f_prime[i] == Approx(1.0).epsilon(1e-8));
  }
  CHECK_THROWS_AS(curvature_fields(SolitonProfile({1, 2, 3, 5, 8, 13, 21, 34}, std::vector<double>(8, 1.0),
                                                  std::vector<double>(8, 0.0), std::vector<double>(8, 1.0),
                                                  std::vector<double>(8, 0.0), ProfileSettings{})),
                  std::invalid_argument);
}

TEST_CASE("identity residuals are at discretization level on the Bryant profile") {
  const auto recs = identity_records(report());
  REQUIRE(recs.size() == 8);
  for (const auto& c : recs) {
    INFO(c.check << " = " << c.value);
    CHECK(c.pass);
  }
  CHECK(check_scalar_evolution(report()) <= 1e-6);
  CHECK(check_gradient_identity(report()) <= 1e-6);
  CHECK(check_trace_identity(report()) <= 1e-6);
  CHECK(check_level_set_geometry(report()).gauss_frame <= 1e-8);
}

TEST_CASE("a 1% corruption raises every detector by three orders of magnitude") {
  for (const auto& c : corruption_records(profile())) {
    INFO(c.check << " = " << c.value);
    CHECK(c.pass);
  }
  const auto bad = identity_records(curvature_fields(with_scaled_column(profile(), ProfileColumn::phi, 1.01)));
  CHECK_FALSE(bad.front().pass);
  CHECK(bad.front().check == "scalar_evolution");
}

TEST_CASE("T identity and asymptotic rates") {
  const auto t = check_T_identity(report());
  CHECK(t.radial <= 1e-6);
  CHECK(t.spherical <= 1e-6);
  CHECK(t.T_fit.exponent <= -1.5 + kRateSlack);
  CHECK(t.DT_fit.exponent <= -2.0 + kRateSlack);
  for (const auto& c : rate_records(report())) {
    INFO(c.check << " exponent " << c.value);
    CHECK(c.pass);
  }
  CHECK(fit_asymptotic_rate(report(), RateQuantity::fR_minus_1).exponent <= -0.25 + kRateSlack);
  CHECK(fit_asymptotic_rate(report(), RateQuantity::grad_R).exponent <= -1.75 + kRateSlack);
  CHECK(fit_asymptotic_rate(report(), RateQuantity::warp_drift).exponent <= -1.125 + kRateSlack);
  CHECK_THROWS_AS(fit_asymptotic_rate(report(), RateQuantity::grad_R, {10.0, 100.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_asymptotic_rate(report(), RateQuantity::grad_R, {1e2, 1e6}), std::invalid_argument);
}

TEST_CASE("level-set curvatures approach 1/(2r)") {
  const double r = 1e3;
  const double lam = at_level(report(), r, [&](std::size_t i) { return report().lambda_principal[i]; });
  const double K = at_level(report(), r, [&](std::size_t i) { return report().K_intrinsic[i]; });
  CHECK(lam == Approx(0.5 / r).epsilon(0.01));
  CHECK(K == Approx(0.5 / r).epsilon(0.01));
}

TEST_CASE("tip limits") {
  const TipLimits t = tip_limits(profile().tip());
  CHECK(t.sec_rad == Approx(1.0 / 6).epsilon(1e-12));
  CHECK(t.sec_sph == Approx(1.0 / 6).epsilon(1e-12));
  CHECK(t.R0 == Approx(1.0).epsilon(1e-12));
  CHECK(t.R2 == Approx(-1.0 / 9).epsilon(1e-12));
  CHECK(t.evolution_lhs == Approx(t.evolution_rhs));
  CHECK(std::abs(t.evolution_rhs) < 1e-12);
  CHECK(t.gradient_lhs == Approx(t.gradient_rhs));
}

TEST_CASE("roundness integrals vanish identically under symmetry") {
  const auto q = sphere::product_rule(8);
  const Roundness rd = roundness_at(report(), 500.0, q);
  CHECK(rd.l2 == 0.0);
  CHECK(rd.sup == 0.0);
  CHECK(rd.mu == Approx(at_level(report(), 500.0, [&](std::size_t i) { return report().R[i]; })));
  CHECK(fit_roundness(report(), false).is_zero_sentinel());
  CHECK(fit_roundness(report(), true).is_zero_sentinel());
}

TEST_CASE("check records serialize") {
  const CheckRecord c{"x", {1, 2}, 0.5, 1.0, true};
  CHECK(to_json(c)["check"] == "x");
  std::ostringstream os;
  write_check_csv({c}, os);
  CHECK(os.str() == "check,window_lo,window_hi,value,threshold,pass\nx,1,2,0.5,1,true\n");
  for (RateQuantity q : all_rate_quantities()) CHECK(to_string(q) != "unknown");
}
