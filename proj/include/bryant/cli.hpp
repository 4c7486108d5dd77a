#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bryant/cylinder_evolution.hpp"
#include "bryant/rate_fit.hpp"
#include "bryant/soliton_identities.hpp"
#include "bryant/sphere_spectral.hpp"
#include "bryant/warped_soliton.hpp"

namespace bryant::cli {

inline constexpr const char* kToolName = "bryantlab";
inline constexpr const char* kToolVersion = "0.1.0";

/// Rate fits difference R twice; at 1e-10 the steepest quantity sits on integrator noise.
inline constexpr double kRatesTolerance = 1e-12;

enum Exit : int { kPass = 0, kFail = 1, kIoError = 2 };

/// Bad flag values; mapped to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  double tol = 1e-10;
  double t_max = 2e4;  ///< radial extent s_max for `bryant` and `rates`
  int lmax = -1;       ///< -1: per-command default
  std::string window;  ///< "lo:hi"; empty: per-command default
  std::uint64_t seed = 0;
  int seeds = 100;
  std::string out;
  std::string profile;
  std::string op = "tensor";
  std::string case_name = "vector";
  std::string quantity = "all";
  std::string config;

  nlohmann::json to_json() const {
    return {{"command", command}, {"tol", tol},         {"t_max", t_max},     {"lmax", lmax},
            {"window", window},   {"seed", seed},       {"seeds", seeds},     {"out", out},
            {"profile", profile}, {"operator", op},     {"case", case_name},  {"quantity", quantity}, {"config_file", config}};
  }
};

inline Window parse_window(const std::string& text, Window fallback) {
  if (text.empty()) return fallback;
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--window expects lo:hi, got '" + text + "'");
  try {
    std::size_t a = 0, b = 0;
    const std::string lo = text.substr(0, colon), hi = text.substr(colon + 1);
    Window w{std::stod(lo, &a), std::stod(hi, &b)};
    if (a != lo.size() || b != hi.size() || !(w.lo < w.hi)) throw std::invalid_argument(text);
    return w;
  } catch (const std::logic_error&) {
    throw UsageError("--window expects lo:hi with lo < hi, got '" + text + "'");
  }
}

inline nlohmann::json envelope(const RunConfig& cfg) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"config", cfg.to_json()}};
}

inline std::filesystem::path sibling(const std::filesystem::path& out, const std::string& suffix) {
  std::filesystem::path p = out;
  p.replace_extension(suffix);
  return p;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::ios_base::failure("cannot write " + path.string());
  f << text;
  if (!f) throw std::ios_base::failure("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

inline nlohmann::json records_json(const std::vector<CheckRecord>& rs, bool& all_pass) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rs) {
    arr.push_back(to_json(r));
    all_pass = all_pass && r.pass;
  }
  return arr;
}

inline std::string out_or(const RunConfig& cfg, const char* fallback) { return cfg.out.empty() ? fallback : cfg.out; }

// bryant: integrate the profile and write CSV plus metadata sidecar.
inline int cmd_bryant(const RunConfig& cfg, std::ostream& log) {
  if (!(cfg.t_max > 0.0)) throw UsageError("--t-max must be positive");
  if (!(cfg.tol > 0.0)) throw UsageError("--tol must be positive");
  ProfileSettings s;
  s.tolerance = cfg.tol;
  s.s_max = cfg.t_max;
  if (!(s.s_max > s.s_start)) throw UsageError("--t-max must exceed the series start " + std::to_string(s.s_start));
  const auto t0 = std::chrono::steady_clock::now();
  const SolitonProfile p = integrate_profile(s);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string out = out_or(cfg, "bryant_profile.csv");
  nlohmann::json extra = envelope(cfg);
  extra["first_integral_bound"] = first_integral_bound(s);
  extra["f_max"] = p.f().back();
  save_profile(p, out, extra);
  log << "profile: " << p.size() << " nodes, f_max " << p.f().back() << ", drift " << p.first_integral_drift()
      << ", " << secs << " s -> " << out << '\n';
  return kPass;
}

inline SolitonProfile profile_for(const RunConfig& cfg, double tol) {
  if (!cfg.profile.empty()) return load_profile(cfg.profile);
  ProfileSettings s;
  s.tolerance = tol;
  s.s_max = cfg.t_max;
  return integrate_profile(s);
}

// verify: identity residuals, tip limits, detector sensitivity, rate fits and roundness.
inline int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  if (cfg.profile.empty()) throw UsageError("verify needs --profile");
  if (!std::filesystem::exists(cfg.profile)) throw std::ios_base::failure("profile not found: " + cfg.profile);
  const Window w = parse_window(cfg.window, kIdentityWindow);
  const SolitonProfile p = load_profile(cfg.profile);
  const CurvatureReport rep = curvature_fields(p);
  bool ok = true;
  nlohmann::json j = envelope(cfg);
  j["identities"] = records_json(identity_records(rep, w), ok);

  const TipLimits tip = tip_limits(p.tip());
  std::vector<CheckRecord> tips{
      {"tip_sectional_curvatures", {0, 0}, std::abs(tip.sec_rad - tip.sec_sph), 1e-6,
       std::abs(tip.sec_rad - tip.sec_sph) <= 1e-6},
      {"tip_scalar_evolution", {0, 0}, std::abs(tip.evolution_lhs - tip.evolution_rhs), 1e-6,
       std::abs(tip.evolution_lhs - tip.evolution_rhs) <= 1e-6},
      {"tip_gradient_identity", {0, 0}, std::abs(tip.gradient_lhs - tip.gradient_rhs), 1e-6,
       std::abs(tip.gradient_lhs - tip.gradient_rhs) <= 1e-6}};
  j["tip"] = records_json(tips, ok);

  const double f_max = rep.f.back();
  if (f_max > 2e2) {
    const Window rw{kRateWindow.lo, std::min(kRateWindow.hi, 0.99 * f_max)};
    j["rates"] = records_json(rate_records(rep, rw), ok);
    const RateFit l2 = fit_roundness(rep, false, rw), sup = fit_roundness(rep, true, rw);
    j["roundness"] = {{"l2_zero_sentinel", l2.is_zero_sentinel()}, {"sup_zero_sentinel", sup.is_zero_sentinel()}};
    ok = ok && l2.is_zero_sentinel() && sup.is_zero_sentinel();
  } else {
    j["rates"] = nlohmann::json::array();
    j["rates_skipped"] = "profile ends below f = 200";
  }
  j["pass"] = ok;
  const std::string out = out_or(cfg, "verify.json");
  write_json(out, j);
  std::vector<CheckRecord> flat;
  for (const auto& r : identity_records(rep, w)) flat.push_back(r);
  std::ofstream csv(sibling(out, ".csv"));
  write_check_csv(flat, csv);
  log << "verify: " << (ok ? "pass" : "FAIL") << " -> " << out << '\n';
  return ok ? kPass : kFail;
}

// spectrum: Galerkin spectra of the sphere operators.
inline sphere::OperatorKind parse_operator(const std::string& s) {
  if (s == "scalar") return sphere::OperatorKind::scalar_laplacian;
  if (s == "one-form") return sphere::OperatorKind::one_form_rough;
  if (s == "tensor") return sphere::OperatorKind::tensor_operator;
  throw UsageError("--operator must be scalar, one-form or tensor");
}

inline int cmd_spectrum(const RunConfig& cfg, std::ostream& log) {
  using namespace sphere;
  const OperatorKind kind = parse_operator(cfg.op);
  const int lmax = cfg.lmax < 0 ? 12 : cfg.lmax;
  if (lmax > 24) throw UsageError("--lmax above 24 is out of scope");
  try {
    check_l_max(kind, lmax);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const SpectralTable t = operator_spectrum(kind, spectral_basis(lmax));
  const SpectralTable fine = operator_spectrum(kind, spectral_basis(lmax + 4));
  const double d = t.discretization_error;
  std::vector<CheckRecord> checks;
  auto add = [&](std::string name, double v, double thr, bool pass) { checks.push_back({std::move(name), {0, 0}, v, thr, pass}); };
  double res = 0.0;
  for (std::size_t i = 0; i < 10 && i < t.eigenvalues.size(); ++i)
    res = std::max(res, std::abs(t.eigenvalues[i] - fine.eigenvalues[i]));
  add("resolution_lmax_plus_4", res, 1e-6, res <= 1e-6);
  int bad_clusters = 0;
  for (const auto& c : t.clusters)
    if (c.multiplicity != irrep_multiplicity(t.elements, c.value)) ++bad_clusters;
  add("multiplicities_are_whole_irreps", bad_clusters, 0.0, bad_clusters == 0);
  if (kind == OperatorKind::scalar_laplacian) {
    double worst = 0.0;
    for (std::size_t k = 0; k < t.clusters.size(); ++k) {
      worst = std::max(worst, std::abs(t.clusters[k].value - k * (k + 1.0)));
      if (t.clusters[k].multiplicity != static_cast<int>(2 * k + 1)) worst = std::max(worst, 1.0);
    }
    add("eigenvalues_l(l+1)_mult_2l+1", worst, 1e-8, worst <= 1e-8);
  } else if (kind == OperatorKind::one_form_rough) {
    add("smallest_eigenvalue_is_1", std::abs(t.eigenvalues.front() - 1.0), 1e-3, std::abs(t.eigenvalues.front() - 1.0) <= 1e-3);
    add("no_eigenvalue_below_1", t.eigenvalues.front(), 1.0 - 10.0 * d, t.eigenvalues.front() >= 1.0 - 10.0 * d);
  } else {
    const bool kernel = t.clusters.size() > 1 && std::abs(t.clusters[0].value) <= 1e-8 && t.clusters[0].multiplicity == 1;
    add("kernel_is_span_of_metric", t.clusters[0].value, 1e-8, kernel);
    add("second_eigenvalue_is_2", t.clusters[1].value, 2.0, std::abs(t.clusters[1].value - 2.0) <= 1e-3);
    add("tracefree_block_at_least_4", t.tracefree_block.front(), 4.0 - 10.0 * d, t.tracefree_block.front() >= 4.0 - 10.0 * d);
  }
  bool ok = true;
  nlohmann::json j = envelope(cfg);
  j["operator"] = to_string(kind);
  j["l_max"] = lmax;
  j["quadrature_degree"] = t.quadrature_degree;
  j["discretization_error"] = d;
  j["table"] = t.to_json();
  if (!t.tracefree_block.empty()) {
    j["trace_block_min"] = t.trace_block.front();
    j["tracefree_block_min"] = t.tracefree_block.front();
  }
  j["checks"] = records_json(checks, ok);
  j["pass"] = ok;
  write_json(out_or(cfg, "spectrum.json"), j);
  log << "spectrum " << to_string(kind) << " l_max " << lmax << ": " << (ok ? "pass" : "FAIL") << '\n';
  return ok ? kPass : kFail;
}

// cylinder: decay of random hypothesis-normalized data on the shrinking cylinder.
inline int cmd_cylinder(const RunConfig& cfg, std::ostream& log) {
  using namespace cylinder;
  if (cfg.case_name != "vector" && cfg.case_name != "lichnerowicz") throw UsageError("--case must be vector or lichnerowicz");
  if (cfg.seeds < 1) throw UsageError("--seeds must be positive");
  const int lmax = cfg.lmax < 0 ? 6 : cfg.lmax;
  if (lmax < 1 || lmax > 12) throw UsageError("--lmax for cylinder must lie in [1, 12]");
  const Window tw = parse_window(cfg.window, {0.5, 0.999});
  if (!(tw.lo >= 0.5 && tw.hi < 1.0)) throw UsageError("--window for cylinder must lie in [0.5, 1)");
  const auto modes = std::make_shared<const CylinderModes>(lmax);
  std::vector<double> one_minus_t = geometric_samples(1.0 - tw.hi, 1.0 - tw.lo, 40);
  std::sort(one_minus_t.begin(), one_minus_t.end(), std::greater<>());

  const std::string out = out_or(cfg, "cylinder.json");
  std::ostringstream gaps;
  gaps << "seed,t,gap,lambda_star\n";
  gaps.precision(17);
  nlohmann::json per_seed = nlohmann::json::array();
  bool ok = true;
  double worst_rk4 = 0.0, worst_ac = -std::numeric_limits<double>::infinity();
  const bool vector_case = cfg.case_name == "vector";
  std::vector<ModeTrajectory> first_traj;
  for (int k = 0; k < cfg.seeds; ++k) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(k);
    std::vector<double> g, aux1, aux2;
    nlohmann::json row{{"seed", seed}};
    std::vector<ModeTrajectory> traj;
    if (vector_case) {
      const auto f = random_vector_field(modes, seed);
      for (double r : one_minus_t) {
        const auto pg = axial_projection_gap(f, 1.0 - r);
        g.push_back(pg.gap);
        gaps << seed << ',' << 1.0 - r << ',' << pg.gap << ',' << pg.lambda_star << '\n';
      }
      const RateFit fit = fit_power_law(one_minus_t, g);
      row["gap_exponent"] = fit.exponent;
      row["gap_constant"] = fit.constant;
      row["pass"] = fit.exponent >= 0.48;
      traj = trajectories(f);
    } else {
      const auto f = random_tensor_field(modes, seed);
      for (double r : one_minus_t) {
        const auto pg = ric_projection_gap(f, 1.0 - r);
        g.push_back(pg.gap);
        aux1.push_back(sigma_sup(f, 1.0 - r));
        aux2.push_back(chi_deviation(f, 1.0 - r).gap);
        gaps << seed << ',' << 1.0 - r << ',' << pg.gap << ',' << pg.lambda_star << '\n';
      }
      const RateFit gf = fit_power_law(one_minus_t, g), sf = fit_power_law(one_minus_t, aux1),
                    cf = fit_power_law(one_minus_t, aux2);
      const double sup_gap = *std::max_element(g.begin(), g.end());
      row["gap_exponent"] = gf.exponent;
      row["gap_sup"] = sup_gap;
      row["sigma_exponent"] = sf.exponent;
      row["chi_deviation_exponent"] = cf.exponent;
      bool pass = std::isfinite(sup_gap) && gf.exponent >= 0.0 && sf.exponent >= 0.98 && cf.exponent >= 0.98;
      if (k < 20) {
        std::vector<double> grid;
        for (int i = 0; i < 20; ++i) grid.push_back(0.05 + 0.9 * i / 19.0);
        const double v = anderson_chow_violation(f, grid, 1e-3);
        row["anderson_chow_violation"] = v;
        worst_ac = std::max(worst_ac, v);
        pass = pass && v <= 1e-6;
      }
      row["pass"] = pass;
      traj = trajectories(f);
    }
    for (const auto& m : traj) {
      if (m.c0 == 0.0) continue;
      const double rk = rk4_mode(m.p, m.at(0.01), 0.01, 0.999);
      worst_rk4 = std::max(worst_rk4, std::abs(rk / m.at(0.999) - 1.0));
    }
    if (k == 0) first_traj = traj;
    ok = ok && row["pass"].get<bool>();
    per_seed.push_back(row);
  }
  ok = ok && worst_rk4 <= 1e-6;

  nlohmann::json j = envelope(cfg);
  j["case"] = cfg.case_name;
  j["l_max"] = lmax;
  j["anderson_chow_form"] = "parabolic cylinder analog: d_t u <= Laplacian u, u = |h|^2 / R^2";
  j["seeds"] = per_seed;
  j["rk4_max_relative_error"] = worst_rk4;
  if (!vector_case) j["anderson_chow_max_violation"] = worst_ac;
  j["pass"] = ok;
  write_json(out, j);
  write_text(sibling(out, ".gaps.csv"), gaps.str());
  std::ostringstream tr;
  tr << "t,mode_id,coefficient\n";
  tr.precision(17);
  for (double r : one_minus_t)
    for (const auto& m : first_traj) tr << 1.0 - r << ',' << m.mode_id << ',' << m.at(1.0 - r) << '\n';
  write_text(sibling(out, ".trajectories.csv"), tr.str());
  log << "cylinder " << cfg.case_name << ", " << cfg.seeds << " seeds: " << (ok ? "pass" : "FAIL") << '\n';
  return ok ? kPass : kFail;
}

// rates: asymptotic exponent fits, with a tolerance-halving stability check.
inline int cmd_rates(const RunConfig& cfg, std::ostream& log) {
  const Window w = parse_window(cfg.window, kRateWindow);
  if (w.lo < 1e2) throw UsageError("--window for rates must start at r >= 100");
  std::vector<RateQuantity> qs;
  if (cfg.quantity == "all") {
    qs = all_rate_quantities();
  } else {
    for (RateQuantity q : all_rate_quantities())
      if (to_string(q) == cfg.quantity) qs.push_back(q);
    if (qs.empty()) throw UsageError("unknown --quantity " + cfg.quantity);
  }
  const CurvatureReport rep = curvature_fields(profile_for(cfg, cfg.tol));
  if (w.hi > rep.f.back()) throw UsageError("--window exceeds the profile (f_max " + std::to_string(rep.f.back()) + ")");
  std::unique_ptr<CurvatureReport> half;
  if (cfg.profile.empty()) half = std::make_unique<CurvatureReport>(curvature_fields(profile_for(cfg, 0.5 * cfg.tol)));
  bool ok = true;
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "quantity,exponent,constant,rms_residual,bound,pass\n";
  csv.precision(17);
  for (RateQuantity q : qs) {
    const RateFit fit = fit_asymptotic_rate(rep, q, w);
    const auto bound = rate_bound(q);
    bool pass = !bound || fit.exponent <= *bound + kRateSlack;
    nlohmann::json row{{"quantity", to_string(q)},    {"exponent", fit.exponent},   {"constant", fit.constant},
                       {"rms_residual", fit.rms_residual}, {"window", {w.lo, w.hi}}, {"samples", fit.samples}};
    row["bound"] = bound ? nlohmann::json(*bound + kRateSlack) : nlohmann::json(nullptr);
    if (half) {
      const RateFit h = fit_asymptotic_rate(*half, q, w);
      row["exponent_half_tol"] = h.exponent;
      row["stable"] = std::abs(h.exponent - fit.exponent) <= 0.02;
      pass = pass && std::abs(h.exponent - fit.exponent) <= 0.02;
    }
    row["pass"] = pass;
    ok = ok && pass;
    rows.push_back(row);
    csv << to_string(q) << ',' << fit.exponent << ',' << fit.constant << ',' << fit.rms_residual << ','
        << (bound ? std::to_string(*bound + kRateSlack) : "") << ',' << (pass ? "true" : "false") << '\n';
  }
  nlohmann::json j = envelope(cfg);
  j["rates"] = rows;
  j["pass"] = ok;
  const std::string out = out_or(cfg, "rates.json");
  write_json(out, j);
  write_text(sibling(out, ".csv"), csv.str());
  log << "rates: " << (ok ? "pass" : "FAIL") << " -> " << out << '\n';
  return ok ? kPass : kFail;
}

/// Splices `key = value` lines of a --config file in as `--key value` right after the
/// subcommand, so that later command-line flags win.
inline std::vector<std::string> with_config_file(std::vector<std::string> args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return args;
  if (it + 1 == args.end()) throw UsageError("--config needs a path");
  const std::string path = *(it + 1);
  args.erase(it, it + 2);
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read config " + path);
  std::vector<std::string> injected;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string x) {
      const auto a = x.find_first_not_of(" \t\r"), b = x.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : x.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty() || key == "config") throw UsageError(path + ":" + std::to_string(n) + ": bad key");
    injected.push_back("--" + key);
    injected.push_back(value);
  }
  const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return !a.empty() && a[0] != '-'; });
  if (sub == args.end()) throw UsageError("--config given without a subcommand");
  injected.insert(injected.begin(), {"--config", path});
  args.insert(sub + 1, injected.begin(), injected.end());
  return args;
}

/// Parses arguments and dispatches. Exit codes: 0 pass, 1 check failure or usage error,
/// 2 input/output or integrator failure.
inline int run(std::vector<std::string> args, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Numerical checks for the Bryant soliton and its cylinder limit", kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  RunConfig cfg;

  auto* bryant = app.add_subcommand("bryant", "integrate the soliton profile");
  bryant->add_option("--tol", cfg.tol, "integrator tolerance");
  bryant->add_option("--t-max", cfg.t_max, "radial extent s_max of the profile");
  bryant->add_option("--out", cfg.out, "profile CSV path");

  auto* verify = app.add_subcommand("verify", "check soliton identities on a profile");
  verify->add_option("--profile", cfg.profile, "profile CSV");
  verify->add_option("--window", cfg.window, "identity window in f, lo:hi");
  verify->add_option("--out", cfg.out, "JSON report path");

  auto* spectrum = app.add_subcommand("spectrum", "spectra of the sphere operators");
  spectrum->add_option("--operator", cfg.op, "scalar | one-form | tensor");
  spectrum->add_option("--lmax", cfg.lmax, "harmonic band limit");
  spectrum->add_option("--out", cfg.out, "JSON report path");

  auto* cyl = app.add_subcommand("cylinder", "decay of random data on the shrinking cylinder");
  cyl->add_option("--case", cfg.case_name, "vector | lichnerowicz");
  cyl->add_option("--lmax", cfg.lmax, "band limit of the random data");
  cyl->add_option("--seed", cfg.seed, "first seed");
  cyl->add_option("--seeds", cfg.seeds, "number of seeds");
  cyl->add_option("--window", cfg.window, "time window, lo:hi");
  cyl->add_option("--out", cfg.out, "JSON report path");

  auto* rates = app.add_subcommand("rates", "asymptotic rate fits");
  rates->add_option("--profile", cfg.profile, "profile CSV (default: integrate)");
  double rates_tol = kRatesTolerance;
  rates->add_option("--tol", rates_tol, "integrator tolerance when integrating");
  rates->add_option("--t-max", cfg.t_max, "radial extent when integrating");
  rates->add_option("--window", cfg.window, "r window, lo:hi");
  rates->add_option("--quantity", cfg.quantity, "quantity name or 'all'");
  rates->add_option("--out", cfg.out, "JSON report path");

  for (auto* sub : app.get_subcommands({}))
    sub->add_option("--config", cfg.config, "key=value file; command-line flags take precedence");
  try {
    args = with_config_file(std::move(args));
  } catch (const UsageError& e) {
    err << kToolName << ": " << e.what() << '\n';
    return kFail;
  } catch (const std::ios_base::failure& e) {
    err << kToolName << ": " << e.what() << '\n';
    return kIoError;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return kPass;
  } catch (const CLI::CallForVersion&) {
    log << kToolVersion << '\n';
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << kToolName << ": " << e.what() << '\n';
    return kFail;
  }

  try {
    if (bryant->parsed()) return cfg.command = "bryant", cmd_bryant(cfg, log);
    if (verify->parsed()) return cfg.command = "verify", cmd_verify(cfg, log);
    if (spectrum->parsed()) return cfg.command = "spectrum", cmd_spectrum(cfg, log);
    if (cyl->parsed()) return cfg.command = "cylinder", cmd_cylinder(cfg, log);
    if (rates->parsed()) return cfg.command = "rates", cfg.tol = rates_tol, cmd_rates(cfg, log);
  } catch (const UsageError& e) {
    err << kToolName << ": " << e.what() << '\n';
    return kFail;
  } catch (const IntegrationError& e) {
    err << kToolName << ": integrator failure: " << e.what() << '\n';
    return kIoError;
  } catch (const ProfileFormatError& e) {
    err << kToolName << ": bad profile: " << e.what() << '\n';
    return kIoError;
  } catch (const std::ios_base::failure& e) {
    err << kToolName << ": " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << kToolName << ": " << e.what() << '\n';
    return kIoError;
  }
  return kFail;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}

}  // namespace bryant::cli
