// Subcommand runner behind the simdyn executable.
//
// execute() computes every artifact in memory; run() adds the manifest and
// writes files only after the whole computation succeeded, so a failing run
// leaves the output directory untouched.
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "simdyn/cli/config.hpp"
#include "simdyn/cli/output.hpp"
#include "simdyn/simdyn.hpp"

namespace simdyn::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kOther = 1, kConfig = 2, kBudget = 3, kConvergence = 4, kHypothesis = 5 };

struct RunRequest {
  std::string subcommand;
  Config config;
  unsigned threads = 1;
  bool emit_plot_data = false;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct RunOutput {
  std::vector<Artifact> files;  // summary.json, series.csv and optionally plot.csv
  Json summary;
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"pressure", "spectrum", "normalize-check", "skew-match",
                                              "average",  "correlations", "variance", "clt",
                                              "lil",      "kappa",    "count",    "derivative-check"};
  return names;
}

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kConfig;
  if (dynamic_cast<const DomainError*>(&e)) return kConfig;
  if (dynamic_cast<const BudgetExceeded*>(&e) || dynamic_cast<const Overflow*>(&e)) return kBudget;
  if (dynamic_cast<const NoConvergence*>(&e)) return kConvergence;
  if (dynamic_cast<const HypothesisFailure*>(&e)) return kHypothesis;
  return kOther;
}

namespace detail {

// Runs a parsing step and re-raises input errors at the config line of
// section.key.
template <class Fn>
auto at_key(const Config& cfg, const std::string& section, const std::string& key, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    cfg.fail_at(section, key, e.what());
  } catch (const DomainError& e) {
    cfg.fail_at(section, key, e.what());
  }
}

struct Model {
  std::vector<int> degrees;
  MapFamily family;
  std::string potential_text;
  Potential potential;
  std::size_t q;
  double tol;
  double theta;
  double alpha;
  std::uint64_t seed;
};

inline Model read_model(const Config& cfg) {
  const auto degrees = cfg.get_int_list("model", "degrees");
  auto family = at_key(cfg, "model", "degrees", [&] { return MapFamily::from_degrees(degrees); });
  const std::string ptext = cfg.get_string("model", "potential", std::string("const:0"));
  auto potential = at_key(cfg, "model", "potential", [&] { return Potential::parse(ptext, &family); });
  const std::size_t q = cfg.get_count("model", "resolution", 512);
  at_key(cfg, "model", "resolution", [&] { require_resolution(q); });
  const double tol = cfg.get_double("model", "tol", 1e-13);
  if (!(tol > 0.0)) cfg.fail_at("model", "tol", "must be positive");
  const double theta = cfg.get_double("model", "theta", 0.5);
  if (!(theta > 0.0 && theta < 1.0)) cfg.fail_at("model", "theta", "must lie in (0, 1)");
  const double alpha = cfg.get_double("model", "alpha", 1.0);
  if (!(alpha > 0.0 && alpha <= 1.0)) cfg.fail_at("model", "alpha", "must lie in (0, 1]");
  const long long seed = cfg.get_int("run", "seed", 1);
  if (seed < 0) cfg.fail_at("run", "seed", "must be non-negative");
  return Model{degrees, std::move(family), ptext, std::move(potential), q, tol, theta, alpha,
               static_cast<std::uint64_t>(seed)};
}

inline Potential read_potential(const Config& cfg, const Model& m, const std::string& section, const std::string& key,
                                const std::string& fallback) {
  const std::string text = cfg.get_string(section, key, fallback);
  return at_key(cfg, section, key, [&] { return Potential::parse(text, &m.family); });
}

inline Word read_word(const Config& cfg, const Model& m, const std::string& section, const std::string& key,
                      const std::string& fallback) {
  const std::string text = cfg.get_string(section, key, fallback);
  return at_key(cfg, section, key, [&] { return Word::parse(text, m.family.size()); });
}

inline std::size_t read_positive(const Config& cfg, const std::string& section, const std::string& key,
                                 long long fallback) {
  const std::size_t v = cfg.get_count(section, key, fallback);
  if (v == 0) cfg.fail_at(section, key, "must be >= 1");
  return v;
}

inline Json base_summary(const std::string& sub, const Config& cfg, const Model& m) {
  Json j;
  j["subcommand"] = sub;
  j["config_hash"] = cfg.hash();
  j["degrees"] = m.degrees;
  j["potential"] = m.potential.label();
  j["q"] = m.q;
  return j;
}

inline std::string num(double v) { return format_number(v); }
inline std::string num(std::uint64_t v) { return format_number(v); }

inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return Json(format_number(v));
}

struct Ctx {
  const Config& cfg;
  Model model;
  WorkerPool pool;
};

inline SpectralData spectral(const Ctx& c, const TransferMatrix<double>& m, bool gap) {
  SpectralOptions opt;
  opt.tol = c.model.tol;
  opt.estimate_gap = gap;
  return leading_spectral_data(m, opt);
}

inline CsvTable eigen_table(const SpectralData& s, std::size_t q) {
  CsvTable t({"x", "phi", "nu"});
  for (std::size_t i = 0; i <= q; ++i) {
    t.add_row({num(static_cast<double>(i) / static_cast<double>(q)), num(s.phi[i]), num(s.nu[i])});
  }
  return t;
}

using Result = std::pair<Json, CsvTable>;

inline Result run_pressure(Ctx& c, bool spectrum) {
  const auto& m = c.model;
  const bool gap = spectrum ? c.cfg.get_bool("spectrum", "estimate_gap", true) : false;
  const auto op = build_collective_operator(m.family, m.potential, m.q, c.pool);
  const auto s = spectral(c, op, gap);
  Json j = base_summary(spectrum ? "spectrum" : "pressure", c.cfg, m);
  j["rho"] = s.rho;
  j["pressure"] = s.pressure();
  if (spectrum) {
    j["gap"] = s.gap;
    j["alpha"] = m.alpha;
    j["phi_holder_seminorm"] = holder_seminorm_estimate(s.phi_function(), m.alpha);
  }
  j["residual"] = s.residual;
  j["nu_residual"] = s.nu_residual;
  j["iterations"] = s.iterations;
  j["dense_fallback"] = s.dense_fallback;
  return {j, eigen_table(s, m.q)};
}

inline Result run_normalize_check(Ctx& c) {
  const auto& m = c.model;
  const auto op = build_collective_operator(m.family, m.potential, m.q, c.pool);
  const auto s = spectral(c, op, false);
  const auto normalized = normalize(op, s);
  const auto one = normalized.apply(std::vector<double>(op.dimension(), 1.0));
  const auto eq = equilibrium_from(op, s);
  double err = 0.0;
  CsvTable t({"x", "normalized_one", "phi", "equilibrium_weight"});
  for (std::size_t i = 0; i <= m.q; ++i) {
    err = std::max(err, std::abs(one[i] - s.rho));
    t.add_row({num(static_cast<double>(i) / static_cast<double>(m.q)), num(one[i]), num(s.phi[i]), num(eq.weights[i])});
  }
  Json j = base_summary("normalize-check", c.cfg, m);
  j["pressure"] = s.pressure();
  j["exp_pressure"] = s.rho;
  j["sup_error"] = err;
  j["invariance_defect"] = eq.invariance_defect;
  j["pass"] = err < 1e-8;
  return {j, t};
}

inline Result run_skew_match(Ctx& c) {
  const auto& m = c.model;
  const std::size_t depth = read_positive(c.cfg, "skew", "depth", 2);
  const double tol = c.cfg.get_double("skew", "tol", 1e-7);
  if (m.potential.needs_map()) c.cfg.fail_at("model", "potential", "skew-match needs a potential on [0,1] only");
  const auto r = verify_spectrum_match(m.family, m.potential, depth, m.q, tol, c.pool);
  Json j = base_summary("skew-match", c.cfg, m);
  j["depth"] = depth;
  j["rho_skew"] = r.rho_skew;
  j["rho_collective"] = r.rho_collective;
  j["eigenvalue_difference"] = r.eigenvalue_difference;
  j["slice_variation"] = r.slice_variation;
  j["lift_deviation"] = r.lift_deviation;
  j["gap_skew"] = r.gap_skew;
  j["gap_collective"] = r.gap_collective;
  j["tol"] = tol;
  j["pass"] = r.pass;
  // Contraction constant e^{sup|f|} N theta^alpha / rho of the symbolic metric.
  j["theta"] = m.theta;
  j["theta_contraction"] = std::exp(sup_norm_estimate(m.potential)) * m.family.size() * std::pow(m.theta, m.alpha) / r.rho_skew;
  CsvTable t({"depth", "rho_skew", "rho_collective", "eigenvalue_difference", "slice_variation", "lift_deviation"});
  t.add_row({num(static_cast<std::uint64_t>(depth)), num(r.rho_skew), num(r.rho_collective),
             num(r.eigenvalue_difference), num(r.slice_variation), num(r.lift_deviation)});
  return {j, t};
}

inline Result run_average(Ctx& c) {
  const auto& m = c.model;
  const Potential f = read_potential(c.cfg, m, "average", "f", "pow:2");
  if (f.needs_map()) c.cfg.fail_at("average", "f", "needs a potential on [0,1] only");
  const std::string xtext = c.cfg.get_string("average", "x", std::string("1/pi"));
  const auto x = at_key(c.cfg, "average", "x", [&] { return PrecisePoint::parse(xtext); });
  const std::size_t n_max = read_positive(c.cfg, "average", "n_max", 200);
  const std::size_t brute = c.cfg.get_count("average", "brute_limit", 8);
  const std::size_t q = c.cfg.get_count("average", "resolution", 4096);
  at_key(c.cfg, "average", "resolution", [&] { require_resolution(q); });
  at_key(c.cfg, "average", "brute_limit", [&] {
    if (brute > 0) enumerate_words(brute, m.family.size());
  });
  const auto rows = ergodic_average_check(m.family, f, x, n_max, brute, q);
  CsvTable t({"n", "brute", "koopman", "target"});
  double max_diff = 0.0;
  for (const auto& r : rows) {
    t.add_row({num(static_cast<std::uint64_t>(r.n)), num(r.brute), num(r.koopman), num(r.target)});
    if (!std::isnan(r.brute)) max_diff = std::max(max_diff, std::abs(r.brute - r.koopman));
  }
  Json j = base_summary("average", c.cfg, m);
  j["f"] = f.label();
  j["x"] = x.label();
  j["n_max"] = n_max;
  j["grid_approximation"] = rows.back().grid_approximation;
  j["target"] = rows.back().target;
  j["final_average"] = rows.back().koopman;
  j["final_error"] = std::abs(rows.back().koopman - rows.back().target);
  j["max_brute_koopman_difference"] = max_diff;
  return {j, t};
}

inline Result run_correlations(Ctx& c) {
  const auto& m = c.model;
  const Potential g = read_potential(c.cfg, m, "correlations", "g", "centered");
  const Potential h = read_potential(c.cfg, m, "correlations", "h", "centered");
  if (g.needs_map() || h.needs_map()) c.cfg.fail_at("correlations", "g", "observables must not depend on the map");
  const Word w = read_word(c.cfg, m, "correlations", "word", "1");
  const std::size_t n_min = c.cfg.get_count("correlations", "n_min", 1);
  const std::size_t n_max = c.cfg.get_count("correlations", "n_max", 12);
  if (n_max < n_min) c.cfg.fail_at("correlations", "n_max", "must be >= n_min");
  auto series = correlation_series(m.family, w, g, h, n_min, n_max);
  series.g = g.label();
  series.h = h.label();
  CsvTable t({"n", "value", "log10_abs"});
  for (const auto& [n, v] : series.entries) {
    t.add_row({num(static_cast<std::uint64_t>(n)), num(v), num(v == 0.0 ? -INFINITY : std::log10(std::abs(v)))});
  }
  Json j = base_summary("correlations", c.cfg, m);
  j["g"] = series.g;
  j["h"] = series.h;
  j["word_policy"] = series.word_policy;
  try {
    const auto fit = decay_rate_fit(series);
    j["theta_hat"] = fit.theta_hat;
    j["c_hat"] = fit.c_hat;
    j["r2"] = fit.r2;
    j["fit_points"] = fit.points;
  } catch (const TooFewPoints& e) {
    j["fit_error"] = e.what();
  }
  j["theta"] = m.theta;
  return {j, t};
}

inline Result run_variance(Ctx& c) {
  const auto& m = c.model;
  const Potential g = read_potential(c.cfg, m, "variance", "g", "centered");
  if (g.needs_map()) c.cfg.fail_at("variance", "g", "must not depend on the map");
  const Word w = read_word(c.cfg, m, "variance", "word", "1");
  const std::size_t n_max = read_positive(c.cfg, "variance", "n_max", 20);
  const std::size_t n_min = read_positive(c.cfg, "variance", "n_min", static_cast<long long>(n_max));
  if (n_max < n_min) c.cfg.fail_at("variance", "n_max", "must be >= n_min");
  CsvTable t({"n", "direct", "green_kubo", "difference", "max_lag_used", "truncated"});
  Json rows = Json::array();
  for (std::size_t n = n_min; n <= n_max; ++n) {
    const auto r = at_key(c.cfg, "variance", "g", [&] { return variance_along_word(m.family, g, w.as_periodic(), n); });
    const double direct = r.direct ? *r.direct : NAN;
    t.add_row({num(static_cast<std::uint64_t>(n)), num(direct), num(r.green_kubo), num(direct - r.green_kubo),
               num(static_cast<std::uint64_t>(r.max_lag_used)), r.truncated ? "1" : "0"});
    rows.push_back({{"n", n}, {"direct", json_number(direct)}, {"green_kubo", r.green_kubo}, {"truncated", r.truncated}});
  }
  Json j = base_summary("variance", c.cfg, m);
  j["g"] = g.label();
  j["word"] = w.to_string();
  j["results"] = rows;
  return {j, t};
}

inline MonteCarloSetup read_monte_carlo(const Ctx& c, const std::string& section) {
  const auto& m = c.model;
  MonteCarloSetup s;
  const std::string policy = c.cfg.get_string(section, "policy", std::string("fixed"));
  if (policy == "fixed") {
    s.policy = WordPolicy::fixed;
    s.word = read_word(c.cfg, m, section, "word", "1");
  } else if (policy == "bernoulli") {
    s.policy = WordPolicy::bernoulli;
    if (c.cfg.has(section, "bernoulli")) {
      s.bernoulli = c.cfg.get_double_list(section, "bernoulli");
      at_key(c.cfg, section, "bernoulli", [&] {
        if (s.bernoulli.size() != static_cast<std::size_t>(m.family.size())) {
          throw ConfigError("needs one probability per map");
        }
        BernoulliSpec check(s.bernoulli);
      });
    }
  } else {
    c.cfg.fail_at(section, "policy", "expected fixed or bernoulli, got '" + policy + "'");
  }
  s.seed = m.seed;
  return s;
}

inline Result run_clt(Ctx& c) {
  const auto& m = c.model;
  const Potential g = read_potential(c.cfg, m, "clt", "g", "centered");
  if (g.needs_map()) c.cfg.fail_at("clt", "g", "must not depend on the map");
  const std::size_t n = read_positive(c.cfg, "clt", "n", 1000);
  const std::size_t samples = c.cfg.get_count("clt", "samples", 20000);
  if (samples < 1000) c.cfg.fail_at("clt", "samples", "must be >= 1000");
  const auto setup = read_monte_carlo(c, "clt");
  const auto r = at_key(c.cfg, "clt", "g", [&] { return clt_experiment(m.family, g, n, samples, setup, c.pool); });
  Json j = base_summary("clt", c.cfg, m);
  j["g"] = g.label();
  j["n"] = r.n;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["word_policy"] = to_string(r.word_policy);
  if (r.word_policy == WordPolicy::fixed) j["word"] = setup.word.to_string();
  j["rng"] = kCounterStreamAlgorithm;
  j["ks_statistic"] = r.ks_statistic;
  j["variance_estimate"] = r.variance_estimate;
  j["variance_source"] = r.variance_source;
  j["sample_mean"] = r.sample_mean;
  j["sample_second_moment"] = r.sample_variance;
  j["degenerate"] = r.degenerate;
  j["config"] = c.cfg.canonical();
  // Empirical CDF of the normalized sums against the normal law.
  const auto sums = simdyn::detail::normalized_sums(m.family, g, n, samples, setup, c.pool);
  std::vector<double> sorted = sums;
  std::sort(sorted.begin(), sorted.end());
  CsvTable t({"z", "empirical_cdf", "normal_cdf"});
  const double sd = std::sqrt(std::max(r.variance_estimate, 0.0));
  for (int k = -40; k <= 40; ++k) {
    const double z = 0.1 * k;
    const double x = z * sd;
    const auto below = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
    t.add_row({num(z), num(below / static_cast<double>(samples)), num(simdyn::detail::normal_cdf(z))});
  }
  return {j, t};
}

inline Result run_lil(Ctx& c) {
  const auto& m = c.model;
  const Potential g = read_potential(c.cfg, m, "lil", "g", "centered");
  if (g.needs_map()) c.cfg.fail_at("lil", "g", "must not depend on the map");
  const std::size_t n0 = c.cfg.get_count("lil", "n0", 10);
  if (n0 < 3) c.cfg.fail_at("lil", "n0", "must be >= 3");
  const std::size_t n_max = read_positive(c.cfg, "lil", "n_max", 1000);
  if (n_max < n0) c.cfg.fail_at("lil", "n_max", "must be >= n0");
  const std::size_t samples = read_positive(c.cfg, "lil", "samples", 2000);
  const auto setup = read_monte_carlo(c, "lil");
  const auto r =
      at_key(c.cfg, "lil", "g", [&] { return lil_diagnostic(m.family, g, n0, n_max, samples, setup, c.pool); });
  Json j = base_summary("lil", c.cfg, m);
  j["g"] = g.label();
  j["n0"] = r.n0;
  j["n_max"] = r.n_max;
  j["samples"] = r.samples;
  j["seed"] = setup.seed;
  j["word_policy"] = to_string(setup.policy);
  j["rng"] = kCounterStreamAlgorithm;
  j["sigma"] = r.sigma;
  j["config"] = c.cfg.canonical();
  Json q = Json::object();
  CsvTable t({"level", "quantile"});
  for (const auto& [level, value] : r.quantiles) {
    q[format_number(level)] = value;
    t.add_row({num(level), num(value)});
  }
  j["quantiles"] = q;
  return {j, t};
}

inline std::pair<double, double> read_bracket(const Ctx& c, const std::string& section, const std::string& lo_key,
                                              const std::string& hi_key) {
  const double lo = c.cfg.get_double(section, lo_key, -5.0);
  const double hi = c.cfg.get_double(section, hi_key, 5.0);
  if (!(lo < hi)) c.cfg.fail_at(section, hi_key, "bracket needs " + lo_key + " < " + hi_key);
  return {lo, hi};
}

inline Result run_kappa(Ctx& c) {
  const auto& m = c.model;
  const Potential f = read_potential(c.cfg, m, "kappa", "f", m.potential_text);
  const auto [lo, hi] = read_bracket(c, "kappa", "lo", "hi");
  const double tol = c.cfg.get_double("kappa", "tol", 1e-10);
  if (!(tol > 0.0)) c.cfg.fail_at("kappa", "tol", "must be positive");
  const std::size_t scan = c.cfg.get_count("kappa", "scan_points", 11);
  if (scan == 1) c.cfg.fail_at("kappa", "scan_points", "must be 0 or >= 2");
  const auto sol = solve_kappa(m.family, f, lo, hi, tol, m.q, c.pool);
  CsvTable t({"kappa", "integral", "pressure"});
  for (std::size_t i = 0; i < scan; ++i) {
    const double k = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(scan - 1);
    t.add_row({num(k), num(kappa_equation(m.family, f, k, m.q, c.pool)), num(pressure(m.family, k * f, m.q, 1e-14, c.pool))});
  }
  Json j = base_summary("kappa", c.cfg, m);
  j["f"] = f.label();
  j["bracket"] = {lo, hi};
  j["kappa"] = sol.kappa;
  j["pressure_at_kappa"] = sol.pressure_at_kappa;
  j["integral_residual"] = sol.integral_residual;
  j["evaluations"] = sol.evaluations;
  j["kappa_positive"] = sol.kappa > 0.0;
  return {j, t};
}

inline Result run_count(Ctx& c) {
  const auto& m = c.model;
  const Potential f = read_potential(c.cfg, m, "count", "f", m.potential_text);
  std::size_t n_min = 1, n_max = 1;
  if (c.cfg.has("count", "n_min") || c.cfg.has("count", "n_max")) {
    n_min = read_positive(c.cfg, "count", "n_min", 1);
    n_max = read_positive(c.cfg, "count", "n_max", static_cast<long long>(n_min));
  }
  if (n_max < n_min) c.cfg.fail_at("count", "n_max", "must be >= n_min");
  const auto window = c.cfg.get_double_list("count", "window", std::vector<double>{-1.0, 1.0});
  if (window.size() != 2) c.cfg.fail_at("count", "window", "expected [a, b]");
  if (!(window[0] < window[1])) c.cfg.fail_at("count", "window", "needs a < b");
  const double a = window[0], b = window[1];
  const bool with_kappa = c.cfg.get_bool("count", "solve_kappa", false);
  const bool skew = c.cfg.get_bool("count", "skew", false);
  std::pair<double, double> bracket{-5.0, 5.0};
  if (with_kappa) bracket = read_bracket(c, "count", "kappa_lo", "kappa_hi");
  const double bound = simdyn::detail::points_upper_bound(m.family, n_max);
  if (bound > kDefaultPointBudget) {
    throw BudgetExceeded("count: n_max = " + std::to_string(n_max) + " needs " + format_number(bound) +
                         " fixed points, above the budget of 1e8");
  }

  Json j = base_summary("count", c.cfg, m);
  j["f"] = f.label();
  j["window"] = {a, b};
  std::optional<KappaSolution> kappa;
  double constant = 1.0;
  if (with_kappa) {
    kappa = solve_kappa(m.family, f, bracket.first, bracket.second, 1e-10, m.q, c.pool);
    j["kappa"] = kappa->kappa;
    j["pressure_at_kappa"] = kappa->pressure_at_kappa;
    j["kappa_integral_residual"] = kappa->integral_residual;
    j["kappa_positive"] = kappa->kappa > 0.0;
    if (n_max > n_min) {
      try {
        const auto fit = asymptotic_fit(m.family, f, *kappa, a, b, n_min, n_max, c.pool);
        constant = fit.c_hat;
        j["c_hat"] = fit.c_hat;
        j["ratio_drift"] = fit.drift;
        j["fit_pass"] = fit.pass;
      } catch (const TooFewPoints& e) {
        j["fit_error"] = e.what();
      }
    }
  }
  CsvTable t({"n", "count", "predicted", "ratio", "points_enumerated", "boundary_hits"});
  Json rows = Json::array();
  for (std::size_t n = n_min; n <= n_max; ++n) {
    CountQuery q;
    q.n = n;
    q.a = a;
    q.b = b;
    q.kappa = kappa;
    q.constant = constant;
    const auto r = count_periodic(m.family, f, q, c.pool);
    t.add_row({num(static_cast<std::uint64_t>(n)), num(r.count), r.predicted ? num(*r.predicted) : "",
               r.ratio ? num(*r.ratio) : "", num(r.points_enumerated), num(r.boundary_hits)});
    Json row{{"n", n}, {"count", r.count}, {"points_enumerated", r.points_enumerated},
             {"boundary_hits", r.boundary_hits}};
    if (skew) {
      const auto s = count_periodic_skew(m.family, LiftedPotential{f}, q, c.pool);
      row["skew_count"] = s.count;
      row["skew_matches"] = s.count == r.count;
    }
    rows.push_back(row);
  }
  j["results"] = rows;
  return {j, t};
}

inline Result run_derivative_check(Ctx& c) {
  const auto& m = c.model;
  const Potential g = read_potential(c.cfg, m, "derivative", "g", "centered");
  const auto d = pressure_derivative_check(m.family, m.potential, g, m.q, c.pool);
  CsvTable t({"t", "pressure"});
  for (int k = -2; k <= 2; ++k) {
    const double s = k * d.second_step;
    t.add_row({num(s), num(pressure(m.family, m.potential + s * g, m.q, 1e-14, c.pool))});
  }
  Json j = base_summary("derivative-check", c.cfg, m);
  j["g"] = g.label();
  j["fd_slope"] = d.fd_slope;
  j["integral"] = d.integral;
  j["difference"] = std::abs(d.fd_slope - d.integral);
  j["second_difference"] = d.second_fd;
  j["green_kubo_variance"] = d.green_kubo;
  j["step"] = d.step;
  j["second_step"] = d.second_step;
  j["first_order_pass"] = std::abs(d.fd_slope - d.integral) < 1e-5;
  j["convexity_pass"] = d.second_fd > 0.0;
  return {j, t};
}

}  // namespace detail

// Computes the artifacts of one subcommand. Throws simdyn::Error subclasses.
inline RunOutput execute(const RunRequest& req) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), req.subcommand) == names.end()) {
    throw ConfigError("unknown subcommand '" + req.subcommand + "'");
  }
  detail::Ctx ctx{req.config, detail::read_model(req.config), WorkerPool(req.threads)};
  static const std::map<std::string, std::function<detail::Result(detail::Ctx&)>> table{
      {"pressure", [](detail::Ctx& c) { return detail::run_pressure(c, false); }},
      {"spectrum", [](detail::Ctx& c) { return detail::run_pressure(c, true); }},
      {"normalize-check", detail::run_normalize_check},
      {"skew-match", detail::run_skew_match},
      {"average", detail::run_average},
      {"correlations", detail::run_correlations},
      {"variance", detail::run_variance},
      {"clt", detail::run_clt},
      {"lil", detail::run_lil},
      {"kappa", detail::run_kappa},
      {"count", detail::run_count},
      {"derivative-check", detail::run_derivative_check},
  };
  auto [summary, series] = table.at(req.subcommand)(ctx);
  RunOutput out;
  const std::string hash = req.config.hash();
  out.files.push_back({"summary.json", summary.dump(2) + "\n"});
  out.files.push_back({"series.csv", series.render(hash)});
  if (req.emit_plot_data) out.files.push_back({"plot.csv", series.tidy().render(hash)});
  out.summary = std::move(summary);
  return out;
}

inline Json manifest(const RunRequest& req, const RunOutput& out, double wall_seconds) {
  Json j;
  j["tool"] = "simdyn";
  j["version"] = kVersion;
  j["subcommand"] = req.subcommand;
  j["config_hash"] = req.config.hash();
  j["config_source"] = req.config.source();
  // The canonical config below reproduces the run: save it as a file and
  // pass it back with --config.
  std::vector<std::string> lines;
  std::string section;
  for (const auto& [key, entry] : req.config.entries()) {
    const auto dot = key.find('.');
    if (key.substr(0, dot) != section) {
      section = key.substr(0, dot);
      lines.push_back("[" + section + "]");
    }
    lines.push_back(key.substr(dot + 1) + " = \"" + entry.value + "\"");
  }
  j["config"] = lines;
  j["seed"] = req.config.get_int("run", "seed", 1);
  j["threads"] = req.threads;
  j["emit_plot_data"] = req.emit_plot_data;
  j["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
#if defined(__clang__)
  j["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = std::string("gcc ") + __VERSION__;
#else
  j["compiler"] = "unknown";
#endif
  j["wall_time_seconds"] = wall_seconds;
  std::vector<std::string> files;
  for (const auto& f : out.files) files.push_back(f.name);
  files.push_back("manifest.json");
  j["files"] = files;
  return j;
}

// Runs, then writes all artifacts plus manifest.json into out_dir. Returns
// the process exit code; error messages go to `err`.
inline int run(const RunRequest& req, const std::filesystem::path& out_dir, std::ostream& err) {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    RunOutput out = execute(req);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.files.push_back({"manifest.json", manifest(req, out, wall).dump(2) + "\n"});
    std::filesystem::create_directories(out_dir);
    for (const auto& f : out.files) {
      std::ofstream os(out_dir / f.name, std::ios::binary);
      os << f.content;
      if (!os) throw Error("cannot write " + (out_dir / f.name).string());
    }
    return kOk;
  } catch (const std::exception& e) {
    err << "simdyn " << req.subcommand << ": " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace simdyn::cli
