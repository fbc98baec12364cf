// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "simdyn/cli/runner.hpp"
#include "simdyn/simdyn.hpp"

using namespace simdyn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double max_abs_diff(const std::vector<double>& v, double c) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x - c));
  return m;
}

// Lebesgue measure in nodal form.
std::vector<double> trapezoid_weights(std::size_t q) {
  std::vector<double> w(q + 1, 1.0 / static_cast<double>(q));
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

Outcome pressure_exactness() {
  const auto fam = MapFamily::from_degrees({2, 3});
  const auto t0 = Clock::now();
  const double p = pressure(fam, Potential::constant(0.0), 512);
  const double wall = seconds_since(t0);
  double shift = 0.0;
  for (const char* spec : {"centered", "cos:1"}) {
    const auto f = Potential::parse(spec);
    const double base = pressure(fam, f, 512);
    for (double c : {-1.0, 0.5}) shift = std::max(shift, std::abs(pressure(fam, f + c, 512) - base - c));
  }
  const double err = std::abs(p - std::log(5.0));
  return {err < 1e-8 && wall < 1.0 && shift < 1e-9,
          "|P - log 5| = " + fmt("%.2e", err) + ", " + fmt("%.3f s", wall) + ", shift law " + fmt("%.2e", shift)};
}

Outcome normalization_identity() {
  const auto fam = MapFamily::from_degrees({2, 3});
  double worst = 0.0;
  for (const char* spec : {"centered", "cos:1"}) {
    const auto op = build_collective_operator(fam, Potential::parse(spec), 512);
    const auto s = leading_spectral_data(op);
    const auto one = normalize(op, s).apply(std::vector<double>(op.dimension(), 1.0));
    worst = std::max(worst, max_abs_diff(one, s.rho));
  }
  return {worst < 1e-8, "sup error " + fmt("%.2e", worst)};
}

Outcome skew_match() {
  const auto fam = MapFamily::from_degrees({2, 3});
  const auto t0 = Clock::now();
  const auto r = verify_spectrum_match(fam, Potential::centered(), 2, 256, 1e-7);
  const double wall = seconds_since(t0);
  return {r.eigenvalue_difference < 1e-7 && r.slice_variation < 1e-6 && wall < 30.0,
          "eigenvalue diff " + fmt("%.2e", r.eigenvalue_difference) + ", slice variation " +
              fmt("%.2e", r.slice_variation) + ", " + fmt("%.2f s", wall)};
}

Outcome lebesgue_fixing() {
  const std::size_t q = 512;
  double rows = 0.0, left = 0.0;
  const auto w = trapezoid_weights(q);
  for (int d : {2, 3}) {
    const auto op = build_per_map_operator(ExpandingMap::canonical(d), Potential::neg_log_derivative(), q);
    rows = std::max(rows, max_abs_diff(op.row_sums(), 1.0));
    const auto s = leading_spectral_data(op);
    for (std::size_t i = 0; i <= q; ++i) left = std::max(left, std::abs(s.nu[i] - w[i]));
  }
  return {rows < 1e-13 && left < 1e-10, "row sums " + fmt("%.2e", rows) + ", left eigenvector " + fmt("%.2e", left)};
}

Outcome correlation_benchmark() {
  const auto fam = MapFamily::from_degrees({2});
  const auto series = correlation_series(fam, Word({1}, 1), Potential::centered(), Potential::centered(), 1, 12);
  double worst = 0.0;
  for (const auto& [n, v] : series.entries) {
    const double exact = std::ldexp(1.0, -static_cast<int>(n)) / 12.0;
    worst = std::max(worst, std::abs(v - exact) / exact);
  }
  const auto fit = decay_rate_fit(series);
  const bool pass = series.entries.size() == 12 && worst < 1e-4 && std::abs(fit.theta_hat - 0.5) <= 0.01;
  return {pass, "max rel error " + fmt("%.2e", worst) + ", theta_hat " + fmt("%.4f", fit.theta_hat)};
}

Outcome variance_benchmark() {
  const auto fam = MapFamily::from_degrees({2});
  const auto r = variance_along_word(fam, Potential::centered(), Word({1}, 1).as_periodic(), 20);
  if (!r.direct) return {false, "direct quadrature skipped"};
  const double gap = std::abs(*r.direct - r.green_kubo);
  return {std::abs(*r.direct - 0.25) < 2e-2 && gap < 1e-8,
          "variance " + fmt("%.6f", *r.direct) + ", direct vs Green-Kubo " + fmt("%.2e", gap)};
}

Outcome derivative_identity() {
  const auto fam = MapFamily::from_degrees({2, 3});
  double worst = 0.0, convex = INFINITY;
  for (auto [f, g] : {std::pair{"const:0", "centered"}, std::pair{"centered", "cos:1"}}) {
    const auto d = pressure_derivative_check(fam, Potential::parse(f), Potential::parse(g), 512);
    worst = std::max(worst, std::abs(d.fd_slope - d.integral));
    convex = std::min(convex, d.second_fd);
  }
  return {worst < 1e-5 && convex > 0.0, "max gap " + fmt("%.2e", worst) + ", min second difference " + fmt("%.3e", convex)};
}

Outcome ergodic_average() {
  const auto fam = MapFamily::from_degrees({2, 3});
  const auto rows = ergodic_average_check(fam, Potential::power(2), PrecisePoint::parse("1/pi"), 200, 6, 4096);
  double worst = 0.0;
  for (const auto& r : rows) {
    if (r.n <= 6) worst = std::max(worst, std::abs(r.brute - r.koopman));
  }
  const double err = std::abs(rows.back().koopman - 1.0 / 3.0);
  return {worst < 1e-9 && err < 5e-2, "brute vs Koopman " + fmt("%.2e", worst) + ", |A_200 - 1/3| = " + fmt("%.3e", err)};
}

Outcome counting_exactness() {
  const auto fam = MapFamily::from_degrees({2, 3});
  const auto t0 = Clock::now();
  std::uint64_t p5 = 1, p2 = 1;
  bool ok = true;
  for (std::size_t n = 1; n <= 7; ++n) {
    p5 *= 5;
    p2 *= 2;
    CountQuery q;
    q.n = n;
    q.a = -1.0;
    q.b = 1.0;
    ok = ok && count_periodic(fam, Potential::constant(0.0), q).count == p5 - p2;
  }
  const double wall = seconds_since(t0);
  return {ok && wall < 120.0, std::string(ok ? "all counts exact" : "count mismatch") + ", " + fmt("%.2f s", wall)};
}

Outcome counting_asymptotics() {
  const auto fam = MapFamily::from_degrees({2, 3});
  const auto f = Potential::parse("x+const:-0.45");
  const auto k = solve_kappa(fam, f, -5.0, 5.0, 1e-10, 256);
  const auto fit = asymptotic_fit(fam, f, k, -1.0, 1.0, 4, 8);
  return {k.integral_residual < 1e-8 && fit.drift < 0.1,
          "kappa " + fmt("%.4f", k.kappa) + ", residual " + fmt("%.1e", k.integral_residual) + ", drift n=7..8 " +
              fmt("%.2f%%", 100.0 * fit.drift)};
}

Outcome clt() {
  const auto fam = MapFamily::from_degrees({2});
  MonteCarloSetup setup;
  setup.word = Word({1}, 1);
  setup.seed = 20240601;
  const std::size_t samples = 20000;
  const auto a = clt_experiment(fam, Potential::centered(), 1000, samples, setup);
  const auto b = clt_experiment(fam, Potential::centered(), 2000, samples, setup);
  // 95% critical value of the one-sample KS statistic.
  const double band = 1.36 / std::sqrt(static_cast<double>(samples));
  return {a.ks_statistic < 0.02 && b.ks_statistic <= a.ks_statistic + band,
          "KS n=1000 " + fmt("%.4f", a.ks_statistic) + ", n=2000 " + fmt("%.4f", b.ks_statistic) + ", band " +
              fmt("%.4f", band)};
}

Outcome determinism() {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"pressure", "pressure.ini"},       {"spectrum", "spectrum.ini"},
      {"normalize-check", "normalize_check.ini"}, {"skew-match", "skew_match.ini"},
      {"average", "average.ini"},         {"correlations", "correlations.ini"},
      {"variance", "variance.ini"},       {"clt", "clt.ini"},
      {"clt", "clt_bernoulli.ini"},       {"lil", "lil.ini"},
      {"kappa", "kappa.ini"},             {"count", "count.ini"},
      {"count", "count_asymptotics.ini"}, {"derivative-check", "derivative_check.ini"}};
  std::size_t compared = 0;
  for (const auto& [sub, file] : runs) {
    cli::RunRequest req;
    req.subcommand = sub;
    req.config = cli::Config::load(std::string(SIMDYN_CONFIG_DIR) + "/" + file);
    req.emit_plot_data = true;
    std::vector<cli::RunOutput> outs;
    for (unsigned t : {1u, 4u, 8u}) {
      req.threads = t;
      outs.push_back(cli::execute(req));
    }
    for (std::size_t i = 0; i < outs[0].files.size(); ++i) {
      for (std::size_t k = 1; k < outs.size(); ++k) {
        if (outs[k].files.size() != outs[0].files.size() || outs[k].files[i].content != outs[0].files[i].content) {
          return {false, file + ": " + outs[0].files[i].name + " differs"};
        }
      }
      ++compared;
    }
  }
  return {true, std::to_string(compared) + " files identical under 1, 4 and 8 threads"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"pressure exactness", pressure_exactness},
      {"normalization identity", normalization_identity},
      {"skew spectrum match", skew_match},
      {"Lebesgue fixing", lebesgue_fixing},
      {"correlation decay", correlation_benchmark},
      {"variance benchmark", variance_benchmark},
      {"pressure derivative", derivative_identity},
      {"ergodic averages", ergodic_average},
      {"counting exactness", counting_exactness},
      {"counting asymptotics", counting_asymptotics},
      {"central limit", clt},
      {"determinism", determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
