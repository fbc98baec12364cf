// Pressure, normalized operators, equilibrium measures and the derived
// checks built on leading eigendata: spectrum agreement between the skew and
// collective operators, derivatives of t -> P(f + t g), and the kappa
// equation  integral of f d m_{kappa f} = 0.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "simdyn/error.hpp"
#include "simdyn/function_space.hpp"
#include "simdyn/interval_maps.hpp"
#include "simdyn/spectral.hpp"
#include "simdyn/transfer.hpp"

namespace simdyn {

// log of the maximal eigenvalue of the collective operator. For a single map
// this is the per-map pressure.
inline double pressure(const MapFamily& family, const Potential& f, std::size_t q, double tol = 1e-13,
                       const WorkerPool& pool = WorkerPool{}) {
  SpectralOptions opt;
  opt.tol = tol;
  opt.estimate_gap = false;
  return leading_spectral_data(build_collective_operator(family, f, q, pool), opt).pressure();
}

// D_phi^{-1} M D_phi. Per-map operators are additionally divided by rho so
// that the normalized operator fixes the constant function.
inline TransferMatrix<double> normalize(const TransferMatrix<double>& m, const SpectralData& s) {
  if (s.phi.size() != m.dimension()) throw DomainError("normalize: eigenfunction size mismatch");
  if (*std::min_element(s.phi.begin(), s.phi.end()) <= 0.0) {
    throw NonPositiveEigenfunction("normalize: eigenfunction not positive");
  }
  const double scale = m.meta().kind == OperatorKind::per_map ? 1.0 / s.rho : 1.0;
  OperatorMeta meta = m.meta();
  meta.potential = "normalized(" + meta.potential + ")";
  return m.transformed([&](std::size_t r, std::size_t c, double v) { return v * s.phi[c] / s.phi[r] * scale; },
                       std::move(meta));
}

// Nodal weights of the equilibrium measure m_f on x_i = i/q.
struct EquilibriumMeasure {
  std::vector<double> weights;
  std::size_t resolution = 0;
  double pressure = 0.0;
  double invariance_defect = 0.0;  // || m (e^{-P} normalized operator) - m ||_1

  template <class Fn>
  double integrate(const Fn& g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * g(static_cast<double>(i) / static_cast<double>(resolution));
    return s;
  }
};

// Equilibrium weights from computed eigendata: m_i = nu_i phi_i, the left
// eigenvector of the normalized operator.
inline EquilibriumMeasure equilibrium_from(const TransferMatrix<double>& m, const SpectralData& s) {
  EquilibriumMeasure out;
  out.resolution = m.meta().resolution;
  out.pressure = s.pressure();
  out.weights.resize(s.phi.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < s.phi.size(); ++i) {
    out.weights[i] = s.nu[i] * s.phi[i];
    mass += out.weights[i];
  }
  for (auto& w : out.weights) w /= mass;
  const auto normalized = normalize(m, s);
  auto pushed = normalized.apply_transpose(out.weights);
  const double scale = m.meta().kind == OperatorKind::per_map ? 1.0 : 1.0 / s.rho;
  for (std::size_t i = 0; i < pushed.size(); ++i) out.invariance_defect += std::abs(pushed[i] * scale - out.weights[i]);
  return out;
}

inline EquilibriumMeasure equilibrium_measure(const MapFamily& family, const Potential& f, std::size_t q,
                                              double tol = 1e-13, const WorkerPool& pool = WorkerPool{}) {
  SpectralOptions opt;
  opt.tol = tol;
  opt.estimate_gap = false;
  const auto m = build_collective_operator(family, f, q, pool);
  return equilibrium_from(m, leading_spectral_data(m, opt));
}

struct SpectrumMatchReport {
  double rho_skew = 0.0;
  double rho_collective = 0.0;
  double eigenvalue_difference = 0.0;  // |rho_skew - rho_collective|
  double slice_variation = 0.0;        // max_{v,w} ||Phi_v - Phi_w||_inf
  double lift_deviation = 0.0;         // max_v ||Phi_v - phi||_inf after matching scale
  double gap_skew = 0.0;
  double gap_collective = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// Leading eigendata of the skew operator with F = Q(f) at depth m against
// the collective operator L_f. The skew iteration starts from a vector that
// differs between slices, so agreement of the slices is observed, not built in.
inline SpectrumMatchReport verify_spectrum_match(const MapFamily& family, const Potential& f, std::size_t depth,
                                                 std::size_t q, double tol, const WorkerPool& pool = WorkerPool{}) {
  if (depth < 1) throw DomainError("verify_spectrum_match: depth must be >= 1");
  const auto skew = build_skew_operator(family, q_lift(f), depth, q, pool);
  const auto coll = build_collective_operator(family, f, q, pool);
  SpectralOptions sopt;
  sopt.tol = 1e-14;
  auto start = detail::scrambled_vector(skew.dimension(), 0xABCD);
  for (auto& x : start) x = 1.5 + x;  // positive, slice-dependent
  sopt.start = std::move(start);
  SpectralOptions copt;
  copt.tol = 1e-14;
  const auto ss = leading_spectral_data(skew, sopt);
  const auto cs = leading_spectral_data(coll, copt);

  SpectrumMatchReport r;
  r.rho_skew = ss.rho;
  r.rho_collective = cs.rho;
  r.eigenvalue_difference = std::abs(ss.rho - cs.rho);
  r.gap_skew = ss.gap;
  r.gap_collective = cs.gap;
  r.tol = tol;
  const std::size_t block = q + 1;
  const std::size_t blocks = skew.dimension() / block;
  // Compare shapes at a common scale: both normalized to sup norm 1.
  const double sk = detail::sup_norm(ss.phi), ck = detail::sup_norm(cs.phi);
  for (std::size_t a = 0; a < blocks; ++a) {
    for (std::size_t i = 0; i < block; ++i) {
      const double va = ss.phi[a * block + i] / sk;
      r.lift_deviation = std::max(r.lift_deviation, std::abs(va - cs.phi[i] / ck));
      for (std::size_t b = a + 1; b < blocks; ++b) {
        r.slice_variation = std::max(r.slice_variation, std::abs(va - ss.phi[b * block + i] / sk));
      }
    }
  }
  r.pass = r.eigenvalue_difference < tol && r.slice_variation < tol;
  return r;
}

struct DerivativeCheck {
  double fd_slope = 0.0;     // (P(f + h g) - P(f - h g)) / 2h
  double integral = 0.0;     // integral of g d m_f
  double second_fd = 0.0;    // second central difference
  double green_kubo = 0.0;   // variance of g under m_f from the normalized operator
  double step = 1e-4;
  double second_step = 1e-3;
};

// Asymptotic variance sum_k cov(g, g o T^k) under the equilibrium measure,
// computed with powers of the normalized collective operator.
inline double green_kubo_variance(const TransferMatrix<double>& m, const SpectralData& s, const Potential& g,
                                  std::size_t max_lag = 2000) {
  const auto eq = equilibrium_from(m, s);
  const auto p = normalize(m, s);
  const std::size_t n = m.dimension();
  const double q = static_cast<double>(m.meta().resolution);
  const double mean = eq.integrate(g);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = g(static_cast<double>(i) / q) - mean;
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += eq.weights[i] * centered[i] * centered[i];
  std::vector<double> v = centered, w(n);
  for (std::size_t k = 1; k <= max_lag; ++k) {
    p.apply(v, w);
    for (auto& x : w) x /= s.rho;
    double term = 0.0;
    for (std::size_t i = 0; i < n; ++i) term += eq.weights[i] * centered[i] * w[i];
    var += 2.0 * term;
    std::swap(v, w);
    if (std::abs(term) < 1e-17) break;
  }
  return var;
}

inline DerivativeCheck pressure_derivative_check(const MapFamily& family, const Potential& f, const Potential& g,
                                                 std::size_t q, const WorkerPool& pool = WorkerPool{}) {
  DerivativeCheck out;
  auto p = [&](double t) { return pressure(family, f + t * g, q, 1e-14, pool); };
  const double h = out.step, h2 = out.second_step;
  out.fd_slope = (p(h) - p(-h)) / (2.0 * h);
  const double p0 = p(0.0);
  out.second_fd = (p(h2) - 2.0 * p0 + p(-h2)) / (h2 * h2);
  SpectralOptions opt;
  opt.tol = 1e-14;
  opt.estimate_gap = false;
  const auto m = build_collective_operator(family, f, q, pool);
  const auto s = leading_spectral_data(m, opt);
  out.integral = equilibrium_from(m, s).integrate(g);
  out.green_kubo = green_kubo_variance(m, s, g);
  return out;
}

struct KappaSolution {
  double kappa = 0.0;
  double pressure_at_kappa = 0.0;
  double integral_residual = 0.0;  // | integral of f d m_{kappa f} |
  std::size_t evaluations = 0;
};

// h(kappa) = integral of f d m_{kappa f}.
inline double kappa_equation(const MapFamily& family, const Potential& f, double kappa, std::size_t q,
                             const WorkerPool& pool = WorkerPool{}) {
  return equilibrium_measure(family, kappa * f, q, 1e-14, pool).integrate(f);
}

// Root of h on the bracket by the Illinois variant of regula falsi.
inline KappaSolution solve_kappa(const MapFamily& family, const Potential& f, double lo, double hi, double tol,
                                 std::size_t q, const WorkerPool& pool = WorkerPool{}, std::size_t max_iter = 200) {
  if (!(lo < hi)) throw DomainError("solve_kappa: bracket must satisfy lo < hi");
  KappaSolution out;
  auto h = [&](double k) {
    ++out.evaluations;
    return kappa_equation(family, f, k, q, pool);
  };
  double a = lo, b = hi, fa = h(a), fb = h(b);
  auto finish = [&](double k, double hk) {
    out.kappa = k;
    out.integral_residual = std::abs(hk);
    out.pressure_at_kappa = pressure(family, k * f, q, 1e-14, pool);
    return out;
  };
  if (std::abs(fa) < tol) return finish(a, fa);
  if (std::abs(fb) < tol) return finish(b, fb);
  if ((fa > 0) == (fb > 0)) {
    throw HypothesisFailure("solve_kappa: integral of f d m_{kappa f} has no sign change on [" + std::to_string(lo) +
                            ", " + std::to_string(hi) + "]");
  }
  int side = 0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    const double fc = h(c);
    if (std::abs(fc) < tol || std::abs(b - a) < 1e-15) return finish(c, fc);
    if ((fc > 0) == (fb > 0)) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  throw NoConvergence("solve_kappa: no root within " + std::to_string(max_iter) + " iterations");
}

}  // namespace simdyn
