// Periodic-orbit counting with ergodic-sum windows, the predicted asymptotic
// count, a fitted constant, and two cross-checks: the Diophantine-ratio
// diagnostic and the fixed-point trace proxy for the complex operator.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simdyn/error.hpp"
#include "simdyn/function_space.hpp"
#include "simdyn/interval_maps.hpp"
#include "simdyn/parallel.hpp"
#include "simdyn/symbolic.hpp"
#include "simdyn/thermodynamics.hpp"
#include "simdyn/transfer.hpp"

namespace simdyn {

inline constexpr double kWindowTolerance = 1e-12;
inline constexpr double kDefaultPointBudget = 1e8;

struct CountQuery {
  std::size_t n = 1;
  double a = -1.0;
  double b = 1.0;
  std::optional<KappaSolution> kappa;
  double constant = 1.0;  // C in the predicted count
};

struct CountResult {
  std::size_t n = 0;
  std::uint64_t count = 0;
  std::optional<double> predicted;
  std::optional<double> ratio;
  std::uint64_t words_enumerated = 0;
  std::uint64_t points_enumerated = 0;
  std::uint64_t boundary_hits = 0;  // counted points within the tolerance band of a or b
};

namespace detail {

inline void validate_query(const CountQuery& q) {
  if (q.n < 1) throw DomainError("count: n must be >= 1");
  if (!(q.a < q.b)) throw DomainError("count: window needs a < b");
}

// Sum over words of (M_w - 1) = (sum of degrees)^n - N^n, as a double.
inline double points_upper_bound(const MapFamily& family, std::size_t n) {
  return std::pow(static_cast<double>(family.total_degree()), static_cast<double>(n)) -
         std::pow(static_cast<double>(family.size()), static_cast<double>(n));
}

struct WordTally {
  std::uint64_t count = 0;
  std::uint64_t points = 0;
  std::uint64_t boundary = 0;
};

// Visits every fixed point of T_w with its orbit x_0..x_{n-1}, computed by
// contracting inverse branches from the fixed point.
template <class Visit>
void for_each_fixed_orbit(const MapFamily& family, const Word& w, Visit&& visit) {
  const std::size_t n = w.size();
  std::vector<double> orbit(n);
  for_each_piece(family, w, n, [&](double a, double width, std::span<const int> branches) {
    if (is_last_piece(family, w, branches)) return;
    const double x = a / (1.0 - width);
    if (!(x < a + width) || x >= 1.0) return;
    orbit_from_branches(family, w, branches, x, orbit);
    visit(std::span<const double>(orbit));
  });
}

// f^n_w along an orbit; neglogd terms are bound to the map acting at each step.
inline double orbit_sum(const MapFamily& family, const Potential& f, const Word& w, std::span<const double> orbit) {
  double s = 0.0;
  if (f.needs_map()) {
    for (std::size_t i = 0; i < orbit.size(); ++i) s += f.for_map(family.map(w.symbol(i + 1)))(orbit[i]);
  } else {
    for (double y : orbit) s += f(y);
  }
  return s;
}

template <class SumFn>
CountResult count_with(const MapFamily& family, const CountQuery& query, const WorkerPool& pool, double budget,
                       SumFn&& sum_of) {
  validate_query(query);
  const double bound = points_upper_bound(family, query.n);
  if (bound > budget) {
    throw BudgetExceeded("count: " + std::to_string(bound) + " fixed points exceed the budget of " +
                         std::to_string(budget));
  }
  const auto words = enumerate_words(query.n, family.size());
  std::vector<WordTally> tallies(words.size());
  pool.for_each_index(words.size(), [&](std::size_t k) {
    WordTally& t = tallies[k];
    for_each_fixed_orbit(family, words[k], [&](std::span<const double> orbit) {
      ++t.points;
      const double s = sum_of(words[k], orbit);
      if (s >= query.a - kWindowTolerance && s <= query.b + kWindowTolerance) {
        ++t.count;
        if (std::abs(s - query.a) <= kWindowTolerance || std::abs(s - query.b) <= kWindowTolerance) ++t.boundary;
      }
    });
  });
  CountResult r;
  r.n = query.n;
  r.words_enumerated = words.size();
  for (const auto& t : tallies) {
    r.count += t.count;
    r.points_enumerated += t.points;
    r.boundary_hits += t.boundary;
  }
  return r;
}

}  // namespace detail

// (e^{-kappa a} - e^{-kappa b}) / kappa, equal to b - a at kappa = 0.
inline double window_weight(double kappa, double a, double b) {
  if (kappa == 0.0) return b - a;
  return -std::exp(-kappa * a) * std::expm1(-kappa * (b - a)) / kappa;
}

// C e^{n P(kappa f)} / sqrt(n) times the window weight.
inline double predicted_count(const KappaSolution& kappa, std::size_t n, double a, double b, double C) {
  const double nn = static_cast<double>(n);
  return C * std::exp(nn * kappa.pressure_at_kappa) / std::sqrt(nn) * window_weight(kappa.kappa, a, b);
}

// Number of pairs (w, x), |w| = n, T_w x = x, with a <= f^n_w(x) <= b.
inline CountResult count_periodic(const MapFamily& family, const Potential& f, const CountQuery& query,
                                  const WorkerPool& pool = WorkerPool{}, double budget = kDefaultPointBudget) {
  auto r = detail::count_with(family, query, pool, budget, [&](const Word& w, std::span<const double> orbit) {
    return detail::orbit_sum(family, f, w, orbit);
  });
  if (query.kappa) {
    r.predicted = predicted_count(*query.kappa, query.n, query.a, query.b, query.constant);
    if (*r.predicted != 0.0) r.ratio = static_cast<double>(r.count) / *r.predicted;
  }
  return r;
}

// Same count on the skew product: points (w, x) of period n with w the
// periodic extension of an n-word, and F^n((w, x)) = sum_i F(sigma^i w, x_i)
// for a cylinder potential F(const Word&, double).
template <class CylPotential>
CountResult count_periodic_skew(const MapFamily& family, const CylPotential& F, const CountQuery& query,
                                const WorkerPool& pool = WorkerPool{}, double budget = kDefaultPointBudget) {
  return detail::count_with(family, query, pool, budget, [&](const Word& w, std::span<const double> orbit) {
    Word v = w.as_periodic();
    double s = 0.0;
    for (std::size_t i = 0; i < orbit.size(); ++i) {
      s += F(v, orbit[i]);
      v = v.shifted(1);
    }
    return s;
  });
}

struct AsymptoticFit {
  double c_hat = 0.0;
  std::vector<std::size_t> n;
  std::vector<std::uint64_t> counts;
  std::vector<double> ratios;  // count / predicted with C = c_hat
  double drift = 0.0;          // |r_last - r_prev| / r_prev
  bool pass = false;           // last two ratios within 10% of 1
};

// Fits C in count ~ C e^{n P(kappa f)} / sqrt(n) * weight over n_range.
inline AsymptoticFit asymptotic_fit(const MapFamily& family, const Potential& f, const KappaSolution& kappa, double a,
                                    double b, std::size_t n_first, std::size_t n_last,
                                    const WorkerPool& pool = WorkerPool{}, double budget = kDefaultPointBudget) {
  if (n_last < n_first + 1) throw TooFewPoints("asymptotic_fit: need at least two values of n");
  AsymptoticFit fit;
  const double weight = window_weight(kappa.kappa, a, b);
  std::vector<double> scaled;
  for (std::size_t n = n_first; n <= n_last; ++n) {
    CountQuery q;
    q.n = n;
    q.a = a;
    q.b = b;
    const auto r = count_periodic(family, f, q, pool, budget);
    fit.n.push_back(n);
    fit.counts.push_back(r.count);
    const double nn = static_cast<double>(n);
    scaled.push_back(static_cast<double>(r.count) * std::sqrt(nn) * std::exp(-nn * kappa.pressure_at_kappa));
  }
  std::size_t nonzero = 0;
  double sum = 0.0;
  for (double s : scaled) {
    if (s > 0.0) ++nonzero;
    sum += s;
  }
  if (nonzero < 2 || !(weight > 0.0)) throw TooFewPoints("asymptotic_fit: fewer than two nonzero counts");
  // Least squares of scaled_n = C * weight with a single parameter.
  fit.c_hat = sum / static_cast<double>(scaled.size()) / weight;
  for (std::size_t i = 0; i < fit.n.size(); ++i) {
    fit.ratios.push_back(static_cast<double>(fit.counts[i]) / predicted_count(kappa, fit.n[i], a, b, fit.c_hat));
  }
  const double last = fit.ratios.back(), prev = fit.ratios[fit.ratios.size() - 2];
  fit.drift = std::abs(last - prev) / prev;
  fit.pass = std::abs(last - 1.0) < 0.1 && std::abs(prev - 1.0) < 0.1;
  return fit;
}

struct PeriodicDatum {
  Word word;  // the period word, |word| = p
  double x = 0.0;
};

struct ApproximabilityReport {
  double ratio = 0.0;
  std::vector<double> sums;  // f^{p}_{w}(x) for the three data
  double best_error = std::numeric_limits<double>::infinity();
  std::size_t best_q = 0;
  long long best_p = 0;
  bool rational_hit = false;  // the ratio equals best_p / best_q to rounding
};

// Ratio (S_y - S_x) / (S_z - S_x) of ergodic sums over three periodic orbits,
// with min over q <= q_max of q^l |ratio - p/q|. Diagnostic only.
inline ApproximabilityReport approximability_diagnostic(const MapFamily& family, const Potential& f,
                                                        const PeriodicDatum& x, const PeriodicDatum& y,
                                                        const PeriodicDatum& z, std::size_t q_max = 1000,
                                                        double l = 2.0) {
  const std::size_t px = x.word.size(), py = y.word.size(), pz = z.word.size();
  if (px == py || py == pz || px == pz) throw DomainError("approximability_diagnostic: periods must be distinct");
  ApproximabilityReport r;
  for (const auto* d : {&x, &y, &z}) {
    if (d->word.empty()) throw DomainError("approximability_diagnostic: empty word");
    const double back = apply_word(family, d->word, d->x);
    if (std::abs(back - d->x) > 1e-9 && std::abs(std::abs(back - d->x) - 1.0) > 1e-9) {
      throw DomainError("approximability_diagnostic: point is not fixed by its word");
    }
    std::vector<double> orbit(d->word.size());
    double t = d->x;
    for (std::size_t i = 0; i < orbit.size(); ++i) {
      orbit[i] = t;
      t = family.map(d->word.symbol(i + 1)).apply(t);
    }
    r.sums.push_back(detail::orbit_sum(family, f, d->word, orbit));
  }
  const double den = r.sums[2] - r.sums[0];
  if (std::abs(den) < 1e-12) throw DegenerateDenominator("approximability_diagnostic: S_z - S_x vanishes");
  r.ratio = (r.sums[1] - r.sums[0]) / den;
  for (std::size_t q = 1; q <= q_max; ++q) {
    const double qq = static_cast<double>(q);
    const double p = std::round(r.ratio * qq);
    const double gap = std::abs(r.ratio - p / qq);
    const double err = std::pow(qq, l) * gap;
    if (gap <= 1e-12 * std::max(1.0, std::abs(r.ratio))) {
      r.best_error = 0.0;
      r.best_q = q;
      r.best_p = static_cast<long long>(p);
      r.rational_hit = true;
      break;
    }
    if (err < r.best_error) {
      r.best_error = err;
      r.best_q = q;
      r.best_p = static_cast<long long>(p);
    }
  }
  return r;
}

struct TraceProxy {
  std::size_t n = 0;
  std::complex<double> fixed_sum;      // sum over |w| = n, x in Fix(T_w) of e^{s f^n_w(x)}
  std::complex<double> preimage_sum;   // (L_s^n 1)(x0) by enumeration of preimages
  std::complex<double> operator_value; // (L_s^n 1)(x0) from the discretized operator
  double relative_gap = 0.0;           // |fixed_sum / preimage_sum - 1|
};

// s = kappa + i xi. For constant f the gap is the share of preimages that are
// not fixed points. Otherwise bounded distortion keeps the ratio bounded and it
// converges in n, but not to 1.
inline TraceProxy trace_proxy(const MapFamily& family, const Potential& f, double kappa, double xi, std::size_t n,
                              double x0, std::size_t q = 512, const WorkerPool& pool = WorkerPool{}) {
  if (n < 1) throw DomainError("trace_proxy: n must be >= 1");
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("trace_proxy: x0 outside [0,1]");
  if (detail::points_upper_bound(family, n) > kDefaultPointBudget) throw BudgetExceeded("trace_proxy: n too large");
  const std::complex<double> s(kappa, xi);
  TraceProxy r;
  r.n = n;
  std::vector<double> orbit(n);
  for (const auto& w : enumerate_words(n, family.size())) {
    detail::for_each_fixed_orbit(family, w, [&](std::span<const double> o) {
      r.fixed_sum += std::exp(s * detail::orbit_sum(family, f, w, o));
    });
    for_each_piece(family, w, n, [&](double, double, std::span<const int> branches) {
      orbit_from_branches(family, w, branches, x0, orbit);
      r.preimage_sum += std::exp(s * detail::orbit_sum(family, f, w, orbit));
    });
  }
  const auto op = build_complex_operator(family, f, kappa, xi, q, pool);
  std::vector<std::complex<double>> v(q + 1, 1.0), tmp(q + 1);
  for (std::size_t k = 0; k < n; ++k) {
    op.apply(v, tmp);
    std::swap(v, tmp);
  }
  const double p = x0 * static_cast<double>(q);
  const std::size_t i = std::min(static_cast<std::size_t>(p), q - 1);
  const double t = p - static_cast<double>(i);
  r.operator_value = v[i] + t * (v[i + 1] - v[i]);
  r.relative_gap = std::abs(r.fixed_sum / r.preimage_sum - 1.0);
  return r;
}

}  // namespace simdyn
