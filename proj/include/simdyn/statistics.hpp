// Word-averaged ergodic averages, correlations along words, variances of
// ergodic sums, and seeded Monte Carlo CLT / LIL experiments.
//
// Correlations and variances are integrated piece by piece over the M_w
// affine pieces of T_w: on each piece everything is smooth, so Simpson keeps
// its accuracy where a uniform grid would not resolve g o T_w.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "simdyn/error.hpp"
#include "simdyn/function_space.hpp"
#include "simdyn/interval_maps.hpp"
#include "simdyn/parallel.hpp"
#include "simdyn/rng.hpp"
#include "simdyn/symbolic.hpp"
#include "simdyn/transfer.hpp"

namespace simdyn {

struct QuadratureOptions {
  std::size_t min_panels = 2048;            // total Simpson panels across all pieces, at least
  std::size_t min_panels_per_piece = 16;    // resolves trig terms of degree < 8 on each piece
  std::size_t budget = 500'000'000;         // max integrand evaluations
};

// Lebesgue integral of a callable on [0,1].
template <class Fn>
double lebesgue_integral(const Fn& g, std::size_t panels = 4096) {
  return simpson(g, 0.0, 1.0, panels);
}

// ---------------------------------------------------------------------------
// Ergodic averages over all words

// (K f)(x) = (1/N) sum_d f(T_d x), resampled on the grid of f. The node x = 1
// uses the left limit T_d(1^-) = 1.
inline GridFunction<double> averaged_koopman(const MapFamily& family, const GridFunction<double>& f) {
  const std::size_t q = f.resolution();
  std::vector<double> v(q + 1, 0.0);
  for (std::size_t i = 0; i <= q; ++i) {
    const double x = f.node(i);
    for (const auto& m : family.maps()) v[i] += f.evaluate(i == q ? 1.0 : m.apply(x));
    v[i] /= family.size();
  }
  return GridFunction<double>(std::move(v), f.interpolation());
}

// (K^j f)(x) evaluated exactly by recursion over the N^j compositions.
template <class Fn>
double koopman_power_at(const MapFamily& family, const Fn& f, std::size_t j, double x) {
  if (j == 0) return f(x);
  double s = 0.0;
  for (const auto& m : family.maps()) s += koopman_power_at(family, f, j - 1, m.apply(x));
  return s / family.size();
}

// (1/n)(1/N^n) sum_{|w| = n} f^n_w(x), by enumerating every word.
template <class Fn>
double word_average_brute(const MapFamily& family, const Fn& f, double x, std::size_t n) {
  const auto words = enumerate_words(n, family.size());
  double s = 0.0;
  for (const auto& w : words) s += ergodic_sum(family, f, w, x, n);
  return s / (static_cast<double>(n) * static_cast<double>(words.size()));
}

// A starting point known to far more bits than a double. Long compositions
// of canonical maps multiply x by integers of hundreds of bits, and a double
// (a dyadic rational) is eventually sent to 0 by doubling; a generic real
// such as 1/pi must be carried at high precision to follow its true orbit.
class PrecisePoint {
 public:
  using value_type = boost::multiprecision::number<
      boost::multiprecision::cpp_bin_float<2400, boost::multiprecision::digit_base_2>, boost::multiprecision::et_off>;
  static constexpr int kBits = 2400;

  static PrecisePoint from_double(double x) {
    if (!(x >= 0.0 && x < 1.0)) throw DomainError("PrecisePoint: x outside [0,1)");
    return PrecisePoint(value_type(x), format_label(x));
  }

  // Decimal literals, or one of the named constants 1/pi, pi-3, e-2,
  // sqrt2-1, sqrt3-1, golden-1 (= (sqrt5-1)/2).
  static PrecisePoint parse(const std::string& text) {
    namespace mc = boost::math::constants;
    value_type v;
    if (text == "1/pi") {
      v = 1 / mc::pi<value_type>();
    } else if (text == "pi-3") {
      v = mc::pi<value_type>() - 3;
    } else if (text == "e-2") {
      v = mc::e<value_type>() - 2;
    } else if (text == "sqrt2-1") {
      v = boost::multiprecision::sqrt(value_type(2)) - 1;
    } else if (text == "sqrt3-1") {
      v = boost::multiprecision::sqrt(value_type(3)) - 1;
    } else if (text == "golden-1") {
      v = (boost::multiprecision::sqrt(value_type(5)) - 1) / 2;
    } else {
      const bool numeric = !text.empty() && text.find_first_not_of("0123456789.eE+-") == std::string::npos;
      if (!numeric) throw DomainError("PrecisePoint: cannot parse '" + text + "'");
      try {
        v = value_type(text);
      } catch (const std::exception&) {
        throw DomainError("PrecisePoint: cannot parse '" + text + "'");
      }
    }
    if (!(v >= 0 && v < 1)) throw DomainError("PrecisePoint: x outside [0,1)");
    return PrecisePoint(std::move(v), text);
  }

  const value_type& value() const noexcept { return value_; }
  double approx() const { return static_cast<double>(value_); }
  const std::string& label() const noexcept { return label_; }

  // frac(m x) for an integer multiplier m given as a product of powers.
  double scaled_fraction(const value_type& multiplier) const {
    value_type y = multiplier * value_;
    y -= boost::multiprecision::floor(y);
    return static_cast<double>(y);
  }

 private:
  PrecisePoint(value_type v, std::string label) : value_(std::move(v)), label_(std::move(label)) {}

  static std::string format_label(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }

  value_type value_;
  std::string label_;
};

// (K^j f)(x) for a family of canonical maps. These commute (T_k T_l = T_{kl}),
// so the N^j compositions collapse to the compositions of j into counts
// (a_1, ..., a_N), each weighted by its multinomial coefficient over N^j.
template <class Fn>
double koopman_power_commuting(const MapFamily& family, const Fn& f, std::size_t j, const PrecisePoint& x) {
  if (!family.all_canonical()) throw DomainError("koopman_power_commuting: maps must be canonical");
  const std::size_t n = static_cast<std::size_t>(family.size());
  double bits = 0.0;
  for (const auto& m : family.maps()) bits = std::max(bits, std::log2(static_cast<double>(m.degree())));
  if (bits * static_cast<double>(j) > PrecisePoint::kBits - 80) {
    throw BudgetExceeded("koopman_power_commuting: j = " + std::to_string(j) + " exceeds the working precision");
  }
  using V = PrecisePoint::value_type;
  std::vector<std::size_t> counts(n, 0);
  const double log_norm = std::lgamma(static_cast<double>(j) + 1.0) - static_cast<double>(j) * std::log(static_cast<double>(n));
  double total = 0.0;
  // Enumerate count vectors in lexicographic order.
  std::function<void(std::size_t, std::size_t, double, const V&)> rec = [&](std::size_t d, std::size_t left,
                                                                          double log_w, const V& mult) {
    if (d + 1 == n) {
      const V m = mult * boost::multiprecision::pow(V(family.maps()[d].degree()), static_cast<int>(left));
      const double w = std::exp(log_w - std::lgamma(static_cast<double>(left) + 1.0));
      total += w * f(x.scaled_fraction(m));
      return;
    }
    V m = mult;
    const V k(family.maps()[d].degree());
    for (std::size_t a = 0; a <= left; ++a) {
      rec(d + 1, left - a, log_w - std::lgamma(static_cast<double>(a) + 1.0), m);
      m *= k;
    }
  };
  rec(0, j, log_norm, V(1));
  return total;
}

struct ErgodicAverageRow {
  std::size_t n = 0;
  double brute = std::numeric_limits<double>::quiet_NaN();  // only for n <= brute_limit
  double koopman = 0.0;
  double target = 0.0;
  bool grid_approximation = false;  // some K^j f(x) came from the resampled grid
};

// Rows n = 1..n_max comparing the word average by enumeration, the Koopman
// formula (1/n) sum_{j<n} (K^j f)(x), and the Lebesgue integral of f.
// Canonical families use the exact commuting formula at high precision.
// Otherwise K^j f(x) is evaluated by recursion while N^j <= pointwise_limit
// and from the resampled grid function beyond; the grid cannot resolve the
// oscillation of f o T_w for long words, so those rows are flagged.
template <class Fn>
std::vector<ErgodicAverageRow> ergodic_average_check(const MapFamily& family, const Fn& f, const PrecisePoint& x,
                                                     std::size_t n_max, std::size_t brute_limit = 8,
                                                     std::size_t q = 4096, std::size_t pointwise_limit = 4096) {
  std::vector<ErgodicAverageRow> rows;
  const double target = lebesgue_integral(f, 1 << 14);
  const double xd = x.approx();
  const bool exact = family.all_canonical();
  std::optional<GridFunction<double>> grid;
  if (!exact) grid = GridFunction<double>::sample(f, q, Interpolation::cubic);
  double cumulative = 0.0;
  double combos = 1.0;
  bool used_grid = false;
  for (std::size_t j = 0; j < n_max; ++j) {
    double term;
    if (exact) {
      term = koopman_power_commuting(family, f, j, x);
    } else if (combos <= static_cast<double>(pointwise_limit)) {
      term = koopman_power_at(family, f, j, xd);
    } else {
      term = grid->evaluate(xd);
      used_grid = true;
    }
    cumulative += term;
    if (grid) grid = averaged_koopman(family, *grid);
    combos *= family.size();
    ErgodicAverageRow row;
    row.n = j + 1;
    row.koopman = cumulative / static_cast<double>(j + 1);
    row.target = target;
    row.grid_approximation = used_grid;
    if (row.n <= brute_limit) row.brute = word_average_brute(family, f, xd, row.n);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Correlations

namespace detail {

inline std::size_t panels_for(std::uint64_t pieces, const QuadratureOptions& opt) {
  std::size_t p = static_cast<std::size_t>((opt.min_panels + pieces - 1) / pieces);
  p = std::max<std::size_t>({p, opt.min_panels_per_piece, 2});
  return p + (p % 2);
}

inline void check_budget(std::uint64_t pieces, std::size_t evals_per_piece, const QuadratureOptions& opt,
                         const char* what) {
  if (static_cast<double>(pieces) * static_cast<double>(evals_per_piece) > static_cast<double>(opt.budget)) {
    throw BudgetExceeded(std::string(what) + ": " + std::to_string(pieces) + " branch pieces exceed the budget");
  }
}

}  // namespace detail

// integral of (g o T_w) h dlambda minus integral g * integral h, for the first
// n symbols of w (n = 0 gives the covariance of g and h).
template <class G, class H>
double correlation(const MapFamily& family, const Word& w, std::size_t n, const G& g, const H& h,
                   const QuadratureOptions& opt = {}) {
  const std::uint64_t pieces = branch_product(family, w, n);
  const std::size_t panels = detail::panels_for(pieces, opt);
  detail::check_budget(pieces, panels + 1, opt, "correlation");
  double total = 0.0;
  for_each_piece(family, w, n, [&](double a, double width, std::span<const int>) {
    total += width * simpson([&](double t) { return g(t) * h(a + width * t); }, 0.0, 1.0, panels);
  });
  const std::size_t base = std::max<std::size_t>(opt.min_panels, 2048);
  return total - simpson(g, 0.0, 1.0, base) * simpson(h, 0.0, 1.0, base);
}

template <class G, class H>
double correlation(const MapFamily& family, const Word& w, const G& g, const H& h, const QuadratureOptions& opt = {}) {
  return correlation(family, w, w.size(), g, h, opt);
}

// The same correlation by the adjoint route: integral of g * (L_{w_n} ... L_{w_1} h)
// with the per-map operators of f_d = -log|T_d'|, which fix Lebesgue measure.
template <class G, class H>
double correlation_by_transfer(const MapFamily& family, const Word& w, const G& g, const H& h, std::size_t q) {
  std::vector<TransferMatrix<double>> ops;
  for (int d = 1; d <= family.size(); ++d) {
    ops.push_back(build_per_map_operator(family.map(d), Potential::neg_log_derivative(), q));
  }
  std::vector<double> v(q + 1), tmp(q + 1);
  for (std::size_t i = 0; i <= q; ++i) v[i] = h(static_cast<double>(i) / static_cast<double>(q));
  for (int s : w.symbols()) {
    ops[static_cast<std::size_t>(s - 1)].apply(v, tmp);
    std::swap(v, tmp);
  }
  for (std::size_t i = 0; i <= q; ++i) v[i] *= g(static_cast<double>(i) / static_cast<double>(q));
  return simpson(v, 0.0, 1.0) - simpson(g, 0.0, 1.0, 4096) * simpson(h, 0.0, 1.0, 4096);
}

struct CorrelationSeries {
  std::vector<std::pair<std::size_t, double>> entries;
  std::string family;
  std::string g;
  std::string h;
  std::string word_policy;
};

// Correlations along the prefixes of a repeated base word, n = n_min..n_max.
template <class G, class H>
CorrelationSeries correlation_series(const MapFamily& family, const Word& base, const G& g, const H& h,
                                     std::size_t n_min, std::size_t n_max, const QuadratureOptions& opt = {}) {
  CorrelationSeries s;
  s.word_policy = "repeat-word " + base.to_string();
  const Word w = base.as_periodic();
  for (std::size_t n = n_min; n <= n_max; ++n) s.entries.emplace_back(n, correlation(family, w, n, g, h, opt));
  return s;
}

struct DecayFit {
  double theta_hat = 0.0;
  double c_hat = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

// Least squares of log|value| against n over entries with |value| > 1e-14.
inline DecayFit decay_rate_fit(const CorrelationSeries& series) {
  std::vector<double> xs, ys;
  for (const auto& [n, v] : series.entries) {
    if (!(n == 0 && series.entries.size() > 1) && std::abs(v) > 1e-14) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(std::abs(v)));
    }
  }
  if (xs.size() < 4) throw TooFewPoints("decay_rate_fit: need at least 4 entries above 1e-14");
  const double k = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  DecayFit fit;
  const double slope = sxy / sxx;
  fit.theta_hat = std::exp(slope);
  fit.c_hat = std::exp(my - slope * mx);
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.points = xs.size();
  return fit;
}

// ---------------------------------------------------------------------------
// Variance of ergodic sums along a word

struct VarianceReport {
  std::size_t n = 0;
  std::optional<double> direct;      // (1/n) integral (g^n_w)^2 by piecewise quadrature
  double green_kubo = 0.0;           // integral g^2 + (2/n) sum_{i<j} C(w_{i+1..j})
  std::size_t max_lag_used = 0;      // lags beyond this were dropped (budget)
  bool truncated = false;

  double value() const { return direct ? *direct : green_kubo; }
};

template <class G>
VarianceReport variance_along_word(const MapFamily& family, const G& g, const Word& w, std::size_t n,
                                   const QuadratureOptions& opt = {}, bool want_direct = true,
                                   std::uint64_t max_pieces_per_lag = 1ULL << 22) {
  if (n < 1) throw DomainError("variance_along_word: n must be >= 1");
  if (!w.periodic() && w.size() < n) throw DomainError("variance_along_word: word shorter than n");
  const double mean = simpson(g, 0.0, 1.0, 8192);
  if (std::abs(mean) > 1e-10) throw NotMeanZero("variance_along_word: integral of g is " + std::to_string(mean));

  VarianceReport r;
  r.n = n;
  const Word word = w.prefix(n);

  // Direct quadrature over the pieces of T_{w_1 ... w_{n-1}}.
  if (want_direct) {
    std::uint64_t pieces = 0;
    try {
      pieces = branch_product(family, word, n - 1);
    } catch (const Overflow&) {
      pieces = std::numeric_limits<std::uint64_t>::max();
    }
    const std::size_t panels = detail::panels_for(std::max<std::uint64_t>(pieces, 1), opt);
    if (static_cast<double>(pieces) * static_cast<double>(panels + 1) * static_cast<double>(n) <=
        static_cast<double>(opt.budget)) {
      std::vector<double> orbit(n);
      double total = 0.0;
      for_each_piece(family, word, n - 1, [&](double, double width, std::span<const int> branches) {
        total += width * simpson(
                             [&](double t) {
                               orbit_from_branches(family, word, branches, t, std::span<double>(orbit.data(), n - 1));
                               orbit[n - 1] = t;
                               double s = 0.0;
                               for (double y : orbit) s += g(y);
                               return s * s;
                             },
                             0.0, 1.0, panels);
      });
      r.direct = total / static_cast<double>(n);
    }
  }

  // Green-Kubo: lag-k terms average the correlations over the subwords of
  // length k; correlations are cached by subword.
  QuadratureOptions copt = opt;
  const double g2 = simpson([&](double x) { return g(x) * g(x); }, 0.0, 1.0, 8192);
  std::map<std::vector<int>, double> cache;
  double cross = 0.0;
  r.max_lag_used = 0;
  for (std::size_t k = 1; k < n; ++k) {
    bool affordable = true;
    double lag_sum = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) {
      const Word sub = word.slice(i, k);
      auto it = cache.find(sub.symbols());
      if (it == cache.end()) {
        std::uint64_t pieces;
        try {
          pieces = branch_product(family, sub);
        } catch (const Overflow&) {
          affordable = false;
          break;
        }
        if (pieces > max_pieces_per_lag) {
          affordable = false;
          break;
        }
        copt.budget = std::max<std::size_t>(opt.budget, static_cast<std::size_t>(pieces) * (opt.min_panels_per_piece + 3));
        it = cache.emplace(sub.symbols(), correlation(family, sub, g, g, copt)).first;
      }
      lag_sum += it->second;
    }
    if (!affordable) {
      r.truncated = true;
      break;
    }
    cross += lag_sum;
    r.max_lag_used = k;
  }
  r.green_kubo = g2 + 2.0 * cross / static_cast<double>(n);
  return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo: orbits of Lebesgue-random points

enum class WordPolicy { fixed, bernoulli };

inline const char* to_string(WordPolicy p) { return p == WordPolicy::fixed ? "fixed" : "bernoulli"; }

namespace detail {

// Orbit x_0..x_{n-1} of a Lebesgue-random point along a word. The point is
// encoded by a stream of branch digits, one per step, and the orbit is
// rebuilt from the far end by contracting inverse branches; the tail beyond
// n is long enough that its contribution is below 2^-64. Step j uses draws
// 2j (symbol) and 2j + 1 (branch), so the first n orbit points do not depend
// on the horizon.
struct OrbitSampler {
  const MapFamily* family;
  WordPolicy policy;
  const Word* fixed_word;          // periodic or long enough
  std::vector<double> cumulative;  // Bernoulli CDF over symbols

  int symbol(const CounterStream& rng, std::size_t step) const {
    if (policy == WordPolicy::fixed) return fixed_word->symbol(step + 1);
    const double u = rng.uniform(2 * step);
    int s = 1;
    while (s < static_cast<int>(cumulative.size()) && u >= cumulative[static_cast<std::size_t>(s - 1)]) ++s;
    return s;
  }

  int branch(const CounterStream& rng, std::size_t step, const ExpandingMap& m) const {
    if (m.is_canonical()) return static_cast<int>(rng.below(2 * step + 1, static_cast<std::uint64_t>(m.degree())));
    const double u = rng.uniform(2 * step + 1);
    return m.branch_of(u);
  }

  void sample(const CounterStream& rng, std::size_t n, std::vector<double>& orbit, std::vector<int>& syms,
              std::vector<int>& brs) const {
    syms.clear();
    brs.clear();
    double width = 1.0;
    std::size_t step = 0;
    while (step < n || (width > 0x1.0p-64 && step < n + 4096)) {
      const int s = symbol(rng, step);
      const ExpandingMap& m = family->map(s);
      const int b = branch(rng, step, m);
      syms.push_back(s);
      brs.push_back(b);
      if (step >= n) width *= m.branch_length(b);
      ++step;
    }
    orbit.assign(n, 0.0);
    double y = 0.0;
    for (std::size_t j = syms.size(); j-- > 0;) {
      y = family->map(syms[j]).inverse(brs[j], y);
      if (j < n) orbit[j] = y;
    }
  }
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace detail

// Kolmogorov-Smirnov distance between the sample and Normal(0, variance).
inline double ks_statistic_normal(std::vector<double> xs, double variance) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  const double sd = std::sqrt(variance);
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = sd > 0 ? detail::normal_cdf(xs[i] / sd) : (xs[i] >= 0 ? 1.0 : 0.0);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return std::clamp(d, 0.0, 1.0);
}

struct CltReport {
  std::size_t samples = 0;
  std::size_t n = 0;
  double ks_statistic = 0.0;
  double variance_estimate = 0.0;
  std::string variance_source;  // "green_kubo" (fixed word) or "pooled_sample" (bernoulli)
  std::uint64_t seed = 0;
  WordPolicy word_policy = WordPolicy::fixed;
  bool degenerate = false;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
};

struct MonteCarloSetup {
  WordPolicy policy = WordPolicy::fixed;
  Word word;                       // used by the fixed policy (periodic extension)
  std::vector<double> bernoulli;   // empty means uniform
  std::uint64_t seed = 1;
};

namespace detail {

inline OrbitSampler make_sampler(const MapFamily& family, const MonteCarloSetup& setup, const Word& periodic_word) {
  OrbitSampler s{&family, setup.policy, &periodic_word, {}};
  std::vector<double> p = setup.bernoulli;
  if (p.empty()) p.assign(static_cast<std::size_t>(family.size()), 1.0 / family.size());
  if (p.size() != static_cast<std::size_t>(family.size())) throw LengthMismatch("bernoulli vector length != N");
  BernoulliSpec check(p);
  double acc = 0.0;
  for (double v : p) s.cumulative.push_back(acc += v);
  return s;
}

template <class G>
std::vector<double> normalized_sums(const MapFamily& family, const G& g, std::size_t n, std::size_t samples,
                                    const MonteCarloSetup& setup, const WorkerPool& pool) {
  const Word periodic = setup.policy == WordPolicy::fixed ? setup.word.as_periodic() : Word();
  if (setup.policy == WordPolicy::fixed && setup.word.empty()) throw DomainError("fixed word policy needs a word");
  const auto sampler = make_sampler(family, setup, periodic);
  std::vector<double> out(samples);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  pool.for_each_index(samples, [&](std::size_t k) {
    std::vector<double> orbit;
    std::vector<int> syms, brs;
    sampler.sample(CounterStream(setup.seed, k), n, orbit, syms, brs);
    double s = 0.0;
    for (double y : orbit) s += g(y);
    out[k] = s * scale;
  });
  return out;
}

}  // namespace detail

// Distribution of g^n_w(x) / sqrt(n) for x ~ Lebesgue (and w ~ Bernoulli under
// the bernoulli policy) against the normal law with the predicted variance.
template <class G>
CltReport clt_experiment(const MapFamily& family, const G& g, std::size_t n, std::size_t samples,
                         const MonteCarloSetup& setup, const WorkerPool& pool = WorkerPool{},
                         const QuadratureOptions& opt = {}) {
  if (samples < 1000) throw DomainError("clt_experiment: need at least 1000 samples");
  if (n < 1) throw DomainError("clt_experiment: n must be >= 1");
  CltReport r;
  r.samples = samples;
  r.n = n;
  r.seed = setup.seed;
  r.word_policy = setup.policy;
  const auto sums = detail::normalized_sums(family, g, n, samples, setup, pool);
  double m = 0.0, m2 = 0.0;
  for (double s : sums) {
    m += s;
    m2 += s * s;
  }
  r.sample_mean = m / static_cast<double>(samples);
  r.sample_variance = m2 / static_cast<double>(samples);
  if (setup.policy == WordPolicy::fixed) {
    r.variance_estimate = variance_along_word(family, g, setup.word.as_periodic(), n, opt, false).green_kubo;
    r.variance_source = "green_kubo";
  } else {
    r.variance_estimate = r.sample_variance;
    r.variance_source = "pooled_sample";
  }
  if (r.variance_estimate <= 1e-300 || r.sample_variance == 0.0) {
    r.degenerate = true;
    r.variance_estimate = std::max(r.variance_estimate, 0.0);
    r.ks_statistic = r.sample_variance == 0.0 ? 0.0 : 1.0;
    return r;
  }
  r.ks_statistic = ks_statistic_normal(sums, r.variance_estimate);
  return r;
}

struct LilReport {
  std::size_t samples = 0;
  std::size_t n0 = 0;
  std::size_t n_max = 0;
  double sigma = 0.0;
  std::vector<std::pair<double, double>> quantiles;  // (level, value)
  std::vector<double> statistics;                    // per-sample running maxima
};

// Running maximum over n0 <= n <= n_max of g^n_w(x) / (sigma sqrt(2 n log log n)).
// Diagnostic only: reports quantiles, never a verdict.
template <class G>
LilReport lil_diagnostic(const MapFamily& family, const G& g, std::size_t n0, std::size_t n_max, std::size_t samples,
                         const MonteCarloSetup& setup, const WorkerPool& pool = WorkerPool{},
                         const QuadratureOptions& opt = {}) {
  if (n0 < 3) throw DomainError("lil_diagnostic: n0 must be >= 3 so that log log n > 0");
  if (n_max < n0) throw DomainError("lil_diagnostic: n_max must be >= n0");
  LilReport r;
  r.samples = samples;
  r.n0 = n0;
  r.n_max = n_max;
  const Word periodic = setup.policy == WordPolicy::fixed ? setup.word.as_periodic() : Word();
  const auto sampler = detail::make_sampler(family, setup, periodic);
  std::vector<std::vector<double>> partial(samples);
  std::vector<double> finals(samples);
  pool.for_each_index(samples, [&](std::size_t k) {
    std::vector<double> orbit;
    std::vector<int> syms, brs;
    sampler.sample(CounterStream(setup.seed, k), n_max, orbit, syms, brs);
    auto& s = partial[k];
    s.resize(n_max + 1, 0.0);
    for (std::size_t i = 0; i < n_max; ++i) s[i + 1] = s[i] + g(orbit[i]);
    finals[k] = s[n_max];
  });
  double var;
  if (setup.policy == WordPolicy::fixed) {
    var = variance_along_word(family, g, periodic, n_max, opt, false).green_kubo;
  } else {
    var = 0.0;
    for (double v : finals) var += v * v;
    var /= static_cast<double>(samples) * static_cast<double>(n_max);
  }
  r.sigma = std::sqrt(std::max(var, 0.0));
  r.statistics.assign(samples, 0.0);
  if (r.sigma > 0.0) {
    for (std::size_t k = 0; k < samples; ++k) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t n = n0; n <= n_max; ++n) {
        const double nn = static_cast<double>(n);
        best = std::max(best, partial[k][n] / (r.sigma * std::sqrt(2.0 * nn * std::log(std::log(nn)))));
      }
      r.statistics[k] = best;
    }
  }
  std::vector<double> sorted = r.statistics;
  std::sort(sorted.begin(), sorted.end());
  for (double level : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const std::size_t idx = std::min(sorted.size() - 1, static_cast<std::size_t>(level * static_cast<double>(sorted.size())));
    r.quantiles.emplace_back(level, sorted[idx]);
  }
  return r;
}

}  // namespace simdyn
