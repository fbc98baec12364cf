// Leading eigendata of transfer matrices.
//
// rho and phi come from power iteration with per-step renormalization and a
// Rayleigh-quotient stopping rule; nu from the same iteration on M^T; the gap
// |lambda_2| / rho from power iteration on the deflated operator
// M - rho phi nu^T. Dimensions up to 4096 fall back to a dense eigensolve
// when power iteration stalls.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "simdyn/error.hpp"
#include "simdyn/transfer.hpp"

namespace simdyn {

inline constexpr std::size_t kDenseFallbackLimit = 4096;

struct SpectralOptions {
  double tol = 1e-13;              // relative residual ||M phi - rho phi|| / (rho ||phi||)
  std::size_t max_iter = 20000;
  std::size_t gap_burn_in = 60;
  std::size_t gap_window = 120;
  bool estimate_gap = true;
  bool allow_dense_fallback = true;
  // Optional start vector for phi (defaults to all ones).
  std::optional<std::vector<double>> start;
};

struct SpectralData {
  double rho = 0.0;
  std::vector<double> phi;  // right eigenfunction, <nu, phi> = 1
  std::vector<double> nu;   // left eigenvector, nonnegative, sums to 1
  double gap = 0.0;         // |lambda_2| / rho
  double residual = 0.0;    // relative residual of phi
  double nu_residual = 0.0;
  std::size_t iterations = 0;
  bool dense_fallback = false;
  OperatorMeta meta;

  double pressure() const { return std::log(rho); }

  // Right eigenfunction as a grid function (operators on I only).
  GridFunction<double> phi_function() const {
    if (meta.depth != 0) throw DomainError("phi_function: use phi_slices for skew operators");
    return GridFunction<double>(phi);
  }

  // Right eigenfunction of a skew operator as a cylinder function.
  CylinderFunction<double> phi_slices() const {
    const std::size_t block = meta.resolution + 1;
    std::vector<GridFunction<double>> slices;
    for (std::size_t b = 0; b * block < phi.size(); ++b) {
      slices.emplace_back(std::vector<double>(phi.begin() + static_cast<std::ptrdiff_t>(b * block),
                                              phi.begin() + static_cast<std::ptrdiff_t>((b + 1) * block)));
    }
    return CylinderFunction<double>(meta.depth, meta.alphabet_size, std::move(slices));
  }
};

namespace detail {

inline double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Deterministic values in [-1, 1) for deflated start vectors.
inline std::vector<double> scrambled_vector(std::size_t n, std::uint64_t salt = 0x5eed) {
  std::vector<double> v(n);
  std::uint64_t s = salt;
  for (auto& x : v) {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    x = static_cast<double>(s >> 11) * 0x1.0p-52 - 1.0;
  }
  return v;
}

struct PowerResult {
  double value = 0.0;
  std::vector<double> vec;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

template <class Apply>
PowerResult power_iterate(Apply&& apply, std::vector<double> v, double tol, std::size_t max_iter) {
  PowerResult r;
  std::vector<double> w(v.size());
  double scale = sup_norm(v);
  if (scale == 0.0) throw DomainError("power iteration: zero start vector");
  for (auto& x : v) x /= scale;
  for (std::size_t k = 1; k <= max_iter; ++k) {
    apply(v, w);
    const double rq = dot(v, w) / dot(v, v);
    double res = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) res = std::max(res, std::abs(w[i] - rq * v[i]));
    res /= std::abs(rq) * sup_norm(v);
    r.value = rq;
    r.residual = res;
    r.iterations = k;
    const double wn = sup_norm(w);
    if (wn == 0.0) throw NoConvergence("power iteration: operator annihilated the iterate");
    if (res < tol) {
      r.vec = std::move(v);
      r.converged = true;
      return r;
    }
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / wn;
  }
  r.vec = std::move(v);
  return r;
}

// Dense eigensolve used when power iteration stalls on small problems.
inline void dense_leading(const TransferMatrix<double>& m, SpectralData& out) {
  const auto n = static_cast<Eigen::Index>(m.dimension());
  Eigen::MatrixXd a(n, n);
  const auto d = m.dense();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = d[static_cast<std::size_t>(i * n + j)];
  auto pick = [](const Eigen::EigenSolver<Eigen::MatrixXd>& es) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
    return best;
  };
  Eigen::EigenSolver<Eigen::MatrixXd> right(a), left(a.transpose());
  const auto ir = pick(right), il = pick(left);
  out.rho = right.eigenvalues()(ir).real();
  out.phi.resize(static_cast<std::size_t>(n));
  out.nu.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.phi[static_cast<std::size_t>(i)] = right.eigenvectors()(i, ir).real();
    out.nu[static_cast<std::size_t>(i)] = left.eigenvectors()(i, il).real();
  }
  double second = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != ir) second = std::max(second, std::abs(right.eigenvalues()(i)));
  out.gap = second / out.rho;
  out.dense_fallback = true;
}

}  // namespace detail

// Maximal eigenvalue, eigenfunction, eigenmeasure and gap of a real
// nonnegative-weight operator.
inline SpectralData leading_spectral_data(const TransferMatrix<double>& m, const SpectralOptions& opt = {}) {
  const std::size_t n = m.dimension();
  SpectralData out;
  out.meta = m.meta();
  auto right = [&](const std::vector<double>& v, std::vector<double>& w) { m.apply(v, w); };
  auto left = [&](const std::vector<double>& v, std::vector<double>& w) { m.apply_transpose(v, w); };

  std::vector<double> start = opt.start ? *opt.start : std::vector<double>(n, 1.0);
  if (start.size() != n) throw DomainError("leading_spectral_data: start vector has wrong size");
  auto pr = detail::power_iterate(right, std::move(start), opt.tol, opt.max_iter);
  auto pl = detail::power_iterate(left, std::vector<double>(n, 1.0), opt.tol, opt.max_iter);
  if (!pr.converged || !pl.converged) {
    if (!opt.allow_dense_fallback || n > kDenseFallbackLimit) {
      throw NoConvergence("leading_spectral_data: no convergence in " + std::to_string(opt.max_iter) +
                          " iterations (residual " + std::to_string(std::max(pr.residual, pl.residual)) + ")");
    }
    detail::dense_leading(m, out);
  } else {
    out.rho = pr.value;
    out.phi = std::move(pr.vec);
    out.nu = std::move(pl.vec);
    out.residual = pr.residual;
    out.nu_residual = pl.residual;
    out.iterations = std::max(pr.iterations, pl.iterations);
  }

  // Sign convention: integral of phi positive; nu a probability vector.
  if (std::accumulate(out.phi.begin(), out.phi.end(), 0.0) < 0.0)
    for (auto& x : out.phi) x = -x;
  if (std::accumulate(out.nu.begin(), out.nu.end(), 0.0) < 0.0)
    for (auto& x : out.nu) x = -x;
  for (auto& x : out.nu) {
    if (x < -1e-14 * detail::sup_norm(out.nu)) throw NonPositiveEigenfunction("eigenmeasure has negative weights");
    x = std::max(x, 0.0);
  }
  const double mass = std::accumulate(out.nu.begin(), out.nu.end(), 0.0);
  for (auto& x : out.nu) x /= mass;
  const double pairing = detail::dot(out.nu, out.phi);
  for (auto& x : out.phi) x /= pairing;
  if (*std::min_element(out.phi.begin(), out.phi.end()) <= 0.0) {
    throw NonPositiveEigenfunction("leading eigenfunction is not strictly positive; refine the grid");
  }
  if (out.dense_fallback) {
    std::vector<double> w(n);
    m.apply(out.phi, w);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(w[i] - out.rho * out.phi[i]));
    out.residual = res / (out.rho * detail::sup_norm(out.phi));
    return out;
  }

  if (opt.estimate_gap) {
    // Power iteration on M - rho phi nu^T; the mean log growth over a window
    // after burn-in estimates |lambda_2|.
    std::vector<double> v = detail::scrambled_vector(n), w(n);
    auto project = [&](std::vector<double>& x) {
      const double c = detail::dot(out.nu, x);
      for (std::size_t i = 0; i < n; ++i) x[i] -= c * out.phi[i];
    };
    project(v);
    double log_growth = 0.0;
    std::size_t counted = 0;
    double vn = detail::sup_norm(v);
    for (std::size_t k = 0; k < opt.gap_burn_in + opt.gap_window && vn > 0.0; ++k) {
      for (auto& x : v) x /= vn;
      m.apply(v, w);
      project(w);
      const double wn = detail::sup_norm(w);
      if (wn == 0.0 || wn < 1e-300) {
        vn = 0.0;
        break;
      }
      if (k >= opt.gap_burn_in) {
        log_growth += std::log(wn);
        ++counted;
      }
      std::swap(v, w);
      vn = wn;
    }
    out.gap = (counted == 0 || vn == 0.0) ? 0.0 : std::exp(log_growth / static_cast<double>(counted)) / out.rho;
  }
  return out;
}

struct ComplexRadius {
  double radius = 0.0;
  std::complex<double> eigenvalue{};
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Largest |lambda| of a complex operator. Converged runs return the modulus
// of the Rayleigh quotient; otherwise the mean growth rate of the last window.
inline ComplexRadius spectral_radius(const TransferMatrix<std::complex<double>>& m, double tol = 1e-10,
                                     std::size_t max_iter = 20000, std::size_t window = 200) {
  using C = std::complex<double>;
  const std::size_t n = m.dimension();
  std::vector<C> v(n), w(n);
  const auto seed = detail::scrambled_vector(n, 0xC0FFEE);
  for (std::size_t i = 0; i < n; ++i) v[i] = C(1.0 + 0.25 * seed[i], 0.0);
  auto norm2 = [](const std::vector<C>& x) {
    double s = 0.0;
    for (const auto& z : x) s += std::norm(z);
    return std::sqrt(s);
  };
  ComplexRadius out;
  double vn = norm2(v);
  std::vector<double> logs;
  for (std::size_t k = 1; k <= max_iter; ++k) {
    for (auto& z : v) z /= vn;
    m.apply(v, w);
    C rq{};
    for (std::size_t i = 0; i < n; ++i) rq += std::conj(v[i]) * w[i];
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += std::norm(w[i] - rq * v[i]);
    res = std::sqrt(res);
    const double wn = norm2(w);
    out.iterations = k;
    out.eigenvalue = rq;
    out.residual = std::abs(rq) > 0 ? res / std::abs(rq) : res;
    if (wn == 0.0) {
      out.radius = 0.0;
      out.converged = true;
      return out;
    }
    logs.push_back(std::log(wn));
    if (out.residual < tol) {
      out.radius = std::abs(rq);
      out.converged = true;
      return out;
    }
    std::swap(v, w);
    vn = wn;
  }
  const std::size_t take = std::min(window, logs.size());
  double s = 0.0;
  for (std::size_t i = logs.size() - take; i < logs.size(); ++i) s += logs[i];
  out.radius = std::exp(s / static_cast<double>(take));
  return out;
}

}  // namespace simdyn
