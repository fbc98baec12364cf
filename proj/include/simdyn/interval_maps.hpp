// Full-branch piecewise-affine expanding maps of [0,1), their compositions
// along words, fixed points and the skew product T(w, x) = (sigma w, T_{w_1} x).
//
// A map with k branches is described by breakpoints 0 = c_0 < ... < c_k = 1;
// on [c_j, c_{j+1}) it is x -> (x - c_j) / (c_{j+1} - c_j). The canonical map
// of degree k has c_j = j / k, i.e. x -> k x mod 1.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "simdyn/error.hpp"
#include "simdyn/symbolic.hpp"

namespace simdyn {

inline constexpr double kExpansivityMargin = 1e-9;

// Folds x = 1 onto 0; rejects anything outside [0, 1].
inline double fold_unit(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("point " + std::to_string(x) + " outside [0,1]");
  return x == 1.0 ? 0.0 : x;
}

class ExpandingMap {
 public:
  static ExpandingMap canonical(int degree) {
    if (degree < 2) throw DomainError("ExpandingMap: degree must be >= 2");
    std::vector<double> c(static_cast<std::size_t>(degree) + 1);
    for (int j = 0; j <= degree; ++j) c[static_cast<std::size_t>(j)] = static_cast<double>(j) / degree;
    return ExpandingMap(std::move(c), true);
  }

  static ExpandingMap from_breakpoints(std::vector<double> breakpoints) {
    return ExpandingMap(std::move(breakpoints), false);
  }

  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_canonical() const noexcept { return canonical_; }
  const std::vector<double>& breakpoints() const noexcept { return c_; }

  double branch_start(int j) const { return c_[static_cast<std::size_t>(j)]; }
  double branch_length(int j) const { return c_[static_cast<std::size_t>(j) + 1] - c_[static_cast<std::size_t>(j)]; }
  double slope(int j) const { return 1.0 / branch_length(j); }

  // Half-open branch membership: x in [c_j, c_{j+1}).
  int branch_of(double x) const {
    x = fold_unit(x);
    if (canonical_) return std::min(static_cast<int>(x * degree()), degree() - 1);
    auto it = std::upper_bound(c_.begin(), c_.end(), x);
    return std::clamp(static_cast<int>(it - c_.begin()) - 1, 0, degree() - 1);
  }

  double slope_at(double x) const { return slope(branch_of(x)); }

  double apply(double x) const {
    x = fold_unit(x);
    double y;
    if (canonical_) {
      y = degree() * x;
      y -= std::floor(y);
    } else {
      const int j = branch_of(x);
      y = (x - branch_start(j)) / branch_length(j);
    }
    return y >= 1.0 ? 0.0 : y;
  }

  // Preimage of x under branch j; x may be 1 (left limit of the branch).
  double inverse(int j, double x) const { return branch_start(j) + branch_length(j) * x; }

  std::vector<double> inverse_branches(double x) const {
    x = fold_unit(x);
    std::vector<double> out(static_cast<std::size_t>(degree()));
    for (int j = 0; j < degree(); ++j) {
      out[static_cast<std::size_t>(j)] = canonical_ ? (x + j) / degree() : inverse(j, x);
    }
    return out;
  }

 private:
  ExpandingMap(std::vector<double> c, bool canonical) : c_(std::move(c)), canonical_(canonical) {
    if (c_.size() < 3) throw DomainError("ExpandingMap: need at least two branches");
    if (c_.front() != 0.0 || c_.back() != 1.0) throw DomainError("ExpandingMap: breakpoints must span [0,1]");
    for (std::size_t j = 0; j + 1 < c_.size(); ++j) {
      const double len = c_[j + 1] - c_[j];
      if (!(len > 0.0) || 1.0 / len < 1.0 + kExpansivityMargin) {
        throw DomainError("ExpandingMap: every branch needs slope >= 1 + 1e-9");
      }
    }
  }

  std::vector<double> c_;
  bool canonical_ = false;
};

class MapFamily {
 public:
  explicit MapFamily(std::vector<ExpandingMap> maps) : maps_(std::move(maps)) {
    if (maps_.empty()) throw DomainError("MapFamily: need at least one map");
  }

  static MapFamily from_degrees(const std::vector<int>& degrees) {
    std::vector<ExpandingMap> maps;
    maps.reserve(degrees.size());
    for (int k : degrees) maps.push_back(ExpandingMap::canonical(k));
    return MapFamily(std::move(maps));
  }

  int size() const noexcept { return static_cast<int>(maps_.size()); }
  // 1-based, matching the symbolic alphabet.
  const ExpandingMap& map(int d) const {
    if (d < 1 || d > size()) throw DomainError("MapFamily: map index out of range");
    return maps_[static_cast<std::size_t>(d - 1)];
  }
  const std::vector<ExpandingMap>& maps() const noexcept { return maps_; }

  std::vector<int> degrees() const {
    std::vector<int> out;
    for (const auto& m : maps_) out.push_back(m.degree());
    return out;
  }
  int total_degree() const {
    int t = 0;
    for (const auto& m : maps_) t += m.degree();
    return t;
  }
  bool all_canonical() const {
    return std::all_of(maps_.begin(), maps_.end(), [](const ExpandingMap& m) { return m.is_canonical(); });
  }

 private:
  std::vector<ExpandingMap> maps_;
};

struct SkewPoint {
  Word word;
  double x = 0.0;
};

// T_w x = (T_{w_p} o ... o T_{w_1}) x; w_1 acts first.
inline double apply_word(const MapFamily& family, const Word& w, double x) {
  if (w.empty()) throw DomainError("apply_word: empty word");
  x = fold_unit(x);
  for (int s : w.symbols()) x = family.map(s).apply(x);
  return x;
}

// M_w = product of branch counts along the first n symbols of w.
inline std::uint64_t branch_product(const MapFamily& family, const Word& w, std::size_t n) {
  std::uint64_t m = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const auto k = static_cast<std::uint64_t>(family.map(w.symbol(i)).degree());
    if (m > std::numeric_limits<std::uint64_t>::max() / k) throw Overflow("branch product overflows 64 bits");
    m *= k;
  }
  return m;
}

inline std::uint64_t branch_product(const MapFamily& family, const Word& w) {
  return branch_product(family, w, w.size());
}

// Visits the M_w affine pieces of T_w in increasing order of x. On a piece
// [a, a + width) the composition is x -> (x - a) / width, onto [0, 1).
// `branches[i]` is the branch of T_{w_{i+1}} used at step i.
template <class Visitor>
void for_each_piece(const MapFamily& family, const Word& w, std::size_t n, Visitor&& visit) {
  std::vector<const ExpandingMap*> maps(n);
  for (std::size_t i = 0; i < n; ++i) maps[i] = &family.map(w.symbol(i + 1));
  std::vector<int> b(n, 0);
  std::vector<double> a(n + 1, 0.0), width(n + 1, 1.0);
  auto rebuild = [&](std::size_t from) {
    for (std::size_t i = from; i < n; ++i) {
      a[i + 1] = a[i] + width[i] * maps[i]->branch_start(b[i]);
      width[i + 1] = width[i] * maps[i]->branch_length(b[i]);
    }
  };
  rebuild(0);
  while (true) {
    visit(a[n], width[n], std::span<const int>(b));
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++b[i] < maps[i]->degree()) break;
      b[i] = 0;
      if (i == 0) return;
    }
    if (n == 0) return;
    rebuild(i);
  }
}

// Orbit x_0, ..., x_{n-1} of the point that lands at t after following the
// branch sequence `branches` along w, computed by contracting inverse
// branches from t so that no expansion error accumulates.
inline void orbit_from_branches(const MapFamily& family, const Word& w, std::span<const int> branches, double t,
                                std::span<double> orbit) {
  const std::size_t n = branches.size();
  double y = t;
  for (std::size_t i = n; i-- > 0;) {
    y = family.map(w.symbol(i + 1)).inverse(branches[i], y);
    orbit[i] = y;
  }
}

// True when x (a fixed point of T_w with |w| = n) has a shorter period p | n
// with w itself p-periodic.
inline bool has_shorter_period(const Word& w, std::span<const double> orbit, double tol = 1e-12) {
  const std::size_t n = orbit.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool word_periodic = true;
    for (std::size_t i = 0; i + p < n && word_periodic; ++i) word_periodic = w.symbol(i + 1) == w.symbol(i + 1 + p);
    if (word_periodic && std::abs(orbit[p] - orbit[0]) < tol) return true;
  }
  return false;
}

inline bool is_last_piece(const MapFamily& family, const Word& w, std::span<const int> branches) {
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (branches[i] != family.map(w.symbol(i + 1)).degree() - 1) return false;
  }
  return true;
}

// All solutions of T_w x = x in [0, 1), ascending. Canonical families use the
// closed form j / (M_w - 1); others solve x = (x - a) / width on each piece.
inline std::vector<double> fixed_points(const MapFamily& family, const Word& w, bool prime_only = false) {
  if (w.empty()) throw DomainError("fixed_points: empty word");
  const std::uint64_t m = branch_product(family, w);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m - 1));
  std::vector<double> orbit(w.size());
  if (family.all_canonical() && !prime_only) {
    const double denom = static_cast<double>(m - 1);
    for (std::uint64_t j = 0; j + 1 < m; ++j) out.push_back(static_cast<double>(j) / denom);
    return out;
  }
  for_each_piece(family, w, w.size(), [&](double a, double width, std::span<const int> branches) {
    if (is_last_piece(family, w, branches)) return;  // its fixed point is x = 1
    const double x = a / (1.0 - width);
    if (!(x < a + width) || x >= 1.0) return;
    if (prime_only) {
      orbit_from_branches(family, w, branches, x, orbit);
      if (has_shorter_period(w, orbit)) return;
    }
    out.push_back(x);
  });
  return out;
}

inline SkewPoint skew_apply(const MapFamily& family, const SkewPoint& p) {
  if (p.word.empty()) throw DomainError("skew_apply: empty word");
  return SkewPoint{p.word.shifted(1), family.map(p.word.symbol(1)).apply(p.x)};
}

// f^n_w(x) = f(x) + f(T_{w_1} x) + ... + f(T_{w_{n-1}} o ... o T_{w_1} x).
template <class Fn>
double ergodic_sum(const MapFamily& family, const Fn& f, const Word& w, double x, std::size_t n) {
  if (n < 1) throw DomainError("ergodic_sum: n must be >= 1");
  if (!w.periodic() && w.size() < n) throw DomainError("ergodic_sum: word shorter than n");
  x = fold_unit(x);
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    sum += f(x);
    if (i < n) x = family.map(w.symbol(i)).apply(x);
  }
  return sum;
}

}  // namespace simdyn
