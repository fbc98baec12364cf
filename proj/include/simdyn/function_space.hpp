// Sampled functions on I = [0,1], Simpson quadrature, Hoelder diagnostics,
// analytic potentials and depth-m cylinder functions on S^m x I.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "simdyn/error.hpp"
#include "simdyn/interval_maps.hpp"
#include "simdyn/symbolic.hpp"

namespace simdyn {

enum class Interpolation { linear, cubic };

inline bool is_power_of_two(std::size_t q) { return q != 0 && (q & (q - 1)) == 0; }

inline void require_resolution(std::size_t q) {
  if (q < 16 || !is_power_of_two(q)) {
    throw DomainError("resolution q must be a power of two >= 16, got " + std::to_string(q));
  }
}

// Values at the q + 1 uniform nodes x_i = i / q.
template <class T = double>
class GridFunction {
 public:
  using value_type = T;

  GridFunction(std::vector<T> values, Interpolation interp = Interpolation::linear)
      : values_(std::move(values)), interp_(interp) {
    if (values_.size() < 2) throw DomainError("GridFunction: need at least two nodes");
    require_resolution(values_.size() - 1);
    for (const T& v : values_) {
      if (!std::isfinite(std::abs(v))) throw DomainError("GridFunction: non-finite sample");
    }
  }

  template <class Fn>
  static GridFunction sample(const Fn& fn, std::size_t q, Interpolation interp = Interpolation::linear) {
    require_resolution(q);
    std::vector<T> v(q + 1);
    for (std::size_t i = 0; i <= q; ++i) v[i] = static_cast<T>(fn(static_cast<double>(i) / static_cast<double>(q)));
    return GridFunction(std::move(v), interp);
  }

  static GridFunction constant(T c, std::size_t q) { return GridFunction(std::vector<T>(q + 1, c)); }

  std::size_t resolution() const noexcept { return values_.size() - 1; }
  Interpolation interpolation() const noexcept { return interp_; }
  const std::vector<T>& values() const noexcept { return values_; }
  double node(std::size_t i) const noexcept { return static_cast<double>(i) / static_cast<double>(resolution()); }

  T evaluate(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("GridFunction::evaluate: x outside [0,1]");
    const std::size_t q = resolution();
    const double p = x * static_cast<double>(q);
    const std::size_t i = std::min(static_cast<std::size_t>(p), q - 1);
    const double t = p - static_cast<double>(i);
    if (interp_ == Interpolation::linear || t == 0.0) {
      return values_[i] + t * (values_[i + 1] - values_[i]);
    }
    // Four-point Lagrange stencil, shifted inward at the ends.
    const std::size_t s = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, q - 3);
    const double u = p - static_cast<double>(s);
    T acc = values_[i];
    for (std::size_t j = 0; j < 4; ++j) {
      double w = 1.0;
      for (std::size_t l = 0; l < 4; ++l) {
        if (l != j) w *= (u - static_cast<double>(l)) / (static_cast<double>(j) - static_cast<double>(l));
      }
      acc += w * (values_[s + j] - values_[i]);
    }
    return acc;
  }

  T operator()(double x) const { return evaluate(x); }

  friend GridFunction operator*(const GridFunction& a, const GridFunction& b) {
    if (a.resolution() != b.resolution()) throw DomainError("GridFunction: resolution mismatch");
    std::vector<T> v(a.values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] * b.values_[i];
    return GridFunction(std::move(v), a.interp_);
  }

 private:
  std::vector<T> values_;
  Interpolation interp_;
};

// Composite Simpson rule on uniform samples (even panel count).
template <class T>
T simpson(const std::vector<T>& v, double a, double b) {
  const std::size_t panels = v.size() - 1;
  if (panels < 2 || panels % 2 != 0) throw DomainError("simpson: need an even number of panels");
  T odd{}, even{};
  for (std::size_t i = 1; i < panels; i += 2) odd += v[i];
  for (std::size_t i = 2; i < panels; i += 2) even += v[i];
  const double h = (b - a) / static_cast<double>(panels);
  return (v.front() + v.back() + 4.0 * odd + 2.0 * even) * (h / 3.0);
}

// Simpson with `panels` panels of a callable on [a, b].
template <class Fn>
auto simpson(const Fn& fn, double a, double b, std::size_t panels) {
  using R = std::decay_t<decltype(fn(a))>;
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / static_cast<double>(panels);
  R odd{}, even{};
  for (std::size_t i = 1; i < panels; i += 2) odd += fn(a + h * static_cast<double>(i));
  for (std::size_t i = 2; i < panels; i += 2) even += fn(a + h * static_cast<double>(i));
  return (fn(a) + fn(b) + 4.0 * odd + 2.0 * even) * (h / 3.0);
}

template <class T>
T integrate(const GridFunction<T>& f) {
  return simpson(f.values(), 0.0, 1.0);
}

// Lower bound on |f|_alpha from node pairs at most `lag_window` apart
// (0 means all pairs).
template <class T>
double holder_seminorm_estimate(const GridFunction<T>& f, double alpha, std::size_t lag_window = 0) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("holder_seminorm_estimate: alpha must lie in (0,1]");
  const std::size_t q = f.resolution();
  const std::size_t window = lag_window == 0 ? q : std::min(lag_window, q);
  const auto& v = f.values();
  double best = 0.0;
  for (std::size_t i = 0; i <= q; ++i) {
    for (std::size_t lag = 1; lag <= window && i + lag <= q; ++lag) {
      const double dx = static_cast<double>(lag) / static_cast<double>(q);
      best = std::max(best, std::abs(v[i + lag] - v[i]) / std::pow(dx, alpha));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Potentials

// One whitelisted building block of a potential.
struct PotentialTerm {
  enum class Kind { constant, coordinate, centered, power, cosine, sine, neg_log_derivative, table };

  Kind kind = Kind::constant;
  double coef = 1.0;
  double param = 0.0;     // constant value or trig frequency
  int map_index = 0;      // neglogd:d; 0 means "the map being acted on"
  std::optional<ExpandingMap> bound_map;
  std::shared_ptr<const GridFunction<double>> table;
  std::string source;     // canonical text for labels

  double raw(double x) const {
    switch (kind) {
      case Kind::constant: return param;
      case Kind::coordinate: return x;
      case Kind::centered: return x - 0.5;
      case Kind::power: return std::pow(x, param);
      case Kind::cosine: return std::cos(2.0 * std::numbers::pi * param * x);
      case Kind::sine: return std::sin(2.0 * std::numbers::pi * param * x);
      case Kind::neg_log_derivative:
        if (!bound_map) throw DomainError("potential '" + source + "' needs a map to be bound before evaluation");
        return -std::log(bound_map->slope_at(x));
      case Kind::table: return table->evaluate(x);
    }
    return 0.0;
  }
};

// Finite linear combination of whitelisted terms. Parses from strings such as
// "centered", "cos:3", "pow:2", "neglogd:2", "const:0.7" or "x+const:-0.45"
// and "0.5*cos:1+centered".
class Potential {
 public:
  Potential() = default;

  static Potential constant(double c) { return single({PotentialTerm::Kind::constant, 1.0, c, 0, {}, {}, "const:" + fmt(c)}); }
  static Potential coordinate() { return single({PotentialTerm::Kind::coordinate, 1.0, 0.0, 0, {}, {}, "x"}); }
  static Potential centered() { return single({PotentialTerm::Kind::centered, 1.0, 0.0, 0, {}, {}, "centered"}); }
  static Potential power(double k) { return single({PotentialTerm::Kind::power, 1.0, k, 0, {}, {}, "pow:" + fmt(k)}); }
  static Potential cosine(double k) { return single({PotentialTerm::Kind::cosine, 1.0, k, 0, {}, {}, "cos:" + fmt(k)}); }
  static Potential sine(double k) { return single({PotentialTerm::Kind::sine, 1.0, k, 0, {}, {}, "sin:" + fmt(k)}); }
  // -log|T'| of whichever map the potential is evaluated for.
  static Potential neg_log_derivative() {
    return single({PotentialTerm::Kind::neg_log_derivative, 1.0, 0.0, 0, {}, {}, "neglogd"});
  }
  static Potential neg_log_derivative(const MapFamily& family, int d) {
    PotentialTerm t{PotentialTerm::Kind::neg_log_derivative, 1.0, 0.0, d, family.map(d), {}, "neglogd:" + std::to_string(d)};
    return single(std::move(t));
  }
  static Potential table(GridFunction<double> samples, std::string label = "table") {
    PotentialTerm t{PotentialTerm::Kind::table, 1.0, 0.0, 0, {}, std::make_shared<const GridFunction<double>>(std::move(samples)),
                    std::move(label)};
    return single(std::move(t));
  }

  static Potential parse(std::string_view text, const MapFamily* family = nullptr) {
    Potential out;
    std::string s;
    for (char c : text) {
      if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    }
    if (s.empty()) throw ConfigError("empty potential specification");
    // Split on '+' that is not part of an exponent or a sign right after ':'.
    std::vector<std::string> parts;
    std::string cur;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      const bool sign_context = i > 0 && (s[i - 1] == ':' || s[i - 1] == 'e' || s[i - 1] == 'E' || s[i - 1] == '*');
      if (c == '+' && !sign_context && !cur.empty()) {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    parts.push_back(cur);
    for (const auto& part : parts) out = out + parse_term(part, family);
    return out;
  }

  double operator()(double x) const {
    double v = 0.0;
    for (const auto& t : terms_) v += t.coef * t.raw(x);
    return v;
  }

  // Copy with every unindexed neglogd term bound to `map`.
  Potential for_map(const ExpandingMap& map) const {
    Potential out = *this;
    for (auto& t : out.terms_) {
      if (t.kind == PotentialTerm::Kind::neg_log_derivative && t.map_index == 0) t.bound_map = map;
    }
    return out;
  }

  bool is_constant() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const PotentialTerm& t) {
      return t.coef == 0.0 || t.kind == PotentialTerm::Kind::constant ||
             (t.kind == PotentialTerm::Kind::neg_log_derivative && t.bound_map && t.bound_map->is_canonical());
    });
  }

  bool needs_map() const {
    return std::any_of(terms_.begin(), terms_.end(), [](const PotentialTerm& t) {
      return t.kind == PotentialTerm::Kind::neg_log_derivative && !t.bound_map;
    });
  }

  const std::vector<PotentialTerm>& terms() const noexcept { return terms_; }

  std::string label() const {
    if (terms_.empty()) return "const:0";
    std::string out;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (i > 0) out += "+";
      if (terms_[i].coef != 1.0) out += fmt(terms_[i].coef) + "*";
      out += terms_[i].source;
    }
    return out;
  }

  friend Potential operator+(Potential a, const Potential& b) {
    a.terms_.insert(a.terms_.end(), b.terms_.begin(), b.terms_.end());
    return a;
  }
  friend Potential operator*(double c, Potential a) {
    for (auto& t : a.terms_) t.coef *= c;
    return a;
  }
  friend Potential operator+(Potential a, double c) { return a + constant(c); }

 private:
  static Potential single(PotentialTerm t) {
    Potential p;
    p.terms_.push_back(std::move(t));
    return p;
  }

  static std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }

  static double number(const std::string& s, const std::string& whole) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw ConfigError("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("potential '" + whole + "': bad number '" + s + "'");
    }
  }

  static Potential parse_term(const std::string& part, const MapFamily* family) {
    double coef = 1.0;
    std::string body = part;
    if (auto star = part.find('*'); star != std::string::npos) {
      coef = number(part.substr(0, star), part);
      body = part.substr(star + 1);
    }
    const auto colon = body.find(':');
    const std::string name = body.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : body.substr(colon + 1);
    Potential p;
    if (name == "const" || name == "constant") {
      if (arg.empty()) throw ConfigError("potential '" + part + "': const needs a value");
      p = constant(number(arg, part));
    } else if (name == "x" || name == "coordinate") {
      p = coordinate();
    } else if (name == "centered") {
      p = centered();
    } else if (name == "pow") {
      if (arg.empty()) throw ConfigError("potential '" + part + "': pow needs an exponent");
      const double k = number(arg, part);
      if (k < 0) throw ConfigError("potential '" + part + "': negative exponent");
      p = power(k);
    } else if (name == "cos" || name == "sin") {
      const double k = arg.empty() ? 1.0 : number(arg, part);
      p = name == "cos" ? cosine(k) : sine(k);
    } else if (name == "neglogd") {
      if (arg.empty()) {
        p = neg_log_derivative();
      } else {
        if (family == nullptr) throw ConfigError("potential '" + part + "' needs the map family");
        const int d = static_cast<int>(number(arg, part));
        if (d < 1 || d > family->size()) throw ConfigError("potential '" + part + "': map index out of range");
        p = neg_log_derivative(*family, d);
      }
    } else if (name == "table") {
      p = table(load_table(arg), "table:" + arg);
    } else {
      // Bare numbers are constants.
      try {
        p = constant(number(body, part));
      } catch (const ConfigError&) {
        throw ConfigError("unknown potential kind '" + name + "'");
      }
    }
    return coef * p;
  }

  // CSV rows "x,value" at uniform nodes; the row count fixes q.
  static GridFunction<double> load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open potential table '" + path + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw ConfigError("potential table '" + path + "': expected x,value rows");
      values.push_back(std::stod(line.substr(comma + 1)));
    }
    try {
      return GridFunction<double>(std::move(values));
    } catch (const DomainError& e) {
      throw ConfigError("potential table '" + path + "': " + e.what());
    }
  }

  std::vector<PotentialTerm> terms_;
};

// Max of |f| over a fine sample; used for the overflow range check.
template <class Fn>
double sup_norm_estimate(const Fn& f, std::size_t samples = 4096) {
  double m = 0.0;
  for (std::size_t i = 0; i <= samples; ++i) {
    m = std::max(m, std::abs(f(static_cast<double>(i) / static_cast<double>(samples))));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Cylinder functions

// A function on S^m x I that depends on the first m symbols only: one slice
// per word of length m, in lexicographic order.
template <class T = double>
class CylinderFunction {
 public:
  CylinderFunction(std::size_t depth, int alphabet_size, std::vector<GridFunction<T>> slices)
      : depth_(depth), n_(alphabet_size), slices_(std::move(slices)) {
    std::size_t expected = 1;
    for (std::size_t i = 0; i < depth_; ++i) expected *= static_cast<std::size_t>(n_);
    if (slices_.size() != expected) throw DomainError("CylinderFunction: need exactly N^m slices");
    for (const auto& s : slices_) {
      if (s.resolution() != slices_.front().resolution()) throw DomainError("CylinderFunction: mixed resolutions");
    }
  }

  std::size_t depth() const noexcept { return depth_; }
  int alphabet_size() const noexcept { return n_; }
  std::size_t resolution() const noexcept { return slices_.front().resolution(); }
  const std::vector<GridFunction<T>>& slices() const noexcept { return slices_; }
  const GridFunction<T>& slice(const Word& w) const { return slices_[w.prefix(depth_).lex_index()]; }

  T operator()(const Word& w, double x) const { return slice(w).evaluate(x); }

  friend CylinderFunction operator*(const CylinderFunction& a, const CylinderFunction& b) {
    if (a.depth_ != b.depth_ || a.n_ != b.n_) throw DomainError("CylinderFunction: shape mismatch");
    std::vector<GridFunction<T>> out;
    for (std::size_t i = 0; i < a.slices_.size(); ++i) out.push_back(a.slices_[i] * b.slices_[i]);
    return CylinderFunction(a.depth_, a.n_, std::move(out));
  }

 private:
  std::size_t depth_;
  int n_;
  std::vector<GridFunction<T>> slices_;
};

// (Q f)(w, x) = f(x), truncated to depth m.
template <class T>
CylinderFunction<T> q_lift(const GridFunction<T>& f, std::size_t m, int alphabet_size) {
  std::size_t count = 1;
  for (std::size_t i = 0; i < m; ++i) count *= static_cast<std::size_t>(alphabet_size);
  return CylinderFunction<T>(m, alphabet_size, std::vector<GridFunction<T>>(count, f));
}

// Analytic counterpart of q_lift for potentials: a callable on (word, x).
struct LiftedPotential {
  Potential f;
  double operator()(const Word&, double x) const { return f(x); }
};

inline LiftedPotential q_lift(const Potential& f) { return LiftedPotential{f}; }

}  // namespace simdyn
