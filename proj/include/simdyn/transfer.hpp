// Matrix discretizations of the Ruelle operators
//
//   per-map     (L_f^(d) g)(x) = sum_{T_d y = x} e^{f(y)} g(y)
//   collective  (L_f g)(x)     = sum_d (L_f^(d) g)(x)
//   skew        (L_F G)(w, x)  = sum_d sum_{T_d y = x} e^{F(dw, y)} G(dw, y)
//
// by collocation at the nodes x_i = i/q: each row sums the weighted preimages
// and reads g at a preimage by linear interpolation, so every weight is
// nonnegative for real potentials and constants are reproduced exactly. Skew
// operators act on depth-m cylinder functions stored slice after slice in
// lexicographic word order. An Ulam (cell-average) discretization is provided
// as an independent cross-check.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "simdyn/error.hpp"
#include "simdyn/function_space.hpp"
#include "simdyn/interval_maps.hpp"
#include "simdyn/parallel.hpp"
#include "simdyn/symbolic.hpp"

namespace simdyn {

inline constexpr double kMaxPotentialExponent = 30.0;
inline constexpr std::size_t kDefaultMatrixBudget = 50'000'000;

enum class OperatorKind { per_map, collective, skew, ulam };

inline const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::per_map: return "per_map";
    case OperatorKind::collective: return "collective";
    case OperatorKind::skew: return "skew";
    case OperatorKind::ulam: return "ulam";
  }
  return "?";
}

struct OperatorMeta {
  OperatorKind kind = OperatorKind::collective;
  std::size_t resolution = 0;  // q (number of cells for Ulam)
  std::size_t depth = 0;       // m; 0 for operators on I
  int alphabet_size = 1;
  std::vector<int> degrees;
  std::string potential;
};

// Sparse row-compressed matrix. Rows keep the preimage-stencil structure;
// dense() is only for small oracles and the dense fallback solver.
template <class S = double>
class TransferMatrix {
 public:
  using scalar_type = S;

  TransferMatrix(std::size_t dimension, std::vector<std::size_t> row_start, std::vector<std::size_t> cols,
                 std::vector<S> vals, OperatorMeta meta)
      : dim_(dimension), row_start_(std::move(row_start)), cols_(std::move(cols)), vals_(std::move(vals)),
        meta_(std::move(meta)) {
    for (const S& v : vals_) {
      if (!std::isfinite(std::abs(v))) throw DomainError("TransferMatrix: non-finite entry");
    }
  }

  std::size_t dimension() const noexcept { return dim_; }
  const OperatorMeta& meta() const noexcept { return meta_; }
  std::size_t nonzeros() const noexcept { return vals_.size(); }
  std::size_t row_nonzeros(std::size_t r) const { return row_start_[r + 1] - row_start_[r]; }

  // out = M in
  void apply(std::span<const S> in, std::span<S> out) const {
    for (std::size_t r = 0; r < dim_; ++r) {
      S acc{};
      for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) acc += vals_[k] * in[cols_[k]];
      out[r] = acc;
    }
  }

  std::vector<S> apply(const std::vector<S>& in) const {
    std::vector<S> out(dim_);
    apply(std::span<const S>(in), std::span<S>(out));
    return out;
  }

  // out = M^T in
  void apply_transpose(std::span<const S> in, std::span<S> out) const {
    std::fill(out.begin(), out.end(), S{});
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) out[cols_[k]] += vals_[k] * in[r];
    }
  }

  std::vector<S> apply_transpose(const std::vector<S>& in) const {
    std::vector<S> out(dim_);
    apply_transpose(std::span<const S>(in), std::span<S>(out));
    return out;
  }

  std::vector<S> row_sums() const {
    std::vector<S> out(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) out[r] += vals_[k];
    }
    return out;
  }

  // Row-major dense copy.
  std::vector<S> dense() const {
    std::vector<S> out(dim_ * dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) out[r * dim_ + cols_[k]] += vals_[k];
    }
    return out;
  }

  // Same sparsity, entries replaced by fn(row, col, value).
  template <class Fn>
  TransferMatrix transformed(Fn&& fn, OperatorMeta meta) const {
    std::vector<S> vals(vals_.size());
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) vals[k] = fn(r, cols_[k], vals_[k]);
    }
    return TransferMatrix(dim_, row_start_, cols_, std::move(vals), std::move(meta));
  }

  template <class Visit>
  void for_each_entry(Visit&& visit) const {
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) visit(r, cols_[k], vals_[k]);
    }
  }

 private:
  std::size_t dim_;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> cols_;
  std::vector<S> vals_;
  OperatorMeta meta_;
};

namespace detail {

template <class S>
S checked_weight(S log_weight) {
  if (std::abs(std::real(log_weight)) > kMaxPotentialExponent) {
    throw DomainError("potential exceeds the supported range |f| <= 30");
  }
  return std::exp(log_weight);
}

// Emits the linear-interpolation stencil of a point y in [0,1] with weight w.
template <class S, class Emit>
void emit_stencil(double y, S w, std::size_t q, std::size_t offset, Emit&& emit) {
  const double p = y * static_cast<double>(q);
  const std::size_t c = std::min(static_cast<std::size_t>(p), q - 1);
  const double t = p - static_cast<double>(c);
  if (t != 1.0) emit(offset + c, w * (1.0 - t));
  if (t != 0.0) emit(offset + c + 1, w * t);
}

// Assembles rows in parallel, each into its own buffer, then concatenates.
template <class S, class RowFn>
TransferMatrix<S> assemble(std::size_t dim, OperatorMeta meta, const WorkerPool& pool, RowFn&& row_fn) {
  std::vector<std::vector<std::pair<std::size_t, S>>> rows(dim);
  pool.for_each_index(dim, [&](std::size_t r) {
    row_fn(r, [&](std::size_t col, S value) { rows[r].emplace_back(col, value); });
  });
  std::vector<std::size_t> row_start(dim + 1, 0);
  for (std::size_t r = 0; r < dim; ++r) row_start[r + 1] = row_start[r] + rows[r].size();
  std::vector<std::size_t> cols;
  std::vector<S> vals;
  cols.reserve(row_start[dim]);
  vals.reserve(row_start[dim]);
  for (auto& row : rows) {
    for (auto& [c, v] : row) {
      cols.push_back(c);
      vals.push_back(v);
    }
  }
  return TransferMatrix<S>(dim, std::move(row_start), std::move(cols), std::move(vals), std::move(meta));
}

inline std::string joined_label(const std::vector<Potential>& fs) {
  std::string s;
  for (std::size_t i = 0; i < fs.size(); ++i) s += (i ? ";" : "") + fs[i].label();
  return s;
}

// Collective-type assembly over the listed maps with per-map potentials and
// a complex or real exponent scale s: weights e^{s f_d(y)}.
template <class S>
TransferMatrix<S> interval_operator(const MapFamily& family, const std::vector<int>& map_indices,
                                    const std::vector<Potential>& per_map, S scale, std::size_t q,
                                    OperatorMeta meta, const WorkerPool& pool) {
  require_resolution(q);
  std::vector<Potential> bound;
  for (std::size_t i = 0; i < map_indices.size(); ++i) bound.push_back(per_map[i].for_map(family.map(map_indices[i])));
  return assemble<S>(q + 1, std::move(meta), pool, [&](std::size_t row, auto&& emit) {
    const double x = static_cast<double>(row) / static_cast<double>(q);
    for (std::size_t i = 0; i < map_indices.size(); ++i) {
      const ExpandingMap& map = family.map(map_indices[i]);
      for (int j = 0; j < map.degree(); ++j) {
        const double y = map.inverse(j, x);
        const S w = checked_weight<S>(scale * bound[i](y));
        emit_stencil<S>(y, w, q, 0, emit);
      }
    }
  });
}

}  // namespace detail

// L_f^(d) for a single map.
inline TransferMatrix<double> build_per_map_operator(const ExpandingMap& map, const Potential& f, std::size_t q,
                                                     const WorkerPool& pool = WorkerPool{}) {
  MapFamily single({map});
  OperatorMeta meta{OperatorKind::per_map, q, 0, 1, {map.degree()}, f.label()};
  return detail::interval_operator<double>(single, {1}, {f}, 1.0, q, std::move(meta), pool);
}

// Collective operator with one potential per map (f_d = -log|T_d'| etc).
inline TransferMatrix<double> build_collective_operator(const MapFamily& family, const std::vector<Potential>& per_map,
                                                        std::size_t q, const WorkerPool& pool = WorkerPool{}) {
  if (per_map.size() != static_cast<std::size_t>(family.size())) {
    throw LengthMismatch("build_collective_operator: need one potential per map");
  }
  std::vector<int> idx;
  for (int d = 1; d <= family.size(); ++d) idx.push_back(d);
  OperatorMeta meta{OperatorKind::collective, q, 0, family.size(), family.degrees(), detail::joined_label(per_map)};
  return detail::interval_operator<double>(family, idx, per_map, 1.0, q, std::move(meta), pool);
}

inline TransferMatrix<double> build_collective_operator(const MapFamily& family, const Potential& f, std::size_t q,
                                                        const WorkerPool& pool = WorkerPool{}) {
  auto m = build_collective_operator(family, std::vector<Potential>(static_cast<std::size_t>(family.size()), f), q, pool);
  OperatorMeta meta = m.meta();
  meta.potential = f.label();
  return m.transformed([](std::size_t, std::size_t, double v) { return v; }, std::move(meta));
}

// Collective operator with weights e^{(kappa + i xi) f(y)}.
inline TransferMatrix<std::complex<double>> build_complex_operator(const MapFamily& family, const Potential& f,
                                                                   double kappa, double xi, std::size_t q,
                                                                   const WorkerPool& pool = WorkerPool{}) {
  std::vector<int> idx;
  for (int d = 1; d <= family.size(); ++d) idx.push_back(d);
  OperatorMeta meta{OperatorKind::collective, q, 0, family.size(), family.degrees(), f.label()};
  const std::vector<Potential> per_map(static_cast<std::size_t>(family.size()), f);
  return detail::interval_operator<std::complex<double>>(family, idx, per_map, std::complex<double>(kappa, xi), q,
                                                         std::move(meta), pool);
}

// Skew operator on depth-m cylinder functions. F is any callable
// F(const Word& v, double y) that reads at most the first m symbols of v.
template <class CylPotential>
TransferMatrix<double> build_skew_operator(const MapFamily& family, const CylPotential& F, std::size_t depth,
                                           std::size_t q, const WorkerPool& pool = WorkerPool{},
                                           std::size_t budget = kDefaultMatrixBudget) {
  if (depth == 0) throw DomainError("build_skew_operator: depth 0, use build_collective_operator");
  require_resolution(q);
  const int n = family.size();
  std::size_t blocks = 1;
  for (std::size_t i = 0; i < depth; ++i) {
    blocks *= static_cast<std::size_t>(n);
    if (blocks * (q + 1) > budget) throw BudgetExceeded("build_skew_operator: N^m (q+1) exceeds budget");
  }
  const std::size_t block = q + 1;
  OperatorMeta meta{OperatorKind::skew, q, depth, n, family.degrees(), "skew"};
  return detail::assemble<double>(blocks * block, std::move(meta), pool, [&](std::size_t row, auto&& emit) {
    const Word w = Word::from_lex_index(row / block, depth, n);
    const double x = static_cast<double>(row % block) / static_cast<double>(q);
    const Word tail = w.prefix(depth - 1);
    for (int d = 1; d <= n; ++d) {
      const Word dw = tail.prepended(d);
      const std::size_t offset = dw.lex_index() * block;
      const ExpandingMap& map = family.map(d);
      for (int j = 0; j < map.degree(); ++j) {
        const double y = map.inverse(j, x);
        const double wgt = detail::checked_weight<double>(F(dw, y));
        detail::emit_stencil<double>(y, wgt, q, offset, emit);
      }
    }
  });
}

// Ulam discretization of the collective operator on q equal cells:
// M[j][i] = sum over branches of e^{f(mid)} |T'| |I_i cap T_b^{-1} I_j| / |I_j|.
inline TransferMatrix<double> build_ulam_operator(const MapFamily& family, const Potential& f, std::size_t cells,
                                                  const WorkerPool& pool = WorkerPool{}) {
  require_resolution(cells);
  const double h = 1.0 / static_cast<double>(cells);
  OperatorMeta meta{OperatorKind::ulam, cells, 0, family.size(), family.degrees(), f.label()};
  std::vector<Potential> bound;
  for (int d = 1; d <= family.size(); ++d) bound.push_back(f.for_map(family.map(d)));
  return detail::assemble<double>(cells, std::move(meta), pool, [&](std::size_t j, auto&& emit) {
    for (int d = 1; d <= family.size(); ++d) {
      const ExpandingMap& map = family.map(d);
      for (int b = 0; b < map.degree(); ++b) {
        const double lo = map.inverse(b, static_cast<double>(j) * h);
        const double hi = map.inverse(b, static_cast<double>(j + 1) * h);
        std::size_t i = std::min(static_cast<std::size_t>(lo / h), cells - 1);
        for (; i < cells && static_cast<double>(i) * h < hi; ++i) {
          const double a = std::max(lo, static_cast<double>(i) * h);
          const double c = std::min(hi, static_cast<double>(i + 1) * h);
          if (c <= a) continue;
          const double mid = 0.5 * (a + c);
          emit(i, detail::checked_weight<double>(bound[static_cast<std::size_t>(d - 1)](mid)) * map.slope(b) * (c - a) / h);
        }
      }
    }
  });
}

}  // namespace simdyn
