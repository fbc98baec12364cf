// Finite words over the alphabet {1, ..., N}, cylinder measures under a
// Bernoulli vector and the theta-metric on one-sided sequences.
//
// An infinite sequence is always represented by a finite prefix; the
// `periodic` flag marks words that stand for their periodic extension.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simdyn/error.hpp"

namespace simdyn {

inline constexpr std::size_t kDefaultWordCap = 10'000'000;

class Word {
 public:
  Word() = default;

  Word(std::vector<int> symbols, int alphabet_size, bool periodic = false)
      : symbols_(std::move(symbols)), alphabet_size_(alphabet_size), periodic_(periodic) {
    if (alphabet_size_ < 1) throw DomainError("Word: alphabet size must be >= 1");
    for (int s : symbols_) {
      if (s < 1 || s > alphabet_size_) {
        throw DomainError("Word: symbol " + std::to_string(s) + " outside [1, " +
                          std::to_string(alphabet_size_) + "]");
      }
    }
  }

  // The word d d ... d of the given length.
  static Word repeated(int symbol, std::size_t length, int alphabet_size) {
    return Word(std::vector<int>(length, symbol), alphabet_size);
  }

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  int alphabet_size() const noexcept { return alphabet_size_; }
  bool periodic() const noexcept { return periodic_; }
  const std::vector<int>& symbols() const noexcept { return symbols_; }

  // 1-based symbol access, matching w = (w_1 w_2 ...). Periodic words wrap.
  int symbol(std::size_t i) const {
    if (i == 0) throw DomainError("Word::symbol: positions are 1-based");
    if (i <= symbols_.size()) return symbols_[i - 1];
    if (periodic_ && !symbols_.empty()) return symbols_[(i - 1) % symbols_.size()];
    throw DomainError("Word::symbol: position past the end of a finite word");
  }

  // First m symbols (periodic words are unrolled as needed).
  Word prefix(std::size_t m) const {
    if (m > symbols_.size() && !(periodic_ && !symbols_.empty())) {
      throw DomainError("Word::prefix: word too short");
    }
    std::vector<int> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = symbol(i + 1);
    return Word(std::move(out), alphabet_size_);
  }

  // Left shift by k symbols. A periodic word rotates.
  Word shifted(std::size_t k = 1) const {
    if (periodic_ && !symbols_.empty()) {
      std::vector<int> out(symbols_.size());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = symbols_[(i + k) % symbols_.size()];
      return Word(std::move(out), alphabet_size_, true);
    }
    if (k > symbols_.size()) throw DomainError("Word::shifted: shift longer than word");
    return Word(std::vector<int>(symbols_.begin() + static_cast<std::ptrdiff_t>(k), symbols_.end()),
                alphabet_size_);
  }

  // Symbols [first, first + count) as a finite word; 0-based offset.
  Word slice(std::size_t first, std::size_t count) const {
    if (first + count > symbols_.size()) throw DomainError("Word::slice: out of range");
    auto b = symbols_.begin() + static_cast<std::ptrdiff_t>(first);
    return Word(std::vector<int>(b, b + static_cast<std::ptrdiff_t>(count)), alphabet_size_);
  }

  Word prepended(int d) const {
    std::vector<int> out;
    out.reserve(symbols_.size() + 1);
    out.push_back(d);
    out.insert(out.end(), symbols_.begin(), symbols_.end());
    return Word(std::move(out), alphabet_size_);
  }

  Word concat(const Word& other) const {
    if (other.alphabet_size_ != alphabet_size_) throw DomainError("Word::concat: alphabet mismatch");
    std::vector<int> out = symbols_;
    out.insert(out.end(), other.symbols_.begin(), other.symbols_.end());
    return Word(std::move(out), alphabet_size_);
  }

  Word as_periodic() const { return Word(symbols_, alphabet_size_, true); }

  // Position of the word in the lexicographic enumeration of its length.
  std::size_t lex_index() const noexcept {
    std::size_t idx = 0;
    for (int s : symbols_) idx = idx * static_cast<std::size_t>(alphabet_size_) + static_cast<std::size_t>(s - 1);
    return idx;
  }

  static Word from_lex_index(std::size_t index, std::size_t length, int alphabet_size) {
    std::vector<int> out(length);
    for (std::size_t i = length; i-- > 0;) {
      out[i] = static_cast<int>(index % static_cast<std::size_t>(alphabet_size)) + 1;
      index /= static_cast<std::size_t>(alphabet_size);
    }
    return Word(std::move(out), alphabet_size);
  }

  // "121" for alphabets up to 9, "1-12-3" otherwise.
  std::string to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (alphabet_size_ > 9 && i > 0) os << '-';
      os << symbols_[i];
    }
    return os.str();
  }

  static Word parse(std::string_view text, int alphabet_size) {
    std::vector<int> out;
    if (alphabet_size <= 9) {
      for (char c : text) {
        if (c < '0' || c > '9') throw DomainError("Word::parse: expected digits");
        out.push_back(c - '0');
      }
    } else {
      std::size_t start = 0;
      while (start <= text.size() && !text.empty()) {
        std::size_t end = text.find('-', start);
        if (end == std::string_view::npos) end = text.size();
        out.push_back(std::stoi(std::string(text.substr(start, end - start))));
        start = end + 1;
        if (end == text.size()) break;
      }
    }
    return Word(std::move(out), alphabet_size);
  }

  friend bool operator==(const Word& a, const Word& b) {
    return a.alphabet_size_ == b.alphabet_size_ && a.periodic_ == b.periodic_ && a.symbols_ == b.symbols_;
  }

 private:
  std::vector<int> symbols_;
  int alphabet_size_ = 1;
  bool periodic_ = false;
};

// All N^n words of length n in lexicographic order.
inline std::vector<Word> enumerate_words(std::size_t n, int alphabet_size, std::size_t cap = kDefaultWordCap) {
  if (alphabet_size < 1) throw DomainError("enumerate_words: alphabet size must be >= 1");
  std::size_t count = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (count > cap / static_cast<std::size_t>(alphabet_size)) {
      throw BudgetExceeded("enumerate_words: N^n exceeds cap of " + std::to_string(cap));
    }
    count *= static_cast<std::size_t>(alphabet_size);
  }
  if (count > cap) throw BudgetExceeded("enumerate_words: N^n exceeds cap of " + std::to_string(cap));
  std::vector<Word> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(Word::from_lex_index(i, n, alphabet_size));
  return out;
}

class BernoulliSpec {
 public:
  explicit BernoulliSpec(std::vector<double> probabilities) : p_(std::move(probabilities)) {
    if (p_.empty()) throw DomainError("BernoulliSpec: empty probability vector");
    double total = 0.0;
    for (double v : p_) {
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("BernoulliSpec: probabilities must lie in [0,1]");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("BernoulliSpec: probabilities must sum to 1");
  }

  static BernoulliSpec uniform(int alphabet_size) {
    return BernoulliSpec(std::vector<double>(static_cast<std::size_t>(alphabet_size), 1.0 / alphabet_size));
  }

  int alphabet_size() const noexcept { return static_cast<int>(p_.size()); }
  const std::vector<double>& probabilities() const noexcept { return p_; }
  double operator[](int symbol) const { return p_.at(static_cast<std::size_t>(symbol - 1)); }

 private:
  std::vector<double> p_;
};

// mu([v_1 ... v_m]) = p_{v_1} ... p_{v_m}.
inline double cylinder_measure(const BernoulliSpec& spec, const Word& prefix) {
  double m = 1.0;
  for (int s : prefix.symbols()) {
    if (s < 1 || s > spec.alphabet_size()) throw DomainError("cylinder_measure: symbol out of range");
    m *= spec[s];
  }
  return m;
}

class ThetaMetric {
 public:
  explicit ThetaMetric(double theta) : theta_(theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("ThetaMetric: theta must lie in (0,1)");
  }
  double theta() const noexcept { return theta_; }

 private:
  double theta_;
};

namespace detail {

// Length of the longest common prefix; nullopt-like sentinel SIZE_MAX when the
// two words denote the same sequence.
inline std::size_t common_prefix(const Word& v, const Word& w) {
  constexpr std::size_t same = static_cast<std::size_t>(-1);
  if (v.symbols() == w.symbols() && v.periodic() == w.periodic()) return same;
  std::size_t limit;
  if (v.periodic() && w.periodic() && !v.empty() && !w.empty()) {
    limit = std::lcm(v.size(), w.size());
  } else {
    std::size_t lv = (v.periodic() && !v.empty()) ? static_cast<std::size_t>(-1) : v.size();
    std::size_t lw = (w.periodic() && !w.empty()) ? static_cast<std::size_t>(-1) : w.size();
    limit = std::min(lv, lw);
  }
  std::size_t k = 0;
  while (k < limit && v.symbol(k + 1) == w.symbol(k + 1)) ++k;
  if (k == limit && v.periodic() && w.periodic() && !v.empty() && !w.empty()) return same;
  return k;
}

}  // namespace detail

// d(v, w) = theta^{n(v,w)} with n the length of the common prefix; 0 for the
// same sequence.
inline double theta_distance(const Word& v, const Word& w, const ThetaMetric& metric) {
  if (v.alphabet_size() != w.alphabet_size()) throw DomainError("theta_distance: alphabet mismatch");
  const std::size_t k = detail::common_prefix(v, w);
  if (k == static_cast<std::size_t>(-1)) return 0.0;
  return std::pow(metric.theta(), static_cast<double>(k));
}

}  // namespace simdyn
