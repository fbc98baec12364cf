// Experiment configuration: INI-style sections of `key = value` lines.
//
//   # comment
//   [model]
//   degrees = [2, 3]
//   potential = "centered"
//
// Keys are checked against a fixed schema, every error carries the line
// number, and `--set section.key=value` overrides go through the same parser.
#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simdyn/error.hpp"

namespace simdyn::cli {

// Allowed keys per section.
inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"model", {"degrees", "potential", "resolution", "tol", "theta", "alpha"}},
      {"run", {"seed"}},
      {"spectrum", {"estimate_gap"}},
      {"skew", {"depth", "tol"}},
      {"average", {"f", "x", "n_max", "brute_limit", "resolution"}},
      {"correlations", {"g", "h", "word", "n_min", "n_max"}},
      {"variance", {"g", "word", "n_min", "n_max"}},
      {"clt", {"g", "n", "samples", "policy", "word", "bernoulli"}},
      {"lil", {"g", "n0", "n_max", "samples", "policy", "word", "bernoulli"}},
      {"kappa", {"f", "lo", "hi", "tol", "scan_points"}},
      {"count", {"f", "n_min", "n_max", "window", "solve_kappa", "kappa_lo", "kappa_hi", "skew"}},
      {"derivative", {"g"}},
  };
  return schema;
}

class Config {
 public:
  struct Entry {
    std::string value;  // unquoted text
    int line = 0;       // 0 for command-line overrides
  };

  static Config parse(std::string_view text, std::string source = "<config>") {
    Config c;
    c.source_ = std::move(source);
    std::string section;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      std::string s = strip_comment(line);
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') c.fail(line_no, "unterminated section header");
        section = trim(s.substr(1, s.size() - 2));
        if (!config_schema().count(section)) c.fail(line_no, "unknown section [" + section + "]");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) c.fail(line_no, "expected key = value");
      if (section.empty()) c.fail(line_no, "key outside of any section");
      c.assign(section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line_no);
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
  }

  // Override from `section.key=value`.
  void set(std::string_view assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
      throw ConfigError("--set expects section.key=value, got '" + std::string(assignment) + "'");
    }
    assign(trim(std::string(assignment.substr(0, dot))), trim(std::string(assignment.substr(dot + 1, eq - dot - 1))),
           trim(std::string(assignment.substr(eq + 1))), 0);
  }

  bool has(const std::string& section, const std::string& key) const {
    return entries_.count(section + "." + key) != 0;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         std::optional<std::string> fallback = std::nullopt) const {
    const Entry* e = find(section, key);
    if (!e) return require(section, key, fallback);
    return e->value;
  }

  double get_double(const std::string& section, const std::string& key,
                    std::optional<double> fallback = std::nullopt) const {
    const Entry* e = find(section, key);
    if (!e) return require(section, key, fallback);
    return to_double(*e, section + "." + key);
  }

  long long get_int(const std::string& section, const std::string& key,
                    std::optional<long long> fallback = std::nullopt) const {
    const Entry* e = find(section, key);
    if (!e) return require(section, key, fallback);
    return to_int(*e, section + "." + key);
  }

  std::size_t get_count(const std::string& section, const std::string& key,
                        std::optional<long long> fallback = std::nullopt) const {
    const long long v = get_int(section, key, fallback);
    if (v < 0) fail_at(section, key, "must be non-negative");
    return static_cast<std::size_t>(v);
  }

  bool get_bool(const std::string& section, const std::string& key, std::optional<bool> fallback = std::nullopt) const {
    const Entry* e = find(section, key);
    if (!e) return require(section, key, fallback);
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    fail_at(section, key, "expected true or false, got '" + e->value + "'");
  }

  std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                      std::optional<std::vector<double>> fallback = std::nullopt) const {
    const Entry* e = find(section, key);
    if (!e) return require(section, key, fallback);
    std::vector<double> out;
    for (const auto& item : split_list(*e, section + "." + key)) out.push_back(to_double({item, e->line}, section + "." + key));
    return out;
  }

  std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                std::optional<std::vector<int>> fallback = std::nullopt) const {
    const Entry* e = find(section, key);
    if (!e) return require(section, key, fallback);
    std::vector<int> out;
    for (const auto& item : split_list(*e, section + "." + key)) {
      out.push_back(static_cast<int>(to_int({item, e->line}, section + "." + key)));
    }
    return out;
  }

  // Raises a ConfigError that points at the line of section.key.
  [[noreturn]] void fail_at(const std::string& section, const std::string& key, const std::string& msg) const {
    const Entry* e = find(section, key);
    fail(e ? e->line : 0, section + "." + key + ": " + msg);
  }

  // Sorted `section.key = value` lines; the basis of the config hash.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, e] : entries_) out += k + " = " + e.value + "\n";
    return out;
  }

  // FNV-1a over the canonical text, as 16 hex digits.
  std::string hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xF];
    return s;
  }

  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }
  const std::string& source() const noexcept { return source_; }

 private:
  static std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }

  static std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (!quoted && (s[i] == '#' || s[i] == ';')) return s.substr(0, i);
    }
    return s;
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    if (line > 0) throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
    throw ConfigError(source_ + ": " + msg);
  }

  void assign(const std::string& section, const std::string& key, std::string value, int line) {
    auto sec = config_schema().find(section);
    if (sec == config_schema().end()) fail(line, "unknown section [" + section + "]");
    if (!sec->second.count(key)) fail(line, "unknown key '" + key + "' in [" + section + "]");
    if (value.empty()) fail(line, section + "." + key + ": empty value");
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') fail(line, section + "." + key + ": unterminated string");
      value = value.substr(1, value.size() - 2);
    }
    const std::string full = section + "." + key;
    if (line > 0 && entries_.count(full)) fail(line, "duplicate key " + full);
    entries_[full] = Entry{std::move(value), line};
  }

  const Entry* find(const std::string& section, const std::string& key) const {
    auto it = entries_.find(section + "." + key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  template <class T>
  T require(const std::string& section, const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) fail(0, "missing required key " + section + "." + key);
    return *fallback;
  }

  double to_double(const Entry& e, const std::string& name) const {
    double v = 0.0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    if (b != end && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end) fail(e.line, name + ": expected a number, got '" + e.value + "'");
    return v;
  }

  long long to_int(const Entry& e, const std::string& name) const {
    long long v = 0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end) fail(e.line, name + ": expected an integer, got '" + e.value + "'");
    return v;
  }

  std::vector<std::string> split_list(const Entry& e, const std::string& name) const {
    const std::string& v = e.value;
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') fail(e.line, name + ": expected a list like [1, 2]");
    std::vector<std::string> items;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(e.line, name + ": empty list item");
      items.push_back(item);
    }
    if (items.empty()) fail(e.line, name + ": empty list");
    return items;
  }

  std::string source_ = "<config>";
  std::map<std::string, Entry> entries_;
};

}  // namespace simdyn::cli
