#pragma once

// Small text helpers shared by the readers and writers. Internal to the library.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ects::detail {

/// Shortest form that reads back to the same double (17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

/// Splits on a single delimiter character; ' ' means runs of blanks/tabs.
inline std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  if (delimiter == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace ects::detail

#include <istream>

#include "ects/error.hpp"

namespace ects::detail {

/// Whitespace-token reader for the versioned model formats.
class TokenReader {
 public:
  TokenReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw ParseError(what_ + ": unexpected end of input");
    return w;
  }
  void expect(std::string_view token) {
    const auto w = word();
    if (w != token)
      throw ParseError(what_ + ": expected '" + std::string(token) + "', found '" + w + "'");
  }
  double number() {
    const auto w = word();
    const auto v = parse_double(w);
    if (!v) throw ParseError(what_ + ": expected a number, found '" + w + "'");
    return *v;
  }
  std::size_t count() {
    const double v = number();
    if (v < 0 || std::floor(v) != v) throw ParseError(what_ + ": expected a count");
    return static_cast<std::size_t>(v);
  }
  std::vector<double> numbers(std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = number();
    return out;
  }
  /// Next token without consuming it; empty at end of input.
  std::string peek() {
    const auto pos = in_.tellg();
    std::string w;
    if (!(in_ >> w)) {
      in_.clear();
      return {};
    }
    in_.seekg(pos);
    return w;
  }

 private:
  std::istream& in_;
  std::string what_;
};

}  // namespace ects::detail
