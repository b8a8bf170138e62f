#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>

#include "boxmon/errors.hpp"

namespace boxmon::text_io {

/// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw FormatError("cannot format double");
  return std::string(buf, ptr);
}

inline void write_double(std::ostream& os, double v) { os << format_double(v); }

/// Whitespace-separated token reader that reports the source on failure.
class TokenReader {
 public:
  TokenReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::string word() {
    std::string s;
    if (!(in_ >> s)) fail("unexpected end of file");
    return s;
  }

  void expect(std::string_view keyword) {
    const std::string got = word();
    if (got != keyword) fail("expected '" + std::string(keyword) + "', found '" + got + "'");
  }

  double real() {
    const std::string s = word();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail("bad number '" + s + "'");
    return v;
  }

  long long integer() {
    const std::string s = word();
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail("bad integer '" + s + "'");
    return v;
  }

  long long count(long long max_value) {
    const long long v = integer();
    if (v < 0 || v > max_value) fail("count out of range: " + std::to_string(v));
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(source_ + ": " + what);
  }

 private:
  std::istream& in_;
  std::string source_;
};

}  // namespace boxmon::text_io
