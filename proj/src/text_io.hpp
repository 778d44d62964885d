#pragma once

// Shortest round-trip text encoding for doubles, shared by checkpoint code.

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>

namespace covmpg::detail {

inline void write_double(std::ostream& os, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  os.write(buf, end - buf);
}

inline double parse_double(const std::string& tok) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || end != tok.data() + tok.size()) {
    throw std::runtime_error("malformed number '" + tok + "'");
  }
  return v;
}

inline double read_double(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw std::runtime_error("unexpected end of input");
  return parse_double(tok);
}

template <class Int>
Int read_int(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw std::runtime_error("unexpected end of input");
  Int v{};
  auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || end != tok.data() + tok.size()) {
    throw std::runtime_error("malformed integer '" + tok + "'");
  }
  return v;
}

inline void expect_token(std::istream& is, const std::string& want) {
  std::string tok;
  if (!(is >> tok) || tok != want) {
    throw std::runtime_error("expected '" + want + "', found '" + tok + "'");
  }
}

}  // namespace covmpg::detail
