#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace biasltl::detail {

// Shortest round-trippable decimal form; keeps rerun output byte-identical.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& s, const std::string& what) {
  const std::string t = strip(s);
  if (t.empty()) throw std::invalid_argument(what + ": empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw std::invalid_argument(what + ": not a number: '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s, const std::string& what) {
  const std::string t = strip(s);
  if (t.empty()) throw std::invalid_argument(what + ": empty integer field");
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size())
    throw std::invalid_argument(what + ": not an integer: '" + s + "'");
  return v;
}

}  // namespace biasltl::detail
