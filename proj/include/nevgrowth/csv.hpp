#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace nevgrowth {

inline constexpr int kCsvSchemaVersion = 1;

/// Shortest round-trip text for a double; non-finite values become an
/// empty cell.
inline std::string format_number(double v) {
  if (!std::isfinite(v)) return {};
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// Comma-separated writer with a `# schema=N` first line.
class CsvWriter {
public:
  CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header) : os_(os) {
    os_ << "# schema=" << kCsvSchemaVersion << '\n';
    bool first = true;
    for (std::string_view h : header) {
      if (!first) os_ << ',';
      os_ << h;
      first = false;
    }
    os_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((emit(cells, first)), ...);
    os_ << '\n';
  }

  void comment(std::string_view text) { os_ << "# " << text << '\n'; }

private:
  template <class T>
  void emit(const T& v, bool& first) {
    if (!first) os_ << ',';
    first = false;
    if constexpr (std::is_same_v<T, bool>) os_ << (v ? 1 : 0);
    else if constexpr (std::is_floating_point_v<T>) os_ << format_number(static_cast<double>(v));
    else if constexpr (std::is_integral_v<T>) os_ << v;
    else os_ << std::string_view(v);
  }

  std::ostream& os_;
};

}  // namespace nevgrowth
