#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mallows/error.hpp"
#include "mallows/harness.hpp"

namespace mallows::io {

inline constexpr const char* kToolVersion = "0.1.0";

/// 17 significant digits: enough to round-trip any double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

inline constexpr const char* kConvergenceHeader = "n,b_used,c_n,d_cost_hat,lindeberg,bound_rhs,replicates,se";

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream out;
  out << kConvergenceHeader << '\n';
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.b_used) << ',' << format_double(r.c_n) << ','
        << format_double(r.d_cost_hat) << ',' << format_double(r.lindeberg) << ',' << format_double(r.bound_rhs)
        << ',' << r.replicates << ',' << format_double(r.se) << '\n';
  }
  return out.str();
}

/// One value per line; lines that do not parse as numbers are rejected,
/// except a leading header line.
inline std::vector<double> parse_column(const std::string& text, const std::string& source) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::size_t start = line.find_first_not_of(" \t");
    const char* first = line.data() + start;
    double v = 0.0;
    const auto [end, ec] = std::from_chars(first, line.data() + line.size(), v);
    const std::size_t used = ec == std::errc{} ? static_cast<std::size_t>(end - line.data()) : 0;
    if (used == 0 || line.find_first_not_of(" \t", used) != std::string::npos) {
      if (values.empty() && line_no == 1) continue;
      fail(Errc::config, source + ":" + std::to_string(line_no) + ": not a number: \"" + line + "\"");
    }
    values.push_back(v);
  }
  require(!values.empty(), Errc::config, source + ": no values");
  return values;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::config, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), Errc::config, "cannot write " + path);
  out << bytes;
  require(static_cast<bool>(out), Errc::config, "write failed for " + path);
}

}  // namespace mallows::io
