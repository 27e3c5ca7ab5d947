#pragma once

#include <stdexcept>
#include <string>

namespace mallows {

enum class Errc {
  alpha_out_of_range,
  sigma_negative,
  beta_out_of_range,
  invalid_argument,
  size_mismatch,
  invalid_law,
  instance_too_large,
  not_monotone,
  mean_unavailable,
  missing_bn,
  empty_grid,
  config,
  numeric,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::alpha_out_of_range: return "alpha out of range";
    case Errc::sigma_negative: return "sigma negative";
    case Errc::beta_out_of_range: return "beta out of range";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::size_mismatch: return "size mismatch";
    case Errc::invalid_law: return "invalid law";
    case Errc::instance_too_large: return "instance too large";
    case Errc::not_monotone: return "quantile function not monotone";
    case Errc::mean_unavailable: return "mean unavailable";
    case Errc::missing_bn: return "missing b_n";
    case Errc::empty_grid: return "empty grid";
    case Errc::config: return "config error";
    case Errc::numeric: return "numeric error";
  }
  return "unknown error";
}

/// Every failure raised by the library carries one of the codes above.
/// Numeric failures (non-finite intermediate results) use Errc::numeric;
/// everything else is a domain or usage error.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(detail.empty() ? std::string(to_string(code))
                                          : std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  Errc code() const noexcept { return code_; }
  bool is_numeric() const noexcept { return code_ == Errc::numeric; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& detail = {}) {
  throw Error(code, detail);
}

inline void require(bool condition, Errc code, const std::string& detail = {}) {
  if (!condition) fail(code, detail);
}

}  // namespace mallows
