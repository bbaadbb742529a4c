#pragma once

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

#include "mgof/cell_function.hpp"
#include "mgof/errors.hpp"

namespace mgof {

// Statistic names used by configs and the CLI:
//   chisq | loglik | freeman-tukey | pd:<d> | indicator:<r> | collision
inline CellFunction parse_statistic(std::string_view key) {
  if (key == "chisq") return CellFunction::chi_square();
  if (key == "loglik") return CellFunction::log_likelihood();
  if (key == "freeman-tukey") return CellFunction::freeman_tukey();
  if (key == "collision") return CellFunction::collision();
  const auto colon = key.find(':');
  if (colon != std::string_view::npos) {
    const auto head = key.substr(0, colon);
    const std::string arg(key.substr(colon + 1));
    if (head == "pd") {
      char* end = nullptr;
      const double d = std::strtod(arg.c_str(), &end);
      if (arg.empty() || end != arg.c_str() + arg.size()) {
        throw InvalidArgument("bad power divergence index in '" + std::string(key) + "'");
      }
      // pd:0 is the log-likelihood member.
      if (d == 0.0) return CellFunction::log_likelihood();
      return CellFunction::power_divergence(d);
    }
    if (head == "indicator") {
      unsigned r = 0;
      const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), r);
      if (arg.empty() || ec != std::errc{} || ptr != arg.data() + arg.size()) {
        throw InvalidArgument("bad indicator count in '" + std::string(key) + "'");
      }
      return CellFunction::indicator(r);
    }
  }
  throw InvalidArgument("unknown statistic '" + std::string(key) + "'");
}

}  // namespace mgof
