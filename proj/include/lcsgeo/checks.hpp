#pragma once

#include <string>
#include <vector>

namespace lcsgeo {

/// One verification row: a named residual (max absolute value over the
/// sampled points) or an informational value that carries no pass/fail
/// semantics of its own.
struct Check {
  std::string name;
  double value = 0.0;
  bool informational = false;
  std::string note;

  Check() = default;
  Check(std::string n, double v = 0.0, bool info = false, std::string why = "")
      : name(std::move(n)), value(v), informational(info), note(std::move(why)) {}
};

using StructureReport = std::vector<Check>;

} // namespace lcsgeo
