#pragma once

// Measure files:
//
//   {"lambda": L, "sigma": [[y, w], ...], "mu": [[x, t, w], ...], "phi": [...]}
//
// "phi" is optional and, when present, holds one nonnegative value per mu-atom.
// Violations are reported as ParseError with the line (syntax errors) or the
// JSON pointer of the offending field.

#include "besselp/operators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace besselp {

struct InstanceFile {
  TwoWeightInstance inst;
  std::optional<std::vector<double>> phi;
};

InstanceFile parse_instance(const std::string& text, const std::string& source = "<input>");
InstanceFile load_instance(const std::string& path);
std::string dump_instance(const TwoWeightInstance& inst, const std::vector<double>* phi = nullptr);

}  // namespace besselp
