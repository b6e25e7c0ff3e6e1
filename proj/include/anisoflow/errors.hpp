#pragma once

#include <stdexcept>
#include <string>

namespace anisoflow {

// Bad input: inconsistent exponents, grids, configs. The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// The numerics broke down (NaN/Inf, loss of positivity, divergence). Exit code 2.
class NumericalAbort : public std::runtime_error {
public:
  explicit NumericalAbort(const std::string& what) : std::runtime_error(what) {}
};

} // namespace anisoflow
