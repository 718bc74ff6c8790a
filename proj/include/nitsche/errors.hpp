#pragma once

#include <stdexcept>
#include <string>

namespace nitsche {

/// Invalid input to an operation (bad counts, non-unit normals, size mismatches).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Interface geometry that cannot be handled (non-collinear facets, zero-length segments).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A boundary facet matched zero or several classification rules.
class ClassificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear solver breakdown, typically a singular system (missing Dirichlet constraints).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nitsche
