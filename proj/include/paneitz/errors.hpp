#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plab {

/// Operands disagree in dimension, order, base point or index layout.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A jet of order k was asked for something that needs more than k derivatives.
struct OrderError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Function evaluated outside its domain (log of a non-positive value, pole, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Singular or degenerate metric / matrix.
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Profile or metrics file syntax error; offset is a byte position in the input.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset(offset) {}
  std::size_t offset;
};

/// Identifier in a profile with no bound parameter value.
struct UnboundIdentifierError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Field evaluation failed at a quadrature node.
struct QuadratureError : std::runtime_error {
  QuadratureError(const std::string& what, std::size_t node)
      : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node(node) {}
  std::size_t node;
};

/// Invalid user configuration (unknown family, bad flag value, mismatched mode).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace plab
