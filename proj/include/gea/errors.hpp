#pragma once

#include <stdexcept>
#include <string>

namespace gea {

// Malformed environment or topology description (e.g. deep sea with H < 2).
class InvalidSpec : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

// Dimension mismatch between feature vectors and weights.
class ShapeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A value object that breaks one of its invariants (policy rows, ranges).
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class InsufficientNeighbors : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Configuration problem; `field` is a dotted path into the config document.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

}  // namespace gea
