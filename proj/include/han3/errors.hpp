#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace han3 {

/// Shape disagreement between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition on an operation's input was violated (empty sequence,
/// out-of-range id, non-scalar loss, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid configuration value or combination.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. `position` is a byte offset for binary formats and a
/// 1-based line number for text formats.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace han3
