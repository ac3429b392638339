#pragma once

#include <stdexcept>
#include <string>

namespace entrofix {

// Input text could not be parsed. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                    : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// An assignment is not one-hot on a group (zero or multiple members at 1).
class NotOneHotError : public std::runtime_error {
 public:
  explicit NotOneHotError(const std::string& message) : std::runtime_error(message) {}
};

// A group is already fixed to a different class.
class ConflictingFixError : public std::runtime_error {
 public:
  explicit ConflictingFixError(const std::string& message) : std::runtime_error(message) {}
};

// A statistic was requested from a tracker with no recorded samples.
class EmptyHistoryError : public std::runtime_error {
 public:
  explicit EmptyHistoryError(const std::string& message) : std::runtime_error(message) {}
};

// The instance generator could not realize the requested parameters.
class ConstructionFailure : public std::runtime_error {
 public:
  explicit ConstructionFailure(const std::string& message) : std::runtime_error(message) {}
};

// A serialized artifact has the wrong format or version.
class FormatVersionMismatch : public std::runtime_error {
 public:
  explicit FormatVersionMismatch(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace entrofix
