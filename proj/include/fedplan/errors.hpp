#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedplan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document. `position()` is a byte offset into the source
/// text, or `npos` when the failure is not tied to one location.
class ParseError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ParseError(const std::string& what, std::size_t position = npos)
      : Error(position == npos ? what : what + " (at byte " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Well-formed input that violates a structural or semantic rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// No plan satisfies the capability and residency constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A plan or report does not belong to the pipeline/topology it is used with.
class PlanMismatchError : public Error {
 public:
  using Error::Error;
};

/// SQL generation was asked to lower something the dialect cannot express.
class CodegenError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedplan
