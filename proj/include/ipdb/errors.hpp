#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ipdb {

enum class ErrorKind {
    InvalidArgument,
    SchemaMismatch,
    DivergentAssignment,
    DuplicateFact,
    OverlappingFacts,
    BlockMassExceedsOne,
    UnitTailProbability,
    NotClosed,
    InfiniteAnswer,
    CapExceeded,
    Unsupported,
    Parse,
};

std::string_view error_name(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind is what
/// callers dispatch on; the message carries the human-readable context.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Syntax error in the query language, with a byte offset into the input.
class ParseError : public Error {
  public:
    ParseError(std::size_t position, const std::string& message);

    std::size_t position() const noexcept { return position_; }

  private:
    std::size_t position_;
};

/// Raised when a world enumeration would exceed the configured cap. Carries
/// the number of independent facts that the request would have needed.
class CapExceededError : public Error {
  public:
    CapExceededError(std::size_t required, std::size_t cap, const std::string& what);

    std::size_t required() const noexcept { return required_; }
    std::size_t cap() const noexcept { return cap_; }

  private:
    std::size_t required_;
    std::size_t cap_;
};

} // namespace ipdb
