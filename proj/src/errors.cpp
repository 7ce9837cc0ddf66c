#include "ipdb/errors.hpp"

namespace ipdb {

std::string_view error_name(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::DivergentAssignment: return "DivergentAssignment";
    case ErrorKind::DuplicateFact: return "DuplicateFact";
    case ErrorKind::OverlappingFacts: return "OverlappingFacts";
    case ErrorKind::BlockMassExceedsOne: return "BlockMassExceedsOne";
    case ErrorKind::UnitTailProbability: return "UnitTailProbability";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::InfiniteAnswer: return "InfiniteAnswer";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::Parse: return "ParseError";
    }
    return "Error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind)
{
}

ParseError::ParseError(std::size_t position, const std::string& message)
    : Error(ErrorKind::Parse, message + " at position " + std::to_string(position)),
      position_(position)
{
}

CapExceededError::CapExceededError(std::size_t required, std::size_t cap, const std::string& what)
    : Error(ErrorKind::CapExceeded,
            what + ": needs " + std::to_string(required) + " independent facts, cap is " +
                std::to_string(cap)),
      required_(required), cap_(cap)
{
}

} // namespace ipdb
