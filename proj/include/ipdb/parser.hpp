#pragma once

#include <string_view>

#include "ipdb/fact.hpp"
#include "ipdb/formula.hpp"

namespace ipdb {

/// Parses the concrete formula syntax:
///
///   formula  := disj ('->' formula)?
///   disj     := conj ('|' conj)*
///   conj     := unary ('&' unary)*
///   unary    := '!' unary | ('exists' | 'forall') var '.' formula | primary
///   primary  := '(' formula ')' | Rel '(' terms? ')' | term '=' term
///   term     := var | integer | 'quoted string'
///
/// Variables match [a-z][A-Za-z0-9_]*; a name followed by '(' is a relation
/// and must exist in the schema with the right arity. Throws ParseError.
Formula parse_formula(std::string_view text, const Schema& schema);

} // namespace ipdb
