#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ipdb/fact.hpp"

namespace ipdb {

/// A countable, computable universe.
///
/// Two base kinds are supported: the positive naturals {1, 2, ...} and all
/// finite strings over an ordered alphabet. A universe may additionally
/// carry a finite list of named constants (strings outside the base kind)
/// that are enumerated before the base elements; this models universes such
/// as {A, B, C, D} together with the naturals.
class Universe {
  public:
    enum class Kind { naturals, strings };

    static Universe naturals(std::vector<std::string> constants = {});
    static Universe strings(std::string alphabet, std::vector<std::string> constants = {});

    Kind kind() const noexcept { return kind_; }
    const std::string& alphabet() const noexcept { return alphabet_; }
    const std::vector<std::string>& constants() const noexcept { return constants_; }

    bool contains(const Element& e) const;
    bool is_base_element(const Element& e) const;

    /// The k-th element (k >= 1) of the canonical enumeration: named
    /// constants first, then the base kind.
    Element element_at(std::uint64_t k) const;
    /// Inverse of element_at.
    std::uint64_t index_of(const Element& e) const;

    /// The k-th element of the base kind alone (identity for naturals,
    /// shortlex order for strings; for the binary alphabet this is the
    /// string x such that 1x is k written in binary).
    Element base_element_at(std::uint64_t k) const;
    std::uint64_t base_index_of(const Element& e) const;

    friend bool operator==(const Universe&, const Universe&) = default;

  private:
    Universe(Kind kind, std::string alphabet, std::vector<std::string> constants);

    Kind kind_ = Kind::naturals;
    std::string alphabet_;
    std::vector<std::string> constants_;
};

/// Throws SchemaMismatch unless the fact's relation exists with matching
/// arity and every argument belongs to the universe.
void check_fact(const Schema& schema, const Universe& universe, const Fact& fact);

/// Deterministic bijection between positive integers and all facts over a
/// schema and universe. Nullary facts come first; relations of positive
/// arity then interleave round-robin in declaration order, and each
/// relation's tuples follow the diagonal order over element indices (by
/// index sum, then lexicographically).
class FactEnumeration {
  public:
    FactEnumeration(Schema schema, Universe universe);

    const Schema& schema() const noexcept { return schema_; }
    const Universe& universe() const noexcept { return universe_; }

    Fact fact_at(std::uint64_t k) const;
    std::uint64_t fact_index(const Fact& f) const;

  private:
    Schema schema_;
    Universe universe_;
    std::vector<std::size_t> nullary_;
    std::vector<std::size_t> positive_;
};

/// Rank and unrank of tuples of non-negative integers in diagonal order;
/// exposed for testing.
std::vector<std::uint64_t> diagonal_unrank(std::uint64_t rank, std::size_t arity);
std::uint64_t diagonal_rank(const std::vector<std::uint64_t>& tuple);

} // namespace ipdb
