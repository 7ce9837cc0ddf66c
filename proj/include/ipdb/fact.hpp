#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ipdb {

/// A universe element: a positive natural number or a symbol string.
using Element = std::variant<std::uint64_t, std::string>;

/// Renders an element in query syntax: integers bare, strings single-quoted.
std::string to_string(const Element& e);

struct ElementHash {
    std::size_t operator()(const Element& e) const noexcept;
};

struct Relation {
    std::string name;
    std::size_t arity = 0;

    friend bool operator==(const Relation&, const Relation&) = default;
};

/// Relation symbols with their arities, in declaration order. The
/// declaration order fixes the canonical fact enumeration.
class Schema {
  public:
    Schema() = default;
    explicit Schema(std::vector<Relation> relations);

    const std::vector<Relation>& relations() const noexcept { return relations_; }
    std::optional<std::size_t> position(std::string_view name) const;
    std::optional<std::size_t> arity(std::string_view name) const;
    bool empty() const noexcept { return relations_.empty(); }

    friend bool operator==(const Schema&, const Schema&) = default;

  private:
    std::vector<Relation> relations_;
};

struct Fact {
    std::string relation;
    std::vector<Element> args;

    friend auto operator<=>(const Fact&, const Fact&) = default;
    friend bool operator==(const Fact&, const Fact&) = default;
};

std::string to_string(const Fact& f);

struct FactHash {
    std::size_t operator()(const Fact& f) const noexcept;
};

/// A fact paired with its marginal probability.
struct WeightedFact {
    Fact fact;
    double probability = 0.0;

    friend bool operator==(const WeightedFact&, const WeightedFact&) = default;
};

} // namespace ipdb
