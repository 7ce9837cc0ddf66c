#pragma once

#include <compare>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ipdb/fact.hpp"

namespace ipdb {

struct Variable {
    std::string name;

    friend auto operator<=>(const Variable&, const Variable&) = default;
    friend bool operator==(const Variable&, const Variable&) = default;
};

using Term = std::variant<Variable, Element>;

std::string to_string(const Term& t);

/// Immutable first-order formula with relation atoms, equality, the usual
/// connectives and one-variable quantifiers. Copies share structure.
class Formula {
  public:
    enum class Kind { atom, equality, negation, conjunction, disjunction, implication, exists, forall };

    static Formula atom(std::string relation, std::vector<Term> args);
    static Formula equality(Term lhs, Term rhs);
    static Formula negation(Formula body);
    static Formula conjunction(Formula lhs, Formula rhs);
    static Formula disjunction(Formula lhs, Formula rhs);
    static Formula implication(Formula lhs, Formula rhs);
    static Formula exists(std::string variable, Formula body);
    static Formula forall(std::string variable, Formula body);

    Kind kind() const noexcept;
    /// Atoms only.
    const std::string& relation() const noexcept;
    /// Atom arguments, or the two sides of an equality.
    const std::vector<Term>& terms() const noexcept;
    /// Bound variable of a quantifier.
    const std::string& variable() const noexcept;
    /// One child for negations and quantifiers, two for binary connectives.
    const std::vector<Formula>& children() const noexcept;

    bool is_binary() const noexcept;
    bool is_quantifier() const noexcept;

    friend bool operator==(const Formula& a, const Formula& b);

  private:
    struct Node;
    explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

std::string to_string(const Formula& f);

struct FormulaInfo {
    std::size_t rank = 0;                // quantifier rank
    std::set<Element> constants;         // adom of the formula
    std::vector<std::string> free_variables; // in order of first occurrence
};

FormulaInfo analyze(const Formula& f);

/// Replaces free occurrences of the named variables by elements.
Formula substitute(const Formula& f, const std::vector<std::string>& variables, const std::vector<Element>& values);

/// Relation names occurring in the formula.
std::set<std::string> relations_of(const Formula& f);

} // namespace ipdb
