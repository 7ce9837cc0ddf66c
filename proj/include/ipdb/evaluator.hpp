#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

#include "ipdb/formula.hpp"
#include "ipdb/instance.hpp"
#include "ipdb/universe.hpp"

namespace ipdb {

/// `count` distinct universe elements outside `avoid`, taken in enumeration
/// order.
std::vector<Element> fresh_elements(const Universe& u, const std::set<Element>& avoid, std::size_t count);

/// A formula compiled against a fixed finite domain and a fixed list of
/// candidate facts. A world is a presence flag per candidate; facts outside
/// the list are treated as absent. Quantifiers range over the domain, so the
/// domain must contain the formula's constants, every candidate's elements
/// and enough spare elements to stand in for the rest of the universe.
class GroundEvaluator {
  public:
    GroundEvaluator(const Formula& f, std::vector<std::string> free_variables, std::vector<Fact> candidates,
                    std::vector<Element> domain);

    std::size_t domain_size() const noexcept { return domain_.size(); }
    const Element& element(std::uint32_t id) const { return domain_[id]; }
    std::optional<std::uint32_t> id_of(const Element& e) const;
    const std::vector<Fact>& candidates() const noexcept { return candidates_; }
    std::size_t arity() const noexcept { return free_count_; }

    /// Truth of the formula in the world `present` with the free variables
    /// bound to the given domain ids.
    bool evaluate(std::span<const char> present, std::span<const std::uint32_t> valuation) const;

  private:
    struct Arg {
        bool variable;
        std::uint32_t value; // slot or domain id
    };
    struct Node {
        Formula::Kind kind;
        int lhs = -1, rhs = -1;
        std::uint32_t slot = 0;
        std::size_t relation = 0;
        std::vector<Arg> args;
    };
    struct RelationTable {
        std::size_t arity = 0;
        std::vector<std::int32_t> dense; // empty when the sparse map is used
        std::unordered_map<std::uint64_t, std::int32_t> sparse;
    };

    int compile(const Formula& f, std::vector<std::pair<std::string, std::uint32_t>>& scope);
    std::int32_t lookup(const Node& n, const std::uint32_t* env) const;
    bool eval(int node, std::span<const char> present, std::uint32_t* env) const;

    std::vector<Element> domain_;
    std::map<Element, std::uint32_t> ids_;
    std::vector<Fact> candidates_;
    std::vector<Node> nodes_;
    std::vector<std::string> relation_names_;
    std::vector<RelationTable> tables_;
    std::size_t free_count_ = 0;
    std::uint32_t slots_ = 0;
    int root_ = -1;
};

/// D |= f over the infinite universe. Quantifiers range over adom(d),
/// adom(f) and rank(f) + extra_generics fresh elements. Throws
/// InvalidArgument when f has free variables.
bool eval_boolean(const Instance& d, const Formula& f, const Universe& u, std::size_t extra_generics = 0);

/// Signals that a query has infinitely many answers on an instance; the
/// witness is a satisfying tuple using elements outside adom(d) and adom(f).
struct InfiniteAnswer {
    std::vector<Element> witness;
};

using AnswerSet = std::set<std::vector<Element>>;
using QueryAnswer = std::variant<AnswerSet, InfiniteAnswer>;

/// The answer relation of f, with columns in `order` (default: free
/// variables in order of first occurrence). `order` must name every free
/// variable; extra names range over the whole universe.
QueryAnswer eval_query(const Instance& d, const Formula& f, const Universe& u,
                       const std::optional<std::vector<std::string>>& order = std::nullopt);

} // namespace ipdb
