#include "ipdb/formula.hpp"

#include <algorithm>

#include "ipdb/errors.hpp"

namespace ipdb {

struct Formula::Node {
    Kind kind;
    std::string name; // relation or bound variable
    std::vector<Term> terms;
    std::vector<Formula> children;
};

namespace {

const std::string empty_name;

} // namespace

Formula Formula::atom(std::string relation, std::vector<Term> args)
{
    return Formula(std::make_shared<const Node>(Node{Kind::atom, std::move(relation), std::move(args), {}}));
}

Formula Formula::equality(Term lhs, Term rhs)
{
    return Formula(std::make_shared<const Node>(Node{Kind::equality, {}, {std::move(lhs), std::move(rhs)}, {}}));
}

Formula Formula::negation(Formula body)
{
    return Formula(std::make_shared<const Node>(Node{Kind::negation, {}, {}, {std::move(body)}}));
}

Formula Formula::conjunction(Formula lhs, Formula rhs)
{
    return Formula(std::make_shared<const Node>(Node{Kind::conjunction, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::disjunction(Formula lhs, Formula rhs)
{
    return Formula(std::make_shared<const Node>(Node{Kind::disjunction, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::implication(Formula lhs, Formula rhs)
{
    return Formula(std::make_shared<const Node>(Node{Kind::implication, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::exists(std::string variable, Formula body)
{
    return Formula(std::make_shared<const Node>(Node{Kind::exists, std::move(variable), {}, {std::move(body)}}));
}

Formula Formula::forall(std::string variable, Formula body)
{
    return Formula(std::make_shared<const Node>(Node{Kind::forall, std::move(variable), {}, {std::move(body)}}));
}

Formula::Kind Formula::kind() const noexcept { return node_->kind; }

const std::string& Formula::relation() const noexcept
{
    return node_->kind == Kind::atom ? node_->name : empty_name;
}

const std::vector<Term>& Formula::terms() const noexcept { return node_->terms; }

const std::string& Formula::variable() const noexcept
{
    return is_quantifier() ? node_->name : empty_name;
}

const std::vector<Formula>& Formula::children() const noexcept { return node_->children; }

bool Formula::is_binary() const noexcept
{
    const Kind k = node_->kind;
    return k == Kind::conjunction || k == Kind::disjunction || k == Kind::implication;
}

bool Formula::is_quantifier() const noexcept
{
    return node_->kind == Kind::exists || node_->kind == Kind::forall;
}

bool operator==(const Formula& a, const Formula& b)
{
    if (a.node_ == b.node_)
        return true;
    return a.node_->kind == b.node_->kind && a.node_->name == b.node_->name && a.node_->terms == b.node_->terms &&
           a.node_->children == b.node_->children;
}

std::string to_string(const Term& t)
{
    if (const auto* v = std::get_if<Variable>(&t))
        return v->name;
    return to_string(std::get<Element>(t));
}

namespace {

// Binary and quantified subformulas are parenthesized wherever they are an
// operand, which keeps printing and parsing mutually inverse.
std::string operand(const Formula& f)
{
    if (f.is_binary() || f.is_quantifier())
        return "(" + to_string(f) + ")";
    return to_string(f);
}

} // namespace

std::string to_string(const Formula& f)
{
    using K = Formula::Kind;
    switch (f.kind()) {
    case K::atom: {
        std::string s = f.relation() + "(";
        for (std::size_t i = 0; i < f.terms().size(); ++i) {
            if (i)
                s += ", ";
            s += to_string(f.terms()[i]);
        }
        return s + ")";
    }
    case K::equality: return to_string(f.terms()[0]) + " = " + to_string(f.terms()[1]);
    case K::negation: return "!" + operand(f.children()[0]);
    case K::conjunction: return operand(f.children()[0]) + " & " + operand(f.children()[1]);
    case K::disjunction: return operand(f.children()[0]) + " | " + operand(f.children()[1]);
    case K::implication: return operand(f.children()[0]) + " -> " + operand(f.children()[1]);
    case K::exists: return "exists " + f.variable() + ". " + to_string(f.children()[0]);
    case K::forall: return "forall " + f.variable() + ". " + to_string(f.children()[0]);
    }
    return {};
}

namespace {

void analyze_into(const Formula& f, std::vector<std::string>& bound, FormulaInfo& info, std::size_t depth)
{
    auto visit_term = [&](const Term& t) {
        if (const auto* v = std::get_if<Variable>(&t)) {
            if (std::find(bound.begin(), bound.end(), v->name) == bound.end() &&
                std::find(info.free_variables.begin(), info.free_variables.end(), v->name) ==
                    info.free_variables.end())
                info.free_variables.push_back(v->name);
        } else {
            info.constants.insert(std::get<Element>(t));
        }
    };
    info.rank = std::max(info.rank, depth);
    for (const auto& t : f.terms())
        visit_term(t);
    if (f.is_quantifier()) {
        bound.push_back(f.variable());
        analyze_into(f.children()[0], bound, info, depth + 1);
        bound.pop_back();
        return;
    }
    for (const auto& c : f.children())
        analyze_into(c, bound, info, depth);
}

Formula substitute_in(const Formula& f, std::vector<std::pair<std::string, Element>>& map)
{
    using K = Formula::Kind;
    auto term = [&](const Term& t) -> Term {
        if (const auto* v = std::get_if<Variable>(&t))
            for (auto it = map.rbegin(); it != map.rend(); ++it)
                if (it->first == v->name)
                    return it->second;
        return t;
    };
    switch (f.kind()) {
    case K::atom: {
        std::vector<Term> args;
        for (const auto& t : f.terms())
            args.push_back(term(t));
        return Formula::atom(f.relation(), std::move(args));
    }
    case K::equality: return Formula::equality(term(f.terms()[0]), term(f.terms()[1]));
    case K::negation: return Formula::negation(substitute_in(f.children()[0], map));
    case K::conjunction:
        return Formula::conjunction(substitute_in(f.children()[0], map), substitute_in(f.children()[1], map));
    case K::disjunction:
        return Formula::disjunction(substitute_in(f.children()[0], map), substitute_in(f.children()[1], map));
    case K::implication:
        return Formula::implication(substitute_in(f.children()[0], map), substitute_in(f.children()[1], map));
    case K::exists:
    case K::forall: {
        // shadowed variables stay bound
        std::vector<std::pair<std::string, Element>> inner;
        for (const auto& e : map)
            if (e.first != f.variable())
                inner.push_back(e);
        Formula body = substitute_in(f.children()[0], inner);
        return f.kind() == K::exists ? Formula::exists(f.variable(), body) : Formula::forall(f.variable(), body);
    }
    }
    return f;
}

void collect_relations(const Formula& f, std::set<std::string>& out)
{
    if (f.kind() == Formula::Kind::atom)
        out.insert(f.relation());
    for (const auto& c : f.children())
        collect_relations(c, out);
}

} // namespace

FormulaInfo analyze(const Formula& f)
{
    FormulaInfo info;
    std::vector<std::string> bound;
    analyze_into(f, bound, info, 0);
    return info;
}

Formula substitute(const Formula& f, const std::vector<std::string>& variables, const std::vector<Element>& values)
{
    if (variables.size() != values.size())
        throw Error(ErrorKind::InvalidArgument, "substitution needs one value per variable");
    std::vector<std::pair<std::string, Element>> map;
    for (std::size_t i = 0; i < variables.size(); ++i)
        map.emplace_back(variables[i], values[i]);
    return substitute_in(f, map);
}

std::set<std::string> relations_of(const Formula& f)
{
    std::set<std::string> out;
    collect_relations(f, out);
    return out;
}

} // namespace ipdb
