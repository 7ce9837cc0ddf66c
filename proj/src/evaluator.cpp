#include "ipdb/evaluator.hpp"

#include <algorithm>
#include <array>

#include "ipdb/errors.hpp"

namespace ipdb {

namespace {

constexpr std::size_t max_slots = 64;
constexpr std::uint64_t dense_limit = std::uint64_t{1} << 22;

// m^arity, or nullopt when it does not fit below 2^63.
std::optional<std::uint64_t> power_fits(std::uint64_t m, std::size_t arity)
{
    std::uint64_t v = 1;
    for (std::size_t i = 0; i < arity; ++i) {
        if (m != 0 && v > (std::uint64_t{1} << 63) / m)
            return std::nullopt;
        v *= m;
    }
    return v;
}

} // namespace

std::vector<Element> fresh_elements(const Universe& u, const std::set<Element>& avoid, std::size_t count)
{
    std::vector<Element> out;
    for (std::uint64_t k = 1; out.size() < count; ++k) {
        Element e = u.element_at(k);
        if (!avoid.contains(e))
            out.push_back(std::move(e));
    }
    return out;
}

GroundEvaluator::GroundEvaluator(const Formula& f, std::vector<std::string> free_variables,
                                 std::vector<Fact> candidates, std::vector<Element> domain)
    : domain_(std::move(domain)), candidates_(std::move(candidates)), free_count_(free_variables.size())
{
    for (std::uint32_t i = 0; i < domain_.size(); ++i)
        if (!ids_.emplace(domain_[i], i).second)
            throw Error(ErrorKind::InvalidArgument, "domain lists " + to_string(domain_[i]) + " twice");

    std::vector<std::pair<std::string, std::uint32_t>> scope;
    for (const auto& v : free_variables) {
        for (const auto& s : scope)
            if (s.first == v)
                throw Error(ErrorKind::InvalidArgument, "variable " + v + " listed twice");
        scope.emplace_back(v, slots_++);
    }
    root_ = compile(f, scope);

    const std::uint64_t m = domain_.size();
    for (auto& t : tables_) {
        const auto size = power_fits(m, t.arity);
        if (!size)
            throw Error(ErrorKind::CapExceeded, "evaluation domain too large for relation lookup");
        if (*size <= dense_limit)
            t.dense.assign(*size, -1);
    }
    for (std::size_t c = 0; c < candidates_.size(); ++c) {
        const Fact& fact = candidates_[c];
        auto rel = std::find(relation_names_.begin(), relation_names_.end(), fact.relation);
        if (rel == relation_names_.end())
            continue;
        RelationTable& t = tables_[static_cast<std::size_t>(rel - relation_names_.begin())];
        if (fact.args.size() != t.arity)
            throw Error(ErrorKind::SchemaMismatch, "candidate " + to_string(fact) + " has the wrong arity");
        std::uint64_t key = 0;
        for (const auto& a : fact.args) {
            auto id = id_of(a);
            if (!id)
                throw Error(ErrorKind::InvalidArgument,
                            "candidate " + to_string(fact) + " uses an element outside the domain");
            key = key * m + *id;
        }
        if (!t.dense.empty())
            t.dense[key] = static_cast<std::int32_t>(c);
        else
            t.sparse[key] = static_cast<std::int32_t>(c);
    }
}

std::optional<std::uint32_t> GroundEvaluator::id_of(const Element& e) const
{
    auto it = ids_.find(e);
    if (it == ids_.end())
        return std::nullopt;
    return it->second;
}

int GroundEvaluator::compile(const Formula& f, std::vector<std::pair<std::string, std::uint32_t>>& scope)
{
    using K = Formula::Kind;
    Node n;
    n.kind = f.kind();
    auto arg = [&](const Term& t) -> Arg {
        if (const auto* v = std::get_if<Variable>(&t)) {
            for (auto it = scope.rbegin(); it != scope.rend(); ++it)
                if (it->first == v->name)
                    return {true, it->second};
            throw Error(ErrorKind::InvalidArgument, "variable " + v->name + " is free");
        }
        auto id = id_of(std::get<Element>(t));
        if (!id)
            throw Error(ErrorKind::InvalidArgument,
                        "constant " + to_string(std::get<Element>(t)) + " is missing from the domain");
        return {false, *id};
    };
    switch (f.kind()) {
    case K::atom: {
        auto rel = std::find(relation_names_.begin(), relation_names_.end(), f.relation());
        if (rel == relation_names_.end()) {
            relation_names_.push_back(f.relation());
            tables_.push_back(RelationTable{f.terms().size(), {}, {}});
            rel = relation_names_.end() - 1;
        }
        n.relation = static_cast<std::size_t>(rel - relation_names_.begin());
        if (tables_[n.relation].arity != f.terms().size())
            throw Error(ErrorKind::SchemaMismatch, "relation " + f.relation() + " used with two arities");
        for (const auto& t : f.terms())
            n.args.push_back(arg(t));
        break;
    }
    case K::equality:
        n.args = {arg(f.terms()[0]), arg(f.terms()[1])};
        break;
    case K::negation:
        n.lhs = compile(f.children()[0], scope);
        break;
    case K::conjunction:
    case K::disjunction:
    case K::implication:
        n.lhs = compile(f.children()[0], scope);
        n.rhs = compile(f.children()[1], scope);
        break;
    case K::exists:
    case K::forall:
        if (slots_ >= max_slots)
            throw Error(ErrorKind::Unsupported, "too many variables in formula");
        n.slot = slots_++;
        scope.emplace_back(f.variable(), n.slot);
        n.lhs = compile(f.children()[0], scope);
        scope.pop_back();
        break;
    }
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size() - 1);
}

std::int32_t GroundEvaluator::lookup(const Node& n, const std::uint32_t* env) const
{
    const RelationTable& t = tables_[n.relation];
    const std::uint64_t m = domain_.size();
    std::uint64_t key = 0;
    for (const auto& a : n.args)
        key = key * m + (a.variable ? env[a.value] : a.value);
    if (!t.dense.empty())
        return t.dense[key];
    auto it = t.sparse.find(key);
    return it == t.sparse.end() ? -1 : it->second;
}

bool GroundEvaluator::eval(int node, std::span<const char> present, std::uint32_t* env) const
{
    using K = Formula::Kind;
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    switch (n.kind) {
    case K::atom: {
        const std::int32_t c = lookup(n, env);
        return c >= 0 && present[static_cast<std::size_t>(c)];
    }
    case K::equality: {
        const auto value = [&](const Arg& a) { return a.variable ? env[a.value] : a.value; };
        return value(n.args[0]) == value(n.args[1]);
    }
    case K::negation: return !eval(n.lhs, present, env);
    case K::conjunction: return eval(n.lhs, present, env) && eval(n.rhs, present, env);
    case K::disjunction: return eval(n.lhs, present, env) || eval(n.rhs, present, env);
    case K::implication: return !eval(n.lhs, present, env) || eval(n.rhs, present, env);
    case K::exists:
        for (std::uint32_t e = 0; e < domain_.size(); ++e) {
            env[n.slot] = e;
            if (eval(n.lhs, present, env))
                return true;
        }
        return false;
    case K::forall:
        for (std::uint32_t e = 0; e < domain_.size(); ++e) {
            env[n.slot] = e;
            if (!eval(n.lhs, present, env))
                return false;
        }
        return true;
    }
    return false;
}

bool GroundEvaluator::evaluate(std::span<const char> present, std::span<const std::uint32_t> valuation) const
{
    if (valuation.size() != free_count_)
        throw Error(ErrorKind::InvalidArgument, "valuation size differs from the number of free variables");
    if (present.size() != candidates_.size())
        throw Error(ErrorKind::InvalidArgument, "world size differs from the number of candidate facts");
    std::array<std::uint32_t, max_slots> env{};
    std::copy(valuation.begin(), valuation.end(), env.begin());
    return eval(root_, present, env.data());
}

namespace {

struct Setup {
    std::vector<Element> core; // adom(d) + adom(f)
    std::vector<Element> generics;
};

Setup setup(const Instance& d, const FormulaInfo& info, const Universe& u, std::size_t generics)
{
    std::set<Element> core = active_domain(d);
    core.insert(info.constants.begin(), info.constants.end());
    Setup s{{core.begin(), core.end()}, fresh_elements(u, core, generics)};
    return s;
}

std::vector<Element> joined(const Setup& s)
{
    std::vector<Element> all = s.core;
    all.insert(all.end(), s.generics.begin(), s.generics.end());
    return all;
}

} // namespace

bool eval_boolean(const Instance& d, const Formula& f, const Universe& u, std::size_t extra_generics)
{
    const FormulaInfo info = analyze(f);
    if (!info.free_variables.empty())
        throw Error(ErrorKind::InvalidArgument, "sentence expected; free variable " + info.free_variables.front());
    const Setup s = setup(d, info, u, info.rank + extra_generics);
    GroundEvaluator ev(f, {}, d.facts(), joined(s));
    const std::vector<char> present(d.size(), 1);
    return ev.evaluate(present, {});
}

QueryAnswer eval_query(const Instance& d, const Formula& f, const Universe& u,
                       const std::optional<std::vector<std::string>>& order)
{
    const FormulaInfo info = analyze(f);
    const std::vector<std::string> vars = order ? *order : info.free_variables;
    for (const auto& v : info.free_variables)
        if (std::find(vars.begin(), vars.end(), v) == vars.end())
            throw Error(ErrorKind::InvalidArgument, "column order misses free variable " + v);
    const std::size_t k = vars.size();
    // k probe generics for the answer columns, rank more for the quantifiers
    const Setup s = setup(d, info, u, k + info.rank);
    GroundEvaluator ev(f, vars, d.facts(), joined(s));
    const std::vector<char> present(d.size(), 1);

    const std::uint32_t core = static_cast<std::uint32_t>(s.core.size());
    const std::uint32_t width = core + static_cast<std::uint32_t>(k);
    AnswerSet answers;
    std::vector<std::uint32_t> tuple(k, 0);
    if (k > 0 && width == 0)
        return answers;
    for (;;) {
        const bool uses_generic = std::any_of(tuple.begin(), tuple.end(), [&](std::uint32_t x) { return x >= core; });
        if (ev.evaluate(present, tuple)) {
            std::vector<Element> row;
            row.reserve(k);
            for (auto x : tuple)
                row.push_back(ev.element(x));
            if (uses_generic)
                return InfiniteAnswer{std::move(row)};
            answers.insert(std::move(row));
        }
        std::size_t i = 0;
        while (i < k && ++tuple[k - 1 - i] == width)
            tuple[k - 1 - i++] = 0;
        if (i == k)
            break;
    }
    return answers;
}

} // namespace ipdb
