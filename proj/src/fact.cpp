#include "ipdb/fact.hpp"

#include <functional>
#include <set>

#include "ipdb/errors.hpp"

namespace ipdb {

std::string to_string(const Element& e)
{
    if (const auto* n = std::get_if<std::uint64_t>(&e))
        return std::to_string(*n);
    std::string out = "'";
    for (char c : std::get<std::string>(e)) {
        if (c == '\'' || c == '\\')
            out += '\\';
        out += c;
    }
    out += '\'';
    return out;
}

std::size_t ElementHash::operator()(const Element& e) const noexcept
{
    if (const auto* n = std::get_if<std::uint64_t>(&e))
        return std::hash<std::uint64_t>{}(*n) * 0x9e3779b97f4a7c15ULL;
    return std::hash<std::string>{}(std::get<std::string>(e)) ^ 0x5bd1e995U;
}

Schema::Schema(std::vector<Relation> relations) : relations_(std::move(relations))
{
    std::set<std::string> seen;
    for (const auto& r : relations_) {
        if (r.name.empty())
            throw Error(ErrorKind::SchemaMismatch, "relation name must not be empty");
        if (!seen.insert(r.name).second)
            throw Error(ErrorKind::SchemaMismatch, "duplicate relation '" + r.name + "'");
    }
}

std::optional<std::size_t> Schema::position(std::string_view name) const
{
    for (std::size_t i = 0; i < relations_.size(); ++i)
        if (relations_[i].name == name)
            return i;
    return std::nullopt;
}

std::optional<std::size_t> Schema::arity(std::string_view name) const
{
    if (auto pos = position(name))
        return relations_[*pos].arity;
    return std::nullopt;
}

std::string to_string(const Fact& f)
{
    std::string out = f.relation + "(";
    for (std::size_t i = 0; i < f.args.size(); ++i) {
        if (i)
            out += ",";
        out += to_string(f.args[i]);
    }
    return out + ")";
}

std::size_t FactHash::operator()(const Fact& f) const noexcept
{
    std::size_t h = std::hash<std::string>{}(f.relation);
    ElementHash eh;
    for (const auto& a : f.args)
        h = (h ^ eh(a)) * 0x100000001b3ULL + 0x9e3779b9U;
    return h;
}

} // namespace ipdb
