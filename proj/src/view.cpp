#include "ipdb/view.hpp"

#include <algorithm>
#include <map>

#include "ipdb/errors.hpp"
#include "ipdb/evaluator.hpp"

namespace ipdb {

View::View(Schema target, std::vector<ViewDefinition> definitions)
    : target_(std::move(target)), definitions_(std::move(definitions))
{
    for (const auto& r : target_.relations()) {
        const auto n = std::count_if(definitions_.begin(), definitions_.end(),
                                     [&](const ViewDefinition& d) { return d.relation == r.name; });
        if (n != 1)
            throw Error(ErrorKind::InvalidArgument, "target relation " + r.name + " needs exactly one definition");
    }
    for (const auto& d : definitions_) {
        const auto arity = target_.arity(d.relation);
        if (!arity)
            throw Error(ErrorKind::SchemaMismatch, "definition for unknown relation " + d.relation);
        if (*arity != d.variables.size())
            throw Error(ErrorKind::SchemaMismatch, "definition of " + d.relation + " has " +
                                                       std::to_string(d.variables.size()) +
                                                       " variables, relation arity is " + std::to_string(*arity));
        for (const auto& v : analyze(d.formula).free_variables)
            if (std::find(d.variables.begin(), d.variables.end(), v) == d.variables.end())
                throw Error(ErrorKind::InvalidArgument,
                            "free variable " + v + " of " + d.relation + " is not an answer column");
    }
}

Instance View::apply(const Instance& d, const Universe& u) const
{
    std::vector<Fact> out;
    for (const auto& def : definitions_) {
        QueryAnswer answer = eval_query(d, def.formula, u, def.variables);
        if (const auto* inf = std::get_if<InfiniteAnswer>(&answer)) {
            std::string w;
            for (const auto& e : inf->witness)
                w += (w.empty() ? "" : ",") + to_string(e);
            throw Error(ErrorKind::InfiniteAnswer,
                        "view " + def.relation + " has infinitely many answers on " + to_string(d) + ", e.g. (" + w + ")");
        }
        for (const auto& row : std::get<AnswerSet>(answer))
            out.push_back(Fact{def.relation, row});
    }
    return Instance(std::move(out));
}

FiniteDiscretePDB view_pushforward(const FiniteDiscretePDB& p, const View& v)
{
    std::vector<WeightedWorld> image;
    std::map<Instance, std::size_t> where;
    for (const auto& w : p.worlds()) {
        Instance d = v.apply(w.instance, p.universe());
        auto [it, inserted] = where.emplace(d, image.size());
        if (inserted)
            image.push_back({std::move(d), w.probability});
        else
            image[it->second].probability += w.probability;
    }
    return FiniteDiscretePDB(v.target(), p.universe(), std::move(image));
}

} // namespace ipdb
