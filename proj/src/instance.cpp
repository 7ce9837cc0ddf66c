#include "ipdb/instance.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ipdb/errors.hpp"
#include "ipdb/numerics.hpp"

namespace ipdb {

Instance::Instance(std::vector<Fact> facts) : facts_(std::move(facts))
{
    std::sort(facts_.begin(), facts_.end());
    facts_.erase(std::unique(facts_.begin(), facts_.end()), facts_.end());
}

Instance::Instance(std::initializer_list<Fact> facts) : Instance(std::vector<Fact>(facts)) {}

bool Instance::contains(const Fact& f) const
{
    return std::binary_search(facts_.begin(), facts_.end(), f);
}

Instance Instance::with(const Fact& f) const
{
    auto copy = facts_;
    copy.push_back(f);
    return Instance(std::move(copy));
}

Instance Instance::united(const Instance& other) const
{
    auto copy = facts_;
    copy.insert(copy.end(), other.facts_.begin(), other.facts_.end());
    return Instance(std::move(copy));
}

std::size_t InstanceHash::operator()(const Instance& d) const noexcept
{
    std::size_t h = 0xcbf29ce484222325ULL;
    FactHash fh;
    for (const auto& f : d)
        h = (h ^ fh(f)) * 0x100000001b3ULL;
    return h;
}

std::string to_string(const Instance& d)
{
    std::string out = "{";
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i)
            out += ", ";
        out += to_string(d.facts()[i]);
    }
    return out + "}";
}

std::set<Element> active_domain(const Instance& d)
{
    std::set<Element> out;
    for (const auto& f : d)
        out.insert(f.args.begin(), f.args.end());
    return out;
}

double expected_size(std::span<const WeightedWorld> worlds)
{
    CompensatedSum sum;
    for (const auto& w : worlds)
        sum.add(w.probability * static_cast<double>(w.instance.size()));
    return sum.value();
}

double marginal(std::span<const WeightedWorld> worlds, const Fact& f)
{
    CompensatedSum sum;
    for (const auto& w : worlds)
        if (w.instance.contains(f))
            sum.add(w.probability);
    return sum.value();
}

std::vector<Fact> positive_facts(std::span<const WeightedWorld> worlds)
{
    std::set<Fact> out;
    for (const auto& w : worlds)
        if (w.probability > 0.0)
            out.insert(w.instance.begin(), w.instance.end());
    return {out.begin(), out.end()};
}

double size_tail(std::span<const WeightedWorld> worlds, std::size_t n)
{
    CompensatedSum sum;
    for (const auto& w : worlds)
        if (w.instance.size() >= n)
            sum.add(w.probability);
    return sum.value();
}

FiniteDiscretePDB::FiniteDiscretePDB(Schema schema, Universe universe, std::vector<WeightedWorld> worlds)
    : schema_(std::move(schema)), universe_(std::move(universe)), worlds_(std::move(worlds))
{
    CompensatedSum total;
    std::set<Fact> facts;
    for (std::size_t i = 0; i < worlds_.size(); ++i) {
        const auto& w = worlds_[i];
        if (!(w.probability >= 0.0 && w.probability <= 1.0))
            throw Error(ErrorKind::InvalidArgument,
                        "world " + to_string(w.instance) + " has probability outside [0,1]");
        for (const auto& f : w.instance)
            check_fact(schema_, universe_, f);
        if (!index_.emplace(w.instance, i).second)
            throw Error(ErrorKind::InvalidArgument, "world " + to_string(w.instance) + " listed twice");
        facts.insert(w.instance.begin(), w.instance.end());
        total.add(w.probability);
    }
    facts_.assign(facts.begin(), facts.end());
    input_mass_ = total.value();
    const double deviation = std::fabs(input_mass_ - 1.0);
    if (deviation > 1e-6)
        throw Error(ErrorKind::InvalidArgument,
                    "world probabilities sum to " + std::to_string(input_mass_) + ", not 1");
    if (deviation > 1e-12) {
        for (auto& w : worlds_)
            w.probability /= input_mass_;
        renormalized_ = true;
    }
}

double FiniteDiscretePDB::probability(const Instance& d) const
{
    auto it = index_.find(d);
    return it == index_.end() ? 0.0 : worlds_[it->second].probability;
}

bool FiniteDiscretePDB::in_sample_space(const Instance& d) const
{
    return index_.count(d) != 0;
}

} // namespace ipdb
