#include "ipdb/oracle.hpp"

#include <cmath>
#include <set>

#include "ipdb/errors.hpp"

namespace ipdb {

std::vector<WeightedWorld> enumerate_worlds(std::span<const WeightedFact> facts)
{
    if (facts.size() > oracle_fact_cap)
        throw CapExceededError(facts.size(), oracle_fact_cap, "oracle world enumeration");
    std::set<Fact> seen;
    for (const auto& wf : facts) {
        if (!(wf.probability >= 0.0 && wf.probability <= 1.0))
            throw Error(ErrorKind::InvalidArgument, "probability outside [0,1] for " + to_string(wf.fact));
        if (!seen.insert(wf.fact).second)
            throw Error(ErrorKind::DuplicateFact, to_string(wf.fact) + " listed twice");
    }
    const std::uint64_t count = std::uint64_t{1} << facts.size();
    std::vector<WeightedWorld> worlds;
    worlds.reserve(count);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        std::vector<Fact> chosen;
        double p = 1.0;
        // highest fact first, unlike the engine
        for (std::size_t i = facts.size(); i-- > 0;) {
            if (mask >> i & 1U) {
                chosen.push_back(facts[i].fact);
                p *= facts[i].probability;
            } else {
                p *= 1.0 - facts[i].probability;
            }
        }
        worlds.push_back({Instance(std::move(chosen)), p});
    }
    return worlds;
}

double exact_event_prob(std::span<const WeightedWorld> worlds, const InstancePredicate& predicate)
{
    double sum = 0.0;
    for (const auto& w : worlds)
        if (predicate(w.instance))
            sum += w.probability;
    return sum;
}

MonteCarloEstimate monte_carlo(const std::function<Instance(Rng&)>& sampler, const InstancePredicate& predicate,
                               std::uint64_t samples, std::uint64_t seed)
{
    if (samples == 0)
        throw Error(ErrorKind::InvalidArgument, "Monte Carlo needs at least one sample");
    Rng rng(seed);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i)
        hits += predicate(sampler(rng)) ? 1 : 0;
    const double n = static_cast<double>(samples);
    const double p = static_cast<double>(hits) / n;
    return {p, 3.0 * std::sqrt(p * (1.0 - p) / n)};
}

} // namespace ipdb
