#include "ipdb/completion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "ipdb/errors.hpp"

namespace ipdb {

namespace {

constexpr double mass_slack = 1e-12;
constexpr std::uint64_t explicit_bound_prefix = 4096;

Instance subset_of(const std::vector<Fact>& facts, std::uint64_t mask)
{
    std::vector<Fact> chosen;
    for (std::size_t i = 0; i < facts.size(); ++i)
        if (mask >> i & 1U)
            chosen.push_back(facts[i]);
    return Instance(std::move(chosen));
}

// All subsets of `facts`, ordered by size and then by mask.
std::vector<std::uint64_t> masks_by_size(std::size_t n)
{
    std::vector<std::uint64_t> masks(std::uint64_t{1} << n);
    for (std::uint64_t m = 0; m < masks.size(); ++m)
        masks[m] = m;
    std::stable_sort(masks.begin(), masks.end(),
                     [](std::uint64_t a, std::uint64_t b) { return std::popcount(a) < std::popcount(b); });
    return masks;
}

void require_closure_cap(const FiniteDiscretePDB& p)
{
    if (p.facts().size() > closure_fact_cap)
        throw CapExceededError(p.facts().size(), closure_fact_cap,
                               "closure check over " + std::to_string(p.facts().size()) + " facts");
}

// log of rule.probability(level), -inf for zero.
double log_rule(const TailRule& r, double level)
{
    if (r.c() == 0.0)
        return -INFINITY;
    switch (r.kind()) {
    case TailRule::Kind::geometric: return std::log(r.c()) + level * std::log(r.parameter());
    case TailRule::Kind::constant: return std::log(r.c());
    case TailRule::Kind::power: return std::log(r.c()) - r.parameter() * std::log(level);
    }
    return -INFINITY;
}

// For positions j >= k of a tail with L lanes whose first global index is
// h, is rule(level(j)) <= bound(h + j + 1)? level(j) >= floor(j/L) + 1.
bool analytic_tail_bound(const TailRule& r, std::size_t lanes, std::uint64_t h, std::uint64_t k,
                         const TailRule& bound)
{
    if (r.c() == 0.0)
        return true;
    if (bound.c() == 0.0 || r.kind() == TailRule::Kind::constant)
        return false;
    const double L = static_cast<double>(lanes);
    const double H = static_cast<double>(h);
    auto upper = [&](double j) {
        // rule value at level floor(j/L) + 1, bounded above monotonically
        if (r.kind() == TailRule::Kind::geometric)
            return std::log(r.c()) + (j / L) * std::log(r.parameter());
        return std::log(r.c()) - r.parameter() * std::log((j + 1) / L);
    };
    auto lower = [&](double j) { return log_rule(bound, H + j + 1); };
    const double K = static_cast<double>(k);
    if (bound.kind() == TailRule::Kind::geometric) {
        if (r.kind() != TailRule::Kind::geometric)
            return false;
        const double slope = std::log(r.parameter()) / L - std::log(bound.parameter());
        return slope <= 0.0 && upper(K) <= lower(K);
    }
    // power bound
    if (r.kind() == TailRule::Kind::power) {
        if (r.parameter() < bound.parameter())
            return false;
        return upper(K) <= lower(K); // difference is non-increasing in j
    }
    // geometric rule against a power bound: upper - lower is concave and
    // eventually decreasing; check from the turning point on.
    const double lq = std::log(r.parameter());
    const double turn = std::max(K, bound.parameter() * L / -lq - H - 1);
    if (turn > K + static_cast<double>(std::uint64_t{1} << 20))
        return false;
    for (double j = K; j <= std::ceil(turn); j += 1.0)
        if (upper(j) > lower(j))
            return false;
    return true;
}

} // namespace

std::optional<Instance> find_missing_subinstance(const FiniteDiscretePDB& p)
{
    require_closure_cap(p);
    const auto& facts = p.facts();
    if (p.worlds().size() == (std::size_t{1} << facts.size()))
        return std::nullopt;
    for (std::uint64_t m : masks_by_size(facts.size())) {
        Instance d = subset_of(facts, m);
        if (!p.in_sample_space(d))
            return d;
    }
    return std::nullopt;
}

FiniteDiscretePDB closure_extend(const FiniteDiscretePDB& p0, double c,
                                 const std::optional<std::map<Instance, double>>& redistribution)
{
    if (!(c > 0.0 && c <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "closure weight c must lie in (0,1]");
    require_closure_cap(p0);
    const auto& facts = p0.facts();
    std::vector<Instance> missing;
    for (std::uint64_t m : masks_by_size(facts.size())) {
        Instance d = subset_of(facts, m);
        if (!p0.in_sample_space(d))
            missing.push_back(std::move(d));
    }
    const double rest = 1.0 - c;
    if (rest > 0.0 && missing.empty())
        throw Error(ErrorKind::InvalidArgument,
                    "no missing instances to receive the remaining mass " + std::to_string(rest));

    std::vector<WeightedWorld> worlds;
    worlds.reserve(p0.worlds().size() + missing.size());
    for (const auto& w : p0.worlds())
        worlds.push_back({w.instance, c * w.probability});

    if (redistribution) {
        CompensatedSum total;
        for (const auto& [d, q] : *redistribution) {
            if (p0.in_sample_space(d) || std::find(missing.begin(), missing.end(), d) == missing.end())
                throw Error(ErrorKind::InvalidArgument,
                            "redistribution names " + to_string(d) + " which is not a missing instance");
            if (!(q >= 0.0 && q <= 1.0))
                throw Error(ErrorKind::InvalidArgument, "redistribution probability outside [0,1]");
            total.add(q);
        }
        if (std::abs(total.value() - rest) > mass_slack)
            throw Error(ErrorKind::InvalidArgument, "redistribution mass " + std::to_string(total.value()) +
                                                        " differs from 1 - c = " + std::to_string(rest));
        for (auto& d : missing) {
            auto it = redistribution->find(d);
            worlds.push_back({std::move(d), it == redistribution->end() ? 0.0 : it->second});
        }
    } else {
        const double share = missing.empty() ? 0.0 : rest / static_cast<double>(missing.size());
        for (auto& d : missing)
            worlds.push_back({std::move(d), share});
    }
    return FiniteDiscretePDB(p0.schema(), p0.universe(), std::move(worlds));
}

Completion::Completion(FiniteDiscretePDB original, TIPdb tail)
    : original_(std::move(original)), tail_(std::move(tail))
{
    p_empty_ = ti_instance_prob(tail_, Instance{});
}

bool Completion::is_original_fact(const Fact& f) const
{
    return std::binary_search(original_.facts().begin(), original_.facts().end(), f);
}

Completion complete(const FiniteDiscretePDB& p, const FactProbabilityAssignment& tail)
{
    if (!(tail.schema() == p.schema()) || !(tail.universe() == p.universe()))
        throw Error(ErrorKind::SchemaMismatch, "tail and original use different schemas or universes");
    if (auto missing = find_missing_subinstance(p))
        throw Error(ErrorKind::NotClosed,
                    "original is not closed under subsets and unions; missing " + to_string(*missing));
    for (const auto& f : p.facts())
        if (tail.global_index(f))
            throw Error(ErrorKind::OverlappingFacts, "tail assigns a probability to original fact " + to_string(f));
    for (const auto& wf : tail.head())
        if (wf.probability >= 1.0)
            throw Error(ErrorKind::UnitTailProbability, "fresh fact " + to_string(wf.fact) + " has probability 1");
    if (const FactTail* t = tail.tail(); t && t->probability_at(0) >= 1.0)
        throw Error(ErrorKind::UnitTailProbability,
                    "fresh fact " + to_string(t->fact_at(0)) + " has probability 1");
    return Completion(p, ti_construct(tail));
}

ProbabilityInterval completion_instance_prob(const Completion& c, const Instance& d)
{
    std::vector<Fact> old_part, fresh_part;
    for (const auto& f : d)
        (c.is_original_fact(f) ? old_part : fresh_part).push_back(f);
    const double p = c.original().probability(Instance(std::move(old_part)));
    if (p == 0.0)
        return {0.0, 0.0};
    return scaled(ti_instance_prob(c.tail(), Instance(std::move(fresh_part))), p);
}

ConditionCheck completion_condition_check(const Completion& c, std::span<const Instance> a)
{
    const std::set<Instance> chosen(a.begin(), a.end());
    const double pe = c.p_empty().midpoint();
    if (!(pe > 0.0))
        throw Error(ErrorKind::InvalidArgument, "original sample space has probability zero");
    CompensatedSum joint, omega, original;
    for (const auto& d : chosen) {
        if (!c.original().in_sample_space(d))
            throw Error(ErrorKind::InvalidArgument, to_string(d) + " is not a world of the original");
        const double p = c.original().probability(d);
        joint.add(p * pe);
        original.add(p);
    }
    for (const auto& w : c.original().worlds())
        omega.add(w.probability * pe);
    return {joint.value() / omega.value(), original.value()};
}

bool bounded_tail_validate(const FactProbabilityAssignment& a, const TailRule& bound)
{
    if (!bound.summable())
        throw Error(ErrorKind::InvalidArgument, "bound series must have a finite sum");
    const auto& head = a.head();
    for (std::size_t i = 0; i < head.size(); ++i)
        if (head[i].probability > bound.probability(i + 1))
            return false;
    const FactTail* tail = a.tail();
    if (!tail)
        return true;
    const std::uint64_t h = head.size();
    for (std::uint64_t j = 0; j < explicit_bound_prefix; ++j) {
        const double p = tail->probability_at(j);
        if (p == 0.0)
            return true;
        if (p > bound.probability(h + j + 1))
            return false;
    }
    return analytic_tail_bound(tail->rule(), tail->lane_count(), h, explicit_bound_prefix, bound);
}

Instance completion_sample(const Completion& c, Rng& rng, double delta)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw Error(ErrorKind::InvalidArgument, "tolerance delta must lie in (0,1)");
    const auto& worlds = c.original().worlds();
    double u = unit_uniform(rng);
    const WeightedWorld* chosen = nullptr;
    for (const auto& w : worlds) {
        if (w.probability > 0.0)
            chosen = &w;
        if (u < w.probability)
            break;
        u -= w.probability;
    }
    Instance fresh = ti_sample(c.tail(), rng, delta);
    return chosen ? chosen->instance.united(fresh) : fresh;
}

} // namespace ipdb
