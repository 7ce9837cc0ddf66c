#include "ipdb/ti.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ipdb/errors.hpp"

namespace ipdb {

namespace {

// Tail facts multiplied out explicitly before switching to the (*)-style
// exponential bound for the remainder.
constexpr std::uint64_t explicit_tail_cap = std::uint64_t{1} << 16;
constexpr double remainder_target = 1e-16;

void require_delta(double delta)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw Error(ErrorKind::InvalidArgument, "tolerance delta must lie in (0,1)");
}

} // namespace

TIPdb::TIPdb(FactProbabilityAssignment a) : assignment_(std::move(a))
{
    total_mass_ = assignment_.total_mass();
}

TIPdb ti_construct(const FactProbabilityAssignment& a)
{
    if (!a.summable())
        throw Error(ErrorKind::DivergentAssignment,
                    "fact probabilities do not have a certified finite sum");
    const double mass = a.total_mass();
    if (!std::isfinite(mass))
        throw Error(ErrorKind::DivergentAssignment, "fact probability sum is not finite");

    std::vector<WeightedFact> head;
    head.reserve(a.head().size());
    for (const auto& wf : a.head())
        if (wf.probability > 0.0)
            head.push_back(wf);
    std::optional<TailSpec> tail;
    if (a.tail() && a.tail()->total_mass() > 0.0)
        tail = a.tail()->spec();
    return TIPdb(FactProbabilityAssignment(a.schema(), a.universe(), std::move(head), std::move(tail)));
}

std::uint64_t tail_truncation(const FactTail& tail, double delta)
{
    if (!tail.summable())
        throw Error(ErrorKind::DivergentAssignment, "cannot truncate a divergent tail");
    if (tail.mass_beyond(0) <= delta)
        return 0;
    std::uint64_t lo = 0, hi = 1;
    while (tail.mass_beyond(hi) > delta) {
        lo = hi;
        if (hi > (std::uint64_t{1} << 62))
            throw Error(ErrorKind::CapExceeded, "tail mass does not reach the requested tolerance");
        hi *= 2;
    }
    // mass_beyond(lo) > delta >= mass_beyond(hi)
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (tail.mass_beyond(mid) <= delta)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

ProbabilityInterval tail_absence_enclosure(const FactTail& tail, std::span<const std::uint64_t> skip,
                                           std::span<const double> extra_factors)
{
    std::vector<double> factors(extra_factors.begin(), extra_factors.end());
    std::uint64_t n = 0;
    auto skip_it = skip.begin();
    while (n < explicit_tail_cap &&
           (tail.probability_at(n) > 0.5 || tail.mass_beyond(n) > remainder_target)) {
        while (skip_it != skip.end() && *skip_it < n)
            ++skip_it;
        if (skip_it == skip.end() || *skip_it != n)
            factors.push_back(tail.probability_at(n));
        ++n;
    }
    const double max_p = tail.probability_at(n);
    if (max_p > 0.5)
        throw Error(ErrorKind::Unsupported, "tail probabilities stay above 1/2 for too long to enclose");
    return product_one_minus_enclosure(factors, tail.mass_beyond(n), max_p);
}

ProbabilityInterval ti_instance_prob(const TIPdb& t, const Instance& d)
{
    const auto& a = t.assignment();
    const auto& head = a.head();
    std::vector<char> head_present(head.size(), 0);
    std::vector<std::uint64_t> tail_present;
    double log_present = 0.0;
    for (const auto& f : d) {
        const auto idx = a.global_index(f);
        if (!idx)
            return {0.0, 0.0};
        double p = 0.0;
        if (*idx < head.size()) {
            head_present[*idx] = 1;
            p = head[*idx].probability;
        } else {
            tail_present.push_back(*idx - head.size());
            p = a.tail()->probability_at(tail_present.back());
        }
        if (p == 0.0)
            return {0.0, 0.0};
        log_present += std::log(p);
    }
    std::vector<double> absent;
    absent.reserve(head.size());
    for (std::size_t i = 0; i < head.size(); ++i)
        if (!head_present[i])
            absent.push_back(head[i].probability);

    if (!a.tail()) {
        const LogProbability lp = log_product_one_minus(absent);
        if (lp.is_zero())
            return {0.0, 0.0};
        return ProbabilityInterval::point(std::exp(lp.value() + log_present));
    }
    std::sort(tail_present.begin(), tail_present.end());
    return scaled(tail_absence_enclosure(*a.tail(), tail_present, absent), std::exp(log_present));
}

EventProbabilities ti_event_probs(const TIPdb& t, std::span<const Fact> facts)
{
    std::set<Fact> seen;
    std::vector<double> ps;
    EventProbabilities out;
    for (const auto& f : facts) {
        if (!seen.insert(f).second)
            throw Error(ErrorKind::InvalidArgument, "facts must be distinct");
        const double p = t.assignment().probability(f);
        ps.push_back(p);
        out.conjunction *= p;
    }
    const LogProbability none = log_product_one_minus(ps);
    out.disjunction = none.is_zero() ? 1.0 : -std::expm1(none.value());
    return out;
}

std::uint64_t ti_truncation_index(const TIPdb& t, double delta)
{
    require_delta(delta);
    const auto* tail = t.assignment().tail();
    return tail ? tail_truncation(*tail, delta) : 0;
}

Instance ti_sample(const TIPdb& t, Rng& rng, double delta)
{
    require_delta(delta);
    const auto& a = t.assignment();
    std::vector<Fact> facts;
    for (const auto& wf : a.head())
        if (bernoulli(rng, wf.probability))
            facts.push_back(wf.fact);
    if (const auto* tail = a.tail()) {
        const std::uint64_t n = tail_truncation(*tail, delta);
        for (std::uint64_t i = 0; i < n; ++i)
            if (bernoulli(rng, tail->probability_at(i)))
                facts.push_back(tail->fact_at(i));
    }
    return Instance(std::move(facts));
}

} // namespace ipdb
