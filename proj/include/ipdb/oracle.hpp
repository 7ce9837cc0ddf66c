#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ipdb/instance.hpp"
#include "ipdb/random.hpp"

namespace ipdb {

// Brute-force ground truth. Nothing here goes through the log-domain or
// enclosure code used by the measures; products are taken directly.

inline constexpr std::size_t oracle_fact_cap = 20;

/// All 2^n worlds over independent facts with their probabilities.
std::vector<WeightedWorld> enumerate_worlds(std::span<const WeightedFact> facts);

using InstancePredicate = std::function<bool(const Instance&)>;

double exact_event_prob(std::span<const WeightedWorld> worlds, const InstancePredicate& predicate);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double half_width = 0.0; // 3 standard errors
};

MonteCarloEstimate monte_carlo(const std::function<Instance(Rng&)>& sampler, const InstancePredicate& predicate,
                               std::uint64_t samples, std::uint64_t seed);

} // namespace ipdb
