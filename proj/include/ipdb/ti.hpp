#pragma once

#include <cstdint>
#include <span>

#include "ipdb/assignment.hpp"
#include "ipdb/instance.hpp"
#include "ipdb/numerics.hpp"
#include "ipdb/random.hpp"

namespace ipdb {

/// A tuple-independent PDB over all finite instances: every fact occurs
/// independently with its assigned probability, so
///   P({D}) = prod_{f in D} p_f * prod_{f not in D} (1 - p_f).
/// Only facts of positive probability are retained.
class TIPdb {
  public:
    const FactProbabilityAssignment& assignment() const noexcept { return assignment_; }
    /// Sum of all fact probabilities, which is also the expected instance size.
    double total_mass() const noexcept { return total_mass_; }

  private:
    friend TIPdb ti_construct(const FactProbabilityAssignment& a);
    explicit TIPdb(FactProbabilityAssignment a);

    FactProbabilityAssignment assignment_;
    double total_mass_ = 0.0;
};

/// Validates that the fact probabilities have a certified finite sum and
/// builds the measure. Throws DivergentAssignment otherwise.
TIPdb ti_construct(const FactProbabilityAssignment& a);

/// P({D}); a point value for finite assignments, a rigorous enclosure of the
/// infinite tail product otherwise.
ProbabilityInterval ti_instance_prob(const TIPdb& t, const Instance& d);

struct EventProbabilities {
    double conjunction = 1.0; // P(all facts occur)
    double disjunction = 0.0; // P(at least one occurs)
};

EventProbabilities ti_event_probs(const TIPdb& t, std::span<const Fact> facts);

/// Number of tail facts a sampler must flip so that the mass left out is at
/// most delta.
std::uint64_t ti_truncation_index(const TIPdb& t, double delta);

/// Draws an instance whose law is within total-variation distance delta of
/// the measure (exact when there is no tail).
Instance ti_sample(const TIPdb& t, Rng& rng, double delta);

/// Enclosure of prod (1 - p) over the tail facts of `assignment`, leaving out
/// the tail positions listed in `skip` (sorted). Shared by every measure that
/// carries an independent tail.
ProbabilityInterval tail_absence_enclosure(const FactTail& tail, std::span<const std::uint64_t> skip,
                                           std::span<const double> extra_factors);

/// Smallest n with tail.mass_beyond(n) <= delta.
std::uint64_t tail_truncation(const FactTail& tail, double delta);

} // namespace ipdb
