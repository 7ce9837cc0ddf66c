#pragma once

#include <map>
#include <optional>
#include <span>

#include "ipdb/assignment.hpp"
#include "ipdb/instance.hpp"
#include "ipdb/numerics.hpp"
#include "ipdb/random.hpp"
#include "ipdb/ti.hpp"

namespace ipdb {

/// Worlds over at most this many facts are checked for closure exhaustively.
inline constexpr std::size_t closure_fact_cap = 20;

/// The first subset of F(p) (smallest size first) that is not a world of p.
std::optional<Instance> find_missing_subinstance(const FiniteDiscretePDB& p);
inline bool is_closed(const FiniteDiscretePDB& p) { return !find_missing_subinstance(p); }

/// Rescales p0 by c and hands the remaining 1 - c to the subsets of F(p0)
/// that are not yet worlds: uniformly, or as given by `redistribution`
/// (which must only name missing instances and carry total mass 1 - c).
/// With c = 1 missing instances are added with probability zero.
FiniteDiscretePDB closure_extend(const FiniteDiscretePDB& p0, double c,
                                 const std::optional<std::map<Instance, double>>& redistribution = std::nullopt);

/// An original finite PDB extended by independent fresh facts:
///   P'({D + C}) = P({D}) * P_1({C})
/// for D a world of the original and C a finite set of fresh facts.
class Completion {
  public:
    const FiniteDiscretePDB& original() const noexcept { return original_; }
    const TIPdb& tail() const noexcept { return tail_; }
    /// P_1({}) which equals P'(original sample space).
    const ProbabilityInterval& p_empty() const noexcept { return p_empty_; }

    bool is_original_fact(const Fact& f) const;

  private:
    friend Completion complete(const FiniteDiscretePDB&, const FactProbabilityAssignment&);
    Completion(FiniteDiscretePDB original, TIPdb tail);

    FiniteDiscretePDB original_;
    TIPdb tail_;
    ProbabilityInterval p_empty_;
};

/// Errors: NotClosed (naming a missing sub-instance), SchemaMismatch,
/// OverlappingFacts, UnitTailProbability, DivergentAssignment.
Completion complete(const FiniteDiscretePDB& p, const FactProbabilityAssignment& tail);

ProbabilityInterval completion_instance_prob(const Completion& c, const Instance& d);

struct ConditionCheck {
    double conditioned = 0.0; // P'(A | original space)
    double original = 0.0;    // P(A)
};

/// `a` lists worlds of the original; repeated entries count once.
ConditionCheck completion_condition_check(const Completion& c, std::span<const Instance> a);

/// True iff the i-th fact probability (in global order, 1-based) is at most
/// bound.probability(i) for every i. Tails are compared explicitly for a
/// prefix and analytically beyond it; the analytic part is conservative
/// when facts are excluded from the tail.
bool bounded_tail_validate(const FactProbabilityAssignment& a, const TailRule& bound);

Instance completion_sample(const Completion& c, Rng& rng, double delta);

} // namespace ipdb
