#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipdb/completion.hpp"
#include "ipdb/formula.hpp"
#include "ipdb/instance.hpp"
#include "ipdb/ti.hpp"

namespace ipdb {

/// Default bound on the number of independent facts enumerated per query;
/// the PDB_WORLD_CAP environment variable overrides it.
inline constexpr std::size_t default_world_cap = 25;
std::size_t world_cap();

/// Evidence that conditioning on the first n facts costs at most epsilon:
/// alpha_n = 1.5 * tail_sum, exp(alpha_n) <= 1 + epsilon,
/// exp(-alpha_n) >= 1 - epsilon, and every later fact has p <= 1/2.
struct TruncationCertificate {
    std::uint64_t n = 0;
    double alpha_n = 0.0;
    double tail_sum = 0.0;
    double epsilon = 0.0;
};

/// Smallest certified n, never below the number of head facts. Requires
/// 0 < epsilon < 1/2.
TruncationCertificate choose_truncation(const TIPdb& t, double epsilon);
/// Truncates the fresh facts of a completion; the original stays whole.
TruncationCertificate choose_truncation(const Completion& c, double epsilon);

/// A finite model: a distribution over base worlds times independent facts.
/// Conditioning a TI PDB (or a completion) on "no fact beyond index n"
/// yields one of these.
struct TruncatedModel {
    Universe universe;
    std::vector<WeightedWorld> base;
    std::vector<WeightedFact> independent;
};

TruncatedModel truncate(const TIPdb& t, std::uint64_t n);
TruncatedModel truncate(const Completion& c, std::uint64_t n);

/// For each valuation of `variables`, the probability that f holds. Facts
/// of relations absent from f are marginalized out before enumeration; the
/// remaining independent facts must not exceed `cap` (CapExceeded carries
/// the required count).
std::vector<double> model_query_probs(const TruncatedModel& m, const Formula& f,
                                      const std::vector<std::string>& variables,
                                      const std::vector<std::vector<Element>>& valuations,
                                      std::size_t cap = world_cap());

/// P(f | first n facts only), exact up to rounding. f must be a sentence.
double conditional_query_prob(const TIPdb& t, const Formula& f, std::uint64_t n, std::size_t cap = world_cap());
double conditional_query_prob(const Completion& c, const Formula& f, std::uint64_t n,
                              std::size_t cap = world_cap());

/// Additive approximation only: P(f) - epsilon <= p <= P(f) + epsilon.
struct BooleanApproximation {
    double p = 0.0;
    TruncationCertificate certificate;
};

BooleanApproximation approx_boolean(const TIPdb& t, const Formula& f, double epsilon, std::size_t cap = world_cap());
BooleanApproximation approx_boolean(const Completion& c, const Formula& f, double epsilon,
                                    std::size_t cap = world_cap());

/// Marginal probabilities of answer tuples, each within epsilon. Tuples over
/// the candidate elements (adom of the truncation and of f) are listed;
/// every other tuple has probability at most residual_bound.
struct TupleApproximation {
    std::vector<std::string> variables;
    std::map<std::vector<Element>, double> probabilities;
    double residual_bound = 0.0;
    TruncationCertificate certificate;
};

TupleApproximation approx_nonboolean(const TIPdb& t, const Formula& f, double epsilon,
                                     const std::optional<std::vector<std::string>>& order = std::nullopt,
                                     std::size_t cap = world_cap());
TupleApproximation approx_nonboolean(const Completion& c, const Formula& f, double epsilon,
                                     const std::optional<std::vector<std::string>>& order = std::nullopt,
                                     std::size_t cap = world_cap());

} // namespace ipdb
