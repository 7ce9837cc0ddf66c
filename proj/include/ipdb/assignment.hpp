#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ipdb/fact.hpp"
#include "ipdb/universe.hpp"

namespace ipdb {

/// Probability rule for the i-th level (i >= 1) of an infinite fact family.
class TailRule {
  public:
    enum class Kind { geometric, constant, power };

    /// p_i = c * q^i with c > 0, 0 < q < 1, c * q <= 1.
    static TailRule geometric(double c, double q);
    /// p_i = c; summable only when c = 0.
    static TailRule constant(double c);
    /// p_i = c * i^-s with 0 < c <= 1, s > 0; summable iff s > 1.
    static TailRule power(double c, double s);

    Kind kind() const noexcept { return kind_; }
    double c() const noexcept { return c_; }
    /// q for geometric rules, s for power rules, unused otherwise.
    double parameter() const noexcept { return parameter_; }

    double probability(std::uint64_t level) const;
    bool summable() const noexcept;
    /// Upper bound on sum_{i >= level} p_i; exact for geometric rules,
    /// +infinity when the series diverges.
    double mass_from(std::uint64_t level) const;

    friend bool operator==(const TailRule&, const TailRule&) = default;

  private:
    TailRule(Kind kind, double c, double parameter) : kind_(kind), c_(c), parameter_(parameter) {}

    Kind kind_;
    double c_;
    double parameter_;
};

/// A fact template such as R('A', #): the index slot (std::nullopt) is
/// filled with the i-th base element of the universe at level i.
struct LanePattern {
    std::string relation;
    std::vector<std::optional<Element>> args;

    friend bool operator==(const LanePattern&, const LanePattern&) = default;
};

std::string to_string(const LanePattern& lane);

/// Description of an infinite family of facts with rule-driven probabilities.
/// Either a list of lanes, or (enumerate_all) the canonical fact enumeration
/// starting after `offset`. Facts listed in `exclude` are removed together
/// with their probability mass.
struct TailSpec {
    TailRule rule = TailRule::geometric(0.5, 0.5);
    std::vector<LanePattern> lanes;
    bool enumerate_all = false;
    std::uint64_t offset = 0;
    std::vector<Fact> exclude;

    friend bool operator==(const TailSpec&, const TailSpec&) = default;
};

/// A validated TailSpec bound to a schema and universe.
///
/// Tail facts are ordered level by level, lanes in declaration order within
/// a level, so probabilities are non-increasing along positions. Positions
/// are 0-based and skip excluded facts.
class FactTail {
  public:
    FactTail(TailSpec spec, const Schema& schema, const Universe& universe);

    const TailSpec& spec() const noexcept { return spec_; }
    const TailRule& rule() const noexcept { return spec_.rule; }
    std::size_t lane_count() const noexcept { return lanes_; }
    bool summable() const noexcept { return spec_.rule.summable(); }

    Fact fact_at(std::uint64_t position) const;
    double probability_at(std::uint64_t position) const;
    std::optional<std::uint64_t> position_of(const Fact& f) const;
    /// Level (1-based) of a tail position.
    std::uint64_t level_of(std::uint64_t position) const;
    /// Upper bound on the mass of all positions >= n.
    double mass_beyond(std::uint64_t n) const;
    double total_mass() const { return mass_beyond(0); }

  private:
    std::uint64_t raw_of(std::uint64_t position) const;
    Fact raw_fact(std::uint64_t raw) const;
    std::optional<std::uint64_t> raw_position_of(const Fact& f) const;

    TailSpec spec_;
    Universe universe_;
    std::optional<FactEnumeration> enumeration_;
    std::size_t lanes_ = 1;
    std::vector<std::uint64_t> excluded_raw_; // sorted
};

/// Fact probabilities p_f: an explicit head plus an optional infinite tail.
/// Facts are indexed globally, head first (in listed order), then tail
/// positions.
class FactProbabilityAssignment {
  public:
    FactProbabilityAssignment(Schema schema, Universe universe, std::vector<WeightedFact> head,
                              std::optional<TailSpec> tail = std::nullopt);

    const Schema& schema() const noexcept { return schema_; }
    const Universe& universe() const noexcept { return universe_; }
    const std::vector<WeightedFact>& head() const noexcept { return head_; }
    const FactTail* tail() const noexcept { return tail_ ? &*tail_ : nullptr; }
    bool has_tail() const noexcept { return tail_.has_value(); }

    double probability(const Fact& f) const;
    std::optional<std::uint64_t> global_index(const Fact& f) const;
    Fact fact_at(std::uint64_t index) const;
    double probability_at(std::uint64_t index) const;

    /// Upper bound on the mass of facts with global index >= n (exact
    /// for geometric tails and inside the head).
    double mass_beyond(std::uint64_t n) const;
    double total_mass() const { return mass_beyond(0); }
    bool summable() const noexcept { return !tail_ || tail_->summable(); }

  private:
    Schema schema_;
    Universe universe_;
    std::vector<WeightedFact> head_;
    std::unordered_map<Fact, std::size_t, FactHash> head_index_;
    std::vector<double> head_suffix_mass_;
    std::optional<FactTail> tail_;
};

} // namespace ipdb
