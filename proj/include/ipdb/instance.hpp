#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "ipdb/fact.hpp"
#include "ipdb/universe.hpp"

namespace ipdb {

/// A finite set of facts. Facts are kept sorted and duplicate-free, so
/// equality, ordering and hashing are structural.
class Instance {
  public:
    Instance() = default;
    explicit Instance(std::vector<Fact> facts);
    Instance(std::initializer_list<Fact> facts);

    const std::vector<Fact>& facts() const noexcept { return facts_; }
    std::size_t size() const noexcept { return facts_.size(); }
    bool empty() const noexcept { return facts_.empty(); }
    bool contains(const Fact& f) const;

    auto begin() const noexcept { return facts_.begin(); }
    auto end() const noexcept { return facts_.end(); }

    Instance with(const Fact& f) const;
    Instance united(const Instance& other) const;

    friend auto operator<=>(const Instance&, const Instance&) = default;
    friend bool operator==(const Instance&, const Instance&) = default;

  private:
    std::vector<Fact> facts_;
};

struct InstanceHash {
    std::size_t operator()(const Instance& d) const noexcept;
};

std::string to_string(const Instance& d);

std::set<Element> active_domain(const Instance& d);
inline std::size_t instance_size(const Instance& d) { return d.size(); }

struct WeightedWorld {
    Instance instance;
    double probability = 0.0;

    friend bool operator==(const WeightedWorld&, const WeightedWorld&) = default;
};

// Statistics over an explicit list of worlds. The list may carry a partial
// measure (total below one), e.g. a truncation of an infinite PDB.
double expected_size(std::span<const WeightedWorld> worlds);
double marginal(std::span<const WeightedWorld> worlds, const Fact& f);
std::vector<Fact> positive_facts(std::span<const WeightedWorld> worlds);
double size_tail(std::span<const WeightedWorld> worlds, std::size_t n);

/// A PDB with finitely many worlds of positive or zero probability.
///
/// Probabilities must lie in [0, 1]. A total within 1e-12 of one is kept
/// as is; totals off by up to 1e-6 are renormalized (see renormalized());
/// anything further off is rejected.
class FiniteDiscretePDB {
  public:
    FiniteDiscretePDB(Schema schema, Universe universe, std::vector<WeightedWorld> worlds);

    const Schema& schema() const noexcept { return schema_; }
    const Universe& universe() const noexcept { return universe_; }
    const std::vector<WeightedWorld>& worlds() const noexcept { return worlds_; }

    /// P({D}); zero for instances outside the sample space.
    double probability(const Instance& d) const;
    bool in_sample_space(const Instance& d) const;

    /// F(D): every fact occurring in some world, sorted.
    const std::vector<Fact>& facts() const noexcept { return facts_; }

    /// Mass found in the input before renormalization.
    double input_mass() const noexcept { return input_mass_; }
    bool renormalized() const noexcept { return renormalized_; }

  private:
    Schema schema_;
    Universe universe_;
    std::vector<WeightedWorld> worlds_;
    std::map<Instance, std::size_t> index_;
    std::vector<Fact> facts_;
    double input_mass_ = 1.0;
    bool renormalized_ = false;
};

inline double expected_size(const FiniteDiscretePDB& p) { return expected_size(p.worlds()); }
inline double marginal(const FiniteDiscretePDB& p, const Fact& f) { return marginal(p.worlds(), f); }
inline std::vector<Fact> positive_facts(const FiniteDiscretePDB& p) { return positive_facts(p.worlds()); }
inline double size_tail(const FiniteDiscretePDB& p, std::size_t n) { return size_tail(p.worlds(), n); }

} // namespace ipdb
