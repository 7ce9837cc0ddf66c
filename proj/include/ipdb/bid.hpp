#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipdb/assignment.hpp"
#include "ipdb/instance.hpp"
#include "ipdb/numerics.hpp"
#include "ipdb/random.hpp"

namespace ipdb {

/// Identifier of the block a fact belongs to.
struct BlockKey {
    enum class Tag { singleton, projection, listed };

    Tag tag = Tag::singleton;
    Fact fact;             // the fact itself, or its key projection
    std::size_t listed = 0; // index of an explicitly listed block

    friend auto operator<=>(const BlockKey&, const BlockKey&) = default;
    friend bool operator==(const BlockKey&, const BlockKey&) = default;
};

/// A computable partition of all facts into blocks.
///
///  - singletons: every fact is its own block (tuple-independence);
///  - key projection: facts of one relation share a block iff they agree on
///    the first `key_arity` attributes, other relations are singletons;
///  - explicit listing: finitely many listed blocks, singletons elsewhere.
class BlockPartition {
  public:
    enum class Kind { singletons, key_projection, explicit_listing };

    static BlockPartition singletons();
    static BlockPartition key_projection(std::string relation, std::size_t key_arity);
    static BlockPartition explicit_blocks(std::vector<std::vector<Fact>> blocks);

    Kind kind() const noexcept { return kind_; }
    const std::string& relation() const noexcept { return relation_; }
    std::size_t key_arity() const noexcept { return key_arity_; }
    const std::vector<std::vector<Fact>>& listed_blocks() const noexcept { return listed_; }

    BlockKey key(const Fact& f) const;

    friend bool operator==(const BlockPartition& a, const BlockPartition& b)
    {
        return a.kind_ == b.kind_ && a.relation_ == b.relation_ && a.key_arity_ == b.key_arity_ &&
               a.listed_ == b.listed_;
    }

  private:
    Kind kind_ = Kind::singletons;
    std::string relation_;
    std::size_t key_arity_ = 0;
    std::vector<std::vector<Fact>> listed_;
    std::map<Fact, std::size_t> listed_index_;
};

/// True iff no two facts of `d` share a block.
bool is_good(const BlockPartition& partition, const Instance& d);

/// A block-independent-disjoint PDB. Facts in one block are mutually
/// exclusive, blocks are independent. A good instance D has probability
///   prod_B p^B_{beta(B,D)}
/// where beta picks the fact of D in B, or the remainder 1 - m_B when D
/// misses B; bad instances have probability zero.
///
/// Blocks holding explicitly listed facts (or a whole tail lane) are stored
/// as materialized blocks; tail facts that each sit alone in their block
/// form an independent singleton tail.
class BIDPdb {
  public:
    struct Block {
        BlockKey key;
        std::vector<WeightedFact> members;
        std::vector<FactTail> lanes; // whole lanes living inside this block
        double mass = 0.0;
        double remainder = 1.0;
    };

    const BlockPartition& partition() const noexcept { return partition_; }
    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    const FactTail* singleton_tail() const noexcept { return singleton_tail_ ? &*singleton_tail_ : nullptr; }
    double total_mass() const noexcept { return total_mass_; }

    double probability(const Fact& f) const;
    const Block* block(const BlockKey& key) const;

  private:
    friend BIDPdb bid_construct(const BlockPartition&, const FactProbabilityAssignment&);
    friend ProbabilityInterval bid_instance_prob(const BIDPdb&, const Instance&);
    BIDPdb() = default;

    // Probability of f inside a materialized block, if f belongs to it.
    std::optional<double> member_probability(const Block& b, const Fact& f) const;

    BlockPartition partition_;
    std::vector<Block> blocks_;
    std::map<BlockKey, std::size_t> block_index_;
    std::optional<FactTail> singleton_tail_;
    double total_mass_ = 0.0;
};

/// Throws BlockMassExceedsOne when some block's mass exceeds one, and
/// DivergentAssignment when the total mass is not certified finite.
BIDPdb bid_construct(const BlockPartition& partition, const FactProbabilityAssignment& a);

ProbabilityInterval bid_instance_prob(const BIDPdb& b, const Instance& d);

/// Draws one categorical outcome per block (exact inside materialized
/// blocks) and truncates the singleton tail at mass delta.
Instance bid_sample(const BIDPdb& b, Rng& rng, double delta);

} // namespace ipdb
