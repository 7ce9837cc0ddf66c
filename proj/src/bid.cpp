#include "ipdb/bid.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ipdb/errors.hpp"
#include "ipdb/ti.hpp"

namespace ipdb {

namespace {

constexpr double mass_slack = 1e-12;
constexpr std::uint64_t lane_walk_cap = std::uint64_t{1} << 24;

void require_delta(double delta)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw Error(ErrorKind::InvalidArgument, "tolerance delta must lie in (0,1)");
}

struct KeyUnification {
    enum class Kind { none, single, infinite } kind = Kind::none;
    Fact key;
};

// Do two lanes of the key relation, both with an index slot among the key
// attributes, produce facts with equal keys?
KeyUnification unify_keys(const LanePattern& a, const LanePattern& b, std::size_t key_arity,
                          const Universe& universe)
{
    std::optional<Element> bound_a, bound_b;
    bool linked = false;
    auto bind = [&](std::optional<Element>& slot, const Element& value) {
        if (!universe.is_base_element(value) || (slot && *slot != value))
            return false;
        slot = value;
        return true;
    };
    for (std::size_t i = 0; i < key_arity; ++i) {
        const auto& x = a.args[i];
        const auto& y = b.args[i];
        if (x && y) {
            if (*x != *y)
                return {};
        } else if (x) {
            if (!bind(bound_b, *x))
                return {};
        } else if (y) {
            if (!bind(bound_a, *y))
                return {};
        } else {
            linked = true;
        }
    }
    if (linked) {
        if (bound_a && bound_b && *bound_a != *bound_b)
            return {};
        if (!bound_a && !bound_b)
            return {KeyUnification::Kind::infinite, {}};
        if (!bound_a)
            bound_a = bound_b;
        if (!bound_b)
            bound_b = bound_a;
    }
    KeyUnification out{KeyUnification::Kind::single, Fact{a.relation, {}}};
    for (std::size_t i = 0; i < key_arity; ++i)
        out.key.args.push_back(a.args[i] ? *a.args[i] : *bound_a);
    return out;
}

// The fact of `lane` whose key projection equals `key`, if any.
std::optional<Fact> lane_fact_with_key(const LanePattern& lane, const Fact& key, const Universe& universe)
{
    if (lane.relation != key.relation)
        return std::nullopt;
    std::optional<Element> value;
    for (std::size_t i = 0; i < key.args.size(); ++i) {
        if (lane.args[i]) {
            if (*lane.args[i] != key.args[i])
                return std::nullopt;
        } else if (value && *value != key.args[i]) {
            return std::nullopt;
        } else {
            value = key.args[i];
        }
    }
    if (!value || !universe.is_base_element(*value))
        return std::nullopt;
    Fact f{lane.relation, {}};
    for (const auto& a : lane.args)
        f.args.push_back(a ? *a : *value);
    return f;
}

bool slot_in_key(const LanePattern& lane, std::size_t key_arity)
{
    for (std::size_t i = 0; i < key_arity && i < lane.args.size(); ++i)
        if (!lane.args[i])
            return true;
    return false;
}

} // namespace

BlockPartition BlockPartition::singletons()
{
    return BlockPartition{};
}

BlockPartition BlockPartition::key_projection(std::string relation, std::size_t key_arity)
{
    BlockPartition p;
    p.kind_ = Kind::key_projection;
    p.relation_ = std::move(relation);
    p.key_arity_ = key_arity;
    return p;
}

BlockPartition BlockPartition::explicit_blocks(std::vector<std::vector<Fact>> blocks)
{
    BlockPartition p;
    p.kind_ = Kind::explicit_listing;
    p.listed_ = std::move(blocks);
    for (std::size_t i = 0; i < p.listed_.size(); ++i)
        for (const auto& f : p.listed_[i])
            if (!p.listed_index_.emplace(f, i).second)
                throw Error(ErrorKind::InvalidArgument, "fact " + to_string(f) + " listed in two blocks");
    return p;
}

BlockKey BlockPartition::key(const Fact& f) const
{
    switch (kind_) {
    case Kind::singletons: break;
    case Kind::key_projection:
        if (f.relation == relation_ && f.args.size() >= key_arity_) {
            Fact k{f.relation, {f.args.begin(), f.args.begin() + static_cast<std::ptrdiff_t>(key_arity_)}};
            return {BlockKey::Tag::projection, std::move(k), 0};
        }
        break;
    case Kind::explicit_listing:
        if (auto it = listed_index_.find(f); it != listed_index_.end())
            return {BlockKey::Tag::listed, {}, it->second};
        break;
    }
    return {BlockKey::Tag::singleton, f, 0};
}

bool is_good(const BlockPartition& partition, const Instance& d)
{
    std::set<BlockKey> keys;
    for (const auto& f : d)
        if (!keys.insert(partition.key(f)).second)
            return false;
    return true;
}

const BIDPdb::Block* BIDPdb::block(const BlockKey& key) const
{
    auto it = block_index_.find(key);
    return it == block_index_.end() ? nullptr : &blocks_[it->second];
}

std::optional<double> BIDPdb::member_probability(const Block& b, const Fact& f) const
{
    for (const auto& m : b.members)
        if (m.fact == f)
            return m.probability;
    for (const auto& lane : b.lanes)
        if (auto pos = lane.position_of(f))
            return lane.probability_at(*pos);
    return std::nullopt;
}

double BIDPdb::probability(const Fact& f) const
{
    if (const Block* b = block(partition_.key(f)))
        return member_probability(*b, f).value_or(0.0);
    if (singleton_tail_)
        if (auto pos = singleton_tail_->position_of(f))
            return singleton_tail_->probability_at(*pos);
    return 0.0;
}

BIDPdb bid_construct(const BlockPartition& partition, const FactProbabilityAssignment& a)
{
    if (!a.summable())
        throw Error(ErrorKind::DivergentAssignment,
                    "fact probabilities do not have a certified finite sum");
    BIDPdb out;
    out.partition_ = partition;
    const Universe& universe = a.universe();

    auto block_for = [&](const BlockKey& key) -> BIDPdb::Block& {
        auto [it, inserted] = out.block_index_.emplace(key, out.blocks_.size());
        if (inserted)
            out.blocks_.push_back(BIDPdb::Block{key, {}, {}, 0.0, 1.0});
        return out.blocks_[it->second];
    };

    for (const auto& wf : a.head())
        if (wf.probability > 0.0)
            block_for(partition.key(wf.fact)).members.push_back(wf);

    const FactTail* tail = a.tail();
    if (tail && tail->total_mass() > 0.0) {
        const TailSpec& spec = tail->spec();
        std::vector<LanePattern> spreading;
        std::vector<Fact> absorbed;
        auto absorb = [&](const BlockKey& key, const Fact& f) {
            if (auto pos = tail->position_of(f)) {
                block_for(key).members.push_back({f, tail->probability_at(*pos)});
                absorbed.push_back(f);
            }
        };

        if (spec.enumerate_all) {
            if (partition.kind() == BlockPartition::Kind::key_projection) {
                const auto arity = a.schema().arity(partition.relation());
                if (arity && *arity > partition.key_arity())
                    throw Error(ErrorKind::Unsupported,
                                "an enumerating tail cannot feed a key projection with shared keys");
            }
        } else {
            const bool projecting = partition.kind() == BlockPartition::Kind::key_projection;
            for (const auto& lane : spec.lanes) {
                if (projecting && lane.relation == partition.relation() && !slot_in_key(lane, partition.key_arity())) {
                    Fact key{lane.relation, {}};
                    for (std::size_t i = 0; i < partition.key_arity(); ++i)
                        key.args.push_back(*lane.args[i]);
                    TailSpec single{spec.rule, {lane}, false, 0, spec.exclude};
                    block_for({BlockKey::Tag::projection, key, 0})
                        .lanes.emplace_back(std::move(single), a.schema(), universe);
                } else {
                    spreading.push_back(lane);
                }
            }
            if (projecting) {
                const std::size_t j = partition.key_arity();
                std::vector<const LanePattern*> keyed;
                for (const auto& lane : spreading)
                    if (lane.relation == partition.relation())
                        keyed.push_back(&lane);
                for (std::size_t x = 0; x < keyed.size(); ++x)
                    for (std::size_t y = x + 1; y < keyed.size(); ++y) {
                        const auto u = unify_keys(*keyed[x], *keyed[y], j, universe);
                        if (u.kind == KeyUnification::Kind::infinite)
                            throw Error(ErrorKind::Unsupported, "lanes " + to_string(*keyed[x]) + " and " +
                                                                    to_string(*keyed[y]) +
                                                                    " share infinitely many blocks");
                        if (u.kind == KeyUnification::Kind::single)
                            block_for({BlockKey::Tag::projection, u.key, 0});
                    }
                const std::size_t materialized = out.blocks_.size();
                for (std::size_t b = 0; b < materialized; ++b) {
                    const BlockKey key = out.blocks_[b].key;
                    if (key.tag != BlockKey::Tag::projection)
                        continue;
                    for (const auto* lane : keyed)
                        if (auto f = lane_fact_with_key(*lane, key.fact, universe))
                            absorb(key, *f);
                }
            }
        }
        if (partition.kind() == BlockPartition::Kind::explicit_listing)
            for (const auto& listed : partition.listed_blocks())
                for (const auto& f : listed)
                    absorb(partition.key(f), f);

        if (spec.enumerate_all || !spreading.empty()) {
            TailSpec rest{spec.rule, spreading, spec.enumerate_all, spec.offset, spec.exclude};
            rest.exclude.insert(rest.exclude.end(), absorbed.begin(), absorbed.end());
            out.singleton_tail_.emplace(std::move(rest), a.schema(), universe);
        }
    }

    CompensatedSum total;
    for (auto& b : out.blocks_) {
        CompensatedSum mass;
        for (const auto& m : b.members)
            mass.add(m.probability);
        for (const auto& lane : b.lanes)
            mass.add(lane.total_mass());
        b.mass = mass.value();
        if (b.mass > 1.0 + mass_slack)
            throw Error(ErrorKind::BlockMassExceedsOne,
                        "block of " + to_string(b.members.empty() ? b.key.fact : b.members.front().fact) +
                            " has mass " + std::to_string(b.mass));
        b.mass = std::min(b.mass, 1.0);
        b.remainder = 1.0 - b.mass;
        total.add(b.mass);
    }
    if (out.singleton_tail_)
        total.add(out.singleton_tail_->total_mass());
    out.total_mass_ = total.value();
    if (!std::isfinite(out.total_mass_))
        throw Error(ErrorKind::DivergentAssignment, "block masses do not have a finite sum");
    return out;
}

ProbabilityInterval bid_instance_prob(const BIDPdb& b, const Instance& d)
{
    if (!is_good(b.partition(), d))
        return {0.0, 0.0};
    std::vector<char> touched(b.blocks().size(), 0);
    std::vector<std::uint64_t> tail_present;
    double log_present = 0.0;
    for (const auto& f : d) {
        const BlockKey key = b.partition().key(f);
        double p = 0.0;
        if (auto it = b.block_index_.find(key); it != b.block_index_.end()) {
            p = b.member_probability(b.blocks()[it->second], f).value_or(0.0);
            touched[it->second] = 1;
        } else if (const FactTail* tail = b.singleton_tail()) {
            if (auto pos = tail->position_of(f)) {
                p = tail->probability_at(*pos);
                tail_present.push_back(*pos);
            }
        }
        if (p == 0.0)
            return {0.0, 0.0};
        log_present += std::log(p);
    }
    std::vector<double> untouched;
    for (std::size_t i = 0; i < touched.size(); ++i)
        if (!touched[i])
            untouched.push_back(b.blocks()[i].mass);
    if (!b.singleton_tail()) {
        const LogProbability lp = log_product_one_minus(untouched);
        if (lp.is_zero())
            return {0.0, 0.0};
        return ProbabilityInterval::point(std::exp(lp.value() + log_present));
    }
    std::sort(tail_present.begin(), tail_present.end());
    return scaled(tail_absence_enclosure(*b.singleton_tail(), tail_present, untouched), std::exp(log_present));
}

Instance bid_sample(const BIDPdb& b, Rng& rng, double delta)
{
    require_delta(delta);
    std::vector<Fact> facts;
    for (const auto& block : b.blocks()) {
        double u = unit_uniform(rng);
        std::optional<Fact> chosen;
        for (const auto& m : block.members) {
            if (u < m.probability) {
                chosen = m.fact;
                break;
            }
            u -= m.probability;
        }
        for (std::size_t l = 0; !chosen && l < block.lanes.size(); ++l) {
            const FactTail& lane = block.lanes[l];
            const double lane_mass = lane.total_mass();
            if (u >= lane_mass) {
                u -= lane_mass;
                continue;
            }
            for (std::uint64_t pos = 0; pos < lane_walk_cap; ++pos) {
                const double p = lane.probability_at(pos);
                if (u < p) {
                    chosen = lane.fact_at(pos);
                    break;
                }
                u -= p;
                if (p == 0.0)
                    break;
            }
            break;
        }
        if (chosen)
            facts.push_back(std::move(*chosen));
    }
    if (const FactTail* tail = b.singleton_tail()) {
        const std::uint64_t n = tail_truncation(*tail, delta);
        for (std::uint64_t i = 0; i < n; ++i)
            if (bernoulli(rng, tail->probability_at(i)))
                facts.push_back(tail->fact_at(i));
    }
    return Instance(std::move(facts));
}

} // namespace ipdb
