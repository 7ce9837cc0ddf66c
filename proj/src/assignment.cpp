#include "ipdb/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ipdb/errors.hpp"
#include "ipdb/numerics.hpp"

namespace ipdb {

namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

void require_probability(double p, const std::string& what)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorKind::InvalidArgument, what + ": probability " + std::to_string(p) +
                                                    " outside [0,1]");
}

// Two lanes over the same relation share a fact iff their patterns unify,
// with one unknown (the level's base element) per lane.
bool lanes_overlap(const LanePattern& a, const LanePattern& b, const Universe& universe)
{
    if (a.relation != b.relation || a.args.size() != b.args.size())
        return false;
    std::optional<Element> bound_a, bound_b;
    bool linked = false;
    auto bind = [&](std::optional<Element>& slot, const Element& value) {
        if (!universe.is_base_element(value))
            return false;
        if (slot && *slot != value)
            return false;
        slot = value;
        return true;
    };
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        const auto& x = a.args[i];
        const auto& y = b.args[i];
        if (x && y) {
            if (*x != *y)
                return false;
        } else if (x) {
            if (!bind(bound_b, *x))
                return false;
        } else if (y) {
            if (!bind(bound_a, *y))
                return false;
        } else {
            linked = true;
        }
    }
    if (linked && bound_a && bound_b && *bound_a != *bound_b)
        return false;
    return true;
}

} // namespace

TailRule TailRule::geometric(double c, double q)
{
    if (!(c > 0.0) || !(q > 0.0 && q < 1.0))
        throw Error(ErrorKind::InvalidArgument, "geometric rule needs c > 0 and 0 < q < 1");
    if (c * q > 1.0)
        throw Error(ErrorKind::InvalidArgument, "geometric rule gives a first probability above 1");
    return TailRule(Kind::geometric, c, q);
}

TailRule TailRule::constant(double c)
{
    require_probability(c, "constant rule");
    return TailRule(Kind::constant, c, 0.0);
}

TailRule TailRule::power(double c, double s)
{
    if (!(c > 0.0 && c <= 1.0) || !(s > 0.0))
        throw Error(ErrorKind::InvalidArgument, "power rule needs 0 < c <= 1 and s > 0");
    return TailRule(Kind::power, c, s);
}

double TailRule::probability(std::uint64_t level) const
{
    const double i = static_cast<double>(level);
    switch (kind_) {
    case Kind::geometric: return c_ * std::pow(parameter_, i);
    case Kind::constant: return c_;
    case Kind::power: return c_ * std::pow(i, -parameter_);
    }
    return 0.0;
}

bool TailRule::summable() const noexcept
{
    switch (kind_) {
    case Kind::geometric: return true;
    case Kind::constant: return c_ == 0.0;
    case Kind::power: return parameter_ > 1.0;
    }
    return false;
}

double TailRule::mass_from(std::uint64_t level) const
{
    if (level < 1)
        level = 1;
    if (!summable())
        return infinity;
    const double i = static_cast<double>(level);
    switch (kind_) {
    case Kind::geometric: return c_ * std::pow(parameter_, i) / (1.0 - parameter_);
    case Kind::constant: return 0.0;
    case Kind::power: {
        const double s = parameter_;
        if (level == 1)
            return c_ * std::riemann_zeta(s);
        // i^-s + integral_i^inf x^-s dx
        return c_ * (std::pow(i, -s) + std::pow(i, 1.0 - s) / (s - 1.0));
    }
    }
    return infinity;
}

std::string to_string(const LanePattern& lane)
{
    std::string out = lane.relation + "(";
    for (std::size_t i = 0; i < lane.args.size(); ++i) {
        if (i)
            out += ",";
        out += lane.args[i] ? to_string(*lane.args[i]) : "#";
    }
    return out + ")";
}

FactTail::FactTail(TailSpec spec, const Schema& schema, const Universe& universe)
    : spec_(std::move(spec)), universe_(universe)
{
    if (spec_.enumerate_all) {
        if (!spec_.lanes.empty())
            throw Error(ErrorKind::InvalidArgument, "an enumerating tail cannot also list lanes");
        if (schema.empty())
            throw Error(ErrorKind::InvalidArgument, "an enumerating tail needs a nonempty schema");
        enumeration_.emplace(schema, universe);
        lanes_ = 1;
    } else {
        if (spec_.lanes.empty())
            throw Error(ErrorKind::InvalidArgument, "a tail needs at least one lane");
        for (const auto& lane : spec_.lanes) {
            const auto arity = schema.arity(lane.relation);
            if (!arity || *arity != lane.args.size())
                throw Error(ErrorKind::SchemaMismatch, "lane " + to_string(lane) + " does not match the schema");
            bool has_slot = false;
            for (const auto& a : lane.args) {
                if (!a)
                    has_slot = true;
                else if (!universe.contains(*a))
                    throw Error(ErrorKind::SchemaMismatch,
                                "lane " + to_string(lane) + " uses an element outside the universe");
            }
            if (!has_slot)
                throw Error(ErrorKind::InvalidArgument, "lane " + to_string(lane) + " has no index slot");
        }
        for (std::size_t i = 0; i < spec_.lanes.size(); ++i)
            for (std::size_t j = i + 1; j < spec_.lanes.size(); ++j)
                if (lanes_overlap(spec_.lanes[i], spec_.lanes[j], universe))
                    throw Error(ErrorKind::OverlappingFacts, "tail lanes " + to_string(spec_.lanes[i]) +
                                                                 " and " + to_string(spec_.lanes[j]) +
                                                                 " share facts");
        lanes_ = spec_.lanes.size();
    }
    for (const auto& f : spec_.exclude)
        if (auto raw = raw_position_of(f))
            excluded_raw_.push_back(*raw);
    std::sort(excluded_raw_.begin(), excluded_raw_.end());
    excluded_raw_.erase(std::unique(excluded_raw_.begin(), excluded_raw_.end()), excluded_raw_.end());
}

std::uint64_t FactTail::raw_of(std::uint64_t position) const
{
    std::uint64_t raw = position;
    for (auto e : excluded_raw_) {
        if (e <= raw)
            ++raw;
        else
            break;
    }
    return raw;
}

std::uint64_t FactTail::level_of(std::uint64_t position) const
{
    return raw_of(position) / lanes_ + 1;
}

Fact FactTail::raw_fact(std::uint64_t raw) const
{
    const std::uint64_t level = raw / lanes_ + 1;
    if (enumeration_)
        return enumeration_->fact_at(spec_.offset + level);
    const auto& lane = spec_.lanes[raw % lanes_];
    const Element value = universe_.base_element_at(level);
    Fact f{lane.relation, {}};
    f.args.reserve(lane.args.size());
    for (const auto& a : lane.args)
        f.args.push_back(a ? *a : value);
    return f;
}

std::optional<std::uint64_t> FactTail::raw_position_of(const Fact& f) const
{
    if (enumeration_) {
        std::uint64_t k = 0;
        try {
            k = enumeration_->fact_index(f);
        } catch (const Error&) {
            return std::nullopt;
        }
        if (k <= spec_.offset)
            return std::nullopt;
        return k - spec_.offset - 1;
    }
    for (std::size_t l = 0; l < spec_.lanes.size(); ++l) {
        const auto& lane = spec_.lanes[l];
        if (lane.relation != f.relation || lane.args.size() != f.args.size())
            continue;
        std::optional<Element> value;
        bool match = true;
        for (std::size_t i = 0; i < f.args.size() && match; ++i) {
            if (lane.args[i])
                match = *lane.args[i] == f.args[i];
            else if (value)
                match = *value == f.args[i];
            else
                value = f.args[i];
        }
        if (!match || !value || !universe_.is_base_element(*value))
            continue;
        const std::uint64_t level = universe_.base_index_of(*value);
        if (level - 1 > (std::numeric_limits<std::uint64_t>::max() - l) / lanes_)
            throw Error(ErrorKind::Unsupported, "tail position of " + to_string(f) + " exceeds 64 bits");
        return (level - 1) * lanes_ + l;
    }
    return std::nullopt;
}

Fact FactTail::fact_at(std::uint64_t position) const
{
    return raw_fact(raw_of(position));
}

double FactTail::probability_at(std::uint64_t position) const
{
    return spec_.rule.probability(level_of(position));
}

std::optional<std::uint64_t> FactTail::position_of(const Fact& f) const
{
    const auto raw = raw_position_of(f);
    if (!raw)
        return std::nullopt;
    auto it = std::lower_bound(excluded_raw_.begin(), excluded_raw_.end(), *raw);
    if (it != excluded_raw_.end() && *it == *raw)
        return std::nullopt;
    return *raw - static_cast<std::uint64_t>(it - excluded_raw_.begin());
}

double FactTail::mass_beyond(std::uint64_t n) const
{
    if (!summable())
        return infinity;
    const std::uint64_t raw = raw_of(n);
    const std::uint64_t level = raw / lanes_ + 1;
    const double partial = static_cast<double>(lanes_ - raw % lanes_);
    double mass = partial * spec_.rule.probability(level) +
                  static_cast<double>(lanes_) * spec_.rule.mass_from(level + 1);
    for (auto e : excluded_raw_)
        if (e >= raw)
            mass -= spec_.rule.probability(e / lanes_ + 1);
    return std::max(0.0, mass);
}

FactProbabilityAssignment::FactProbabilityAssignment(Schema schema, Universe universe,
                                                     std::vector<WeightedFact> head,
                                                     std::optional<TailSpec> tail)
    : schema_(std::move(schema)), universe_(std::move(universe)), head_(std::move(head))
{
    if (tail)
        tail_.emplace(std::move(*tail), schema_, universe_);
    for (std::size_t i = 0; i < head_.size(); ++i) {
        const auto& wf = head_[i];
        check_fact(schema_, universe_, wf.fact);
        require_probability(wf.probability, to_string(wf.fact));
        if (!head_index_.emplace(wf.fact, i).second)
            throw Error(ErrorKind::DuplicateFact, "fact " + to_string(wf.fact) + " listed twice");
        if (tail_ && tail_->position_of(wf.fact))
            throw Error(ErrorKind::OverlappingFacts,
                        "head fact " + to_string(wf.fact) + " is also generated by the tail");
    }
    head_suffix_mass_.assign(head_.size() + 1, 0.0);
    CompensatedSum sum;
    for (std::size_t i = head_.size(); i-- > 0;) {
        sum.add(head_[i].probability);
        head_suffix_mass_[i] = sum.value();
    }
}

double FactProbabilityAssignment::probability(const Fact& f) const
{
    if (auto it = head_index_.find(f); it != head_index_.end())
        return head_[it->second].probability;
    if (tail_)
        if (auto pos = tail_->position_of(f))
            return tail_->probability_at(*pos);
    return 0.0;
}

std::optional<std::uint64_t> FactProbabilityAssignment::global_index(const Fact& f) const
{
    if (auto it = head_index_.find(f); it != head_index_.end())
        return it->second;
    if (tail_)
        if (auto pos = tail_->position_of(f))
            return head_.size() + *pos;
    return std::nullopt;
}

Fact FactProbabilityAssignment::fact_at(std::uint64_t index) const
{
    if (index < head_.size())
        return head_[index].fact;
    if (!tail_)
        throw Error(ErrorKind::InvalidArgument, "fact index beyond a finite assignment");
    return tail_->fact_at(index - head_.size());
}

double FactProbabilityAssignment::probability_at(std::uint64_t index) const
{
    if (index < head_.size())
        return head_[index].probability;
    if (!tail_)
        return 0.0;
    return tail_->probability_at(index - head_.size());
}

double FactProbabilityAssignment::mass_beyond(std::uint64_t n) const
{
    const double tail_mass =
        tail_ ? tail_->mass_beyond(n > head_.size() ? n - head_.size() : 0) : 0.0;
    if (n >= head_.size())
        return tail_mass;
    return head_suffix_mass_[n] + tail_mass;
}

} // namespace ipdb
