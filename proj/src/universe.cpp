#include "ipdb/universe.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "ipdb/errors.hpp"

namespace ipdb {

namespace {

using u128 = unsigned __int128;

// Binomial coefficients saturate here; any count this large is far beyond
// what a 64-bit index can address.
constexpr u128 saturated = static_cast<u128>(1) << 100;

u128 binom(u128 n, u128 k)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    u128 r = 1;
    for (u128 i = 1; i <= k; ++i) {
        const u128 factor = n - k + i;
        if (r > saturated / factor)
            return saturated;
        r = r * factor / i;
    }
    return r;
}

// Number of arity-tuples of non-negative integers with sum < s.
u128 count_below(u128 s, std::size_t arity)
{
    return binom(s + arity - 1, arity);
}

std::uint64_t checked_u64(u128 v, const char* what)
{
    if (v > std::numeric_limits<std::uint64_t>::max())
        throw Error(ErrorKind::InvalidArgument, std::string(what) + ": index exceeds 64 bits");
    return static_cast<std::uint64_t>(v);
}

} // namespace

std::vector<std::uint64_t> diagonal_unrank(std::uint64_t rank, std::size_t arity)
{
    if (arity == 0) {
        if (rank != 0)
            throw Error(ErrorKind::InvalidArgument, "nullary tuple has only rank 0");
        return {};
    }
    if (arity == 1)
        return {rank};

    // Largest sum s with count_below(s) <= rank.
    u128 lo = 0, hi = 1;
    while (count_below(hi, arity) <= rank)
        hi *= 2;
    while (hi - lo > 1) {
        const u128 mid = lo + (hi - lo) / 2;
        if (count_below(mid, arity) <= rank)
            lo = mid;
        else
            hi = mid;
    }
    u128 remaining_sum = lo;
    u128 r = rank - count_below(lo, arity);

    std::vector<std::uint64_t> out(arity);
    for (std::size_t i = 0; i + 1 < arity; ++i) {
        const std::size_t rest = arity - i - 1;
        // cum(v) = number of completions with x_i < v.
        const u128 total = binom(remaining_sum + rest, rest);
        auto cum = [&](u128 v) { return total - binom(remaining_sum - v + rest, rest); };
        u128 vlo = 0, vhi = remaining_sum;
        while (vlo < vhi) {
            const u128 mid = vlo + (vhi - vlo + 1) / 2;
            if (cum(mid) <= r)
                vlo = mid;
            else
                vhi = mid - 1;
        }
        r -= cum(vlo);
        out[i] = static_cast<std::uint64_t>(vlo);
        remaining_sum -= vlo;
    }
    out[arity - 1] = static_cast<std::uint64_t>(remaining_sum);
    return out;
}

std::uint64_t diagonal_rank(const std::vector<std::uint64_t>& tuple)
{
    const std::size_t arity = tuple.size();
    if (arity == 0)
        return 0;
    if (arity == 1)
        return tuple[0];
    u128 sum = 0;
    for (auto x : tuple)
        sum += x;
    u128 r = count_below(sum, arity);
    u128 remaining_sum = sum;
    for (std::size_t i = 0; i + 1 < arity; ++i) {
        const std::size_t rest = arity - i - 1;
        r += binom(remaining_sum + rest, rest) - binom(remaining_sum - tuple[i] + rest, rest);
        remaining_sum -= tuple[i];
        if (r >= saturated)
            break;
    }
    return checked_u64(r, "diagonal_rank");
}

Universe::Universe(Kind kind, std::string alphabet, std::vector<std::string> constants)
    : kind_(kind), alphabet_(std::move(alphabet)), constants_(std::move(constants))
{
    if (kind_ == Kind::strings) {
        if (alphabet_.empty())
            throw Error(ErrorKind::InvalidArgument, "string universe needs a nonempty alphabet");
        std::set<char> seen(alphabet_.begin(), alphabet_.end());
        if (seen.size() != alphabet_.size())
            throw Error(ErrorKind::InvalidArgument, "alphabet must be duplicate-free");
    }
    std::set<std::string> seen;
    for (const auto& c : constants_) {
        if (!seen.insert(c).second)
            throw Error(ErrorKind::InvalidArgument, "duplicate universe constant '" + c + "'");
        if (is_base_element(Element{c}))
            throw Error(ErrorKind::InvalidArgument,
                        "universe constant '" + c + "' collides with a base element");
    }
}

Universe Universe::naturals(std::vector<std::string> constants)
{
    return Universe(Kind::naturals, {}, std::move(constants));
}

Universe Universe::strings(std::string alphabet, std::vector<std::string> constants)
{
    return Universe(Kind::strings, std::move(alphabet), std::move(constants));
}

bool Universe::is_base_element(const Element& e) const
{
    if (kind_ == Kind::naturals) {
        const auto* n = std::get_if<std::uint64_t>(&e);
        return n && *n >= 1;
    }
    const auto* s = std::get_if<std::string>(&e);
    if (!s)
        return false;
    return std::all_of(s->begin(), s->end(),
                       [&](char c) { return alphabet_.find(c) != std::string::npos; });
}

bool Universe::contains(const Element& e) const
{
    if (is_base_element(e))
        return true;
    const auto* s = std::get_if<std::string>(&e);
    return s && std::find(constants_.begin(), constants_.end(), *s) != constants_.end();
}

Element Universe::base_element_at(std::uint64_t k) const
{
    if (k < 1)
        throw Error(ErrorKind::InvalidArgument, "element index must be >= 1");
    if (kind_ == Kind::naturals)
        return k;
    const u128 s = alphabet_.size();
    if (s == 1)
        return std::string(k - 1, alphabet_[0]);
    u128 n = k - 1;
    u128 block = 1;
    std::size_t length = 0;
    while (n >= block) {
        n -= block;
        block *= s;
        ++length;
    }
    std::string out(length, alphabet_[0]);
    for (std::size_t i = length; i-- > 0;) {
        out[i] = alphabet_[static_cast<std::size_t>(n % s)];
        n /= s;
    }
    return out;
}

std::uint64_t Universe::base_index_of(const Element& e) const
{
    if (!is_base_element(e))
        throw Error(ErrorKind::SchemaMismatch, "element " + to_string(e) + " is not a base element");
    if (kind_ == Kind::naturals)
        return std::get<std::uint64_t>(e);
    const auto& str = std::get<std::string>(e);
    const u128 s = alphabet_.size();
    if (s == 1)
        return static_cast<std::uint64_t>(str.size()) + 1;
    u128 offset = 0, block = 1, value = 0;
    for (std::size_t len = 0; len < str.size(); ++len) {
        offset += block;
        block *= s;
        if (block > saturated)
            throw Error(ErrorKind::InvalidArgument, "string element too long to index");
    }
    for (char c : str)
        value = value * s + alphabet_.find(c);
    return checked_u64(offset + value + 1, "base_index_of");
}

Element Universe::element_at(std::uint64_t k) const
{
    if (k < 1)
        throw Error(ErrorKind::InvalidArgument, "element index must be >= 1");
    if (k <= constants_.size())
        return constants_[k - 1];
    return base_element_at(k - constants_.size());
}

std::uint64_t Universe::index_of(const Element& e) const
{
    if (const auto* s = std::get_if<std::string>(&e)) {
        auto it = std::find(constants_.begin(), constants_.end(), *s);
        if (it != constants_.end())
            return static_cast<std::uint64_t>(it - constants_.begin()) + 1;
    }
    const std::uint64_t base = base_index_of(e);
    return checked_u64(static_cast<u128>(base) + constants_.size(), "index_of");
}

void check_fact(const Schema& schema, const Universe& universe, const Fact& fact)
{
    const auto arity = schema.arity(fact.relation);
    if (!arity)
        throw Error(ErrorKind::SchemaMismatch, "unknown relation in fact " + to_string(fact));
    if (*arity != fact.args.size())
        throw Error(ErrorKind::SchemaMismatch,
                    "arity mismatch in fact " + to_string(fact) + ": expected " +
                        std::to_string(*arity));
    for (const auto& a : fact.args)
        if (!universe.contains(a))
            throw Error(ErrorKind::SchemaMismatch,
                        "element " + to_string(a) + " of fact " + to_string(fact) +
                            " lies outside the universe");
}

FactEnumeration::FactEnumeration(Schema schema, Universe universe)
    : schema_(std::move(schema)), universe_(std::move(universe))
{
    for (std::size_t i = 0; i < schema_.relations().size(); ++i) {
        if (schema_.relations()[i].arity == 0)
            nullary_.push_back(i);
        else
            positive_.push_back(i);
    }
}

Fact FactEnumeration::fact_at(std::uint64_t k) const
{
    if (k < 1)
        throw Error(ErrorKind::InvalidArgument, "fact index must be >= 1");
    if (k <= nullary_.size())
        return Fact{schema_.relations()[nullary_[k - 1]].name, {}};
    if (positive_.empty())
        throw Error(ErrorKind::InvalidArgument, "fact index beyond the finite enumeration");
    const std::uint64_t rest = k - nullary_.size() - 1;
    const std::uint64_t m = positive_.size();
    const auto& relation = schema_.relations()[positive_[rest % m]];
    const auto tuple = diagonal_unrank(rest / m, relation.arity);
    Fact f{relation.name, {}};
    f.args.reserve(tuple.size());
    for (auto x : tuple)
        f.args.push_back(universe_.element_at(x + 1));
    return f;
}

std::uint64_t FactEnumeration::fact_index(const Fact& f) const
{
    check_fact(schema_, universe_, f);
    const std::size_t pos = *schema_.position(f.relation);
    if (f.args.empty()) {
        auto it = std::find(nullary_.begin(), nullary_.end(), pos);
        return static_cast<std::uint64_t>(it - nullary_.begin()) + 1;
    }
    const auto slot = static_cast<std::uint64_t>(
        std::find(positive_.begin(), positive_.end(), pos) - positive_.begin());
    std::vector<std::uint64_t> tuple;
    tuple.reserve(f.args.size());
    for (const auto& a : f.args)
        tuple.push_back(universe_.index_of(a) - 1);
    const u128 t = diagonal_rank(tuple);
    return checked_u64(t * positive_.size() + slot + nullary_.size() + 1, "fact_index");
}

} // namespace ipdb
