#include <doctest.h>

#include <cmath>
#include <numbers>
#include <unordered_set>

#include "ipdb/assignment.hpp"
#include "ipdb/errors.hpp"
#include "ipdb/instance.hpp"
#include "reference.hpp"

using namespace ipdb;
using ipdb::testing::uniform_below;

namespace {

Element nat(std::uint64_t n) { return Element{n}; }
Element str(std::string s) { return Element{std::move(s)}; }

Fact R(Element a, Element b) { return Fact{"R", {std::move(a), std::move(b)}}; }
Fact U(std::uint64_t n) { return Fact{"R", {nat(n)}}; }

const Schema binary{{{"R", 2}}};
const Schema unary{{{"R", 1}}};
const Universe abcd = Universe::naturals({"A", "B", "C", "D"});

// Example-style worlds D_n = {R(1..2^n)} with p_n = 6/(pi^2 n^2), n <= N.
std::vector<WeightedWorld> doubling_worlds(int N)
{
    std::vector<WeightedWorld> out;
    for (int n = 1; n <= N; ++n) {
        std::vector<Fact> facts;
        for (std::uint64_t i = 1; i <= (std::uint64_t{1} << n); ++i)
            facts.push_back(U(i));
        out.push_back({Instance(std::move(facts)), 6.0 / (std::numbers::pi * std::numbers::pi * n * n)});
    }
    return out;
}

} // namespace

TEST_CASE("schema validation")
{
    CHECK_THROWS_AS(Schema({{"R", 1}, {"R", 2}}), Error);
    CHECK_THROWS_AS(Schema({{"", 1}}), Error);
    const Schema s({{"R", 2}, {"S", 0}});
    CHECK(s.arity("R") == 2u);
    CHECK(s.arity("S") == 0u);
    CHECK(!s.arity("T"));
}

TEST_CASE("fact rendering")
{
    CHECK(to_string(R(str("A"), nat(1))) == "R('A',1)");
    CHECK(to_string(Fact{"S", {}}) == "S()");
    CHECK(to_string(str("it's")) == "'it\\'s'");
}

TEST_CASE("instances are canonical sets")
{
    const Instance a{R(str("B"), nat(2)), R(str("A"), nat(1)), R(str("A"), nat(1))};
    const Instance b{R(str("A"), nat(1)), R(str("B"), nat(2))};
    CHECK(a == b);
    CHECK(a.size() == 2);
    CHECK(InstanceHash{}(a) == InstanceHash{}(b));
    CHECK(a.contains(R(str("B"), nat(2))));
    CHECK(!a.contains(R(str("B"), nat(1))));
    CHECK(a.with(R(str("C"), nat(3))).size() == 3);
    CHECK(a.united(Instance{R(str("A"), nat(1))}) == a);
    std::unordered_set<Instance, InstanceHash> set{a, b};
    CHECK(set.size() == 1);
}

TEST_CASE("active domain and size")
{
    CHECK(active_domain(Instance{}).empty());
    CHECK(active_domain(Instance{R(str("A"), nat(1)), R(str("B"), nat(2))}) ==
          std::set<Element>{str("A"), nat(1), str("B"), nat(2)});
    CHECK(active_domain(Instance{R(nat(1), nat(1))}) == std::set<Element>{nat(1)});
    CHECK(instance_size(Instance{}) == 0);
    CHECK(instance_size(doubling_worlds(3)[2].instance) == 8);
    CHECK(instance_size(Instance{R(str("A"), nat(1)), R(str("B"), nat(1))}) == 2);
}

TEST_CASE("finite PDB statistics")
{
    const Fact f = U(1), g = U(2);
    FiniteDiscretePDB single(unary, Universe::naturals(), {{Instance{}, 1.0}});
    CHECK(expected_size(single) == 0.0);
    CHECK(positive_facts(single).empty());
    CHECK(size_tail(single, 0) == 1.0);

    FiniteDiscretePDB half(unary, Universe::naturals(), {{Instance{}, 0.5}, {Instance{f}, 0.5}});
    CHECK(marginal(half, f) == 0.5);
    CHECK(positive_facts(half) == std::vector<Fact>{f});

    FiniteDiscretePDB grid(unary, Universe::naturals(),
                           {{Instance{}, 0.25}, {Instance{f}, 0.25}, {Instance{g}, 0.25}, {Instance{f, g}, 0.25}});
    CHECK(marginal(grid, f) == 0.5);

    FiniteDiscretePDB tail(unary, Universe::naturals(), {{Instance{}, 0.3}, {Instance{f}, 0.7}});
    CHECK(size_tail(tail, 1) == doctest::Approx(0.7));
    CHECK(size_tail(tail, 2) == 0.0);
}

TEST_CASE("statistics over the doubling family")
{
    const double c = 6.0 / (std::numbers::pi * std::numbers::pi);
    CHECK(marginal(doubling_worlds(3), U(1)) == doctest::Approx(c * (1 + 0.25 + 1.0 / 9)));
    CHECK(size_tail(doubling_worlds(5), 9) == doctest::Approx(c * (1.0 / 16 + 1.0 / 25)));
    CHECK(size_tail(doubling_worlds(5), 9) == doctest::Approx(0.06231).epsilon(1e-4));
    CHECK(expected_size(doubling_worlds(20)) > 1000.0);
}

TEST_CASE("expected size equals the sum of marginals")
{
    Rng rng(17);
    const std::vector<Element> elems{nat(1), nat(2), nat(3)};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<WeightedWorld> worlds;
        std::set<Instance> seen;
        const auto count = 1 + uniform_below(rng, 8);
        double total = 0.0;
        while (worlds.size() < count) {
            Instance d = ipdb::testing::random_instance(rng, binary, elems, 5);
            if (!seen.insert(d).second)
                continue;
            const double w = unit_uniform(rng);
            total += w;
            worlds.push_back({d, w});
        }
        for (auto& w : worlds)
            w.probability /= total;
        const FiniteDiscretePDB p(binary, Universe::naturals(), worlds);
        double sum = 0.0;
        for (const auto& f : positive_facts(p)) {
            const double m = marginal(p, f);
            CHECK(m >= 0.0);
            CHECK(m <= 1.0 + 1e-15);
            sum += m;
        }
        CHECK(std::abs(expected_size(p) - sum) <= 1e-12);
        std::size_t biggest = 0;
        for (const auto& w : worlds)
            biggest = std::max(biggest, w.instance.size());
        for (std::size_t n = 0; n <= biggest; ++n)
            CHECK(size_tail(p, n + 1) <= size_tail(p, n) + 1e-15);
        CHECK(size_tail(p, biggest + 1) == 0.0);
        CHECK(marginal(p, R(nat(9), nat(9))) == 0.0);
    }
}

TEST_CASE("finite PDB validation and normalization")
{
    const Fact f = U(1);
    CHECK_THROWS_AS(FiniteDiscretePDB(unary, Universe::naturals(), {{Instance{}, 0.5}, {Instance{f}, 0.4}}), Error);
    CHECK_THROWS_AS(FiniteDiscretePDB(unary, Universe::naturals(), {{Instance{}, 0.5}, {Instance{}, 0.5}}), Error);
    CHECK_THROWS_AS(FiniteDiscretePDB(unary, Universe::naturals(), {{Instance{}, 1.5}, {Instance{f}, -0.5}}), Error);
    CHECK_THROWS_AS(FiniteDiscretePDB(unary, Universe::naturals(), {{Instance{R(nat(1), nat(1))}, 1.0}}), Error);

    const FiniteDiscretePDB close(unary, Universe::naturals(), {{Instance{}, 0.5}, {Instance{f}, 0.5 + 1e-13}});
    CHECK(!close.renormalized());
    const FiniteDiscretePDB off(unary, Universe::naturals(), {{Instance{}, 0.5}, {Instance{f}, 0.5 + 1e-8}});
    CHECK(off.renormalized());
    CHECK(std::abs(off.worlds()[0].probability + off.worlds()[1].probability - 1.0) <= 1e-15);
    CHECK(off.probability(Instance{U(5)}) == 0.0);
    CHECK(!off.in_sample_space(Instance{U(5)}));
}

TEST_CASE("tail rules")
{
    const auto g = TailRule::geometric(1.0, 0.5);
    CHECK(g.probability(1) == 0.5);
    CHECK(g.summable());
    CHECK(g.mass_from(1) == doctest::Approx(1.0));
    CHECK(g.mass_from(4) == doctest::Approx(0.125));
    CHECK(!TailRule::constant(0.1).summable());
    CHECK(TailRule::constant(0.0).summable());
    CHECK(std::isinf(TailRule::constant(0.1).mass_from(1)));
    const auto p2 = TailRule::power(1.0, 2.0);
    CHECK(p2.summable());
    CHECK(p2.mass_from(1) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6));
    double exact = 0.0;
    for (int i = 100000; i >= 10; --i)
        exact += 1.0 / (double(i) * i);
    CHECK(p2.mass_from(10) >= exact);
    CHECK(!TailRule::power(1.0, 1.0).summable());
    CHECK_THROWS_AS(TailRule::geometric(3.0, 0.5), Error);
    CHECK_THROWS_AS(TailRule::geometric(1.0, 1.0), Error);
    CHECK_THROWS_AS(TailRule::constant(1.5), Error);
}

TEST_CASE("lane tails interleave level by level")
{
    TailSpec spec{TailRule::geometric(1.0, 0.5),
                  {{"R", {str("A"), std::nullopt}}, {"R", {str("B"), std::nullopt}}},
                  false,
                  0,
                  {}};
    const FactTail t(spec, binary, abcd);
    CHECK(t.lane_count() == 2);
    CHECK(t.fact_at(0) == R(str("A"), nat(1)));
    CHECK(t.fact_at(1) == R(str("B"), nat(1)));
    CHECK(t.fact_at(2) == R(str("A"), nat(2)));
    CHECK(t.probability_at(2) == 0.25);
    CHECK(t.position_of(R(str("B"), nat(2))) == 3u);
    CHECK(!t.position_of(R(str("C"), nat(2))));
    CHECK(t.total_mass() == doctest::Approx(2.0));
    CHECK(t.mass_beyond(2) == doctest::Approx(1.0));
    CHECK(t.mass_beyond(3) == doctest::Approx(0.75));
    for (std::uint64_t i = 0; i + 1 < 50; ++i)
        CHECK(t.probability_at(i) >= t.probability_at(i + 1));
}

TEST_CASE("tail exclusions")
{
    TailSpec spec{TailRule::geometric(1.0, 0.5),
                  {{"R", {str("A"), std::nullopt}}},
                  false,
                  0,
                  {R(str("A"), nat(2)), R(str("Z"), nat(1))}};
    const FactTail t(spec, binary, Universe::naturals({"A", "Z"}));
    CHECK(t.fact_at(0) == R(str("A"), nat(1)));
    CHECK(t.fact_at(1) == R(str("A"), nat(3)));
    CHECK(!t.position_of(R(str("A"), nat(2))));
    CHECK(t.total_mass() == doctest::Approx(0.75));
    CHECK(t.mass_beyond(1) == doctest::Approx(0.25));
}

TEST_CASE("overlapping lanes are rejected")
{
    TailSpec spec{TailRule::geometric(1.0, 0.5),
                  {{"R", {str("A"), std::nullopt}}, {"R", {std::nullopt, nat(3)}}},
                  false,
                  0,
                  {}};
    // R(A, 3) would only overlap if A were a base element
    CHECK_NOTHROW(FactTail(spec, binary, abcd));
    spec.lanes = {{"R", {nat(1), std::nullopt}}, {"R", {std::nullopt, nat(3)}}};
    CHECK_THROWS_AS(FactTail(spec, binary, abcd), Error);
    spec.lanes = {{"R", {std::nullopt, std::nullopt}}, {"R", {nat(2), std::nullopt}}};
    CHECK_THROWS_AS(FactTail(spec, binary, abcd), Error);
    spec.lanes = {{"R", {std::nullopt, nat(1)}}, {"R", {std::nullopt, nat(2)}}};
    CHECK_NOTHROW(FactTail(spec, binary, abcd));
    spec.lanes = {{"R", {str("A"), str("B")}}};
    CHECK_THROWS_AS(FactTail(spec, binary, abcd), Error);
}

TEST_CASE("enumerating tails follow the fact enumeration")
{
    TailSpec spec{TailRule::geometric(1.0, 0.5), {}, true, 2, {}};
    const FactTail t(spec, unary, Universe::naturals());
    CHECK(t.fact_at(0) == U(3));
    CHECK(t.position_of(U(5)) == 2u);
    CHECK(!t.position_of(U(2)));
}

TEST_CASE("assignment indexing")
{
    TailSpec spec{TailRule::geometric(1.0, 0.5), {{"R", {str("A"), std::nullopt}}}, false, 0,
                  {R(str("A"), nat(1))}};
    const FactProbabilityAssignment a(binary, abcd, {{R(str("A"), nat(1)), 0.8}, {R(str("B"), nat(1)), 0.4}}, spec);
    CHECK(a.probability(R(str("A"), nat(1))) == 0.8);
    CHECK(a.probability(R(str("A"), nat(2))) == 0.25);
    CHECK(a.probability(R(str("D"), nat(2))) == 0.0);
    CHECK(a.global_index(R(str("A"), nat(2))) == 2u);
    CHECK(a.fact_at(2) == R(str("A"), nat(2)));
    CHECK(a.total_mass() == doctest::Approx(1.7));
    CHECK(a.mass_beyond(1) == doctest::Approx(0.9));

    CHECK_THROWS_AS(FactProbabilityAssignment(binary, abcd, {{R(str("A"), nat(1)), 0.8}, {R(str("A"), nat(1)), 0.1}}),
                    Error);
    spec.exclude.clear();
    CHECK_THROWS_AS(FactProbabilityAssignment(binary, abcd, {{R(str("A"), nat(1)), 0.8}}, spec), Error);
    CHECK_THROWS_AS(FactProbabilityAssignment(binary, abcd, {{R(str("A"), nat(1)), 1.8}}), Error);
    CHECK_THROWS_AS(FactProbabilityAssignment(binary, abcd, {{R(str("E"), nat(1)), 0.5}}), Error);
}
