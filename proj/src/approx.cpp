#include "ipdb/approx.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "ipdb/errors.hpp"
#include "ipdb/evaluator.hpp"

namespace ipdb {

namespace {

constexpr std::uint64_t grounding_cap = std::uint64_t{1} << 20;

void require_epsilon(double epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1/2)");
}

void require_sentence(const Formula& f)
{
    const auto info = analyze(f);
    if (!info.free_variables.empty())
        throw Error(ErrorKind::InvalidArgument, "sentence expected; free variable " + info.free_variables.front());
}

TruncationCertificate certify(const FactProbabilityAssignment& a, double epsilon)
{
    require_epsilon(epsilon);
    const std::uint64_t head = a.head().size();
    const FactTail* tail = a.tail();
    if (!tail)
        return {head, 0.0, 0.0, epsilon};
    if (!tail->summable())
        throw Error(ErrorKind::DivergentAssignment, "cannot certify a truncation of a divergent tail");

    auto meets = [&](std::uint64_t m) {
        if (tail->probability_at(m) > 0.5)
            return false;
        const double alpha = 1.5 * tail->mass_beyond(m);
        return std::exp(alpha) <= 1.0 + epsilon && std::exp(-alpha) >= 1.0 - epsilon;
    };
    std::uint64_t lo = 0, hi = 0;
    if (!meets(0)) {
        hi = 1;
        while (!meets(hi)) {
            lo = hi;
            if (hi > (std::uint64_t{1} << 60))
                throw Error(ErrorKind::CapExceeded, "no certified truncation found");
            hi *= 2;
        }
        // meets(hi) and !meets(lo)
        while (hi - lo > 1) {
            const std::uint64_t mid = lo + (hi - lo) / 2;
            (meets(mid) ? hi : lo) = mid;
        }
    }
    const double tail_sum = tail->mass_beyond(hi);
    return {head + hi, 1.5 * tail_sum, tail_sum, epsilon};
}

std::vector<WeightedFact> first_facts(const FactProbabilityAssignment& a, std::uint64_t n)
{
    std::uint64_t available = a.head().size();
    if (a.tail())
        available = std::max(available, n);
    n = std::min(n, available);
    std::vector<WeightedFact> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i)
        out.push_back({a.fact_at(i), a.probability_at(i)});
    return out;
}

// Tuples over ids [0, width) in lexicographic order, passed to `visit`.
template <class Visit>
void for_each_tuple(std::size_t k, std::uint32_t width, Visit visit)
{
    if (k > 0 && width == 0)
        return;
    std::vector<std::uint32_t> t(k, 0);
    for (;;) {
        visit(t);
        std::size_t i = 0;
        while (i < k && ++t[k - 1 - i] == width)
            t[k - 1 - i++] = 0;
        if (i == k)
            return;
    }
}

TupleApproximation approximate_tuples(const TruncatedModel& m, const TruncationCertificate& cert, const Formula& f,
                                      const std::optional<std::vector<std::string>>& order, std::size_t cap)
{
    const FormulaInfo info = analyze(f);
    const std::vector<std::string> vars = order ? *order : info.free_variables;
    for (const auto& v : info.free_variables)
        if (std::find(vars.begin(), vars.end(), v) == vars.end())
            throw Error(ErrorKind::InvalidArgument, "column order misses free variable " + v);
    const std::size_t k = vars.size();
    if (k == 0)
        throw Error(ErrorKind::InvalidArgument, "formula has no free variables; use the Boolean approximation");

    std::set<Element> core = info.constants;
    for (const auto& w : m.base)
        for (const auto& fact : w.instance)
            core.insert(fact.args.begin(), fact.args.end());
    for (const auto& wf : m.independent)
        core.insert(wf.fact.args.begin(), wf.fact.args.end());
    std::vector<Element> elements(core.begin(), core.end());
    const std::vector<Element> probes = fresh_elements(m.universe, core, k);
    elements.insert(elements.end(), probes.begin(), probes.end());

    const auto c = static_cast<std::uint32_t>(core.size());
    double count = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        count *= static_cast<double>(c + k);
    if (count > static_cast<double>(grounding_cap))
        throw CapExceededError(static_cast<std::size_t>(count), grounding_cap, "groundings of the answer variables");

    std::vector<std::vector<Element>> valuations;
    std::vector<char> is_probe;
    for_each_tuple(k, c + static_cast<std::uint32_t>(k), [&](const std::vector<std::uint32_t>& t) {
        // probe elements must appear in order of first use
        std::uint32_t next = c;
        bool probe = false;
        for (auto x : t) {
            if (x < c)
                continue;
            probe = true;
            if (x > next)
                return;
            if (x == next)
                ++next;
        }
        std::vector<Element> row;
        for (auto x : t)
            row.push_back(elements[x]);
        valuations.push_back(std::move(row));
        is_probe.push_back(probe);
    });

    const std::vector<double> probs = model_query_probs(m, f, vars, valuations, cap);
    TupleApproximation out{vars, {}, 0.0, cert};
    double worst = -1.0;
    for (std::size_t i = 0; i < valuations.size(); ++i) {
        if (is_probe[i])
            worst = std::max(worst, probs[i]);
        else
            out.probabilities.emplace(valuations[i], probs[i]);
    }
    out.residual_bound = worst < 0.0 ? 0.0 : std::min(1.0, worst + cert.epsilon);
    return out;
}

} // namespace

std::size_t world_cap()
{
    if (const char* env = std::getenv("PDB_WORLD_CAP")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 62)
            return v;
    }
    return default_world_cap;
}

TruncationCertificate choose_truncation(const TIPdb& t, double epsilon)
{
    return certify(t.assignment(), epsilon);
}

TruncationCertificate choose_truncation(const Completion& c, double epsilon)
{
    return certify(c.tail().assignment(), epsilon);
}

TruncatedModel truncate(const TIPdb& t, std::uint64_t n)
{
    return {t.assignment().universe(), {{Instance{}, 1.0}}, first_facts(t.assignment(), n)};
}

TruncatedModel truncate(const Completion& c, std::uint64_t n)
{
    return {c.original().universe(), c.original().worlds(), first_facts(c.tail().assignment(), n)};
}

std::vector<double> model_query_probs(const TruncatedModel& m, const Formula& f,
                                      const std::vector<std::string>& variables,
                                      const std::vector<std::vector<Element>>& valuations, std::size_t cap)
{
    const std::set<std::string> rels = relations_of(f);
    auto relevant = [&](const Fact& fact) { return rels.contains(fact.relation); };

    std::vector<WeightedFact> indep;
    for (const auto& wf : m.independent)
        if (relevant(wf.fact))
            indep.push_back(wf);
    const std::size_t k = indep.size();
    if (k > cap)
        throw CapExceededError(k, cap, std::to_string(k) + " independent facts to enumerate");

    // project base worlds onto the relations of f
    std::map<Instance, double> projected;
    std::set<Fact> base_facts;
    for (const auto& w : m.base) {
        std::vector<Fact> kept;
        for (const auto& fact : w.instance)
            if (relevant(fact))
                kept.push_back(fact);
        base_facts.insert(kept.begin(), kept.end());
        projected[Instance(std::move(kept))] += w.probability;
    }

    std::vector<Fact> candidates(base_facts.begin(), base_facts.end());
    for (const auto& wf : indep) {
        if (base_facts.contains(wf.fact))
            throw Error(ErrorKind::OverlappingFacts, to_string(wf.fact) + " is both a base and an independent fact");
        candidates.push_back(wf.fact);
    }
    const std::size_t nb = base_facts.size();

    const FormulaInfo info = analyze(f);
    std::set<Element> core = info.constants;
    for (const auto& fact : candidates)
        core.insert(fact.args.begin(), fact.args.end());
    for (const auto& v : valuations)
        core.insert(v.begin(), v.end());
    std::vector<Element> domain(core.begin(), core.end());
    const auto generics = fresh_elements(m.universe, core, info.rank);
    domain.insert(domain.end(), generics.begin(), generics.end());

    GroundEvaluator ev(f, variables, candidates, domain);
    std::vector<std::vector<std::uint32_t>> ids;
    ids.reserve(valuations.size());
    for (const auto& v : valuations) {
        if (v.size() != variables.size())
            throw Error(ErrorKind::InvalidArgument, "valuation size differs from the variable list");
        std::vector<std::uint32_t> row;
        for (const auto& e : v)
            row.push_back(*ev.id_of(e));
        ids.push_back(std::move(row));
    }

    // split-table weights over the independent facts
    const std::size_t low_bits = k / 2, high_bits = k - low_bits;
    auto table = [&](std::size_t from, std::size_t bits) {
        std::vector<double> w(std::size_t{1} << bits, 1.0);
        for (std::size_t j = 0; j < bits; ++j) {
            const double p = indep[from + j].probability;
            const std::size_t half = std::size_t{1} << j;
            for (std::size_t mask = 0; mask < half; ++mask) {
                w[mask | half] = w[mask] * p;
                w[mask] *= 1.0 - p;
            }
        }
        return w;
    };
    const std::vector<double> wl = table(0, low_bits);
    const std::vector<double> wh = table(low_bits, high_bits);

    std::vector<CompensatedSum> acc(valuations.size());
    CompensatedSum total;
    std::vector<char> present(candidates.size(), 0);
    for (const auto& [world, pb] : projected) {
        if (pb == 0.0)
            continue;
        for (std::size_t i = 0; i < nb; ++i)
            present[i] = world.contains(candidates[i]);
        for (std::size_t hi = 0; hi < wh.size(); ++hi) {
            if (wh[hi] == 0.0)
                continue;
            for (std::size_t j = 0; j < high_bits; ++j)
                present[nb + low_bits + j] = static_cast<char>(hi >> j & 1U);
            for (std::size_t lo = 0; lo < wl.size(); ++lo) {
                const double w = pb * wh[hi] * wl[lo];
                if (w == 0.0)
                    continue;
                for (std::size_t j = 0; j < low_bits; ++j)
                    present[nb + j] = static_cast<char>(lo >> j & 1U);
                total.add(w);
                for (std::size_t v = 0; v < ids.size(); ++v)
                    if (ev.evaluate(present, ids[v]))
                        acc[v].add(w);
            }
        }
    }
    const double mass = total.value();
    if (!(mass > 0.0))
        throw Error(ErrorKind::InvalidArgument, "truncated model carries no probability mass");
    std::vector<double> out;
    out.reserve(acc.size());
    for (const auto& a : acc)
        out.push_back(std::min(1.0, a.value() / mass));
    return out;
}

double conditional_query_prob(const TIPdb& t, const Formula& f, std::uint64_t n, std::size_t cap)
{
    require_sentence(f);
    return model_query_probs(truncate(t, n), f, {}, {{}}, cap).front();
}

double conditional_query_prob(const Completion& c, const Formula& f, std::uint64_t n, std::size_t cap)
{
    require_sentence(f);
    return model_query_probs(truncate(c, n), f, {}, {{}}, cap).front();
}

BooleanApproximation approx_boolean(const TIPdb& t, const Formula& f, double epsilon, std::size_t cap)
{
    require_sentence(f);
    const auto cert = choose_truncation(t, epsilon);
    return {conditional_query_prob(t, f, cert.n, cap), cert};
}

BooleanApproximation approx_boolean(const Completion& c, const Formula& f, double epsilon, std::size_t cap)
{
    require_sentence(f);
    const auto cert = choose_truncation(c, epsilon);
    return {conditional_query_prob(c, f, cert.n, cap), cert};
}

TupleApproximation approx_nonboolean(const TIPdb& t, const Formula& f, double epsilon,
                                     const std::optional<std::vector<std::string>>& order, std::size_t cap)
{
    const auto cert = choose_truncation(t, epsilon);
    return approximate_tuples(truncate(t, cert.n), cert, f, order, cap);
}

TupleApproximation approx_nonboolean(const Completion& c, const Formula& f, double epsilon,
                                     const std::optional<std::vector<std::string>>& order, std::size_t cap)
{
    const auto cert = choose_truncation(c, epsilon);
    return approximate_tuples(truncate(c, cert.n), cert, f, order, cap);
}

} // namespace ipdb
