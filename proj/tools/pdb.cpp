// pdb: command-line front-end for building, checking, querying and sampling
// probabilistic databases described by JSON spec files.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <variant>

#include <CLI11.hpp>

#include "ipdb/approx.hpp"
#include "ipdb/bid.hpp"
#include "ipdb/completion.hpp"
#include "ipdb/errors.hpp"
#include "ipdb/evaluator.hpp"
#include "ipdb/oracle.hpp"
#include "ipdb/parser.hpp"
#include "ipdb/spec_io.hpp"
#include "ipdb/ti.hpp"

using namespace ipdb;

namespace {

enum Exit { ok = 0, usage = 1, validation = 2, capability = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Model = std::variant<TIPdb, BIDPdb, FiniteDiscretePDB, Completion>;

Model build(const PdbSpec& spec)
{
    switch (spec.kind) {
    case PdbSpec::Kind::ti: return ti_construct(assignment_of(spec));
    case PdbSpec::Kind::bid: return bid_construct(spec.blocks, assignment_of(spec));
    case PdbSpec::Kind::finite: return worlds_of(spec);
    case PdbSpec::Kind::completion: return complete(worlds_of(spec), assignment_of(spec));
    }
    throw Error(ErrorKind::InvalidArgument, "unknown spec kind");
}

std::string fixed3(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

std::string interval_text(const ProbabilityInterval& iv)
{
    if (iv.is_point())
        return format_probability(iv.lo);
    return "[" + format_probability(iv.lo) + ", " + format_probability(iv.hi) + "]";
}

double expected_size_of(const Model& m)
{
    return std::visit(
        [](const auto& x) -> double {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, FiniteDiscretePDB>)
                return expected_size(x);
            else if constexpr (std::is_same_v<T, Completion>)
                return expected_size(x.original()) + x.tail().total_mass();
            else
                return x.total_mass();
        },
        m);
}

void warn_if_renormalized(const FiniteDiscretePDB& p)
{
    if (p.renormalized() && std::abs(p.input_mass() - 1.0) > 1e-9)
        std::cerr << "warning: world probabilities summed to " << format_probability(p.input_mass())
                  << "; renormalized\n";
}

int cmd_validate(const std::string& path)
{
    const PdbSpec spec = load_spec(path);
    const Model m = build(spec);
    const std::string size = fixed3(expected_size_of(m));
    if (const auto* t = std::get_if<TIPdb>(&m)) {
        std::cout << "TI, total mass " << fixed3(t->total_mass()) << ", convergent, expected size " << size << "\n";
    } else if (const auto* b = std::get_if<BIDPdb>(&m)) {
        std::cout << "BID, total mass " << fixed3(b->total_mass()) << ", convergent, expected size " << size << ", "
                  << b->blocks().size() << " materialized blocks\n";
    } else if (const auto* f = std::get_if<FiniteDiscretePDB>(&m)) {
        warn_if_renormalized(*f);
        std::cout << "finite, " << f->worlds().size() << " worlds, expected size " << size << "\n";
    } else {
        const auto& c = std::get<Completion>(m);
        warn_if_renormalized(c.original());
        std::cout << "completion, " << c.original().worlds().size() << " original worlds, tail mass "
                  << fixed3(c.tail().total_mass()) << ", convergent, expected size " << size << "\n";
    }
    return ok;
}

int cmd_expected_size(const std::string& path)
{
    std::cout << format_probability(expected_size_of(build(load_spec(path)))) << "\n";
    return ok;
}

int cmd_prob(const std::string& path, const std::string& instance_path)
{
    const PdbSpec spec = load_spec(path);
    const Model m = build(spec);
    const Instance d = load_instance(instance_path, spec.schema, spec.universe);
    ProbabilityInterval p;
    if (const auto* t = std::get_if<TIPdb>(&m))
        p = ti_instance_prob(*t, d);
    else if (const auto* b = std::get_if<BIDPdb>(&m))
        p = bid_instance_prob(*b, d);
    else if (const auto* f = std::get_if<FiniteDiscretePDB>(&m))
        p = ProbabilityInterval::point(f->probability(d));
    else
        p = completion_instance_prob(std::get<Completion>(m), d);
    std::cout << interval_text(p) << "\n";
    return ok;
}

std::string certificate_text(const TruncationCertificate& c)
{
    return "certificate: n = " + std::to_string(c.n) + ", alpha_n = " + format_probability(c.alpha_n) +
           ", tail_sum = " + format_probability(c.tail_sum) + ", epsilon = " + format_probability(c.epsilon);
}

int cmd_query(const std::string& path, const std::string& query_path, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw UsageError("--epsilon must lie in (0, 1/2)");
    const PdbSpec spec = load_spec(path);
    const Model m = build(spec);
    const Formula f = parse_formula(read_text_file(query_path), spec.schema);
    const auto* t = std::get_if<TIPdb>(&m);
    const auto* c = std::get_if<Completion>(&m);
    if (!t && !c)
        throw Error(ErrorKind::Unsupported, "query evaluation needs a ti or completion spec");

    if (analyze(f).free_variables.empty()) {
        const auto r = t ? approx_boolean(*t, f, epsilon) : approx_boolean(*c, f, epsilon);
        std::cout << "p = " << format_probability(r.p) << "\n" << certificate_text(r.certificate) << "\n";
        return ok;
    }
    const auto r = t ? approx_nonboolean(*t, f, epsilon) : approx_nonboolean(*c, f, epsilon);
    std::string header;
    for (const auto& v : r.variables)
        header += v + "\t";
    std::cout << header << "p\n";
    for (const auto& [tuple, p] : r.probabilities) {
        for (const auto& e : tuple)
            std::cout << to_string(e) << "\t";
        std::cout << format_probability(p) << "\n";
    }
    std::cout << "other tuples: p <= " << format_probability(r.residual_bound) << "\n"
              << certificate_text(r.certificate) << "\n";
    return ok;
}

Instance sample_finite(const FiniteDiscretePDB& p, Rng& rng)
{
    double u = unit_uniform(rng);
    const WeightedWorld* chosen = nullptr;
    for (const auto& w : p.worlds()) {
        if (w.probability > 0.0)
            chosen = &w;
        if (u < w.probability)
            break;
        u -= w.probability;
    }
    return chosen ? chosen->instance : Instance{};
}

int cmd_sample(const std::string& path, std::uint64_t n, double delta, std::uint64_t seed)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw UsageError("--delta must lie in (0, 1)");
    const Model m = build(load_spec(path));
    Rng rng(seed);
    std::string out;
    for (std::uint64_t i = 0; i < n; ++i) {
        Instance d;
        if (const auto* t = std::get_if<TIPdb>(&m))
            d = ti_sample(*t, rng, delta);
        else if (const auto* b = std::get_if<BIDPdb>(&m))
            d = bid_sample(*b, rng, delta);
        else if (const auto* f = std::get_if<FiniteDiscretePDB>(&m))
            d = sample_finite(*f, rng);
        else
            d = completion_sample(std::get<Completion>(m), rng, delta);
        out += to_string(d);
        out += '\n';
        if (out.size() > (1U << 16)) {
            std::fwrite(out.data(), 1, out.size(), stdout);
            out.clear();
        }
    }
    std::fwrite(out.data(), 1, out.size(), stdout);
    return ok;
}

// Every subset of the head facts with its probability.
std::vector<WeightedWorld> expand_head(const PdbSpec& spec)
{
    if (spec.tail)
        throw Error(ErrorKind::InvalidArgument, "base must be finite; its spec has an infinite tail");
    if (spec.head.size() > closure_fact_cap)
        throw CapExceededError(spec.head.size(), closure_fact_cap, "expanding the base into worlds");
    const TIPdb t = ti_construct(assignment_of(spec));
    std::vector<WeightedWorld> worlds;
    const std::uint64_t count = std::uint64_t{1} << spec.head.size();
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        std::vector<Fact> facts;
        for (std::size_t i = 0; i < spec.head.size(); ++i)
            if (mask >> i & 1U)
                facts.push_back(spec.head[i].fact);
        Instance d(std::move(facts));
        const double p = ti_instance_prob(t, d).midpoint();
        worlds.push_back({std::move(d), p});
    }
    return worlds;
}

int cmd_complete(const std::string& base_path, const std::string& tail_path, std::optional<double> c,
                 const std::string& out_path)
{
    const PdbSpec base = load_spec(base_path);
    const PdbSpec fresh = load_spec(tail_path);
    if (fresh.kind != PdbSpec::Kind::ti)
        throw Error(ErrorKind::InvalidArgument, "tail spec must be of kind ti");
    if (!(fresh.schema == base.schema) || !(fresh.universe == base.universe))
        throw Error(ErrorKind::SchemaMismatch, "base and tail specs use different schemas or universes");

    std::vector<WeightedWorld> worlds;
    if (base.kind == PdbSpec::Kind::finite)
        worlds = base.worlds;
    else if (base.kind == PdbSpec::Kind::ti)
        worlds = expand_head(base);
    else
        throw Error(ErrorKind::InvalidArgument, "base must be a finite or head-only ti spec");

    FiniteDiscretePDB original(base.schema, base.universe, std::move(worlds));
    if (c) {
        original = closure_extend(original, *c);
    } else if (auto missing = find_missing_subinstance(original)) {
        throw Error(ErrorKind::NotClosed, "base is not closed under subsets and unions; missing " +
                                              to_string(*missing) + " (pass --c to extend it)");
    }

    PdbSpec out;
    out.kind = PdbSpec::Kind::completion;
    out.schema = base.schema;
    out.universe = base.universe;
    out.worlds = original.worlds();
    out.head = fresh.head;
    out.tail = fresh.tail;
    out.exclude_specified = fresh.exclude_specified;
    resolve_exclusions(out);
    const Completion completion = complete(worlds_of(out), assignment_of(out));
    save_spec(out, out_path);
    std::cout << "wrote " << out_path << ": completion, " << out.worlds.size() << " original worlds, tail mass "
              << fixed3(completion.tail().total_mass()) << "\n";
    return ok;
}

int cmd_oracle_compare(const std::string& path, const std::string& query_path, bool perturb)
{
    PdbSpec spec = load_spec(path);
    if (spec.kind != PdbSpec::Kind::ti || spec.tail)
        throw Error(ErrorKind::Unsupported, "oracle comparison needs a head-only ti spec");
    if (spec.head.size() > oracle_fact_cap)
        throw CapExceededError(spec.head.size(), oracle_fact_cap, "oracle comparison");
    const std::vector<WeightedWorld> truth = enumerate_worlds(spec.head);
    if (perturb && !spec.head.empty()) {
        double& p = spec.head.front().probability;
        p = p < 0.5 ? p + 1e-6 : p - 1e-6;
    }
    const TIPdb t = ti_construct(assignment_of(spec));

    double worst = 0.0;
    for (const auto& w : truth)
        worst = std::max(worst, std::abs(ti_instance_prob(t, w.instance).midpoint() - w.probability));
    for (const auto& wf : spec.head)
        worst = std::max(worst, std::abs(t.assignment().probability(wf.fact) - marginal(truth, wf.fact)));
    std::cout << "worlds compared: " << truth.size() << "\n";
    if (!query_path.empty()) {
        const Formula f = parse_formula(read_text_file(query_path), spec.schema);
        const double engine = conditional_query_prob(t, f, spec.head.size());
        const double oracle =
            exact_event_prob(truth, [&](const Instance& d) { return eval_boolean(d, f, spec.universe); });
        worst = std::max(worst, std::abs(engine - oracle));
        std::cout << "query: engine " << format_probability(engine) << ", oracle " << format_probability(oracle)
                  << "\n";
    }
    std::cout << "max abs diff = " << format_probability(worst) << "\n";
    if (worst > 1e-9) {
        std::cerr << "error: engine and oracle disagree beyond 1e-9\n";
        return validation;
    }
    return ok;
}

int exit_code(ErrorKind k)
{
    switch (k) {
    case ErrorKind::CapExceeded:
    case ErrorKind::Unsupported: return capability;
    default: return validation;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Probabilistic databases over countable universes"};
    app.require_subcommand(1);

    std::string spec, instance, query, base, tail, out;
    double epsilon = 0.0, delta = 1e-9;
    std::uint64_t n = 0, seed = 0;
    std::optional<double> c;
    bool perturb = false;

    auto* validate = app.add_subcommand("validate", "Check a spec and report mass and convergence");
    validate->add_option("spec", spec)->required();
    auto* esize = app.add_subcommand("expected-size", "Print the expected instance size");
    esize->add_option("spec", spec)->required();
    auto* prob = app.add_subcommand("prob", "Probability of a single instance");
    prob->add_option("--instance", instance, "JSON list of facts")->required();
    prob->add_option("spec", spec)->required();
    auto* q = app.add_subcommand("query", "Approximate a first-order query probability");
    q->add_option("--epsilon", epsilon, "additive error, 0 < E < 1/2")->required();
    q->add_option("--query", query, "file holding the formula")->required();
    q->add_option("spec", spec)->required();
    auto* sample = app.add_subcommand("sample", "Draw instances, one per line");
    sample->add_option("--n", n)->required();
    sample->add_option("--delta", delta, "total-variation tolerance")->capture_default_str();
    sample->add_option("--seed", seed)->capture_default_str();
    sample->add_option("spec", spec)->required();
    auto* comp = app.add_subcommand("complete", "Complete a finite base PDB by independent fresh facts");
    comp->add_option("base", base)->required();
    comp->add_option("tail", tail)->required();
    comp->add_option("--c", c, "weight kept by the base when it must be closed first");
    comp->add_option("-o,--output", out)->required();
    auto* oc = app.add_subcommand("oracle-compare", "Compare engine probabilities with brute force");
    oc->add_option("spec", spec)->required();
    oc->add_option("--query", query, "file holding a sentence");
    oc->add_flag("--perturb", perturb)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*validate)
            return cmd_validate(spec);
        if (*esize)
            return cmd_expected_size(spec);
        if (*prob)
            return cmd_prob(spec, instance);
        if (*q)
            return cmd_query(spec, query, epsilon);
        if (*sample)
            return cmd_sample(spec, n, delta, seed);
        if (*comp)
            return cmd_complete(base, tail, c, out);
        if (*oc)
            return cmd_oracle_compare(spec, query, perturb);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return usage;
    } catch (const CapExceededError& e) {
        std::cerr << "error: CapExceeded: " << e.what() << " (needs " << e.required() << ", cap " << e.cap()
                  << "; set PDB_WORLD_CAP or relax the tolerance)\n";
        return capability;
    } catch (const Error& e) {
        std::cerr << "error: " << error_name(e.kind()) << ": " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return validation;
    }
    return usage;
}
