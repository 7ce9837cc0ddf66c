#include "ipdb/spec_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ipdb/errors.hpp"

namespace ipdb {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& where, const std::string& what)
{
    throw Error(ErrorKind::Parse, "at " + where + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key))
        bad(where, "missing field '" + key + "'");
    return obj.at(key);
}

double probability_value(const json& j, const std::string& where)
{
    try {
        if (j.is_string())
            return parse_probability_text(j.get<std::string>());
        if (j.is_number())
            return j.get<double>();
    } catch (const Error& e) {
        bad(where, e.what());
    }
    bad(where, "expected a probability as a decimal string or number");
}

Element element_value(const json& j, const std::string& where)
{
    if (j.is_number_unsigned())
        return Element{j.get<std::uint64_t>()};
    if (j.is_string())
        return Element{j.get<std::string>()};
    bad(where, "expected a non-negative integer or a string element");
}

json element_json(const Element& e)
{
    if (const auto* n = std::get_if<std::uint64_t>(&e))
        return *n;
    return std::get<std::string>(e);
}

Fact fact_value(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty() || !j[0].is_string())
        bad(where, "expected a fact such as [\"R\", 1, \"a\"]");
    Fact f{j[0].get<std::string>(), {}};
    for (std::size_t i = 1; i < j.size(); ++i)
        f.args.push_back(element_value(j[i], where + "[" + std::to_string(i) + "]"));
    return f;
}

json fact_json(const Fact& f)
{
    json j = json::array({f.relation});
    for (const auto& a : f.args)
        j.push_back(element_json(a));
    return j;
}

std::vector<Fact> facts_value(const json& j, const std::string& where)
{
    if (!j.is_array())
        bad(where, "expected a list of facts");
    std::vector<Fact> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(fact_value(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

json facts_json(const std::vector<Fact>& facts)
{
    json j = json::array();
    for (const auto& f : facts)
        j.push_back(fact_json(f));
    return j;
}

Schema schema_value(const json& j)
{
    if (!j.is_object())
        bad("schema", "expected an object mapping relation names to arities");
    std::vector<Relation> rels;
    for (const auto& [name, arity] : j.items()) {
        if (!arity.is_number_unsigned())
            bad("schema." + name, "arity must be a non-negative integer");
        rels.push_back({name, arity.get<std::size_t>()});
    }
    try {
        return Schema(std::move(rels));
    } catch (const Error& e) {
        bad("schema", e.what());
    }
}

Universe universe_value(const json& j)
{
    if (!j.is_object())
        bad("universe", "expected an object");
    const std::string kind = field(j, "kind", "universe").get<std::string>();
    std::vector<std::string> constants;
    if (j.contains("constants")) {
        for (const auto& c : j.at("constants")) {
            if (!c.is_string())
                bad("universe.constants", "constants are strings");
            constants.push_back(c.get<std::string>());
        }
    }
    try {
        if (kind == "naturals")
            return Universe::naturals(std::move(constants));
        if (kind == "strings")
            return Universe::strings(field(j, "alphabet", "universe").get<std::string>(), std::move(constants));
    } catch (const Error& e) {
        bad("universe", e.what());
    }
    bad("universe.kind", "expected \"naturals\" or \"strings\"");
}

json universe_json(const Universe& u)
{
    json j;
    j["kind"] = u.kind() == Universe::Kind::naturals ? "naturals" : "strings";
    if (u.kind() == Universe::Kind::strings)
        j["alphabet"] = u.alphabet();
    if (!u.constants().empty())
        j["constants"] = u.constants();
    return j;
}

TailRule rule_value(const json& j)
{
    const std::string rule = field(j, "rule", "tail").get<std::string>();
    const double c = probability_value(field(j, "c", "tail"), "tail.c");
    try {
        if (rule == "geometric")
            return TailRule::geometric(c, probability_value(field(j, "q", "tail"), "tail.q"));
        if (rule == "constant")
            return TailRule::constant(c);
        if (rule == "power")
            return TailRule::power(c, probability_value(field(j, "s", "tail"), "tail.s"));
    } catch (const Error& e) {
        bad("tail", e.what());
    }
    bad("tail.rule", "expected \"geometric\", \"constant\" or \"power\"");
}

std::optional<TailSpec> tail_value(const json& j, bool& exclude_specified)
{
    TailSpec spec;
    spec.rule = rule_value(j);
    const json& lanes = field(j, "lanes", "tail");
    if (lanes.is_string()) {
        if (lanes.get<std::string>() != "all")
            bad("tail.lanes", "expected \"all\" or a list of lanes");
        spec.enumerate_all = true;
        if (j.contains("offset")) {
            if (!j.at("offset").is_number_unsigned())
                bad("tail.offset", "expected a non-negative integer");
            spec.offset = j.at("offset").get<std::uint64_t>();
        }
    } else if (lanes.is_array()) {
        for (std::size_t i = 0; i < lanes.size(); ++i) {
            const std::string where = "tail.lanes[" + std::to_string(i) + "]";
            LanePattern lane{field(lanes[i], "relation", where).get<std::string>(), {}};
            const json& args = field(lanes[i], "args", where);
            if (!args.is_array())
                bad(where + ".args", "expected a list");
            for (std::size_t a = 0; a < args.size(); ++a) {
                if (args[a].is_null())
                    lane.args.emplace_back(std::nullopt);
                else
                    lane.args.emplace_back(element_value(args[a], where + ".args[" + std::to_string(a) + "]"));
            }
            spec.lanes.push_back(std::move(lane));
        }
    } else {
        bad("tail.lanes", "expected \"all\" or a list of lanes");
    }
    exclude_specified = false;
    if (j.contains("exclude")) {
        const json& ex = j.at("exclude");
        if (ex.is_string()) {
            if (ex.get<std::string>() != "specified")
                bad("tail.exclude", "expected \"specified\" or a list of facts");
            exclude_specified = true;
        } else {
            spec.exclude = facts_value(ex, "tail.exclude");
        }
    }
    return spec;
}

json tail_json(const TailSpec& t, bool exclude_specified)
{
    json j;
    const TailRule& r = t.rule;
    switch (r.kind()) {
    case TailRule::Kind::geometric:
        j["rule"] = "geometric";
        j["c"] = format_probability(r.c());
        j["q"] = format_probability(r.parameter());
        break;
    case TailRule::Kind::constant:
        j["rule"] = "constant";
        j["c"] = format_probability(r.c());
        break;
    case TailRule::Kind::power:
        j["rule"] = "power";
        j["c"] = format_probability(r.c());
        j["s"] = format_probability(r.parameter());
        break;
    }
    if (t.enumerate_all) {
        j["lanes"] = "all";
        j["offset"] = t.offset;
    } else {
        json lanes = json::array();
        for (const auto& lane : t.lanes) {
            json args = json::array();
            for (const auto& a : lane.args)
                args.push_back(a ? element_json(*a) : json(nullptr));
            lanes.push_back({{"relation", lane.relation}, {"args", args}});
        }
        j["lanes"] = lanes;
    }
    if (exclude_specified)
        j["exclude"] = "specified";
    else if (!t.exclude.empty())
        j["exclude"] = facts_json(t.exclude);
    return j;
}

std::vector<WeightedFact> head_value(const json& j)
{
    if (!j.is_array())
        bad("head_facts", "expected a list");
    std::vector<WeightedFact> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string where = "head_facts[" + std::to_string(i) + "]";
        out.push_back({fact_value(field(j[i], "fact", where), where + ".fact"),
                       probability_value(field(j[i], "p", where), where + ".p")});
    }
    return out;
}

std::vector<WeightedWorld> worlds_value(const json& j)
{
    if (!j.is_array())
        bad("worlds", "expected a list");
    std::vector<WeightedWorld> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string where = "worlds[" + std::to_string(i) + "]";
        out.push_back({Instance(facts_value(field(j[i], "facts", where), where + ".facts")),
                       probability_value(field(j[i], "p", where), where + ".p")});
    }
    return out;
}

BlockPartition blocks_value(const json& j)
{
    if (j.is_string()) {
        if (j.get<std::string>() != "singleton")
            bad("blocks", "expected \"singleton\", a key projection or explicit blocks");
        return BlockPartition::singletons();
    }
    if (j.is_object() && j.contains("explicit")) {
        const json& list = j.at("explicit");
        if (!list.is_array())
            bad("blocks.explicit", "expected a list of blocks");
        std::vector<std::vector<Fact>> blocks;
        for (std::size_t i = 0; i < list.size(); ++i)
            blocks.push_back(facts_value(list[i], "blocks.explicit[" + std::to_string(i) + "]"));
        try {
            return BlockPartition::explicit_blocks(std::move(blocks));
        } catch (const Error& e) {
            bad("blocks.explicit", e.what());
        }
    }
    if (j.is_object() && j.contains("relation")) {
        const json& key = field(j, "key", "blocks");
        if (!key.is_number_unsigned())
            bad("blocks.key", "expected the number of key attributes");
        return BlockPartition::key_projection(j.at("relation").get<std::string>(), key.get<std::size_t>());
    }
    bad("blocks", "expected \"singleton\", {\"relation\", \"key\"} or {\"explicit\"}");
}

json blocks_json(const BlockPartition& b)
{
    switch (b.kind()) {
    case BlockPartition::Kind::singletons: return "singleton";
    case BlockPartition::Kind::key_projection: return {{"relation", b.relation()}, {"key", b.key_arity()}};
    case BlockPartition::Kind::explicit_listing: {
        json list = json::array();
        for (const auto& block : b.listed_blocks())
            list.push_back(facts_json(block));
        return {{"explicit", list}};
    }
    }
    return nullptr;
}

PdbSpec::Kind kind_value(const json& j)
{
    const std::string k = j.get<std::string>();
    if (k == "ti")
        return PdbSpec::Kind::ti;
    if (k == "bid")
        return PdbSpec::Kind::bid;
    if (k == "finite")
        return PdbSpec::Kind::finite;
    if (k == "completion")
        return PdbSpec::Kind::completion;
    bad("kind", "expected ti, bid, finite or completion");
}

} // namespace

std::string_view kind_name(PdbSpec::Kind kind)
{
    switch (kind) {
    case PdbSpec::Kind::ti: return "ti";
    case PdbSpec::Kind::bid: return "bid";
    case PdbSpec::Kind::finite: return "finite";
    case PdbSpec::Kind::completion: return "completion";
    }
    return "?";
}

std::string format_probability(double p)
{
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p);
    if (ec != std::errc{})
        throw Error(ErrorKind::InvalidArgument, "cannot format number");
    return std::string(buf, end);
}

double parse_probability_text(std::string_view text)
{
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw Error(ErrorKind::Parse, "'" + std::string(text) + "' is not a decimal number");
    return v;
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::InvalidArgument, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void resolve_exclusions(PdbSpec& spec)
{
    if (!spec.exclude_specified || !spec.tail)
        return;
    std::set<Fact> listed;
    for (const auto& wf : spec.head)
        listed.insert(wf.fact);
    if (spec.kind == PdbSpec::Kind::completion)
        for (const auto& w : spec.worlds)
            listed.insert(w.instance.begin(), w.instance.end());
    spec.tail->exclude.assign(listed.begin(), listed.end());
}

PdbSpec parse_spec(std::string_view json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.byte, e.what());
    }
    try {
        PdbSpec spec;
        if (!j.is_object())
            bad("top level", "expected an object");
        spec.kind = kind_value(field(j, "kind", "top level"));
        spec.schema = schema_value(field(j, "schema", "top level"));
        if (j.contains("universe"))
            spec.universe = universe_value(j.at("universe"));
        const bool has_worlds = j.contains("worlds");
        const bool needs_worlds = spec.kind == PdbSpec::Kind::finite || spec.kind == PdbSpec::Kind::completion;
        if (needs_worlds != has_worlds)
            bad("worlds", needs_worlds ? "required for this kind" : "only finite and completion specs list worlds");
        if (has_worlds)
            spec.worlds = worlds_value(j.at("worlds"));
        if (j.contains("head_facts")) {
            if (spec.kind == PdbSpec::Kind::finite)
                bad("head_facts", "finite specs list worlds only");
            spec.head = head_value(j.at("head_facts"));
        }
        if (j.contains("tail") && !j.at("tail").is_null()) {
            if (spec.kind == PdbSpec::Kind::finite)
                bad("tail", "finite specs list worlds only");
            spec.tail = tail_value(j.at("tail"), spec.exclude_specified);
        }
        if (j.contains("blocks")) {
            if (spec.kind != PdbSpec::Kind::bid)
                bad("blocks", "only bid specs have blocks");
            spec.blocks = blocks_value(j.at("blocks"));
        }
        resolve_exclusions(spec);
        return spec;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed spec: ") + e.what());
    }
}

PdbSpec load_spec(const std::filesystem::path& path)
{
    return parse_spec(read_text_file(path));
}

std::string dump_spec(const PdbSpec& spec)
{
    json j;
    j["kind"] = kind_name(spec.kind);
    json schema = json::object();
    for (const auto& r : spec.schema.relations())
        schema[r.name] = r.arity;
    j["schema"] = schema;
    j["universe"] = universe_json(spec.universe);
    if (spec.kind == PdbSpec::Kind::bid)
        j["blocks"] = blocks_json(spec.blocks);
    if (spec.kind == PdbSpec::Kind::finite || spec.kind == PdbSpec::Kind::completion) {
        json worlds = json::array();
        for (const auto& w : spec.worlds)
            worlds.push_back({{"facts", facts_json(w.instance.facts())}, {"p", format_probability(w.probability)}});
        j["worlds"] = worlds;
    }
    if (spec.kind != PdbSpec::Kind::finite) {
        json head = json::array();
        for (const auto& wf : spec.head)
            head.push_back({{"fact", fact_json(wf.fact)}, {"p", format_probability(wf.probability)}});
        j["head_facts"] = head;
        if (spec.tail)
            j["tail"] = tail_json(*spec.tail, spec.exclude_specified);
    }
    return j.dump(2) + "\n";
}

void save_spec(const PdbSpec& spec, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    out << dump_spec(spec);
}

FactProbabilityAssignment assignment_of(const PdbSpec& spec)
{
    if (spec.kind == PdbSpec::Kind::finite)
        throw Error(ErrorKind::InvalidArgument, "finite specs carry no fact probabilities");
    return FactProbabilityAssignment(spec.schema, spec.universe, spec.head, spec.tail);
}

FiniteDiscretePDB worlds_of(const PdbSpec& spec)
{
    if (spec.kind != PdbSpec::Kind::finite && spec.kind != PdbSpec::Kind::completion)
        throw Error(ErrorKind::InvalidArgument, "only finite and completion specs list worlds");
    return FiniteDiscretePDB(spec.schema, spec.universe, spec.worlds);
}

Instance parse_instance(std::string_view json_text, const Schema& schema, const Universe& universe)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.byte, e.what());
    }
    const json& list = j.is_object() ? field(j, "facts", "instance") : j;
    std::vector<Fact> facts = facts_value(list, "instance");
    for (const auto& f : facts)
        check_fact(schema, universe, f);
    return Instance(std::move(facts));
}

Instance load_instance(const std::filesystem::path& path, const Schema& schema, const Universe& universe)
{
    return parse_instance(read_text_file(path), schema, universe);
}

} // namespace ipdb
