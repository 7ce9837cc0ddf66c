#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ipdb/assignment.hpp"
#include "ipdb/bid.hpp"
#include "ipdb/instance.hpp"

namespace ipdb {

/// In-memory form of a PDB spec file.
///
///  - ti: head facts and an optional tail;
///  - bid: the same plus a block partition;
///  - finite: an explicit world list;
///  - completion: original worlds plus fresh head facts and tail.
///
/// A tail may say "exclude": "specified", meaning every fact listed
/// elsewhere in the spec (head facts and, for completions, all facts of
/// the worlds). The resolved list is kept in tail->exclude.
struct PdbSpec {
    enum class Kind { ti, bid, finite, completion };

    Kind kind = Kind::ti;
    Schema schema;
    Universe universe = Universe::naturals();
    std::vector<WeightedFact> head;
    std::optional<TailSpec> tail;
    bool exclude_specified = false;
    BlockPartition blocks = BlockPartition::singletons();
    std::vector<WeightedWorld> worlds;

    friend bool operator==(const PdbSpec&, const PdbSpec&) = default;
};

std::string_view kind_name(PdbSpec::Kind kind);

/// Throws ParseError for malformed JSON and Error(Parse) naming the field
/// for structural problems.
PdbSpec parse_spec(std::string_view json_text);
PdbSpec load_spec(const std::filesystem::path& path);
std::string dump_spec(const PdbSpec& spec);
void save_spec(const PdbSpec& spec, const std::filesystem::path& path);

/// Recomputes tail->exclude from the rest of the spec when
/// exclude_specified is set.
void resolve_exclusions(PdbSpec& spec);

/// Head and tail as an assignment (ti, bid, and the fresh part of a
/// completion).
FactProbabilityAssignment assignment_of(const PdbSpec& spec);
/// The world list (finite, and the original of a completion).
FiniteDiscretePDB worlds_of(const PdbSpec& spec);

/// An instance file holds a JSON array of facts, e.g. [["R", "A", 1]].
Instance parse_instance(std::string_view json_text, const Schema& schema, const Universe& universe);
Instance load_instance(const std::filesystem::path& path, const Schema& schema, const Universe& universe);

/// Shortest decimal string that reads back as the same double.
std::string format_probability(double p);
/// Accepts decimal strings (preferred) and plain numbers.
double parse_probability_text(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

} // namespace ipdb
