#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace xcheck {

enum class EntityType { Person, Org, Location, Date, Event, Object, Misc };

std::string_view to_string(EntityType type);
// Accepts the canonical upper-case names plus common NER aliases
// (PER, ORGANIZATION, LOC, GPE, ...). Returns nullopt for anything else.
std::optional<EntityType> parse_entity_type(std::string_view text);

// Hierarchical location. A missing level is UNK (nullopt).
struct LocationData {
  std::optional<std::string> city;
  std::optional<std::string> state;
  std::optional<std::string> country;

  bool all_unknown() const { return !city && !state && !country; }
  bool operator==(const LocationData&) const = default;
};

// Hierarchical date: day-of-month, month, year. A missing level is UNK.
struct DateData {
  std::optional<int> day;
  std::optional<int> month;
  std::optional<int> year;

  bool all_unknown() const { return !day && !month && !year; }
  bool operator==(const DateData&) const = default;
};

// Trims, collapses inner whitespace and maps UNK spellings ("unk", "unknown",
// "n/a", "") to nullopt. Idempotent.
LocationData normalize(LocationData loc);

// Two hierarchies are compatible when every level known on both sides agrees.
// UNK is a wildcard. String levels compare case-insensitively.
bool compatible(const LocationData& a, const LocationData& b);
bool compatible(const DateData& a, const DateData& b);

// "Lostwithiel, Cornwall, UK" / "UNK, 6, 2013" style rendering.
std::string format_hierarchy(const LocationData& loc);
std::string format_hierarchy(const DateData& date);

struct EntityNode {
  std::string id;
  std::string name;
  EntityType type = EntityType::Misc;
  std::string description;
  std::optional<LocationData> location;
  std::optional<DateData> date;

  bool operator==(const EntityNode&) const = default;
};

struct RelationEdge {
  std::string src;
  std::string dst;
  std::string action;              // extractive, verbatim from the text
  std::string action_description;  // abstractive paraphrase

  bool operator==(const RelationEdge&) const = default;
};

struct ERGraph {
  std::vector<EntityNode> nodes;
  std::vector<RelationEdge> edges;
  std::string source_text_hash;

  const EntityNode* find_node(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;

  bool operator==(const ERGraph&) const = default;
};

struct MaskedEdge {
  std::string src;
  std::string dst;
  bool operator==(const MaskedEdge&) const = default;
};

// Claim topology handed to the conditional evidence-graph builder: all claim
// nodes plus each claim edge with its action withheld.
struct GraphTemplate {
  std::vector<EntityNode> required_nodes;
  std::vector<MaskedEdge> masked_edges;
};

struct Violation {
  std::string subject;  // node id, "src->dst" edge key, or "graph"
  std::string rule;
  std::string message;
};

std::vector<Violation> validate_graph(const ERGraph& g);

// Parses one LLM reply into a validated graph. Markdown fences and prose
// around the JSON object are tolerated. Throws Error{Malformed} when no graph
// object can be read and Error{InvariantViolation} naming the first broken
// rule otherwise.
ERGraph parse_graph(std::string_view raw, std::string_view source_text = {});

// Same as parse_graph but from an already-decoded JSON value.
ERGraph graph_from_json(const nlohmann::json& j, std::string_view source_text = {});

nlohmann::json to_json(const ERGraph& g);
nlohmann::json to_json(const EntityNode& n);
nlohmann::json to_json(const LocationData& loc);
nlohmann::json to_json(const DateData& date);
std::string serialize_graph(const ERGraph& g);

ERGraph load_graph_file(const std::filesystem::path& path);

// Throws Error{EmptyGraph} when the claim has no edges.
GraphTemplate make_template(const ERGraph& claim);
nlohmann::json to_json(const GraphTemplate& t);

// 64-bit FNV-1a over the bytes, as 16 lower-case hex digits.
std::string text_digest(std::string_view text);

// Lower-case ASCII, non-alphanumerics collapsed to '_'.
std::string slugify(std::string_view name);

// Node text handed to the embedder: "name. description".
std::string node_text(const EntityNode& n);

}  // namespace xcheck
