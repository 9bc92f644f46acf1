#include "xcheck/ergraph.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "xcheck/error.hpp"
#include "xcheck/strings.hpp"

namespace xcheck {

using nlohmann::json;

namespace {

constexpr std::string_view kUnk = "UNK";

bool is_unk_spelling(std::string_view s) {
  auto l = str::lower(str::trim(s));
  return l.empty() || l == "unk" || l == "unknown" || l == "n/a" || l == "na" || l == "none" ||
         l == "null" || l == "-";
}

std::optional<std::string> normalize_level(const std::optional<std::string>& level) {
  if (!level || is_unk_spelling(*level)) return std::nullopt;
  return str::squash(*level);
}

std::optional<int> parse_int(std::string_view s) {
  s = str::trim(s);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<int> month_from_name(std::string_view s) {
  static constexpr std::array<std::string_view, 12> names = {
      "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  auto l = str::lower(str::trim(s));
  if (l.size() < 3) return std::nullopt;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (l.compare(0, 3, names[i]) == 0) return static_cast<int>(i + 1);
  }
  return std::nullopt;
}

// "5th" -> 5
std::optional<int> parse_ordinal(std::string_view s) {
  s = str::trim(s);
  for (std::string_view suffix : {"st", "nd", "rd", "th"}) {
    if (s.size() > suffix.size() && str::lower(s.substr(s.size() - suffix.size())) == suffix) {
      s.remove_suffix(suffix.size());
      break;
    }
  }
  return parse_int(s);
}

[[noreturn]] void malformed(const std::string& msg) { throw Error(ErrorCode::Malformed, msg); }
[[noreturn]] void violation(const std::string& msg) {
  throw Error(ErrorCode::InvariantViolation, msg);
}

std::optional<std::string> level_from_json(const json& v, const char* what) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) malformed(std::string("location level '") + what + "' must be a string");
  return v.get<std::string>();
}

LocationData location_from_string(std::string_view text) {
  auto parts = str::split(text, ',');
  LocationData loc;
  switch (parts.size()) {
    case 1: loc.country = parts[0]; break;
    case 2:
      loc.city = parts[0];
      loc.country = parts[1];
      break;
    case 3:
      loc.city = parts[0];
      loc.state = parts[1];
      loc.country = parts[2];
      break;
    default: violation("location '" + std::string(text) + "' has more than 3 hierarchy levels");
  }
  return normalize(loc);
}

LocationData location_from_json(const json& v) {
  if (v.is_string()) return location_from_string(v.get<std::string>());
  if (v.is_array()) {
    if (v.size() != 3) malformed("location_data array must have 3 entries (city, state, country)");
    return normalize({level_from_json(v[0], "city"), level_from_json(v[1], "state"),
                      level_from_json(v[2], "country")});
  }
  if (!v.is_object()) malformed("location_data must be an object");
  auto get = [&](const char* key) -> std::optional<std::string> {
    auto it = v.find(key);
    if (it == v.end()) return std::nullopt;
    return level_from_json(*it, key);
  };
  return normalize({get("city"), get("state"), get("country")});
}

std::optional<int> date_level_from_json(const json& v, bool is_month) {
  if (v.is_null()) return std::nullopt;
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number()) malformed("date levels must be integers");
  if (!v.is_string()) malformed("date levels must be integers or strings");
  auto s = v.get<std::string>();
  if (is_unk_spelling(s)) return std::nullopt;
  if (auto n = parse_ordinal(s)) return n;
  if (is_month) {
    if (auto m = month_from_name(s)) return m;
  }
  malformed("unreadable date level '" + s + "'");
}

DateData date_from_string(std::string_view text) {
  text = str::trim(text);
  DateData d;
  auto commas = str::split(text, ',');
  if (commas.size() == 3) {
    // positional: day, month, year
    auto level = [](const std::string& s, bool is_month) -> std::optional<int> {
      if (is_unk_spelling(s)) return std::nullopt;
      if (auto n = parse_ordinal(s)) return n;
      if (is_month) return month_from_name(s);
      return std::nullopt;
    };
    d.day = level(commas[0], false);
    d.month = level(commas[1], true);
    d.year = level(commas[2], false);
    return d;
  }
  // ISO: YYYY, YYYY-MM, YYYY-MM-DD
  auto dashes = str::split(text, '-');
  if (!dashes.empty() && dashes[0].size() == 4 && parse_int(dashes[0]) && dashes.size() <= 3) {
    bool all_numeric = true;
    for (const auto& p : dashes) all_numeric = all_numeric && parse_int(p).has_value();
    if (all_numeric) {
      d.year = parse_int(dashes[0]);
      if (dashes.size() > 1) d.month = parse_int(dashes[1]);
      if (dashes.size() > 2) d.day = parse_int(dashes[2]);
      return d;
    }
  }
  // Free form: "June 5 2013", "5th of June, 2013", "Wednesday 5 June".
  std::string cleaned(text);
  for (char& c : cleaned) {
    if (c == ',' || c == '.') c = ' ';
  }
  std::istringstream in(cleaned);
  std::string tok;
  while (in >> tok) {
    // Weekday names never share a 3-letter prefix with a month, so they fall
    // through and are ignored.
    if (auto m = month_from_name(tok); m && !d.month && !parse_int(tok)) {
      d.month = m;
      continue;
    }
    if (auto n = parse_ordinal(tok)) {
      if (tok.size() == 4 && !d.year) {
        d.year = n;
      } else if (!d.day && *n >= 1 && *n <= 31) {
        d.day = n;
      }
    }
  }
  return d;
}

DateData date_from_json(const json& v) {
  if (v.is_string()) return date_from_string(v.get<std::string>());
  if (v.is_array()) {
    if (v.size() != 3) malformed("date_data array must have 3 entries (day, month, year)");
    return {date_level_from_json(v[0], false), date_level_from_json(v[1], true),
            date_level_from_json(v[2], false)};
  }
  if (!v.is_object()) malformed("date_data must be an object");
  auto get = [&](const char* key, bool is_month) -> std::optional<int> {
    auto it = v.find(key);
    if (it == v.end()) return std::nullopt;
    return date_level_from_json(*it, is_month);
  };
  return {get("day", false), get("month", true), get("year", false)};
}

const json* find_any(const json& obj, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto it = obj.find(k);
    if (it != obj.end() && !it->is_null()) return &*it;
  }
  return nullptr;
}

std::string required_string(const json& obj, std::initializer_list<const char*> keys,
                            const std::string& where) {
  const json* v = find_any(obj, keys);
  if (!v) malformed(where + " is missing '" + *keys.begin() + "'");
  if (!v->is_string()) malformed(where + " field '" + *keys.begin() + "' must be a string");
  return v->get<std::string>();
}

std::string optional_string(const json& obj, std::initializer_list<const char*> keys,
                            const std::string& where) {
  const json* v = find_any(obj, keys);
  if (!v) return {};
  if (!v->is_string()) malformed(where + " field '" + *keys.begin() + "' must be a string");
  return v->get<std::string>();
}

// Locate the JSON object inside an LLM reply (fences, preambles, trailers).
std::string_view extract_json_object(std::string_view raw) {
  auto open = raw.find('{');
  auto close = raw.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    malformed("reply does not contain a JSON object");
  }
  return raw.substr(open, close - open + 1);
}

}  // namespace

std::string_view to_string(EntityType type) {
  switch (type) {
    case EntityType::Person: return "PERSON";
    case EntityType::Org: return "ORG";
    case EntityType::Location: return "LOCATION";
    case EntityType::Date: return "DATE";
    case EntityType::Event: return "EVENT";
    case EntityType::Object: return "OBJECT";
    case EntityType::Misc: return "MISC";
  }
  return "MISC";
}

std::optional<EntityType> parse_entity_type(std::string_view text) {
  static const std::map<std::string, EntityType> table = {
      {"PERSON", EntityType::Person},     {"PER", EntityType::Person},
      {"PEOPLE", EntityType::Person},     {"ORG", EntityType::Org},
      {"ORGANIZATION", EntityType::Org},  {"ORGANISATION", EntityType::Org},
      {"NORP", EntityType::Org},          {"LOCATION", EntityType::Location},
      {"LOC", EntityType::Location},      {"GPE", EntityType::Location},
      {"PLACE", EntityType::Location},    {"DATE", EntityType::Date},
      {"TIME", EntityType::Date},         {"EVENT", EntityType::Event},
      {"OBJECT", EntityType::Object},     {"PRODUCT", EntityType::Object},
      {"MISC", EntityType::Misc},         {"OTHER", EntityType::Misc},
  };
  auto it = table.find(str::upper(str::trim(text)));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

LocationData normalize(LocationData loc) {
  loc.city = normalize_level(loc.city);
  loc.state = normalize_level(loc.state);
  loc.country = normalize_level(loc.country);
  return loc;
}

bool compatible(const LocationData& a, const LocationData& b) {
  auto agree = [](const std::optional<std::string>& x, const std::optional<std::string>& y) {
    return !x || !y || str::iequals(*x, *y);
  };
  return agree(a.city, b.city) && agree(a.state, b.state) && agree(a.country, b.country);
}

bool compatible(const DateData& a, const DateData& b) {
  auto agree = [](std::optional<int> x, std::optional<int> y) { return !x || !y || *x == *y; };
  return agree(a.day, b.day) && agree(a.month, b.month) && agree(a.year, b.year);
}

std::string format_hierarchy(const LocationData& loc) {
  auto lvl = [](const std::optional<std::string>& s) { return s ? *s : std::string(kUnk); };
  return lvl(loc.city) + ", " + lvl(loc.state) + ", " + lvl(loc.country);
}

std::string format_hierarchy(const DateData& date) {
  auto lvl = [](std::optional<int> v) { return v ? std::to_string(*v) : std::string(kUnk); };
  return lvl(date.day) + ", " + lvl(date.month) + ", " + lvl(date.year);
}

const EntityNode* ERGraph::find_node(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::optional<std::size_t> ERGraph::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  return std::nullopt;
}

std::vector<Violation> validate_graph(const ERGraph& g) {
  std::vector<Violation> out;
  auto add = [&](std::string subject, std::string rule, std::string message) {
    out.push_back({std::move(subject), std::move(rule), std::move(message)});
  };

  std::set<std::string> ids;
  for (const auto& n : g.nodes) {
    if (n.id.empty()) add("graph", "empty_id", "node '" + n.name + "' has an empty id");
    if (!ids.insert(n.id).second) add(n.id, "duplicate_id", "node id '" + n.id + "' is not unique");
    if (str::trim(n.name).empty()) add(n.id, "empty_name", "node '" + n.id + "' has an empty name");

    const bool is_loc = n.type == EntityType::Location;
    const bool is_date = n.type == EntityType::Date;
    if (is_loc != n.location.has_value()) {
      add(n.id, "location_data_iff_location",
          is_loc ? "LOCATION node '" + n.id + "' lacks location_data"
                 : "non-LOCATION node '" + n.id + "' carries location_data");
    }
    if (is_date != n.date.has_value()) {
      add(n.id, "date_data_iff_date",
          is_date ? "DATE node '" + n.id + "' lacks date_data"
                  : "non-DATE node '" + n.id + "' carries date_data");
    }
    if (n.location && n.location->all_unknown()) {
      add(n.id, "empty_hierarchy", "location_data of '" + n.id + "' is UNK at every level");
    }
    if (n.date) {
      if (n.date->all_unknown()) {
        add(n.id, "empty_hierarchy", "date_data of '" + n.id + "' is UNK at every level");
      }
      if (n.date->day && (*n.date->day < 1 || *n.date->day > 31)) {
        add(n.id, "date_range", "day " + std::to_string(*n.date->day) + " outside 1..31");
      }
      if (n.date->month && (*n.date->month < 1 || *n.date->month > 12)) {
        add(n.id, "date_range", "month " + std::to_string(*n.date->month) + " outside 1..12");
      }
    }
  }

  std::set<std::tuple<std::string, std::string, std::string>> triples;
  std::set<std::string> touched;
  for (const auto& e : g.edges) {
    const std::string key = e.src + "->" + e.dst;
    if (e.src == e.dst) add(key, "self_loop", "edge " + key + " has src = dst");
    if (!ids.count(e.src)) add(key, "unknown_node", "edge src '" + e.src + "' is not a node id");
    if (!ids.count(e.dst)) add(key, "unknown_node", "edge dst '" + e.dst + "' is not a node id");
    if (str::trim(e.action).empty()) add(key, "empty_action", "edge " + key + " has no action");
    if (str::trim(e.action_description).empty()) {
      add(key, "empty_action_description", "edge " + key + " has no action_description");
    }
    if (!triples.insert({e.src, e.dst, e.action}).second) {
      add(key, "duplicate_triple", "edge (" + e.src + ", " + e.dst + ", " + e.action +
                                       ") appears more than once");
    }
    touched.insert(e.src);
    touched.insert(e.dst);
  }
  for (const auto& n : g.nodes) {
    if ((n.type == EntityType::Location || n.type == EntityType::Date) && !touched.count(n.id)) {
      add(n.id, "orphan_context_node",
          std::string(to_string(n.type)) + " node '" + n.id + "' is not attached to any edge");
    }
  }
  return out;
}

ERGraph graph_from_json(const json& j, std::string_view source_text) {
  if (!j.is_object()) malformed("graph must be a JSON object");
  auto nodes_it = j.find("nodes");
  auto edges_it = j.find("edges");
  if (nodes_it == j.end() || !nodes_it->is_array()) malformed("graph needs a 'nodes' array");
  if (edges_it == j.end() || !edges_it->is_array()) malformed("graph needs an 'edges' array");

  ERGraph g;
  if (!source_text.empty()) {
    g.source_text_hash = text_digest(source_text);
  } else if (auto h = j.find("source_text_hash"); h != j.end() && h->is_string()) {
    g.source_text_hash = h->get<std::string>();
  }

  std::set<std::string> given_ids;
  for (const auto& jn : *nodes_it) {
    if (jn.is_object()) {
      if (const json* id = find_any(jn, {"id"}); id && id->is_string()) {
        given_ids.insert(id->get<std::string>());
      }
    }
  }

  std::map<std::string, int> slug_counts;
  std::set<std::string> used_ids = given_ids;
  std::size_t index = 0;
  for (const auto& jn : *nodes_it) {
    const std::string where = "node #" + std::to_string(index++);
    if (!jn.is_object()) malformed(where + " is not an object");
    EntityNode n;
    n.name = str::squash(required_string(jn, {"name"}, where));
    auto type_text = required_string(jn, {"ent_type", "type"}, where);
    auto type = parse_entity_type(type_text);
    if (!type) violation(where + " has unknown ent_type '" + type_text + "'");
    n.type = *type;
    n.description = str::squash(optional_string(jn, {"description", "desc"}, where));

    n.id = optional_string(jn, {"id"}, where);
    if (n.id.empty()) {
      auto slug = slugify(n.name);
      std::string candidate;
      do {
        candidate = slug + "_" + std::to_string(++slug_counts[slug]);
      } while (used_ids.count(candidate));
      n.id = candidate;
      used_ids.insert(n.id);
    }

    const json* loc = find_any(jn, {"location_data"});
    const json* date = find_any(jn, {"date_data"});
    const json* data = find_any(jn, {"data"});
    if (!loc && data && n.type == EntityType::Location) loc = data;
    if (!date && data && n.type == EntityType::Date) date = data;
    if (loc) n.location = location_from_json(*loc);
    if (date) n.date = date_from_json(*date);
    // A LOCATION/DATE node may spell its hierarchy in the name itself.
    if (n.type == EntityType::Location && !n.location) n.location = location_from_string(n.name);
    if (n.type == EntityType::Date && !n.date) n.date = date_from_string(n.name);
    g.nodes.push_back(std::move(n));
  }

  auto resolve = [&](const std::string& ref) {
    for (const auto& n : g.nodes) {
      if (n.id == ref) return ref;
    }
    const EntityNode* hit = nullptr;
    for (const auto& n : g.nodes) {
      if (str::iequals(n.name, str::trim(ref))) {
        if (hit) return ref;  // ambiguous name, leave for the validator
        hit = &n;
      }
    }
    return hit ? hit->id : ref;
  };

  index = 0;
  for (const auto& je : *edges_it) {
    const std::string where = "edge #" + std::to_string(index++);
    if (!je.is_object()) malformed(where + " is not an object");
    RelationEdge e;
    e.src = resolve(required_string(je, {"src", "source"}, where));
    e.dst = resolve(required_string(je, {"dst", "target"}, where));
    e.action = str::squash(required_string(je, {"action"}, where));
    e.action_description =
        str::squash(optional_string(je, {"action_description", "description"}, where));
    g.edges.push_back(std::move(e));
  }

  auto violations = validate_graph(g);
  if (!violations.empty()) {
    const auto& v = violations.front();
    violation(v.rule + " (" + v.subject + "): " + v.message);
  }
  return g;
}

ERGraph parse_graph(std::string_view raw, std::string_view source_text) {
  auto body = extract_json_object(raw);
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  return graph_from_json(j, source_text);
}

json to_json(const LocationData& loc) {
  auto lvl = [](const std::optional<std::string>& s) { return json(s ? *s : std::string(kUnk)); };
  return json{{"city", lvl(loc.city)}, {"state", lvl(loc.state)}, {"country", lvl(loc.country)}};
}

json to_json(const DateData& date) {
  auto lvl = [](std::optional<int> v) { return v ? json(*v) : json(std::string(kUnk)); };
  return json{{"day", lvl(date.day)}, {"month", lvl(date.month)}, {"year", lvl(date.year)}};
}

json to_json(const EntityNode& n) {
  json j{{"id", n.id},
         {"name", n.name},
         {"ent_type", std::string(to_string(n.type))},
         {"description", n.description}};
  if (n.location) j["location_data"] = to_json(*n.location);
  if (n.date) j["date_data"] = to_json(*n.date);
  return j;
}

json to_json(const ERGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) nodes.push_back(to_json(n));
  json edges = json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"src", e.src},
                     {"dst", e.dst},
                     {"action", e.action},
                     {"action_description", e.action_description}});
  }
  json j{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
  if (!g.source_text_hash.empty()) j["source_text_hash"] = g.source_text_hash;
  return j;
}

std::string serialize_graph(const ERGraph& g) { return to_json(g).dump(2); }

ERGraph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Malformed, "cannot open graph file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

GraphTemplate make_template(const ERGraph& claim) {
  if (claim.edges.empty()) throw Error(ErrorCode::EmptyGraph, "claim graph has no edges");
  GraphTemplate t;
  t.required_nodes = claim.nodes;
  t.masked_edges.reserve(claim.edges.size());
  for (const auto& e : claim.edges) t.masked_edges.push_back({e.src, e.dst});
  return t;
}

json to_json(const GraphTemplate& t) {
  json nodes = json::array();
  for (const auto& n : t.required_nodes) nodes.push_back(to_json(n));
  json edges = json::array();
  for (const auto& e : t.masked_edges) {
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"action", "[MASK]"},
                     {"action_description", "[MASK]"}});
  }
  return json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

std::string text_digest(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::string slugify(std::string_view name) {
  std::string out;
  bool pending = false;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      if (pending && !out.empty()) out.push_back('_');
      pending = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending = true;
    }
  }
  return out.empty() ? std::string("node") : out;
}

std::string node_text(const EntityNode& n) {
  if (n.description.empty()) return n.name;
  return n.name + ". " + n.description;
}

}  // namespace xcheck
