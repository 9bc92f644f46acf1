#include "xcheck/ergraph.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "xcheck/error.hpp"

namespace xcheck {
namespace {

using testing::edge;
using testing::entity;
using testing::graph;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an xcheck::Error";
  return ErrorCode::InvalidConfig;
}

constexpr const char* kMinimal = R"({
  "nodes": [
    {"id": "police", "name": "Police", "ent_type": "ORG", "description": "city police"},
    {"id": "crowd", "name": "Crowd", "ent_type": "MISC", "description": "protesters"}
  ],
  "edges": [
    {"src": "police", "dst": "crowd", "action": "dispersed", "action_description": "broke up"}
  ]
})";

TEST(ParseGraph, MinimalValidGraph) {
  auto g = parse_graph(kMinimal);
  EXPECT_EQ(g.nodes.size(), 2u);
  EXPECT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.nodes[0].type, EntityType::Org);
  EXPECT_EQ(g.edges[0].action, "dispersed");
}

TEST(ParseGraph, ToleratesMarkdownFenceAndProse) {
  std::string reply = std::string("Here is the graph:\n```json\n") + kMinimal + "\n```\nDone.";
  EXPECT_EQ(parse_graph(reply).nodes.size(), 2u);
}

TEST(ParseGraph, EdgeToUnknownNodeIsInvariantViolation) {
  auto text = R"({"nodes":[{"id":"a","name":"A","ent_type":"PERSON"}],
                  "edges":[{"src":"a","dst":"ghost","action":"met","action_description":"met"}]})";
  EXPECT_EQ(code_of([&] { parse_graph(text); }), ErrorCode::InvariantViolation);
}

TEST(ParseGraph, GarbageIsMalformed) {
  EXPECT_EQ(code_of([] { parse_graph("sorry, I cannot help"); }), ErrorCode::Malformed);
  EXPECT_EQ(code_of([] { parse_graph("{not json}"); }), ErrorCode::Malformed);
  EXPECT_EQ(code_of([] { parse_graph(R"({"nodes": []})"); }), ErrorCode::Malformed);
  EXPECT_EQ(code_of([] { parse_graph(R"({"nodes":[{"ent_type":"ORG"}],"edges":[]})"); }),
            ErrorCode::Malformed);
}

TEST(ParseGraph, UnknownEntityTypeIsViolation) {
  auto text = R"({"nodes":[{"name":"A","ent_type":"SPACESHIP"}],"edges":[]})";
  EXPECT_EQ(code_of([&] { parse_graph(text); }), ErrorCode::InvariantViolation);
}

TEST(ParseGraph, LocationHierarchyFromName) {
  auto text = R"({"nodes":[
      {"name":"Floods","ent_type":"EVENT","description":"flooding"},
      {"name":"Lostwithiel, Cornwall, UK","ent_type":"LOCATION","description":"village"}],
    "edges":[{"src":"Floods","dst":"Lostwithiel, Cornwall, UK","action":"hit","action_description":"struck"}]})";
  auto g = parse_graph(text);
  ASSERT_TRUE(g.nodes[1].location);
  EXPECT_EQ(*g.nodes[1].location, (LocationData{"Lostwithiel", "Cornwall", "UK"}));
  // edges may cite names; they resolve to generated ids
  EXPECT_EQ(g.edges[0].src, "floods_1");
  EXPECT_EQ(g.edges[0].dst, g.nodes[1].id);
}

TEST(ParseGraph, LocationDataStringWithUnk) {
  auto text = R"({"nodes":[
      {"id":"f","name":"Floods","ent_type":"EVENT"},
      {"id":"a","name":"Aberdeen","ent_type":"LOCATION","data":"Aberdeen, unk, Scotland"}],
    "edges":[{"src":"f","dst":"a","action":"hit","action_description":"struck"}]})";
  auto g = parse_graph(text);
  EXPECT_EQ(*g.nodes[1].location, (LocationData{"Aberdeen", std::nullopt, "Scotland"}));
  EXPECT_EQ(format_hierarchy(*g.nodes[1].location), "Aberdeen, UNK, Scotland");
}

TEST(ParseGraph, DateForms) {
  auto date_of = [](const std::string& data) {
    auto text = R"({"nodes":[{"id":"r","name":"Riots","ent_type":"EVENT"},
        {"id":"d","name":"the day","ent_type":"DATE","date_data":)" + data + R"(}],
        "edges":[{"src":"r","dst":"d","action":"happened on","action_description":"took place"}]})";
    return *parse_graph(text).nodes[1].date;
  };
  const DateData june5{5, 6, 2013};
  EXPECT_EQ(date_of(R"("June 5 2013")"), june5);
  EXPECT_EQ(date_of(R"("Wednesday 5th of June, 2013")"), june5);
  EXPECT_EQ(date_of(R"("2013-06-05")"), june5);
  EXPECT_EQ(date_of(R"({"day":5,"month":"June","year":2013})"), june5);
  EXPECT_EQ(date_of(R"({"day":"UNK","month":6,"year":"2013"})"), (DateData{std::nullopt, 6, 2013}));
  EXPECT_EQ(date_of(R"("unk, unk, 2019")"), (DateData{std::nullopt, std::nullopt, 2019}));
}

TEST(ParseGraph, DuplicateNamesGetOrdinalIds) {
  auto text = R"({"nodes":[{"name":"John Smith","ent_type":"PERSON"},
                           {"name":"John Smith","ent_type":"PERSON"}],
                  "edges":[{"src":"john_smith_1","dst":"john_smith_2","action":"met","action_description":"met"}]})";
  auto g = parse_graph(text);
  EXPECT_EQ(g.nodes[0].id, "john_smith_1");
  EXPECT_EQ(g.nodes[1].id, "john_smith_2");
}

TEST(ParseGraph, RecordsSourceDigest) {
  auto g = parse_graph(kMinimal, "Police dispersed the crowd.");
  EXPECT_EQ(g.source_text_hash, text_digest("Police dispersed the crowd."));
  EXPECT_EQ(g.source_text_hash.size(), 16u);
}

TEST(ValidateGraph, ValidGraphHasNoViolations) {
  EXPECT_TRUE(validate_graph(parse_graph(kMinimal)).empty());
}

TEST(ValidateGraph, SelfLoop) {
  auto g = graph({entity("a", "A", EntityType::Person)}, {edge("a", "a", "praised")});
  auto v = validate_graph(g);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v.front().rule, "self_loop");
  EXPECT_EQ(v.front().subject, "a->a");
}

TEST(ValidateGraph, AllUnkDateIsEmptyHierarchy) {
  auto g = graph({entity("a", "A", EntityType::Event), testing::when("d", "someday", {}, {}, {})},
                 {edge("a", "d", "on")});
  auto v = validate_graph(g);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "empty_hierarchy");
  EXPECT_EQ(v[0].subject, "d");
}

TEST(ValidateGraph, StructuralRules) {
  auto a = entity("a", "A", EntityType::Person);
  auto b = entity("b", "B", EntityType::Person);
  auto rules = [](const ERGraph& g) {
    std::set<std::string> out;
    for (const auto& v : validate_graph(g)) out.insert(v.rule);
    return out;
  };
  EXPECT_TRUE(rules(graph({a, b}, {edge("a", "b", "met"), edge("a", "b", "met")}))
                  .count("duplicate_triple"));
  EXPECT_TRUE(rules(graph({a, a}, {})).count("duplicate_id"));
  auto bad_loc = a;
  bad_loc.location = LocationData{"Paris", {}, "France"};
  EXPECT_TRUE(rules(graph({bad_loc, b}, {edge("a", "b", "met")})).count("location_data_iff_location"));
  auto orphan = testing::place("p", "Paris", "Paris", {}, "France");
  EXPECT_TRUE(rules(graph({a, b, orphan}, {edge("a", "b", "met")})).count("orphan_context_node"));
  auto silent = edge("a", "b", "met");
  silent.action_description.clear();
  EXPECT_TRUE(rules(graph({a, b}, {silent})).count("empty_action_description"));
  auto bad_month = testing::when("d", "d", 1, 13, 2020);
  EXPECT_TRUE(rules(graph({a, bad_month}, {edge("a", "d", "on")})).count("date_range"));
}

TEST(Hierarchy, UnkIsWildcard) {
  EXPECT_TRUE(compatible(LocationData{{}, {}, "UK"}, LocationData{"London", {}, "UK"}));
  EXPECT_FALSE(compatible(LocationData{"Lostwithiel", "Cornwall", "UK"},
                          LocationData{"Aberdeen", {}, "Scotland"}));
  EXPECT_TRUE(compatible(LocationData{"paris", {}, {}}, LocationData{"Paris", {}, "France"}));
  EXPECT_TRUE(compatible(DateData{{}, 6, 2013}, DateData{5, 6, 2013}));
  EXPECT_FALSE(compatible(DateData{5, 6, 2013}, DateData{6, 6, 2013}));
}

TEST(Hierarchy, NormalizationIsIdempotent) {
  const std::vector<LocationData> samples = {
      {"  Lostwithiel ", "Cornwall", "UK"}, {"unk", "N/A", " United   Kingdom "},
      {"", "unknown", "Spain"},             {std::nullopt, "Catalonia", "-"}};
  for (const auto& s : samples) {
    auto once = normalize(s);
    EXPECT_EQ(normalize(once), once);
  }
  EXPECT_EQ(normalize(samples[1]), (LocationData{{}, {}, "United Kingdom"}));
}

TEST(MakeTemplate, ProjectsNodesAndMasksEdges) {
  auto a = entity("a", "A", EntityType::Person);
  auto b = entity("b", "B", EntityType::Person);
  auto c = entity("c", "C", EntityType::Org);
  auto t = make_template(graph({a, b}, {edge("a", "b", "attacked")}));
  EXPECT_EQ(t.required_nodes.size(), 2u);
  ASSERT_EQ(t.masked_edges.size(), 1u);
  EXPECT_EQ(t.masked_edges[0], (MaskedEdge{"a", "b"}));

  auto t3 = make_template(
      graph({a, b, c}, {edge("a", "b", "met"), edge("b", "c", "joined"), edge("c", "a", "fired")}));
  EXPECT_EQ(t3.masked_edges.size(), 3u);
  auto j = to_json(t3);
  EXPECT_EQ(j["edges"][0]["action"], "[MASK]");
}

TEST(MakeTemplate, EdgelessClaimIsEmptyGraph) {
  auto g = graph({entity("a", "A", EntityType::Person)}, {});
  EXPECT_EQ(code_of([&] { make_template(g); }), ErrorCode::EmptyGraph);
}

TEST(MakeTemplate, SizesFollowClaimOnRandomGraphs) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    auto g = testing::random_graph(rng);
    auto t = make_template(g);
    EXPECT_EQ(t.required_nodes.size(), g.nodes.size());
    EXPECT_EQ(t.masked_edges.size(), g.edges.size());
    auto again = make_template(g);
    EXPECT_EQ(again.masked_edges, t.masked_edges);
  }
}

TEST(GraphProperties, SerializeParseRoundTrip) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    auto g = testing::random_graph(rng);
    ASSERT_TRUE(validate_graph(g).empty()) << serialize_graph(g);
    g.source_text_hash = text_digest("case " + std::to_string(i));
    EXPECT_EQ(parse_graph(serialize_graph(g)), g);
  }
}

TEST(GraphProperties, ParsedGraphsAlwaysValidate) {
  // Corrupt serialized random graphs; any reply that still parses must be valid.
  std::mt19937_64 rng(99);
  int parsed = 0;
  for (int i = 0; i < 300; ++i) {
    auto j = to_json(testing::random_graph(rng));
    switch (i % 6) {
      case 0: j["edges"][0]["dst"] = j["edges"][0]["src"]; break;
      case 1: j["nodes"][0]["name"] = ""; break;
      case 2: j["edges"].push_back(j["edges"][0]); break;
      case 3: j["nodes"][0].erase("id"); break;
      case 4: j["edges"] = nlohmann::json::array(); break;
      default: break;
    }
    try {
      auto g = parse_graph(j.dump());
      ++parsed;
      EXPECT_TRUE(validate_graph(g).empty());
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::Malformed || e.code() == ErrorCode::InvariantViolation);
    }
  }
  EXPECT_GT(parsed, 0);
}

TEST(Slugify, Basics) {
  EXPECT_EQ(slugify("Village of Lostwithiel"), "village_of_lostwithiel");
  EXPECT_EQ(slugify("  --  "), "node");
  EXPECT_EQ(node_text(entity("x", "Floods", EntityType::Event, "heavy rain")), "Floods. heavy rain");
}

}  // namespace
}  // namespace xcheck
