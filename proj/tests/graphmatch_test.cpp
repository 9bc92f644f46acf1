#include "xcheck/graphmatch.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "scenarios.hpp"
#include "test_util.hpp"

namespace xcheck {
namespace {

using testing::edge;
using testing::entity;
using testing::graph;
using testing::place;

ERGraph three_people() {
  return graph({entity("a", "Alice", EntityType::Person, "a reporter"),
                entity("b", "Bob", EntityType::Person, "a mayor"),
                entity("c", "City Hall", EntityType::Org, "municipal government")},
               {edge("a", "b", "interviewed"), edge("b", "c", "leads")});
}

TEST(MapNodes, IdenticalGraphsGiveIdentityMapping) {
  StubEmbedder stub;
  auto g = three_people();
  auto m = map_nodes(g, g, stub, MatchConfig{});
  ASSERT_EQ(m.pairs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(m.pairs[i].claim_id, g.nodes[i].id);
    EXPECT_EQ(m.pairs[i].evidence_id, g.nodes[i].id);
    EXPECT_NEAR(m.pairs[i].similarity, 1.0, 1e-12);
  }
  EXPECT_TRUE(m.unmatched_claim_nodes.empty());
  EXPECT_TRUE(m.unmatched_evidence_nodes.empty());
}

TEST(MapNodes, DisjointVocabularyLeavesEverythingUnmatched) {
  StubEmbedder stub;
  auto other = graph({entity("x", "Volcano", EntityType::Event, "eruption"),
                      entity("y", "Iceland", EntityType::Misc, "island")},
                     {edge("x", "y", "erupted on")});
  auto m = map_nodes(three_people(), other, stub, MatchConfig{});
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_EQ(m.unmatched_claim_nodes.size(), 3u);
  EXPECT_EQ(m.unmatched_evidence_nodes.size(), 2u);
}

TEST(MapNodes, ThreeByThreeMatchesPermutationOracle) {
  auto g = three_people();
  // greedy row-by-row would pick (0,0) and end up worse
  assignment::Matrix sim = {{0.95, 0.93, 0.10}, {0.90, 0.20, 0.10}, {0.10, 0.82, 0.79}};
  MatchConfig cfg;
  auto m = map_nodes_from_similarity(g, g, sim, cfg);

  // enumerate the 3! permutations, dropping below-threshold pairs
  std::vector<int> perm = {0, 1, 2};
  double best = -1.0;
  std::vector<int> best_perm;
  do {
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
      if (sim[i][perm[i]] >= cfg.node_threshold) total += sim[i][perm[i]];
    }
    if (total > best) {
      best = total;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  double total = 0.0;
  for (const auto& p : m.pairs) total += p.similarity;
  EXPECT_NEAR(total, best, 1e-12);
  EXPECT_NEAR(best, 0.93 + 0.90, 1e-12);  // greedy (0,0) + (2,1) only reaches 1.77
  ASSERT_EQ(m.pairs.size(), 2u);
  EXPECT_EQ(m.pairs[0].evidence_id, "b");
  EXPECT_EQ(m.pairs[1].evidence_id, "a");
  EXPECT_EQ(m.unmatched_claim_nodes, (std::vector<std::string>{"c"}));
}

TEST(MapNodes, RandomMatricesAgreeWithBruteForceAndStayInjective) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  MatchConfig cfg;
  for (int t = 0; t < 100; ++t) {
    auto c = testing::random_graph(rng);
    auto e = testing::random_graph(rng);
    assignment::Matrix sim(c.nodes.size(), std::vector<double>(e.nodes.size()));
    for (auto& row : sim)
      for (auto& x : row) x = u(rng);
    auto m = map_nodes_from_similarity(c, e, sim, cfg);
    double total = 0.0;
    std::set<std::string> used;
    for (const auto& p : m.pairs) {
      total += p.similarity;
      EXPECT_GE(p.similarity, cfg.node_threshold);
      EXPECT_TRUE(used.insert(p.evidence_id).second);
    }
    EXPECT_EQ(total, oracle::brute_force_assignment(sim, cfg.node_threshold));
    EXPECT_EQ(m.pairs.size() + m.unmatched_claim_nodes.size(), c.nodes.size());
  }
}

TEST(FindConflict, LocationsDisagree) {
  StubEmbedder stub;
  auto claim = scenarios::floods_claim();
  auto evidence = scenarios::floods_evidence();
  auto m = map_nodes(claim, evidence, stub, MatchConfig{});
  auto conflicts = find_conflict(claim, evidence, m, ConflictType::Location);
  ASSERT_EQ(conflicts.size(), 1u);
  EXPECT_EQ(conflicts[0].claim_node_id, "floods");
  EXPECT_EQ(std::get<LocationData>(conflicts[0].claim_context),
            (LocationData{"Lostwithiel", "Cornwall", "UK"}));
  EXPECT_EQ(std::get<LocationData>(conflicts[0].evidence_context),
            (LocationData{"Aberdeen", std::nullopt, "Scotland"}));
  EXPECT_TRUE(find_conflict(claim, evidence, m, ConflictType::Date).empty());
}

TEST(FindConflict, MissingContextOnOneSideIsNotAConflict) {
  StubEmbedder stub;
  auto claim = scenarios::floods_claim();
  auto evidence = graph({entity("floods", "Floods", EntityType::Event, "severe flooding after heavy rain"),
                         entity("residents", "Residents", EntityType::Misc, "local people")},
                        {edge("residents", "floods", "fled")});
  auto m = map_nodes(claim, evidence, stub, MatchConfig{});
  EXPECT_EQ(m.pairs.size(), 2u);
  EXPECT_TRUE(find_conflict(claim, evidence, m, ConflictType::Location).empty());
}

TEST(FindConflict, UnkLevelsAreWildcards) {
  auto claim = graph({entity("e", "Strike", EntityType::Event), place("p", "UK", {}, {}, "UK")},
                     {edge("e", "p", "in")});
  auto evidence = graph({entity("e", "Strike", EntityType::Event),
                         place("p", "London", "London", {}, "UK")},
                        {edge("e", "p", "in")});
  NodeMapping m;
  m.pairs.push_back({"e", "e", 1.0});
  EXPECT_TRUE(find_conflict(claim, evidence, m, ConflictType::Location).empty());
}

TEST(FindConflict, DateConflict) {
  auto claim = graph({entity("e", "Riots", EntityType::Event), testing::when("d", "d", 5, 6, 2013)},
                     {edge("e", "d", "on")});
  auto evidence = graph({entity("e", "Riots", EntityType::Event), testing::when("d", "d", {}, 6, 2011)},
                        {edge("e", "d", "on")});
  NodeMapping m;
  m.pairs.push_back({"e", "e", 1.0});
  auto c = find_conflict(claim, evidence, m, ConflictType::Date);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(format_context(c[0].evidence_context), "UNK, 6, 2011");
}

TEST(FindConflict, SwappingRolesTransposesRecords) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  int seen = 0;
  for (int t = 0; t < 300; ++t) {
    auto c = testing::random_graph(rng);
    auto e = testing::random_graph(rng);
    assignment::Matrix sim(c.nodes.size(), std::vector<double>(e.nodes.size()));
    for (auto& row : sim)
      for (auto& x : row) x = u(rng);
    auto m = map_nodes_from_similarity(c, e, sim, MatchConfig{});
    NodeMapping swapped;
    for (const auto& p : m.pairs) swapped.pairs.push_back({p.evidence_id, p.claim_id, p.similarity});
    for (auto type : {ConflictType::Location, ConflictType::Date}) {
      auto fwd = find_conflict(c, e, m, type);
      auto back = find_conflict(e, c, swapped, type);
      ASSERT_EQ(fwd.size(), back.size());
      seen += static_cast<int>(fwd.size());
      for (const auto& r : fwd) {
        auto it = std::find_if(back.begin(), back.end(), [&](const ConflictRecord& b) {
          return b.claim_node_id == r.evidence_node_id && b.evidence_node_id == r.claim_node_id;
        });
        ASSERT_NE(it, back.end());
        EXPECT_EQ(format_context(it->claim_context), format_context(r.evidence_context));
        EXPECT_EQ(format_context(it->evidence_context), format_context(r.claim_context));
      }
    }
  }
  EXPECT_GT(seen, 0);
}

TEST(FindSupport, UnmatchedEndpointsAreUnconnected) {
  StubEmbedder stub;
  auto claim = three_people();
  NodeMapping empty;
  auto s = find_support(claim, claim, empty, stub, MatchConfig{});
  ASSERT_EQ(s.size(), 2u);
  for (const auto& st : s) {
    EXPECT_EQ(st.state, EdgeState::Unconnected);
    EXPECT_FALSE(st.supporting_walk);
  }
}

TEST(FindSupport, SynonymousActionVerifies) {
  StubEmbedder stub;
  stub.add_synonym("protest", "demonstration");
  auto claim = graph({entity("s", "Students", EntityType::Org), entity("g", "Government", EntityType::Org)},
                     {edge("s", "g", "protest")});
  auto evidence = graph({entity("s", "Students", EntityType::Org), entity("g", "Government", EntityType::Org)},
                        {edge("s", "g", "demonstration")});
  auto m = map_nodes(claim, evidence, stub, MatchConfig{});
  auto s = find_support(claim, evidence, m, stub, MatchConfig{});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].state, EdgeState::Verified);
  EXPECT_GT(*s[0].walk_similarity, 0.5);
}

// Claim edge a -participated-> b; evidence has a -led-> x -joined-> b.
struct WalkFixture {
  ERGraph claim = graph({entity("a", "Ana", EntityType::Person), entity("b", "March", EntityType::Event)},
                        {edge("a", "b", "participated")});
  ERGraph evidence = graph({entity("a", "Ana", EntityType::Person), entity("x", "Union", EntityType::Org),
                            entity("b", "March", EntityType::Event)},
                           {edge("a", "x", "led"), edge("x", "b", "joined")});
  NodeMapping mapping() const {
    NodeMapping m;
    m.pairs = {{"a", "a", 1.0}, {"b", "b", 1.0}};
    return m;
  }
};

TEST(FindSupport, CollatedWalkAboveThresholdVerifies) {
  WalkFixture f;
  StubEmbedder stub(2);
  stub.pin("participated", {1.0, 0.0});
  stub.pin("led joined", {0.8, 0.6});  // cosine 0.8
  auto s = find_support(f.claim, f.evidence, f.mapping(), stub, MatchConfig{});
  EXPECT_EQ(s[0].state, EdgeState::Verified);
  EXPECT_NEAR(*s[0].walk_similarity, 0.8, 1e-12);
  ASSERT_EQ(s[0].supporting_walk->size(), 2u);
  EXPECT_EQ((*s[0].supporting_walk)[0].action, "led");
}

TEST(FindSupport, CollatedWalkBelowThresholdIsDissimilar) {
  WalkFixture f;
  StubEmbedder stub(2);
  stub.pin("participated", {1.0, 0.0});
  stub.pin("led joined", {0.4, 0.916515138991168});  // cosine 0.4
  auto s = find_support(f.claim, f.evidence, f.mapping(), stub, MatchConfig{});
  EXPECT_EQ(s[0].state, EdgeState::Dissimilar);
  EXPECT_NEAR(*s[0].walk_similarity, 0.4, 1e-12);
  EXPECT_TRUE(s[0].supporting_walk);
}

TEST(FindSupport, WalkLengthIsCapped) {
  WalkFixture f;
  StubEmbedder stub;
  MatchConfig cfg;
  cfg.max_walk_length = 1;
  auto s = find_support(f.claim, f.evidence, f.mapping(), stub, cfg);
  EXPECT_EQ(s[0].state, EdgeState::Unconnected);
}

TEST(FindSupport, WalksIgnoreEdgeDirection) {
  StubEmbedder stub;
  auto claim = graph({entity("a", "A", EntityType::Person), entity("b", "B", EntityType::Person)},
                     {edge("a", "b", "met")});
  auto evidence = graph({entity("a", "A", EntityType::Person), entity("b", "B", EntityType::Person)},
                        {edge("b", "a", "met")});
  NodeMapping m;
  m.pairs = {{"a", "a", 1.0}, {"b", "b", 1.0}};
  EXPECT_EQ(find_support(claim, evidence, m, stub, MatchConfig{})[0].state, EdgeState::Verified);
}

TEST(FindSupport, AddingEvidenceEdgesNeverLowersSupport) {
  std::mt19937_64 rng(23);
  StubEmbedder stub(16);
  MatchConfig cfg;
  for (int t = 0; t < 100; ++t) {
    auto claim = testing::random_graph(rng);
    auto evidence = claim;
    // drop some edges, then add them back (plus noise) one at a time
    std::shuffle(evidence.edges.begin(), evidence.edges.end(), rng);
    auto removed = std::vector<RelationEdge>(evidence.edges.begin() + static_cast<long>(evidence.edges.size() / 2),
                                             evidence.edges.end());
    evidence.edges.resize(evidence.edges.size() / 2);
    auto m = map_nodes(claim, evidence, stub, cfg);
    auto verified = [&](const ERGraph& ev) {
      auto s = find_support(claim, ev, m, stub, cfg);
      return std::count_if(s.begin(), s.end(), [](const EdgeStatus& x) { return x.state == EdgeState::Verified; });
    };
    auto before = verified(evidence);
    for (const auto& e : removed) {
      evidence.edges.push_back(e);
      auto after = verified(evidence);
      EXPECT_GE(after, before);
      before = after;
    }
  }
}

TEST(GraphMatch, EmptyEvidenceGraph) {
  StubEmbedder stub;
  auto r = graph_match(three_people(), ERGraph{}, stub, MatchConfig{});
  EXPECT_EQ(r.support_fraction, 0.0);
  EXPECT_FALSE(r.matched);
}

TEST(GraphMatch, LocationConflictBlocksMatch) {
  StubEmbedder stub;
  auto r = graph_match(scenarios::floods_claim(), scenarios::floods_evidence(), stub, MatchConfig{});
  EXPECT_EQ(r.conflicts.size(), 1u);
  EXPECT_DOUBLE_EQ(r.support_fraction, 0.5);
  EXPECT_FALSE(r.matched);
}

TEST(GraphMatch, OneOfThreeEdgesIsEnough) {
  StubEmbedder stub;
  auto claim = graph({entity("a", "Ana", EntityType::Person), entity("b", "Union", EntityType::Org),
                      entity("c", "March", EntityType::Event), entity("d", "Ministry", EntityType::Org)},
                     {edge("a", "b", "leads"), edge("b", "c", "organized"), edge("c", "d", "targeted")});
  auto evidence = graph({entity("a", "Ana", EntityType::Person), entity("b", "Union", EntityType::Org)},
                        {edge("a", "b", "leads")});
  auto r = graph_match(claim, evidence, stub, MatchConfig{});
  EXPECT_EQ(r.verified_count(), 1u);
  EXPECT_DOUBLE_EQ(r.support_fraction, 1.0 / 3.0);
  EXPECT_TRUE(r.conflicts.empty());
  EXPECT_TRUE(r.matched);
  EXPECT_EQ(r.unmatched_claim_nodes(claim), (std::vector<std::string>{"c", "d"}));
}

TEST(GraphMatch, EdgeVerifiedByAnyEvidenceGraph) {
  StubEmbedder stub;
  auto claim = three_people();
  auto first = graph({claim.nodes[0], claim.nodes[1]}, {claim.edges[0]});
  auto second = graph({claim.nodes[1], claim.nodes[2]}, {claim.edges[1]});
  std::vector<ERGraph> evidence = {first, second};
  auto r = graph_match(claim, evidence, stub, MatchConfig{});
  EXPECT_EQ(r.mappings.size(), 2u);
  EXPECT_DOUBLE_EQ(r.support_fraction, 1.0);
  EXPECT_EQ(r.edge_statuses[0].evidence_index, 0u);
  EXPECT_EQ(r.edge_statuses[1].evidence_index, 1u);
}

TEST(GraphMatch, ConflictsFromAnyEvidenceGraphCount) {
  StubEmbedder stub;
  std::vector<ERGraph> evidence = {scenarios::floods_claim(), scenarios::floods_evidence()};
  auto r = graph_match(scenarios::floods_claim(), evidence, stub, MatchConfig{});
  EXPECT_DOUBLE_EQ(r.support_fraction, 1.0);
  ASSERT_EQ(r.conflicts.size(), 1u);
  EXPECT_EQ(r.conflicts[0].evidence_index, 1u);
  EXPECT_FALSE(r.matched);
}

TEST(GraphMatch, EdgelessClaimNeverMatches) {
  StubEmbedder stub;
  auto claim = graph({entity("a", "A", EntityType::Person)}, {});
  auto r = graph_match(claim, claim, stub, MatchConfig{});
  EXPECT_EQ(r.support_fraction, 0.0);
  EXPECT_FALSE(r.matched);
}

TEST(GraphMatch, SelfMatchAndRederivableDecision) {
  std::mt19937_64 rng(31);
  StubEmbedder stub;
  MatchConfig cfg;
  for (int t = 0; t < 100; ++t) {
    auto g = testing::random_graph(rng);
    auto r = graph_match(g, g, stub, cfg);
    EXPECT_DOUBLE_EQ(r.support_fraction, 1.0);
    EXPECT_TRUE(r.conflicts.empty());
    EXPECT_TRUE(r.matched);
    EXPECT_EQ(r.matched, match_decision(r.conflicts.size(), r.support_fraction, g.edges.size(), cfg));
  }
}

TEST(GraphMatch, ReportJson) {
  StubEmbedder stub;
  auto r = graph_match(scenarios::floods_claim(), scenarios::floods_evidence(), stub, MatchConfig{});
  auto j = to_json(r);
  EXPECT_EQ(j["matched"], false);
  EXPECT_EQ(j["conflicts"][0]["conflict_type"], "LOCATION");
  EXPECT_EQ(j["conflicts"][0]["claim_context"]["city"], "Lostwithiel");
  EXPECT_EQ(j["conflicts"][0]["evidence_context"]["state"], "UNK");
  EXPECT_EQ(j["edge_statuses"][0]["status"], "UNCONNECTED");
  EXPECT_EQ(j["edge_statuses"][1]["status"], "VERIFIED");
}

TEST(MatchConfig, RejectsOutOfRangeValues) {
  MatchConfig cfg;
  cfg.node_threshold = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.max_walk_length = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
}  // namespace xcheck
