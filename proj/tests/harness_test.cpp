#include "xcheck/harness.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "bundle_util.hpp"
#include "scenarios.hpp"
#include "xcheck/error.hpp"

namespace xcheck {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Malformed;
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p);
  for (const auto& l : lines) out << l << "\n";
}

TEST(LoadCorpus, ValidAndBrokenLines) {
  testing::TempDir dir;
  save_bundle(testing::basis_bundle("a"), dir.path() / "a.json", false);
  fs::create_directories(dir.path() / "ev");
  write_lines(dir.path() / "m.jsonl",
              {R"({"claim_id":"c1","text":"one","bundle":"a.json","label":"FAKE"})",
               R"({"claim_id":"c2","text":"two","bundle":"a.json","label":"pristine","evidence_dir":"ev","fakeness_score":0.5})",
               "",
               R"({"claim_id":"c3","bundle":"a.json"})",
               R"({"claim_id":"c4","text":"four","bundle":"missing.json"})",
               R"({"claim_id":"c1","text":"dup","bundle":"a.json"})",
               R"({"claim_id":"c5","text":"five","bundle":"a.json","label":"MAYBE"})",
               R"({"claim_id":"c6","text":"six","bundle":"a.json","fakeness_score":1.5})",
               "{not json",
               R"({"claim_id":"c7","text":"seven","bundle":"a.json","caption_alignment":0.3})"});
  auto report = load_corpus(dir.path() / "m.jsonl");
  ASSERT_EQ(report.records.size(), 3u);
  EXPECT_EQ(report.records[0].label, Label::Fake);
  EXPECT_EQ(report.records[1].label, Label::Pristine);
  EXPECT_EQ(*report.records[1].evidence_dir, fs::absolute(dir.path() / "ev").lexically_normal());
  EXPECT_EQ(*report.records[1].fakeness_score, 0.5);
  EXPECT_TRUE(report.records[0].bundle_path.is_absolute());
  EXPECT_FALSE(report.records[2].label);
  EXPECT_EQ(*report.records[2].caption_alignment, 0.3);
  std::vector<std::size_t> bad;
  for (const auto& i : report.issues) bad.push_back(i.line);
  EXPECT_EQ(bad, (std::vector<std::size_t>{4, 5, 6, 7, 8, 9}));
  EXPECT_NE(report.issues[0].message.find("text"), std::string::npos);
}

TEST(LoadCorpus, EmptyAndMissing) {
  testing::TempDir dir;
  write_lines(dir.path() / "empty.jsonl", {});
  EXPECT_TRUE(load_corpus(dir.path() / "empty.jsonl").records.empty());
  EXPECT_EQ(code_of([&] { load_corpus(dir.path() / "nope.jsonl"); }), ErrorCode::ManifestNotFound);
}

class FilterFixture : public ::testing::Test {
 protected:
  ClaimRecord record(const std::string& id, std::optional<double> alignment, std::optional<std::string> image_class,
                     std::optional<double> fakeness, bool with_bundle = true) {
    auto b = testing::basis_bundle(id);
    b.image_class = image_class;
    ClaimRecord r;
    r.claim_id = id;
    r.text = "claim " + id;
    r.bundle_path = dir_.path() / (id + ".json");
    if (with_bundle) save_bundle(b, r.bundle_path, false);
    r.caption_alignment = alignment;
    r.fakeness_score = fakeness;
    return r;
  }
  testing::TempDir dir_;
};

TEST_F(FilterFixture, StagesAndBoundaries) {
  std::vector<ClaimRecord> rs = {
      record("keep", 0.41, "street", 0.46),
      record("align-035", 0.35, "street", 0.9),
      record("align-040", 0.40, "street", 0.9),
      record("website", 0.9, "website", 0.9),
      record("internet", 0.9, "screenshot, Internet", 0.9),
      record("fake-045", 0.9, "street", 0.45),
      record("no-fakeness", 0.9, std::nullopt, std::nullopt),
      record("no-bundle", 0.9, "street", 0.9, false),
  };
  auto out = filter_corpus(rs, {});
  std::vector<std::string> kept;
  for (const auto& k : out.kept) kept.push_back(k.claim_id);
  EXPECT_EQ(kept, (std::vector<std::string>{"keep", "no-fakeness"}));
  std::map<std::string, FilterStage> stage;
  for (const auto& r : out.rejected) stage[r.record.claim_id] = r.stage;
  EXPECT_EQ(stage.at("align-035"), FilterStage::Alignment);
  EXPECT_EQ(stage.at("align-040"), FilterStage::Alignment);
  EXPECT_EQ(stage.at("website"), FilterStage::Visual);
  EXPECT_EQ(stage.at("internet"), FilterStage::Visual);
  EXPECT_EQ(stage.at("fake-045"), FilterStage::Fakeness);
  EXPECT_EQ(stage.at("no-bundle"), FilterStage::Multimodal);
  EXPECT_EQ(to_json(out)["rejected"][0]["stage"], "alignment");
}

TEST_F(FilterFixture, FirstFailingStageWins) {
  // fails alignment, visual and fakeness; reported at alignment
  auto out = filter_corpus({record("x", 0.1, "website", 0.1)}, {});
  ASSERT_EQ(out.rejected.size(), 1u);
  EXPECT_EQ(out.rejected[0].stage, FilterStage::Alignment);
}

TEST_F(FilterFixture, AlignmentComputedFromCaption) {
  StubEmbedder emb;
  auto r = record("c", std::nullopt, "street", 0.9);
  r.text = "A rally in Girona";
  // caption of the basis bundle is "a caption"
  emb.add_synonym("a caption", "A rally in Girona");
  auto out = filter_corpus({r}, {}, &emb);
  EXPECT_EQ(out.kept.size(), 1u);

  StubEmbedder unrelated;
  r.text = "Something else entirely";
  out = filter_corpus({r}, {}, &unrelated);
  ASSERT_EQ(out.rejected.size(), 1u);
  EXPECT_EQ(out.rejected[0].stage, FilterStage::Alignment);

  out = filter_corpus({r}, {}, nullptr);
  ASSERT_EQ(out.rejected.size(), 1u);
  EXPECT_NE(out.rejected[0].reason.find("unavailable"), std::string::npos);
}

TEST_F(FilterFixture, RefilteringIsIdempotent) {
  std::mt19937_64 rng(5);
  const std::vector<std::optional<std::string>> classes = {std::nullopt, "street", "website", "internet", "crowd"};
  std::vector<ClaimRecord> rs;
  for (int i = 0; i < 60; ++i) {
    std::uniform_int_distribution<int> pct(0, 100);
    std::optional<double> fake;
    if (pct(rng) > 20) fake = pct(rng) / 100.0;
    rs.push_back(record("r" + std::to_string(i), pct(rng) / 100.0,
                        classes[std::uniform_int_distribution<std::size_t>(0, classes.size() - 1)(rng)], fake,
                        pct(rng) > 5));
  }
  auto once = filter_corpus(rs, {});
  auto twice = filter_corpus(once.kept, {});
  EXPECT_TRUE(twice.rejected.empty());
  ASSERT_EQ(twice.kept.size(), once.kept.size());
  for (std::size_t i = 0; i < once.kept.size(); ++i) EXPECT_EQ(twice.kept[i].claim_id, once.kept[i].claim_id);
  EXPECT_GT(once.kept.size(), 0u);
  EXPECT_GT(once.rejected.size(), 0u);
}

ClaimOutcome outcome(const std::string& id, Label expected, std::optional<Label> predicted, std::size_t edges = 1) {
  ClaimOutcome o;
  o.claim_id = id;
  o.expected = expected;
  o.edge_count = edges;
  if (predicted) {
    Verdict v;
    v.label = *predicted;
    v.verified = *predicted == Label::Pristine;
    o.verdict = v;
    o.correct = *predicted == expected;
  } else {
    o.error = "ProviderUnavailable: down";
  }
  return o;
}

TEST(Summarize, ThreeOfFour) {
  auto s = summarize({outcome("a", Label::Fake, Label::Fake), outcome("b", Label::Fake, Label::Pristine),
                      outcome("c", Label::Pristine, Label::Pristine, 2), outcome("d", Label::Pristine, Label::Pristine, 2)});
  EXPECT_DOUBLE_EQ(s.overall_acc, 0.75);
  EXPECT_DOUBLE_EQ(*s.fake_acc, 0.5);
  EXPECT_DOUBLE_EQ(*s.pristine_acc, 1.0);
  EXPECT_EQ(s.by_edge_count.at(1).total, 2u);
  EXPECT_EQ(s.by_edge_count.at(1).correct, 1u);
  EXPECT_EQ(s.by_edge_count.at(2).correct, 2u);
}

TEST(Summarize, AllFakeLeavesPristineAbsent) {
  auto s = summarize({outcome("a", Label::Fake, Label::Fake), outcome("b", Label::Fake, Label::Fake)});
  EXPECT_DOUBLE_EQ(*s.fake_acc, 1.0);
  EXPECT_FALSE(s.pristine_acc);
  EXPECT_EQ(to_json(s)["pristine_acc"], "ABSENT");
}

TEST(Summarize, ErrorsCountAsIncorrect) {
  auto s = summarize({outcome("a", Label::Fake, std::nullopt), outcome("b", Label::Pristine, Label::Pristine)});
  EXPECT_EQ(s.errors, 1u);
  EXPECT_DOUBLE_EQ(s.overall_acc, 0.5);
  EXPECT_DOUBLE_EQ(*s.fake_acc, 0.0);
}

TEST(Summarize, MetricsIdentityOverRandomOutcomes) {
  std::mt19937_64 rng(44);
  for (int t = 0; t < 300; ++t) {
    std::vector<ClaimOutcome> os;
    const int n = std::uniform_int_distribution<int>(1, 30)(rng);
    for (int i = 0; i < n; ++i) {
      const Label expected = std::bernoulli_distribution(0.5)(rng) ? Label::Fake : Label::Pristine;
      std::optional<Label> predicted;
      const int r = std::uniform_int_distribution<int>(0, 9)(rng);
      if (r > 0) predicted = r > 4 ? expected : (expected == Label::Fake ? Label::Pristine : Label::Fake);
      os.push_back(outcome(std::to_string(i), expected, predicted, std::uniform_int_distribution<std::size_t>(0, 4)(rng)));
    }
    auto s = summarize(os);
    std::size_t correct = 0;
    for (const auto& o : os) correct += o.correct;
    EXPECT_DOUBLE_EQ(s.overall_acc, double(correct) / n);
    EXPECT_DOUBLE_EQ(s.overall_acc, double(s.fake_as_fake + s.pristine_as_pristine) / double(s.total));
    EXPECT_EQ(s.fake_total + s.pristine_total, s.total);
    EXPECT_EQ(s.fake_as_fake + s.fake_as_pristine + s.pristine_as_fake + s.pristine_as_pristine + s.errors, s.total);
    std::size_t bucket_total = 0;
    for (const auto& [e, b] : s.by_edge_count) bucket_total += b.total;
    EXPECT_EQ(bucket_total, s.total);
  }
}

// Two labeled claims with dataset evidence on disk and a scripted model.
class EvalFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto claim = scenarios::floods_claim();
    const std::string pristine_text = "Floods hit the village of Lostwithiel; residents fled.";
    const std::string fake_text = "Floods hit the village of Lostwithiel in Cornwall.";
    save_bundle(testing::basis_bundle("img"), dir_.path() / "img.json", false);
    llm_.add(LlmTask::BuildGraph, pristine_text, {serialize_graph(claim)});
    llm_.add(LlmTask::BuildGraph, fake_text, {serialize_graph(claim)});
    const std::string good = "Floods hit Lostwithiel and residents fled.";
    const std::string conflicting = "Floods hit Aberdeen and residents fled.";
    llm_.add(LlmTask::BuildGraphConditional, good, {serialize_graph(claim)});
    llm_.add(LlmTask::BuildGraphConditional, conflicting, {serialize_graph(scenarios::floods_evidence())});

    auto evidence_dir = [&](const std::string& name, const std::string& text) {
      fs::create_directories(dir_.path() / name);
      json ev{{"text_evidence", {{{"source_url", "https://elpais.com/" + name}, {"contextual_text", text}}}},
              {"visual_evidence", json::array()}};
      std::ofstream(dir_.path() / name / "evidence.json") << ev.dump();
    };
    evidence_dir("ev-p", good);
    evidence_dir("ev-f", conflicting);
    records_ = {make("p1", pristine_text, Label::Pristine, "ev-p"), make("f1", fake_text, Label::Fake, "ev-f")};
  }

  ClaimRecord make(const std::string& id, const std::string& text, Label label, const std::string& ev) {
    ClaimRecord r;
    r.claim_id = id;
    r.text = text;
    r.bundle_path = dir_.path() / "img.json";
    r.label = label;
    r.evidence_dir = dir_.path() / ev;
    return r;
  }

  testing::TempDir dir_;
  ScriptedLlm llm_;
  StubEmbedder embedder_;
  std::vector<ClaimRecord> records_;
};

TEST_F(EvalFixture, DatasetModeVerdictsAndFiles) {
  EvalConfig cfg;
  cfg.out_dir = dir_.path() / "out";
  auto res = evaluate(records_, {llm_, embedder_, nullptr}, cfg);
  ASSERT_EQ(res.outcomes.size(), 2u);
  EXPECT_EQ(res.outcomes[0].claim_id, "f1");  // ordered by claim id
  EXPECT_TRUE(res.outcomes[0].correct);
  EXPECT_TRUE(res.outcomes[1].correct);
  EXPECT_EQ(res.outcomes[0].verdict->codes.back(), Code::XtConflicts);
  EXPECT_DOUBLE_EQ(res.summary.overall_acc, 1.0);
  EXPECT_EQ(res.summary.by_edge_count.at(2).total, 2u);
  EXPECT_TRUE(fs::exists(dir_.path() / "out" / "summary.json"));
  std::ifstream in(dir_.path() / "out" / "p1.json");
  auto j = json::parse(in);
  EXPECT_EQ(j["verdict"]["label"], "PRISTINE");
  EXPECT_EQ(llm_.call_count(LlmTask::RefineQuery), 0u);
}

TEST_F(EvalFixture, ParallelMatchesSequential) {
  EvalConfig seq;
  auto a = evaluate(records_, {llm_, embedder_, nullptr}, seq);
  EvalConfig par;
  par.jobs = 4;
  auto b = evaluate(records_, {llm_, embedder_, nullptr}, par);
  EXPECT_EQ(to_json(a.summary).dump(), to_json(b.summary).dump());
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    EXPECT_EQ(to_json(a.outcomes[i]).dump(), to_json(b.outcomes[i]).dump());
  }
}

TEST_F(EvalFixture, PerClaimErrorsAreCountedNotThrown) {
  records_[0].evidence_dir = dir_.path() / "missing";
  auto res = evaluate(records_, {llm_, embedder_, nullptr}, {});
  EXPECT_EQ(res.summary.errors, 1u);
  EXPECT_DOUBLE_EQ(res.summary.overall_acc, 0.5);
  ASSERT_TRUE(res.outcomes[1].error);
  EXPECT_NE(res.outcomes[1].error->find("ManifestNotFound"), std::string::npos);
}

TEST_F(EvalFixture, EmptyAndUnlabeled) {
  EXPECT_EQ(code_of([&] { evaluate({}, {llm_, embedder_, nullptr}, {}); }), ErrorCode::EmptyCorpus);
  records_[1].label.reset();
  EXPECT_EQ(code_of([&] { evaluate(records_, {llm_, embedder_, nullptr}, {}); }), ErrorCode::Malformed);
}

}  // namespace
}  // namespace xcheck
