#include "xcheck/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "xcheck/error.hpp"
#include "xcheck/graphbuild.hpp"
#include "xcheck/strings.hpp"

namespace xcheck {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number()) throw Error(ErrorCode::Malformed, std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

std::string required_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string() || str::trim(j[key].get<std::string>()).empty()) {
    throw Error(ErrorCode::Malformed, std::string("missing '") + key + "'");
  }
  return j[key].get<std::string>();
}

ClaimRecord record_from_json(const json& j, const fs::path& base) {
  if (!j.is_object()) throw Error(ErrorCode::Malformed, "line is not a JSON object");
  ClaimRecord r;
  r.claim_id = required_string(j, "claim_id");
  r.text = required_string(j, "text");
  r.bundle_path = fs::absolute(base / required_string(j, "bundle")).lexically_normal();
  if (j.contains("label") && !j["label"].is_null()) {
    r.label = parse_label(j["label"].is_string() ? j["label"].get<std::string>() : "");
    if (!r.label) throw Error(ErrorCode::Malformed, "label must be FAKE or PRISTINE");
  }
  if (j.contains("evidence_dir") && j["evidence_dir"].is_string()) {
    r.evidence_dir = fs::absolute(base / j["evidence_dir"].get<std::string>()).lexically_normal();
  }
  r.fakeness_score = optional_number(j, "fakeness_score");
  if (r.fakeness_score && (*r.fakeness_score < 0.0 || *r.fakeness_score > 1.0)) {
    throw Error(ErrorCode::Malformed, "fakeness_score must lie in [0, 1]");
  }
  r.caption_alignment = optional_number(j, "caption_alignment");
  if (!fs::exists(r.bundle_path)) throw Error(ErrorCode::Malformed, "bundle not found: " + r.bundle_path.string());
  if (r.evidence_dir && !fs::is_directory(*r.evidence_dir)) {
    throw Error(ErrorCode::Malformed, "evidence_dir not found: " + r.evidence_dir->string());
  }
  return r;
}

std::string fixed3(double x) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << x;
  return s.str();
}

}  // namespace

LoadReport load_corpus(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in || fs::is_directory(manifest)) {
    throw Error(ErrorCode::ManifestNotFound, "cannot open manifest " + manifest.string());
  }
  const auto base = manifest.parent_path();
  LoadReport report;
  std::set<std::string> ids;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (str::trim(line).empty()) continue;
    try {
      auto r = record_from_json(json::parse(line), base);
      if (!ids.insert(r.claim_id).second) throw Error(ErrorCode::Malformed, "duplicate claim_id " + r.claim_id);
      report.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      report.issues.push_back({n, std::string("invalid JSON: ") + e.what()});
    } catch (const Error& e) {
      report.issues.push_back({n, e.detail()});
    }
  }
  return report;
}

json to_json(const ClaimRecord& r) {
  json j{{"claim_id", r.claim_id}, {"text", r.text}, {"bundle", r.bundle_path.string()}};
  if (r.label) j["label"] = std::string(to_string(*r.label));
  if (r.evidence_dir) j["evidence_dir"] = r.evidence_dir->string();
  if (r.fakeness_score) j["fakeness_score"] = *r.fakeness_score;
  if (r.caption_alignment) j["caption_alignment"] = *r.caption_alignment;
  return j;
}

std::string_view to_string(FilterStage s) {
  switch (s) {
    case FilterStage::Multimodal: return "multimodal";
    case FilterStage::Alignment: return "alignment";
    case FilterStage::Visual: return "visual";
    case FilterStage::Fakeness: return "fakeness";
  }
  return "multimodal";
}

void FilterConfig::validate() const {
  if (alignment_threshold < -1.0 || alignment_threshold > 1.0) {
    throw Error(ErrorCode::InvalidConfig, "alignment_threshold must lie in [-1, 1]");
  }
  if (fakeness_threshold < 0.0 || fakeness_threshold > 1.0) {
    throw Error(ErrorCode::InvalidConfig, "fakeness_threshold must lie in [0, 1]");
  }
}

namespace {

// Image class labels may list several names ("website, internet").
std::optional<std::string> excluded_class(const std::string& label, const std::vector<std::string>& excluded) {
  std::string cleaned = label;
  std::replace_if(cleaned.begin(), cleaned.end(), [](char c) { return c == ',' || c == ';' || c == '/'; }, ' ');
  std::istringstream words(cleaned);
  std::string w;
  while (words >> w) {
    for (const auto& e : excluded) {
      if (str::iequals(w, e)) return e;
    }
  }
  return std::nullopt;
}

}  // namespace

FilterResult filter_corpus(const std::vector<ClaimRecord>& records, const FilterConfig& cfg,
                           EmbeddingProvider* embedder) {
  cfg.validate();
  FilterResult out;
  for (const auto& r : records) {
    auto reject = [&](FilterStage stage, std::string reason) {
      out.rejected.push_back({r, stage, std::move(reason)});
    };
    VisualFeatureBundle bundle;
    try {
      bundle = load_bundle(r.bundle_path);
    } catch (const Error& e) {
      reject(FilterStage::Multimodal, "no usable image bundle: " + e.detail());
      continue;
    }

    std::optional<double> alignment = r.caption_alignment;
    if (!alignment && embedder && bundle.caption_text) {
      alignment = cosine(embedder->embed(*bundle.caption_text), embedder->embed(r.text));
    }
    if (!alignment) {
      reject(FilterStage::Alignment, "alignment unavailable (no score and no caption to compute it)");
      continue;
    }
    if (!(*alignment > cfg.alignment_threshold)) {
      reject(FilterStage::Alignment, "alignment " + fixed3(*alignment) + " <= " + fixed3(cfg.alignment_threshold));
      continue;
    }

    if (bundle.image_class) {
      if (auto c = excluded_class(*bundle.image_class, cfg.excluded_classes)) {
        reject(FilterStage::Visual, "image class '" + *bundle.image_class + "' is excluded (" + *c + ")");
        continue;
      }
    }

    if (r.fakeness_score && !(*r.fakeness_score > cfg.fakeness_threshold)) {
      reject(FilterStage::Fakeness,
             "fakeness " + fixed3(*r.fakeness_score) + " <= " + fixed3(cfg.fakeness_threshold));
      continue;
    }
    out.kept.push_back(r);
  }
  return out;
}

json to_json(const FilterResult& r) {
  json kept = json::array();
  for (const auto& k : r.kept) kept.push_back(k.claim_id);
  json rejected = json::array();
  for (const auto& x : r.rejected) {
    rejected.push_back({{"claim_id", x.record.claim_id}, {"stage", std::string(to_string(x.stage))}, {"reason", x.reason}});
  }
  return json{{"kept", std::move(kept)}, {"rejected", std::move(rejected)}};
}

namespace {

ClaimOutcome run_claim(const ClaimRecord& r, Engine engine, const EvalConfig& cfg) {
  ClaimOutcome o;
  o.claim_id = r.claim_id;
  o.expected = *r.label;
  try {
    const auto bundle = load_bundle(r.bundle_path);
    ERGraph claim;
    try {
      claim = build_graph(r.text, engine.llm);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::GraphBuildExhausted) throw;
      Verdict v;
      v.annotations.push_back("EVIDENCE_ERROR: claim: " + e.detail());
      o.verdict = std::move(v);
      o.correct = o.expected == Label::Fake;
      return o;
    }
    o.edge_count = claim.edges.size();

    CrossEvidence ev;
    if (r.evidence_dir) {
      ev = load_dataset_evidence(*r.evidence_dir);
    } else if (engine.search) {
      Providers p{engine.llm, engine.embedder, *engine.search};
      ev = gather_cross_evidence(claim, r.text, bundle, p, cfg.retrieval);
      o.trace = ev.trace;
    }
    o.verdict = verify_claim(r.text, bundle, ev.visual_evidence, ev.text_evidence, engine.llm, engine.embedder,
                             cfg.verify, &claim);
    if (ev.error) o.verdict->annotations.push_back("EVIDENCE_ERROR: reverse search: " + *ev.error);
    o.correct = o.verdict->label == o.expected;
  } catch (const Error& e) {
    o.error = e.what();
    o.verdict.reset();
    o.correct = false;
  }
  return o;
}

std::string file_stem(const std::string& id) {
  std::string s = id;
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::StoreUnavailable, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

EvalSummary summarize(const std::vector<ClaimOutcome>& outcomes) {
  EvalSummary s;
  for (const auto& o : outcomes) {
    ++s.total;
    auto& b = s.by_edge_count[o.edge_count];
    ++b.total;
    if (o.correct) ++b.correct;
    if (o.error) ++s.errors;
    const bool predicted_pristine = !o.error && o.verdict && o.verdict->label == Label::Pristine;
    if (o.expected == Label::Fake) {
      ++s.fake_total;
      if (o.error) continue;
      predicted_pristine ? ++s.fake_as_pristine : ++s.fake_as_fake;
    } else {
      ++s.pristine_total;
      if (o.error) continue;
      predicted_pristine ? ++s.pristine_as_pristine : ++s.pristine_as_fake;
    }
  }
  if (s.total) s.overall_acc = double(s.fake_as_fake + s.pristine_as_pristine) / double(s.total);
  if (s.fake_total) s.fake_acc = double(s.fake_as_fake) / double(s.fake_total);
  if (s.pristine_total) s.pristine_acc = double(s.pristine_as_pristine) / double(s.pristine_total);
  return s;
}

EvalResult evaluate(const std::vector<ClaimRecord>& records, Engine engine, const EvalConfig& cfg) {
  if (records.empty()) throw Error(ErrorCode::EmptyCorpus, "no records to evaluate");
  for (const auto& r : records) {
    if (!r.label) throw Error(ErrorCode::Malformed, "record " + r.claim_id + " has no label");
  }
  cfg.verify.validate();
  cfg.retrieval.validate();

  std::vector<const ClaimRecord*> order;
  for (const auto& r : records) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(),
                   [](const ClaimRecord* a, const ClaimRecord* b) { return a->claim_id < b->claim_id; });

  EvalResult result;
  result.outcomes.resize(order.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      result.outcomes[i] = run_claim(*order[i], engine, cfg);
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(cfg.jobs, 1, order.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  result.summary = summarize(result.outcomes);

  if (cfg.out_dir) {
    fs::create_directories(*cfg.out_dir);
    for (const auto& o : result.outcomes) write_json(*cfg.out_dir / (file_stem(o.claim_id) + ".json"), to_json(o));
    write_json(*cfg.out_dir / "summary.json", to_json(result.summary));
  }
  if (cfg.trace_dir) {
    fs::create_directories(*cfg.trace_dir);
    for (const auto& o : result.outcomes) {
      if (o.trace) write_json(*cfg.trace_dir / (file_stem(o.claim_id) + ".trace.json"), to_json(*o.trace));
    }
  }
  return result;
}

json to_json(const EvalSummary& s) {
  json hist = json::array();
  for (const auto& [edges, b] : s.by_edge_count) {
    hist.push_back({{"edges", edges},
                    {"total", b.total},
                    {"correct", b.correct},
                    {"accuracy", double(b.correct) / double(b.total)}});
  }
  return json{{"total", s.total},
              {"overall_acc", s.overall_acc},
              {"fake_acc", s.fake_acc ? json(*s.fake_acc) : json("ABSENT")},
              {"pristine_acc", s.pristine_acc ? json(*s.pristine_acc) : json("ABSENT")},
              {"confusion",
               {{"fake_total", s.fake_total},
                {"pristine_total", s.pristine_total},
                {"fake_as_fake", s.fake_as_fake},
                {"fake_as_pristine", s.fake_as_pristine},
                {"pristine_as_pristine", s.pristine_as_pristine},
                {"pristine_as_fake", s.pristine_as_fake},
                {"errors", s.errors}}},
              {"by_edge_count", std::move(hist)}};
}

json to_json(const ClaimOutcome& o) {
  json j{{"claim_id", o.claim_id},
         {"expected", std::string(to_string(o.expected))},
         {"correct", o.correct},
         {"edge_count", o.edge_count}};
  j["verdict"] = o.verdict ? to_json(*o.verdict) : json(nullptr);
  if (o.error) j["error"] = *o.error;
  if (o.trace) j["retrieval"] = {{"outcome", o.trace->is_found() ? "FOUND" : "EXHAUSTED"}, {"tries_used", o.trace->tries_used}};
  return j;
}

}  // namespace xcheck
