// Command-line front end. Exit codes: 0 success, 1 usage or configuration,
// 2 provider failure, 3 corpus or input error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "xcheck/config.hpp"
#include "xcheck/dot.hpp"
#include "xcheck/error.hpp"
#include "xcheck/graphbuild.hpp"
#include "xcheck/harness.hpp"
#include "xcheck/retrieval.hpp"
#include "xcheck/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xcheck;

namespace {

enum Exit { kOk = 0, kUsage = 1, kProvider = 2, kCorpus = 3 };

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidConfig: return kUsage;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::GraphBuildExhausted:
    case ErrorCode::RefinementStagnant:
    case ErrorCode::StoreUnavailable: return kProvider;
    default: return kCorpus;
  }
}

std::string read_text(const std::string& text, const std::string& file) {
  if (!text.empty()) return text;
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Malformed, "cannot read " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << "\n";
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::StoreUnavailable, "cannot write " + path);
  out << content;
  if (!content.empty() && content.back() != '\n') out << "\n";
}

struct Globals {
  std::string config_path;
  std::string providers = "live";
  std::string trace_out;
  std::string found_rule;
  bool strict_vt_conflicts = false;
  bool ooc_vetoes_xt = false;

  EngineConfig config() const {
    auto c = load_config(config_path);
    if (!found_rule.empty()) {
      auto r = parse_found_rule(found_rule);
      if (!r) throw Error(ErrorCode::InvalidConfig, "--found-rule must be both or image-only");
      c.found_rule = *r;
    }
    if (strict_vt_conflicts) c.strict_vt_conflicts = true;
    if (ooc_vetoes_xt) c.ooc_vetoes_xt = true;
    c.validate();
    return c;
  }
  ProviderSet providers_for(const EngineConfig& c) const { return make_providers(c, *parse_provider_mode(providers)); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot multimodal claim verification over entity-relationship graphs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Engine configuration (JSON)");
  app.add_option("--providers", g.providers, "Provider mode")->check(CLI::IsMember({"live", "mock"}))->capture_default_str();
  app.add_option("--trace-out", g.trace_out, "Write retrieval traces here (file, or directory for eval)");
  app.add_option("--found-rule", g.found_rule, "What counts as FOUND")->check(CLI::IsMember({"both", "image-only"}));
  app.add_flag("--strict-vt-conflicts", g.strict_vt_conflicts, "Visual-evidence text conflicts also block verification");
  app.add_flag("--ooc-vetoes-xt", g.ooc_vetoes_xt, "An out-of-context image keeps text support from verifying");

  std::string text, text_file, out, claim_path, bundle_path, evidence_dir, manifest, template_path;
  std::vector<std::string> evidence_paths;
  std::size_t jobs = 1;
  bool markdown = false;

  auto* build = app.add_subcommand("build-graph", "Extract an entity-relationship graph from text");
  build->add_option("--text", text, "Text");
  build->add_option("--text-file", text_file, "Read the text from a file");
  build->add_option("--conditional-on", template_path, "Claim graph whose topology conditions extraction");
  build->add_option("-o,--out", out, "Output file");

  auto* match_graphs = app.add_subcommand("match-graphs", "Match a claim graph against evidence graphs");
  match_graphs->add_option("--claim", claim_path, "Claim graph JSON")->required();
  match_graphs->add_option("--evidence", evidence_paths, "Evidence graph JSON (repeatable)")->required();
  match_graphs->add_option("-o,--out", out, "Output file");

  auto* match_images = app.add_subcommand("match-images", "Compare two visual feature bundles");
  match_images->add_option("--claim", claim_path, "Claim bundle")->required();
  match_images->add_option("--evidence", evidence_paths, "Evidence bundle")->required()->expected(1);
  match_images->add_option("-o,--out", out, "Output file");

  auto* retrieve = app.add_subcommand("retrieve", "Run the feedback retrieval loop for one claim");
  retrieve->add_option("--text", text, "Claim text");
  retrieve->add_option("--text-file", text_file, "Read the claim text from a file");
  retrieve->add_option("--bundle", bundle_path, "Claim image bundle")->required();
  retrieve->add_option("-o,--out", out, "Output file for the cross evidence");

  auto* verify = app.add_subcommand("verify", "Verify one claim");
  verify->add_option("--text", text, "Claim text");
  verify->add_option("--text-file", text_file, "Read the claim text from a file");
  verify->add_option("--bundle", bundle_path, "Claim image bundle")->required();
  verify->add_option("--evidence-dir", evidence_dir, "Dataset evidence directory (skips retrieval)");
  verify->add_flag("--markdown", markdown, "Print the human-readable report instead of JSON");
  verify->add_option("-o,--out", out, "Output file");

  auto* eval = app.add_subcommand("eval", "Evaluate a labeled corpus");
  eval->add_option("--manifest", manifest, "Corpus manifest (JSON lines)")->required();
  eval->add_option("--out-dir", out, "Per-claim verdicts and summary.json");
  eval->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  auto* filter = app.add_subcommand("filter", "Apply the Remiss-style filter to a corpus");
  filter->add_option("--manifest", manifest, "Corpus manifest (JSON lines)")->required();
  filter->add_option("--kept-out", out, "Write kept records as a manifest");

  auto* dot = app.add_subcommand("export-dot", "Render a claim graph, colored by a match when evidence is given");
  dot->add_option("--claim", claim_path, "Claim graph JSON")->required();
  dot->add_option("--evidence", evidence_paths, "Evidence graph JSON (repeatable)");
  dot->add_option("--side", evidence_dir, "claim, or the index of the evidence graph to render")->default_str("claim");
  dot->add_option("-o,--out", out, "Output file");

  auto* dump = app.add_subcommand("dump-config", "Print the effective configuration");

  CLI11_PARSE(app, argc, argv);

  auto need_text = [&] {
    if (text.empty() && text_file.empty()) throw CLI::ValidationError("--text or --text-file is required");
    return read_text(text, text_file);
  };

  try {
    if (*dump) {
      write_out("", to_json(g.config()).dump(2));
    } else if (*build) {
      auto cfg = g.config();
      auto p = g.providers_for(cfg);
      const auto t = need_text();
      auto graph = template_path.empty() ? build_graph(t, *p.llm)
                                         : build_graph_conditional(t, make_template(load_graph_file(template_path)), *p.llm);
      write_out(out, to_json(graph).dump(2));
    } else if (*match_graphs) {
      auto cfg = g.config();
      auto p = g.providers_for(cfg);
      auto claim = load_graph_file(claim_path);
      std::vector<ERGraph> ev;
      for (const auto& e : evidence_paths) ev.push_back(load_graph_file(e));
      write_out(out, to_json(graph_match(claim, ev, *p.embedder, cfg.match)).dump(2));
    } else if (*match_images) {
      auto cfg = g.config();
      auto r = image_match(load_bundle(claim_path), load_bundle(evidence_paths.at(0)), cfg.image);
      write_out(out, to_json(r).dump(2));
    } else if (*retrieve) {
      auto cfg = g.config();
      auto p = g.providers_for(cfg);
      if (!p.search) throw Error(ErrorCode::InvalidConfig, "no search provider configured");
      const auto t = need_text();
      auto bundle = load_bundle(bundle_path);
      auto claim = build_graph(t, *p.llm);
      auto ev = gather_cross_evidence(claim, t, bundle, {*p.llm, *p.embedder, *p.search}, cfg.retrieval());
      json items{{"text_evidence", json::array()}, {"visual_evidence", json::array()}};
      for (auto e : ev.text_evidence) {
        e.feature_bundle.reset();
        items["text_evidence"].push_back(to_json(e));
      }
      for (auto e : ev.visual_evidence) {
        e.feature_bundle.reset();
        items["visual_evidence"].push_back(to_json(e));
      }
      items["outcome"] = ev.trace->is_found() ? "FOUND" : "EXHAUSTED";
      items["tries_used"] = ev.trace->tries_used;
      if (ev.error) items["error"] = *ev.error;
      if (!g.trace_out.empty()) write_out(g.trace_out, to_json(*ev.trace).dump(2));
      write_out(out, items.dump(2));
    } else if (*verify) {
      auto cfg = g.config();
      auto p = g.providers_for(cfg);
      const auto t = need_text();
      auto bundle = load_bundle(bundle_path);
      ERGraph claim;
      std::optional<std::string> claim_error;
      try {
        claim = build_graph(t, *p.llm);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::GraphBuildExhausted) throw;
        claim_error = e.detail();
      }
      Verdict v;
      if (claim_error) {
        v.annotations.push_back("EVIDENCE_ERROR: claim: " + *claim_error);
      } else {
        CrossEvidence ev;
        if (!evidence_dir.empty()) {
          ev = load_dataset_evidence(evidence_dir);
        } else if (p.search) {
          ev = gather_cross_evidence(claim, t, bundle, {*p.llm, *p.embedder, *p.search}, cfg.retrieval());
          if (!g.trace_out.empty()) write_out(g.trace_out, to_json(*ev.trace).dump(2));
        }
        v = verify_claim(t, bundle, ev.visual_evidence, ev.text_evidence, *p.llm, *p.embedder, cfg.verify(), &claim);
        if (ev.error) v.annotations.push_back("EVIDENCE_ERROR: reverse search: " + *ev.error);
      }
      for (const auto& a : v.annotations) std::cerr << a << "\n";
      write_out(out, markdown ? render_markdown(v) : to_json(v).dump(2));
    } else if (*eval) {
      auto cfg = g.config();
      auto p = g.providers_for(cfg);
      auto corpus = load_corpus(manifest);
      for (const auto& i : corpus.issues) std::cerr << manifest << ":" << i.line << ": skipped: " << i.message << "\n";
      EvalConfig ec;
      ec.verify = cfg.verify();
      ec.retrieval = cfg.retrieval();
      ec.jobs = jobs;
      if (!out.empty()) ec.out_dir = out;
      if (!g.trace_out.empty()) ec.trace_dir = g.trace_out;
      auto res = evaluate(corpus.records, p.engine(), ec);
      for (const auto& o : res.outcomes) {
        if (o.error) std::cerr << o.claim_id << ": " << *o.error << "\n";
      }
      write_out("", to_json(res.summary).dump(2));
    } else if (*filter) {
      auto cfg = g.config();
      auto corpus = load_corpus(manifest);
      for (const auto& i : corpus.issues) std::cerr << manifest << ":" << i.line << ": skipped: " << i.message << "\n";
      // alignment needs an embedder only when a record lacks a precomputed score
      std::unique_ptr<EmbeddingProvider> embedder;
      try {
        embedder = g.providers_for(cfg).embedder;
      } catch (const Error& e) {
        std::cerr << "no embedder (" << e.detail() << "); records without caption_alignment are rejected\n";
      }
      auto res = filter_corpus(corpus.records, cfg.filter, embedder.get());
      if (!out.empty()) {
        std::string lines;
        for (const auto& r : res.kept) lines += to_json(r).dump() + "\n";
        write_out(out, lines);
      }
      write_out("", to_json(res).dump(2));
    } else if (*dot) {
      auto cfg = g.config();
      auto claim = load_graph_file(claim_path);
      const std::string side = evidence_dir.empty() ? "claim" : evidence_dir;
      if (evidence_paths.empty()) {
        write_out(out, export_dot(claim));
      } else {
        auto p = g.providers_for(cfg);
        std::vector<ERGraph> ev;
        for (const auto& e : evidence_paths) ev.push_back(load_graph_file(e));
        auto report = graph_match(claim, ev, *p.embedder, cfg.match);
        if (side == "claim") {
          write_out(out, export_dot(claim, &report, {DotRole::Claim, 0, "claim"}));
        } else {
          const auto k = std::stoul(side);
          if (k >= ev.size()) throw Error(ErrorCode::InvalidConfig, "--side is out of range");
          write_out(out, export_dot(ev[k], &report, {DotRole::Evidence, k, "evidence_" + side}));
        }
      }
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCorpus;
  }
  return kOk;
}
