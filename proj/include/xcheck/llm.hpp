#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace xcheck {

// The only jobs the LLM is given. It never sees or produces a verdict.
enum class LlmTask { BuildGraph, BuildGraphConditional, RefineQuery };
std::string_view to_string(LlmTask t);
std::optional<LlmTask> parse_llm_task(std::string_view s);

// `subject` is the raw input the prompt was rendered from (claim text,
// evidence text or prior search string). Mocks key their replies on it.
struct LlmRequest {
  LlmTask task = LlmTask::BuildGraph;
  std::string prompt;
  std::string subject;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  // Throws Error{ProviderUnavailable} on transport failure.
  virtual std::string complete(const LlmRequest& req) = 0;
  virtual std::string provider_id() const = 0;

  int max_retries() const { return max_retries_; }
  void set_max_retries(int n);

 private:
  int max_retries_ = 3;
};

// Replays canned replies keyed by (task, subject). Each key serves its replies
// in order and then keeps repeating the last one. Subjects compare after
// whitespace squashing and lower-casing.
//
// Transcript file:
//   {"provider_id": "...", "max_retries": 3,
//    "entries": [{"task": "build_graph", "subject": "...", "replies": ["..." | {...}]}]}
// Object replies are serialized to JSON text before being served.
class ScriptedLlm : public LlmProvider {
 public:
  ScriptedLlm() = default;
  explicit ScriptedLlm(const nlohmann::json& transcript);
  static std::unique_ptr<ScriptedLlm> load(const std::filesystem::path& path);

  void add(LlmTask task, std::string_view subject, std::vector<std::string> replies);

  std::string complete(const LlmRequest& req) override;
  std::string provider_id() const override { return id_; }

  std::vector<LlmRequest> calls() const;
  std::size_t call_count() const;
  std::size_t call_count(LlmTask task) const;

 private:
  struct Script {
    std::vector<std::string> replies;
    std::size_t next = 0;
  };
  static std::string key(LlmTask task, std::string_view subject);

  mutable std::mutex mu_;
  std::map<std::string, Script> scripts_;
  std::vector<LlmRequest> calls_;
  std::string id_ = "scripted";
};

// Wraps a callback; handy for asserting on prompt content in tests.
class FunctionLlm : public LlmProvider {
 public:
  using Fn = std::function<std::string(const LlmRequest&)>;
  explicit FunctionLlm(Fn fn, std::string id = "function") : fn_(std::move(fn)), id_(std::move(id)) {}

  std::string complete(const LlmRequest& req) override;
  std::string provider_id() const override { return id_; }
  std::size_t call_count() const;

 private:
  Fn fn_;
  std::string id_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

}  // namespace xcheck
