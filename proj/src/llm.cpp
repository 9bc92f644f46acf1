#include "xcheck/llm.hpp"

#include <fstream>

#include "xcheck/error.hpp"
#include "xcheck/strings.hpp"

namespace xcheck {

using nlohmann::json;

std::string_view to_string(LlmTask t) {
  switch (t) {
    case LlmTask::BuildGraph: return "build_graph";
    case LlmTask::BuildGraphConditional: return "build_graph_conditional";
    case LlmTask::RefineQuery: return "refine_query";
  }
  return "?";
}

std::optional<LlmTask> parse_llm_task(std::string_view s) {
  for (auto t : {LlmTask::BuildGraph, LlmTask::BuildGraphConditional, LlmTask::RefineQuery}) {
    if (str::iequals(s, to_string(t))) return t;
  }
  return std::nullopt;
}

void LlmProvider::set_max_retries(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "max_retries must be >= 1");
  max_retries_ = n;
}

std::string ScriptedLlm::key(LlmTask task, std::string_view subject) {
  return std::string(to_string(task)) + "\x1f" + str::lower(str::squash(subject));
}

ScriptedLlm::ScriptedLlm(const json& transcript) {
  if (!transcript.is_object()) throw Error(ErrorCode::InvalidConfig, "LLM transcript must be a JSON object");
  id_ = transcript.value("provider_id", id_);
  if (transcript.contains("max_retries")) set_max_retries(transcript["max_retries"].get<int>());
  for (const auto& e : transcript.value("entries", json::array())) {
    auto task = parse_llm_task(e.value("task", ""));
    if (!task) throw Error(ErrorCode::InvalidConfig, "transcript entry has unknown task " + e.value("task", ""));
    std::vector<std::string> replies;
    for (const auto& r : e.value("replies", json::array())) {
      replies.push_back(r.is_string() ? r.get<std::string>() : r.dump());
    }
    add(*task, e.value("subject", ""), std::move(replies));
  }
}

std::unique_ptr<ScriptedLlm> ScriptedLlm::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open LLM transcript " + path.string());
  try {
    return std::make_unique<ScriptedLlm>(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

void ScriptedLlm::add(LlmTask task, std::string_view subject, std::vector<std::string> replies) {
  if (replies.empty()) throw Error(ErrorCode::InvalidConfig, "scripted entry without replies");
  std::lock_guard lock(mu_);
  auto& s = scripts_[key(task, subject)];
  s.replies.insert(s.replies.end(), std::make_move_iterator(replies.begin()),
                   std::make_move_iterator(replies.end()));
}

std::string ScriptedLlm::complete(const LlmRequest& req) {
  std::lock_guard lock(mu_);
  calls_.push_back(req);
  auto it = scripts_.find(key(req.task, req.subject));
  if (it == scripts_.end()) {
    throw Error(ErrorCode::ProviderUnavailable,
                "no scripted " + std::string(to_string(req.task)) + " reply for \"" + req.subject + "\"");
  }
  auto& s = it->second;
  const auto& reply = s.replies[std::min(s.next, s.replies.size() - 1)];
  ++s.next;
  return reply;
}

std::vector<LlmRequest> ScriptedLlm::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t ScriptedLlm::call_count() const {
  std::lock_guard lock(mu_);
  return calls_.size();
}

std::size_t ScriptedLlm::call_count(LlmTask task) const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& c : calls_) n += c.task == task;
  return n;
}

std::string FunctionLlm::complete(const LlmRequest& req) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  return fn_(req);
}

std::size_t FunctionLlm::call_count() const {
  std::lock_guard lock(mu_);
  return calls_;
}

}  // namespace xcheck
