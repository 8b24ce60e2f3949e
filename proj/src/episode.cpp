#include "gpsr/episode.hpp"

namespace gpsr {

using nlohmann::json;

std::vector<Exchange> EpisodeTrace::exchanges() const {
  std::vector<Exchange> out;
  if (planning) {
    for (const auto& a : planning->attempt_log) out.push_back(a.exchange);
  }
  for (const auto& ans : answers) {
    for (const auto& a : ans.log) out.push_back(a.exchange);
  }
  return out;
}

json EpisodeTrace::to_json() const {
  json j = {{"command", command}};
  if (planning) {
    json attempts = json::array();
    for (const auto& a : planning->attempt_log) {
      json entry = {{"response", a.exchange.response.content}, {"accepted", a.succeeded()}};
      if (auto k = a.failure_kind()) entry["failure"] = to_string(*k);
      if (const auto* p = std::get_if<ParseOutcome>(&a.classification); p && !p->parsed()) {
        entry["detail"] = p->failure().detail;
      } else if (const auto* v = std::get_if<ValidationReport>(&a.classification)) {
        entry["detail"] = v->detail;
      }
      if (a.corrective_suffix) entry["corrective_suffix"] = *a.corrective_suffix;
      attempts.push_back(entry);
    }
    j["planning"] = {{"planned", planning->planned()}, {"attempts", planning->attempts}, {"log", attempts}};
    if (planning->plan) j["planning"]["plan"] = render(*planning->plan);
  }
  json answers_j = json::array();
  for (const auto& a : answers) {
    answers_j.push_back({{"answered", a.answered()}, {"attempts", a.attempts}, {"text", a.text.value_or("")}});
  }
  j["answers"] = answers_j;
  if (execution) j["execution"] = execution->to_json();
  return j;
}

Transcript record_transcript(const EpisodeTrace& episode, std::string backend_id) {
  auto ex = episode.exchanges();
  return record_transcript(ex, std::move(backend_id));
}

}  // namespace gpsr
