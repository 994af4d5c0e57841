#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agentforge/providers.hpp"

namespace agentforge::prompts {

// First sentence of each system prompt; mock backends dispatch on these.
inline constexpr std::string_view kAnnotationMarker = "You are a GUI screenshot analysis expert.";
inline constexpr std::string_view kSynthesisMarker = "You are a GUI explorer.";
inline constexpr std::string_view kScoringMarker = "You are a strict GUI task reviewer.";
inline constexpr std::string_view kMonitorMarker = "You are a GUI execution monitor.";
inline constexpr std::string_view kJudgeMarker = "You are a GUI task completion judge.";
inline constexpr std::string_view kRewriteMarker = "You rewrite a GUI agent's step-level chain-of-thought.";
inline constexpr std::string_view kDecomposeMarker = "You decompose a GUI task instruction";
inline constexpr std::string_view kPolicyMarker = "You are a GUI agent operating a mobile device.";

// screen annotation: Screen Before (optional) + Screen After + app/action text
providers::GenerationRequest make_annotation_request(const std::string& app_name,
                                                     const std::string& action_desc,
                                                     const std::optional<std::string>& before_ref,
                                                     const std::string& after_ref);

struct ScreenSection {
  std::string render_ref;
  // (kind name, description) per element, in functionality order
  std::vector<std::pair<std::string, std::string>> elements;
};

struct SynthesisPayload {
  std::string app_name;
  ScreenSection focal;
  std::optional<ScreenSection> predecessor;
  std::vector<ScreenSection> successors;       // at most 3
  std::vector<std::string> long_term;          // retrieved descriptions
};

providers::GenerationRequest make_synthesis_request(const SynthesisPayload& payload);

providers::GenerationRequest make_scoring_request(const std::string& app_name, const std::string& task_text);

struct HistoryLine {
  int t = 0;
  std::string thought;
  std::string action;
  std::optional<std::string> error;
};

providers::GenerationRequest make_monitor_request(const std::string& instruction,
                                                  const std::vector<HistoryLine>& recent,
                                                  const std::string& prev_ref,
                                                  const std::string& cur_ref);

providers::GenerationRequest make_judge_request(const std::string& instruction,
                                                const std::string& final_ref,
                                                const std::optional<std::string>& answer);

providers::GenerationRequest make_rewrite_request(const std::string& instruction,
                                                  const std::vector<HistoryLine>& recent,
                                                  const std::string& obs_ref,
                                                  const std::string& action,
                                                  const std::string& original_thought);

providers::GenerationRequest make_decompose_request(const std::string& task_text);

providers::GenerationRequest make_policy_request(const std::string& instruction,
                                                 const std::vector<HistoryLine>& recent,
                                                 const std::string& obs_ref,
                                                 const std::string& a11y_listing,
                                                 const std::optional<std::string>& deviation_analysis);

std::string render_history_lines(const std::vector<HistoryLine>& recent);

}  // namespace agentforge::prompts
