#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agentforge/common.hpp"

namespace agentforge::config {

struct ProviderSettings {
  std::string chat = "mock";   // "mock" or "remote"
  std::string embed = "mock";  // "mock" or "remote"
  uint64_t mock_seed = 9000;
  int embed_dim = 256;
  std::string base_url;  // remote only; AGENT_FORGE_BASE_URL overrides
  std::string chat_model = "gui-agent-chat";
  std::string embed_model = "gui-agent-embed";
};

struct SuiteSettings {
  std::vector<std::string> apps = {"notes", "timer", "gallery"};
  int n_screens = 8;
  int elements_per_screen = 5;
  int n_fields = 3;
};

struct ExploreSettings {
  int sessions_per_app = 5;
  int steps_per_session = 10;
};

struct MemorySettings {
  double tau = 0.95;
  double diversity_threshold = 0.8;
};

struct SynthesizeSettings {
  int k_long_term = 30;
  int clarity_min = 4;
  int reason_min = 4;
  double dedup_threshold = 0.8;
  int per_app_cap = 140;
};

struct RolloutSettings {
  std::string strategy = "error-intervention";  // expert | random-switch | error-intervention | self-evolution
  std::string policy = "oracle";                // oracle | llm
  std::string monitor = "oracle";               // oracle | llm
  std::string judge = "oracle";                 // oracle | llm
  int tasks_per_app = 8;
  int max_steps = 30;
  double epsilon = 0.3;    // noisy-learner noise rate
  double switch_p = 0.5;   // random-switch handover probability
  int max_interventions = 2;
  int min_expert_steps = 3;
  int rounds = 3;          // self-evolution only
  bool rewrite = false;    // rewrite thoughts on export
};

struct AnalyzeSettings {
  std::filesystem::path test_corpus;  // empty: benchmark tasks sampled from the suite
  int test_tasks_per_app = 5;
  std::vector<double> thresholds = {0.7};
  std::vector<double> ratios = {0.1, 0.2, 0.4};
  double match_threshold = 0.8;
  int curve_points = 4;
};

struct PipelineConfig {
  uint64_t seed = 1;
  std::filesystem::path output_root = "out";
  ProviderSettings providers;
  SuiteSettings suite;
  ExploreSettings explore;
  MemorySettings memory;
  SynthesizeSettings synthesize;
  RolloutSettings rollout;
  AnalyzeSettings analyze;

  // stable fingerprint of every effective setting (seed included); stage
  // manifests store it so unchanged reruns can no-op
  std::string digest() const;
};

// Minimal TOML-style subset: [section] headers; key = value lines; values are
// "strings", integers, floats, true/false, or one-line arrays of these;
// comments start with '#'. Relative paths resolve against base_dir.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace agentforge::config
