#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentforge/config.hpp"
#include "agentforge/providers.hpp"
#include "agentforge/sim.hpp"

namespace agentforge::pipeline {

struct StageOptions {
  bool force = false;                    // wipe the stage's artifacts and rerun
  int jobs = 1;
  std::optional<uint64_t> seed_override;  // replaces the config seed
};

struct StageOutcome {
  std::string stage;
  bool skipped = false;  // manifest matched the current config; nothing done
  nlohmann::json manifest;
};

// Stage artifact layout under the output root:
//   suite/          generated app specs (explore)
//   exploration/    random-walk transition logs (explore)
//   observations/   content-addressed observation store (explore, rollout)
//   memory/         per-app environment memory (build-memory)
//   instructions/   filtered task instructions (synthesize)
//   trajectories/   per-strategy rollout trajectories (rollout)
//   analysis/       overlap + coverage reports (analyze)
//   training/       per-strategy training JSONL (export-training)
//   manifests/      one JSON manifest per completed stage
class Pipeline {
 public:
  Pipeline(config::PipelineConfig cfg, StageOptions opts);

  StageOutcome explore();
  StageOutcome build_memory();
  StageOutcome synthesize();
  StageOutcome rollout();
  StageOutcome analyze_overlap();
  StageOutcome analyze_coverage();
  StageOutcome export_training();

  const config::PipelineConfig& cfg() const { return cfg_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  uint64_t stage_seed(std::string_view stage) const;
  std::filesystem::path manifest_path(const std::string& stage) const;
  // digest-matching manifest present → outcome to return as-is
  std::optional<StageOutcome> begin_stage(const std::string& stage,
                                          const std::vector<std::filesystem::path>& owned);
  StageOutcome finish_stage(const std::string& stage, uint64_t seed, nlohmann::json counts, double elapsed_ms);
  void require_stage(const std::string& stage, const std::string& command) const;

  std::vector<std::shared_ptr<const sim::SimAppSpec>> generate_suite() const;
  std::vector<std::shared_ptr<const sim::SimAppSpec>> load_suite() const;
  providers::ProviderBundle make_providers(const providers::ImageResolver* resolver) const;

  config::PipelineConfig cfg_;
  StageOptions opts_;
  std::vector<std::string> warnings_;
};

}  // namespace agentforge::pipeline
