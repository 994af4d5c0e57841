#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agentforge/common.hpp"
#include "agentforge/embedding.hpp"
#include "agentforge/envmem.hpp"
#include "agentforge/providers.hpp"

namespace agentforge::synthesizer {

struct SynthesisContext {
  int focal_screen = -1;
  std::optional<int> predecessor;  // node id
  std::vector<int> successors;     // node ids, at most 3
  std::vector<int> long_term;      // functionality ids, at most k
};

struct QualityScores {
  int complexity = 0;
  int clarity = 0;
  int reasonableness = 0;

  bool operator==(const QualityScores&) const = default;
};

struct CandidateInstruction {
  std::string app_name;
  std::string text;
  std::string reasoning;
  int source_screen = -1;
  QualityScores scores;  // filled by filtering stage 1
  Embedding embedding;   // filled by filtering stage 2
};

struct TaskInstruction {
  std::string id;  // {app}-NNNN in final per-app order
  std::string app_name;
  std::string text;
  std::string reasoning;
  int source_screen = -1;
  QualityScores scores;
  Embedding embedding;
};

// predecessor: one seeded uniform draw over inbound neighbors; successors: up
// to 3 seeded draws over outbound neighbors; long_term: retrieval excluding
// the focal screen and all its neighbors
SynthesisContext build_context(const envmem::EnvironmentMemory& memory, int screen_id, uint64_t seed,
                               int k_long_term = 30);

// one generator call for one context; candidates carry the focal screen;
// parse failures log a warning and yield {}
std::vector<CandidateInstruction> generate_instructions(const envmem::EnvironmentMemory& memory,
                                                        const SynthesisContext& context,
                                                        providers::ChatBackend& generator,
                                                        std::vector<std::string>* warnings = nullptr);

struct FilterConfig {
  int clarity_min = 4;
  int reason_min = 4;
  double dedup_threshold = 0.8;
  int per_app_cap = 140;
  int jobs = 1;
};

// stage 1: score and threshold; stage 2: sort by (complexity desc, clarity
// desc, reasonableness desc, text asc) and greedily dedup by cosine; stage 3:
// cap each app's count preserving order. Scorer failures retry once, then drop.
std::vector<TaskInstruction> filter_instructions(std::vector<CandidateInstruction> candidates,
                                                 providers::Embedder& embedder, providers::ChatBackend& scorer,
                                                 const FilterConfig& config,
                                                 std::vector<std::string>* warnings = nullptr);

// scores parsed from the scorer's reply; nullopt on malformed output
std::optional<QualityScores> parse_scores(const std::string& raw);

// root/{app}.jsonl + root/{app}.emb.bin (embedding_ref = row index)
void save_instructions(const std::filesystem::path& root, const std::vector<TaskInstruction>& instructions);
std::vector<TaskInstruction> load_instructions(const std::filesystem::path& root, const std::string& app_name);

}  // namespace agentforge::synthesizer
