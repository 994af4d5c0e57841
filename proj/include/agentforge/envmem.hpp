#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "agentforge/common.hpp"
#include "agentforge/embedding.hpp"
#include "agentforge/env.hpp"
#include "agentforge/explorer.hpp"
#include "agentforge/providers.hpp"

namespace agentforge::envmem {

struct Functionality {
  int id = -1;         // dense per app, assigned in (screen id, annotation order)
  int screen_id = -1;  // owning node
  providers::AnnotationRecord::Kind kind = providers::AnnotationRecord::Kind::functionality;
  std::string label;
  std::string description;
  Embedding embedding;  // unit norm
  int index_row = -1;   // row in the retrieval index, -1 if filtered out
};

struct ScreenNode {
  int id = -1;
  std::string screen_ref;                    // representative observation
  std::vector<std::string> cluster_members;  // includes the representative
  std::vector<int> functionality_ids;
  std::set<int> neighbors;          // symmetric, no self-loops
  std::set<int> inbound_sources;    // nodes observed transitioning into this one
  std::set<int> outbound_targets;   // nodes observed transitioning out of this one
  // campaign-first transition that discovered this node, used as annotation context
  std::optional<std::pair<std::string, ActionCommand>> first_inbound;
  bool annotation_failed = false;
};

struct RetrievalIndex {
  int dimension = 0;
  std::vector<int> entry_ids;            // functionality ids, admission order
  std::vector<Embedding> entry_vectors;  // parallel to entry_ids
};

struct EnvironmentMemory {
  std::string app_name;
  double tau = 0.95;
  double diversity_threshold = 0.8;
  std::vector<ScreenNode> nodes;
  std::vector<Functionality> functionalities;
  RetrievalIndex index;
  Embedding app_embedding;  // retrieval query for nodes without functionalities

  const ScreenNode& node(int id) const;
  const Functionality& functionality(int id) const;
};

// greedy perceptual-hash clustering in campaign order; mapping is total over
// every observation reference appearing in the trajectories
std::pair<std::vector<ScreenNode>, std::map<std::string, int>> dedup_screens(
    const std::vector<explorer::ExplorationTrajectory>& trajectories, const ObservationStore& store,
    double tau = 0.95);

// mutual-neighbor relation from transition endpoints; also fills the directed
// inbound/outbound sets and each node's first inbound context
void build_neighborhood(std::vector<ScreenNode>& nodes, const std::map<std::string, int>& mapping,
                        const std::vector<explorer::ExplorationTrajectory>& trajectories);

// one annotator call for one node; parse failures flag the node and yield {}
std::vector<providers::AnnotationRecord> annotate_screen(const ScreenNode& node, const std::string& app_name,
                                                         providers::ChatBackend& annotator, bool& failed);

// batch-embed all functionality descriptions, then greedily admit entries in
// functionality-id order subject to pairwise cosine < diversity_threshold
void build_index(EnvironmentMemory& memory, providers::Embedder& embedder, double diversity_threshold = 0.8);

// top-k related functionalities by cosine, excluding given screens, with the
// same pairwise-diversity rule applied among the results
std::vector<int> retrieve_related(const EnvironmentMemory& memory, int query_screen_id, int k = 30,
                                  const std::set<int>& exclude = {});

struct MemoryBuildConfig {
  double tau = 0.95;
  double diversity_threshold = 0.8;
  int jobs = 1;
};

EnvironmentMemory build_memory(const std::string& app_name,
                               const std::vector<explorer::ExplorationTrajectory>& trajectories,
                               const ObservationStore& store, providers::ChatBackend& annotator,
                               providers::Embedder& embedder, const MemoryBuildConfig& config);

// memory/{app}/: nodes.jsonl, edges.jsonl, functionalities.jsonl,
// embeddings.bin (all rows), index.bin (admitted rows), app.bin, meta.json
void save_memory(const std::filesystem::path& root, const EnvironmentMemory& memory);
EnvironmentMemory load_memory(const std::filesystem::path& root, const std::string& app_name);

}  // namespace agentforge::envmem
