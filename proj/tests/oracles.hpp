#pragma once

// Independent brute-force reference implementations used to cross-check the
// library, plus scripted model doubles. Everything here is written from the
// documented behavior with its own arithmetic (own FNV, own cosine, own BFS),
// so agreement with the library is meaningful evidence.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "agentforge/envmem.hpp"
#include "agentforge/explorer.hpp"
#include "agentforge/providers.hpp"
#include "agentforge/sim.hpp"

namespace oracle {

// --- plumbing -------------------------------------------------------------

struct TempDir {
  std::filesystem::path path;
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

// relative path -> file bytes for every regular file under root
std::map<std::string, std::string> read_tree(const std::filesystem::path& root);

// --- text embedding -------------------------------------------------------

// Token-multiset feature hashing, recomputed via an explicit token-count map.
std::vector<float> embed_text(const std::string& text, std::size_t dim = 256);
double cosine(const std::vector<float>& a, const std::vector<float>& b);

// --- perceptual hash ------------------------------------------------------

// 9x8 box-average difference hash computed cell-by-cell into a table first.
std::uint64_t dhash(const agentforge::PixelGrid& grid);
double bit_similarity(std::uint64_t a, std::uint64_t b);

// Greedy clustering of ordered (ref, hash) pairs: each joins the first
// cluster (creation order) whose representative is >= tau similar, else
// founds a new cluster. Returns ref -> cluster index.
std::map<std::string, int> greedy_clusters(
    const std::vector<std::pair<std::string, std::uint64_t>>& ordered, double tau);

// --- environment memory ---------------------------------------------------

struct NeighborhoodFacts {
  std::vector<std::set<int>> neighbors;
  std::vector<std::set<int>> inbound;
  std::vector<std::set<int>> outbound;
  std::vector<std::optional<std::pair<std::string, agentforge::ActionCommand>>> first_inbound;
};

// Recounts adjacency directly from raw trajectories given ref -> node.
NeighborhoodFacts recount_neighborhood(
    const std::vector<agentforge::explorer::ExplorationTrajectory>& trajs,
    const std::map<std::string, int>& ref_to_node, std::size_t node_count);

// Greedy diversity admission over the full pairwise cosine matrix: admit in
// input order while every cosine against the admitted set stays < threshold.
std::vector<std::size_t> diversity_admit(const std::vector<std::vector<float>>& vecs,
                                         double threshold);

// Diversified top-k: order by (cosine to query desc, id asc), then admit
// greedily under the pairwise rule until k results.
std::vector<int> retrieve(const std::vector<std::pair<int, std::vector<float>>>& pool,
                          const std::vector<float>& query, int k, double threshold);

// --- planner --------------------------------------------------------------

// Forward BFS over (screen, concrete relevant-field values). Type edges set a
// relevant string field either to the goal value or to a non-goal sentinel;
// moves on irrelevant fields are product self-loops and are skipped. Returns
// -1 when no goal-satisfying product state is reachable.
int product_bfs_distance(const agentforge::sim::SimAppSpec& spec,
                         const agentforge::sim::EnvState& start,
                         const agentforge::sim::TaskGoal& goal);

// --- instruction filter ---------------------------------------------------

struct ScoredCandidate {
  std::string app_name;
  std::string text;
  int clarity = 0;
  int complexity = 0;
  int reasonableness = 0;
  std::vector<float> embedding;
};

struct FilteredInstruction {
  std::string id;
  std::string app_name;
  std::string text;
};

// Threshold -> global sort -> greedy dedup -> per-app cap on pre-scored
// candidates; survivors keep global order and receive {app}-NNNN ids.
std::vector<FilteredInstruction> filter_pipeline(std::vector<ScoredCandidate> cands,
                                                 int clarity_min, int reason_min,
                                                 double dedup_threshold,
                                                 std::size_t per_app_cap);

// --- analyzer -------------------------------------------------------------

std::vector<std::vector<double>> cosine_matrix(const std::vector<std::vector<float>>& rows,
                                               const std::vector<std::vector<float>>& cols);

// --- scripted model doubles -----------------------------------------------

class ScriptedEmbedder final : public agentforge::providers::Embedder {
 public:
  explicit ScriptedEmbedder(int dim = 8);
  // unknown texts embed as a deterministic fallback basis vector
  void set(const std::string& text, std::vector<float> vec);
  int dimension() const override { return dim_; }
  std::vector<agentforge::Embedding> embed_texts(const std::vector<std::string>& texts) override;

 private:
  int dim_;
  std::map<std::string, std::vector<float>> table_;
};

// FIFO response script; records every request it saw.
class ScriptedChat final : public agentforge::providers::ChatBackend {
 public:
  explicit ScriptedChat(std::vector<std::string> responses, std::string fallback = "");
  std::string chat_generate(const agentforge::providers::GenerationRequest& request) override;
  const std::vector<agentforge::providers::GenerationRequest>& calls() const { return calls_; }

 private:
  std::vector<std::string> responses_;
  std::string fallback_;
  std::size_t next_ = 0;
  std::vector<agentforge::providers::GenerationRequest> calls_;
};

// Handler-backed chat double for content-keyed replies.
class FnChat final : public agentforge::providers::ChatBackend {
 public:
  using Handler = std::function<std::string(const agentforge::providers::GenerationRequest&)>;
  explicit FnChat(Handler handler) : handler_(std::move(handler)) {}
  std::string chat_generate(const agentforge::providers::GenerationRequest& request) override {
    return handler_(request);
  }

 private:
  Handler handler_;
};

// request user text (all text parts joined) — convenience for keyed doubles
std::string request_text(const agentforge::providers::GenerationRequest& request);

}  // namespace oracle
