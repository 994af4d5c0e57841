#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "agentforge/common.hpp"
#include "agentforge/env.hpp"
#include "agentforge/sim.hpp"

namespace agentforge::explorer {

struct ExplorationTrajectory {
  std::string app_name;
  int session_id = -1;
  uint64_t seed = 0;
  std::vector<TransitionRecord> transitions;
};

// screen identity for blacklist purposes: the perceptual-hash bits, so the
// same screen across data states shares one entry
uint64_t screen_fingerprint(const Observation& obs);

class ElementBlacklist {
 public:
  bool contains(uint64_t fingerprint, int element_id) const {
    return entries_.count({fingerprint, element_id}) > 0;
  }
  void add(uint64_t fingerprint, int element_id) { entries_.insert({fingerprint, element_id}); }
  size_t size() const { return entries_.size(); }

 private:
  std::set<std::pair<uint64_t, int>> entries_;
};

// One exploration session: `steps` uniform draws over interactable,
// non-blacklisted elements, starting from a fresh reset.
ExplorationTrajectory random_walk(Environment& env, ObservationStore& store, const std::string& app_name,
                                  int session_id, int steps, ElementBlacklist& blacklist, uint64_t seed);

struct CampaignResult {
  std::vector<ExplorationTrajectory> trajectories;  // ordered (app, session)
  std::vector<std::string> warnings;                // per-session failures, skipped
};

// sessions share a blacklist within an app; apps run independently (and may
// run on separate worker threads)
CampaignResult run_campaign(const std::vector<std::shared_ptr<const sim::SimAppSpec>>& specs,
                            int sessions_per_app, int steps_per_session, uint64_t base_seed,
                            ObservationStore& store, int jobs = 1);

// root/{app}/session_NNN.jsonl (one transition per line) + root/{app}/sessions.json
void save_trajectories(const std::filesystem::path& root, const std::vector<ExplorationTrajectory>& trajectories);
std::vector<ExplorationTrajectory> load_trajectories(const std::filesystem::path& root, const std::string& app_name);

}  // namespace agentforge::explorer
