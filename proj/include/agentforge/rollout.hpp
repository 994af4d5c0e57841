#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentforge/common.hpp"
#include "agentforge/env.hpp"
#include "agentforge/providers.hpp"
#include "agentforge/sim.hpp"

namespace agentforge::rollout {

enum class PolicyIdentity { expert, learner };
std::string identity_name(PolicyIdentity id);
PolicyIdentity identity_from_name(const std::string& name);

struct RolloutTask {
  std::string id;
  std::string text;     // instruction given to policies
  sim::TaskGoal goal;   // consumed by oracle policies/judges; LLM roles ignore it
};

struct MonitorVerdict {
  bool deviated = false;
  std::string analysis;

  bool operator==(const MonitorVerdict&) const = default;
};

struct TrajectoryStep {
  int t = 0;
  std::string observation_ref;  // observation the acting policy saw
  std::string thought;
  ActionCommand action;
  PolicyIdentity z = PolicyIdentity::expert;
  std::optional<MonitorVerdict> monitor_verdict;  // present only when the monitor ran
  std::optional<std::string> action_error;        // invalid-action record
  bool rewrite_failed = false;
};

enum class Outcome { completed, answer, step_budget_exhausted, aborted };
std::string outcome_name(Outcome outcome);
Outcome outcome_from_name(const std::string& name);

struct Trajectory {
  RolloutTask task;
  std::string strategy;
  uint64_t seed = 0;
  std::vector<TrajectoryStep> steps;
  Outcome outcome = Outcome::step_budget_exhausted;
  std::optional<std::string> final_answer;
  bool success = false;  // judge verdict, filled after the rollout

  bool retained() const { return outcome == Outcome::completed || outcome == Outcome::answer; }
};

nlohmann::json trajectory_to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const nlohmann::json& j);

struct Decision {
  std::string thought;
  ActionCommand action;
};

class PolicyRole {
 public:
  virtual ~PolicyRole() = default;
  virtual PolicyIdentity identity() const = 0;
  // deviation_analysis is set on the first expert step of an intervention
  virtual Decision decide(const RolloutTask& task, const Observation& obs,
                          const std::vector<TrajectoryStep>& history,
                          const std::optional<std::string>& deviation_analysis) = 0;
  // self-evolution hooks
  virtual void absorb(const std::vector<Trajectory>& /*successes*/) {}
  virtual void begin_round(int /*round*/) {}
};

class DeviationMonitor {
 public:
  virtual ~DeviationMonitor() = default;
  // called after each learner step with the full history (last element is the
  // step just executed), its pre-step observation ref, and the post-step ref
  virtual MonitorVerdict assess(const RolloutTask& task, const std::vector<TrajectoryStep>& history,
                                const std::string& prev_ref, const std::string& cur_ref) = 0;
};

class SuccessJudge {
 public:
  virtual ~SuccessJudge() = default;
  // called right after a rollout, while env still holds the final state
  virtual bool judge(const Trajectory& trajectory, const Environment& env) = 0;
};

// --- simulated-environment roles ---

// Plans with goal distances over the product graph; reconstructs the live
// state by replaying the history's valid actions from the initial state.
class OracleExpertPolicy : public PolicyRole {
 public:
  explicit OracleExpertPolicy(std::shared_ptr<const sim::SimAppSpec> spec);
  PolicyIdentity identity() const override { return PolicyIdentity::expert; }
  Decision decide(const RolloutTask& task, const Observation& obs, const std::vector<TrajectoryStep>& history,
                  const std::optional<std::string>& deviation_analysis) override;

  sim::EnvState replay_state(const std::vector<TrajectoryStep>& history) const;
  const sim::GoalDistances& distances_for(const RolloutTask& task);

 protected:
  std::shared_ptr<const sim::SimAppSpec> spec_;

 private:
  std::map<std::string, std::shared_ptr<sim::GoalDistances>> cache_;
  std::mutex mu_;
};

// Expert plan with probability 1-ε; otherwise seeded noise (clicks on
// arbitrary or missing elements, stray typing, back) — never a terminal.
// The per-step generator is derived from (seed, round, task, t, observation),
// so decisions do not depend on call order.
class EpsilonNoisyLearner final : public OracleExpertPolicy {
 public:
  EpsilonNoisyLearner(std::shared_ptr<const sim::SimAppSpec> spec, double epsilon, uint64_t seed);
  PolicyIdentity identity() const override { return PolicyIdentity::learner; }
  Decision decide(const RolloutTask& task, const Observation& obs, const std::vector<TrajectoryStep>& history,
                  const std::optional<std::string>& deviation_analysis) override;
  void begin_round(int round) override { round_ = round; }

 private:
  double epsilon_;
  uint64_t seed_;
  int round_ = 0;
};

// Replays absorbed successful steps exactly; falls back to a delegate
// policy on cache misses.
class TabularLearner final : public PolicyRole {
 public:
  explicit TabularLearner(std::shared_ptr<PolicyRole> fallback);
  PolicyIdentity identity() const override { return PolicyIdentity::learner; }
  Decision decide(const RolloutTask& task, const Observation& obs, const std::vector<TrajectoryStep>& history,
                  const std::optional<std::string>& deviation_analysis) override;
  void absorb(const std::vector<Trajectory>& successes) override;
  void begin_round(int round) override;

  size_t memo_size() const { return memo_.size(); }

 private:
  std::shared_ptr<PolicyRole> fallback_;
  std::map<std::string, Decision> memo_;  // key = task id \x1f t \x1f obs ref
  std::mutex mu_;
};

// LLM-backed policy: renders the element listing + history into the policy
// prompt and parses a {thought, action} reply.
class LlmPolicy final : public PolicyRole {
 public:
  LlmPolicy(std::shared_ptr<providers::ChatBackend> backend, PolicyIdentity identity);
  PolicyIdentity identity() const override { return identity_; }
  Decision decide(const RolloutTask& task, const Observation& obs, const std::vector<TrajectoryStep>& history,
                  const std::optional<std::string>& deviation_analysis) override;

 private:
  std::shared_ptr<providers::ChatBackend> backend_;
  PolicyIdentity identity_;
};

// Deviated iff the product-graph distance to goal failed to strictly
// decrease over the last two executed steps (replayed from history).
class OracleMonitor final : public DeviationMonitor {
 public:
  explicit OracleMonitor(std::shared_ptr<OracleExpertPolicy> oracle) : oracle_(std::move(oracle)) {}
  MonitorVerdict assess(const RolloutTask& task, const std::vector<TrajectoryStep>& history,
                        const std::string& prev_ref, const std::string& cur_ref) override;

 private:
  std::shared_ptr<OracleExpertPolicy> oracle_;
};

class LlmMonitor final : public DeviationMonitor {
 public:
  explicit LlmMonitor(std::shared_ptr<providers::ChatBackend> backend) : backend_(std::move(backend)) {}
  MonitorVerdict assess(const RolloutTask& task, const std::vector<TrajectoryStep>& history,
                        const std::string& prev_ref, const std::string& cur_ref) override;

 private:
  std::shared_ptr<providers::ChatBackend> backend_;
};

// goal_check on the live sim state
class OracleJudge final : public SuccessJudge {
 public:
  bool judge(const Trajectory& trajectory, const Environment& env) override;
};

class LlmJudge final : public SuccessJudge {
 public:
  explicit LlmJudge(std::shared_ptr<providers::ChatBackend> backend) : backend_(std::move(backend)) {}
  bool judge(const Trajectory& trajectory, const Environment& env) override;

 private:
  std::shared_ptr<providers::ChatBackend> backend_;
};

// --- rollout strategies ---

inline constexpr int kDefaultMaxSteps = 30;

// one policy acts every step until a terminal action or the budget
Trajectory rollout_single_policy(const RolloutTask& task, Environment& env, ObservationStore& store,
                                 PolicyRole& policy, const std::string& strategy, uint64_t seed,
                                 int max_steps = kDefaultMaxSteps);

Trajectory rollout_expert(const RolloutTask& task, Environment& env, ObservationStore& store, PolicyRole& expert,
                          uint64_t seed, int max_steps = kDefaultMaxSteps);

// both policies queried every step; one seeded coin is drawn per
// disagreement step (and only then), so flips can be replayed exactly
Trajectory rollout_random_switch(const RolloutTask& task, Environment& env, ObservationStore& store,
                                 PolicyRole& expert, PolicyRole& learner, double p, uint64_t seed,
                                 int max_steps = kDefaultMaxSteps);

struct InterventionConfig {
  int max_interventions = 2;
  int min_expert_steps = 3;
};

Trajectory rollout_error_intervention(const RolloutTask& task, Environment& env, ObservationStore& store,
                                      PolicyRole& learner, PolicyRole& expert, DeviationMonitor& monitor,
                                      const InterventionConfig& config, uint64_t seed,
                                      int max_steps = kDefaultMaxSteps);

using EnvFactory = std::function<std::unique_ptr<Environment>(const RolloutTask&)>;

struct SelfEvolutionResult {
  std::vector<Trajectory> successes;  // all rounds, rollout order
  std::vector<size_t> successes_per_round;
};

// per round: roll out every task with the learner, judge, feed successes to
// the learner's absorb hook; judge failures discard that trajectory
SelfEvolutionResult self_evolution(const std::vector<RolloutTask>& tasks, const EnvFactory& make_env,
                                   ObservationStore& store, PolicyRole& learner, SuccessJudge& judge, int rounds,
                                   uint64_t seed, int max_steps = kDefaultMaxSteps,
                                   std::vector<std::string>* warnings = nullptr);

// --- training extraction ---

struct TrainingSample {
  std::string task_id;
  std::string instruction;
  std::vector<TrajectoryStep> history;  // full prefix before the target step
  std::string target_thought;
  ActionCommand target_action;
};

std::vector<TrainingSample> extract_training_samples(const Trajectory& trajectory);

nlohmann::json training_sample_to_json(const TrainingSample& sample);
TrainingSample training_sample_from_json(const nlohmann::json& j);

// each step's thought is replaced by the generator's rewrite; failures keep
// the original thought and set rewrite_failed
void rewrite_thoughts(Trajectory& trajectory, providers::ChatBackend& generator,
                      std::vector<std::string>* warnings = nullptr);

// count of maximal learner→expert transitions in the z sequence
int count_interventions(const Trajectory& trajectory);

// trajectories/{strategy}/{task_id}.json
std::filesystem::path save_trajectory(const Trajectory& trajectory, const std::filesystem::path& root);
Trajectory load_trajectory(const std::filesystem::path& path);
std::vector<Trajectory> load_trajectories_for_strategy(const std::filesystem::path& root, const std::string& strategy);

}  // namespace agentforge::rollout
