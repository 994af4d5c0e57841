#include "agentforge/rollout.hpp"

#include <algorithm>

#include "agentforge/prompts.hpp"

namespace agentforge::rollout {

using nlohmann::json;

std::string identity_name(PolicyIdentity id) { return id == PolicyIdentity::expert ? "e" : "l"; }

PolicyIdentity identity_from_name(const std::string& name) {
  if (name == "e") return PolicyIdentity::expert;
  if (name == "l") return PolicyIdentity::learner;
  throw ParseError("unknown policy identity: " + name);
}

std::string outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::completed: return "completed";
    case Outcome::answer: return "answer";
    case Outcome::step_budget_exhausted: return "step_budget_exhausted";
    case Outcome::aborted: return "aborted";
  }
  throw InvariantError("outcome_name: bad enum");
}

Outcome outcome_from_name(const std::string& name) {
  if (name == "completed") return Outcome::completed;
  if (name == "answer") return Outcome::answer;
  if (name == "step_budget_exhausted") return Outcome::step_budget_exhausted;
  if (name == "aborted") return Outcome::aborted;
  throw ParseError("unknown outcome: " + name);
}

namespace {

json step_to_json(const TrajectoryStep& step) {
  json j;
  j["t"] = step.t;
  j["obs"] = step.observation_ref;
  j["thought"] = step.thought;
  j["action"] = action_to_json(step.action);
  j["z"] = identity_name(step.z);
  if (step.monitor_verdict) {
    j["monitor"] = {{"deviated", step.monitor_verdict->deviated}, {"analysis", step.monitor_verdict->analysis}};
  }
  if (step.action_error) j["error"] = *step.action_error;
  if (step.rewrite_failed) j["rewrite_failed"] = true;
  return j;
}

TrajectoryStep step_from_json(const json& j) {
  TrajectoryStep step;
  step.t = j.at("t").get<int>();
  step.observation_ref = j.at("obs").get<std::string>();
  step.thought = j.at("thought").get<std::string>();
  step.action = action_from_json(j.at("action"));
  step.z = identity_from_name(j.at("z").get<std::string>());
  if (j.contains("monitor")) {
    MonitorVerdict verdict;
    verdict.deviated = j["monitor"].at("deviated").get<bool>();
    verdict.analysis = j["monitor"].at("analysis").get<std::string>();
    step.monitor_verdict = verdict;
  }
  if (j.contains("error")) step.action_error = j.at("error").get<std::string>();
  if (j.contains("rewrite_failed")) step.rewrite_failed = j.at("rewrite_failed").get<bool>();
  return step;
}

std::vector<prompts::HistoryLine> recent_lines(const std::vector<TrajectoryStep>& steps, size_t end,
                                               size_t window = 5) {
  std::vector<prompts::HistoryLine> lines;
  size_t begin = end > window ? end - window : 0;
  for (size_t i = begin; i < end && i < steps.size(); ++i) {
    prompts::HistoryLine line;
    line.t = steps[i].t;
    line.thought = steps[i].thought;
    line.action = action_to_string(steps[i].action);
    line.error = steps[i].action_error;
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string element_listing(const Observation& obs) {
  std::string listing;
  for (const A11yNode& node : obs.a11y) {
    listing += std::to_string(node.id) + ". [" + kind_name(node.kind) + "] \"" + node.label + "\"";
    if (!node.interactable) listing += " (display only)";
    listing += "\n";
  }
  if (listing.empty()) listing = "(no elements)\n";
  return listing;
}

bool transport_failure(const std::exception& e) {
  return dynamic_cast<const TransportError*>(&e) != nullptr || dynamic_cast<const DecodeError*>(&e) != nullptr;
}

}  // namespace

json trajectory_to_json(const Trajectory& trajectory) {
  json j;
  j["version"] = 1;
  json task;
  task["id"] = trajectory.task.id;
  task["text"] = trajectory.task.text;
  if (!(trajectory.task.goal == sim::TaskGoal{})) task["goal"] = sim::goal_to_json(trajectory.task.goal);
  j["task"] = task;
  j["strategy"] = trajectory.strategy;
  j["seed"] = trajectory.seed;
  j["outcome"] = outcome_name(trajectory.outcome);
  if (trajectory.final_answer) j["final_answer"] = *trajectory.final_answer;
  j["success"] = trajectory.success;
  j["steps"] = json::array();
  for (const TrajectoryStep& step : trajectory.steps) j["steps"].push_back(step_to_json(step));
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != 1) {
    throw ParseError("trajectory: unsupported or missing version");
  }
  Trajectory trajectory;
  trajectory.task.id = j.at("task").at("id").get<std::string>();
  trajectory.task.text = j.at("task").at("text").get<std::string>();
  if (j.at("task").contains("goal")) trajectory.task.goal = sim::goal_from_json(j.at("task").at("goal"));
  trajectory.strategy = j.at("strategy").get<std::string>();
  trajectory.seed = j.at("seed").get<uint64_t>();
  trajectory.outcome = outcome_from_name(j.at("outcome").get<std::string>());
  if (j.contains("final_answer")) trajectory.final_answer = j.at("final_answer").get<std::string>();
  trajectory.success = j.at("success").get<bool>();
  for (const json& s : j.at("steps")) trajectory.steps.push_back(step_from_json(s));
  return trajectory;
}

// --- policies ---

OracleExpertPolicy::OracleExpertPolicy(std::shared_ptr<const sim::SimAppSpec> spec) : spec_(std::move(spec)) {
  if (!spec_) throw ValidationError("OracleExpertPolicy: null spec");
}

sim::EnvState OracleExpertPolicy::replay_state(const std::vector<TrajectoryStep>& history) const {
  sim::EnvState state = sim::initial_state(*spec_);
  for (const TrajectoryStep& step : history) {
    if (step.action_error) continue;
    if (sim::apply_action(*spec_, state, step.action)) {
      throw InvariantError("history replay hit an invalid action that was recorded as valid");
    }
  }
  return state;
}

const sim::GoalDistances& OracleExpertPolicy::distances_for(const RolloutTask& task) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(task.id);
  if (it == cache_.end()) {
    it = cache_.emplace(task.id, std::make_shared<sim::GoalDistances>(*spec_, task.goal)).first;
  }
  return *it->second;
}

Decision OracleExpertPolicy::decide(const RolloutTask& task, const Observation& obs,
                                    const std::vector<TrajectoryStep>& history,
                                    const std::optional<std::string>& deviation_analysis) {
  const sim::GoalDistances& distances = distances_for(task);
  sim::EnvState state = replay_state(history);
  if (state.current_screen != obs.screen_id) {
    throw InvariantError("replayed state disagrees with the observed screen");
  }

  std::string prefix = deviation_analysis ? "A deviation was flagged; replanning from the current state. " : "";
  if (distances.satisfied(state)) {
    if (task.goal.required_answer) {
      return {prefix + "The required information is in place; submitting the answer.",
              ActionCommand::answer_with(*task.goal.required_answer)};
    }
    return {prefix + "All goal conditions hold; completing the task.", ActionCommand::complete()};
  }
  std::optional<ActionCommand> action = distances.next_action(state);
  if (action) {
    return {prefix + "Moving toward the goal; about " + std::to_string(distances.at(state)) + " steps remain.",
            *action};
  }
  // unreachable goal: deterministic wander keeps the episode well-formed
  for (const A11yNode& node : obs.a11y) {
    if (node.interactable && node.kind == ElementKind::nav) {
      return {prefix + "The goal is unreachable from here; exploring via the first navigation control.",
              ActionCommand::click_on(node.id)};
    }
  }
  return {prefix + "The goal is unreachable and no navigation is available; stopping.", ActionCommand::complete()};
}

EpsilonNoisyLearner::EpsilonNoisyLearner(std::shared_ptr<const sim::SimAppSpec> spec, double epsilon, uint64_t seed)
    : OracleExpertPolicy(std::move(spec)), epsilon_(epsilon), seed_(seed) {
  if (epsilon_ < 0.0 || epsilon_ > 1.0) throw ValidationError("EpsilonNoisyLearner: epsilon must be in [0, 1]");
}

Decision EpsilonNoisyLearner::decide(const RolloutTask& task, const Observation& obs,
                                     const std::vector<TrajectoryStep>& history,
                                     const std::optional<std::string>& deviation_analysis) {
  uint64_t h = mix64(mix64(seed_, static_cast<uint64_t>(round_) + 1),
                     mix64(fnv1a64(task.id), mix64(static_cast<uint64_t>(history.size()), observation_digest(obs))));
  Rng rng(h);
  if (!rng.chance(epsilon_)) return OracleExpertPolicy::decide(task, obs, history, deviation_analysis);

  switch (rng.below(4)) {
    case 0: {
      const A11yNode& node = obs.a11y[rng.below(obs.a11y.size())];
      return {"Trying the '" + node.label + "' control to see what it does.", ActionCommand::click_on(node.id)};
    }
    case 1: {
      int ghost = static_cast<int>(50 + rng.below(10));
      return {"Tapping near the edge of the screen.", ActionCommand::click_on(ghost)};
    }
    case 2: {
      const A11yNode& node = obs.a11y[rng.below(obs.a11y.size())];
      const auto& lexicon = sim::typed_lexicon();
      return {"Entering some text into '" + node.label + "'.",
              ActionCommand::type_into(node.id, lexicon[rng.below(lexicon.size())])};
    }
    default:
      return {"Going back to the previous screen.", ActionCommand::go_back()};
  }
}

TabularLearner::TabularLearner(std::shared_ptr<PolicyRole> fallback) : fallback_(std::move(fallback)) {
  if (!fallback_) throw ValidationError("TabularLearner: null fallback policy");
}

Decision TabularLearner::decide(const RolloutTask& task, const Observation& obs,
                                const std::vector<TrajectoryStep>& history,
                                const std::optional<std::string>& deviation_analysis) {
  std::string key =
      task.id + "\x1f" + std::to_string(history.size()) + "\x1f" + hex16(observation_digest(obs));
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  return fallback_->decide(task, obs, history, deviation_analysis);
}

void TabularLearner::absorb(const std::vector<Trajectory>& successes) {
  std::lock_guard<std::mutex> lock(mu_);
  for (const Trajectory& trajectory : successes) {
    for (const TrajectoryStep& step : trajectory.steps) {
      std::string key =
          trajectory.task.id + "\x1f" + std::to_string(step.t) + "\x1f" + step.observation_ref;
      memo_[key] = Decision{step.thought, step.action};
    }
  }
}

void TabularLearner::begin_round(int round) { fallback_->begin_round(round); }

LlmPolicy::LlmPolicy(std::shared_ptr<providers::ChatBackend> backend, PolicyIdentity identity)
    : backend_(std::move(backend)), identity_(identity) {
  if (!backend_) throw ValidationError("LlmPolicy: null backend");
}

Decision LlmPolicy::decide(const RolloutTask& task, const Observation& obs,
                           const std::vector<TrajectoryStep>& history,
                           const std::optional<std::string>& deviation_analysis) {
  providers::GenerationRequest request =
      prompts::make_policy_request(task.text, recent_lines(history, history.size()),
                                   hex16(observation_digest(obs)), element_listing(obs), deviation_analysis);
  std::string raw = backend_->chat_generate(request);
  try {
    json j = json::parse(providers::extract_json_span(raw, '{', '}'));
    Decision decision;
    decision.thought = j.at("thought").get<std::string>();
    decision.action = action_from_json(j.at("action"));
    return decision;
  } catch (const std::exception& e) {
    throw DecodeError(std::string("policy reply unparseable: ") + e.what(), raw);
  }
}

// --- monitors & judges ---

MonitorVerdict OracleMonitor::assess(const RolloutTask& task, const std::vector<TrajectoryStep>& history,
                                     const std::string& /*prev_ref*/, const std::string& /*cur_ref*/) {
  const sim::GoalDistances& distances = oracle_->distances_for(task);
  const size_t n = history.size();
  if (n == 0) return {};

  // distances after the last three prefixes; a step that fails to strictly
  // shrink the distance, within the last two steps, is a deviation
  auto distance_after = [&](size_t prefix_len) {
    std::vector<TrajectoryStep> prefix(history.begin(), history.begin() + static_cast<long>(prefix_len));
    return distances.at(oracle_->replay_state(prefix));
  };
  int d_end = distance_after(n);
  if (d_end == 0) return {};

  bool deviated = false;
  size_t window = std::min<size_t>(2, n);
  int later = d_end;
  for (size_t k = 0; k < window && !deviated; ++k) {
    int earlier = distance_after(n - k - 1);
    if (later < 0 || earlier < 0 || later >= earlier) deviated = true;
    later = earlier;
  }
  if (!deviated) return {};
  MonitorVerdict verdict;
  verdict.deviated = true;
  verdict.analysis =
      "Recent actions made no progress toward the task goal; execution has drifted off a productive path.";
  return verdict;
}

MonitorVerdict LlmMonitor::assess(const RolloutTask& task, const std::vector<TrajectoryStep>& history,
                                  const std::string& prev_ref, const std::string& cur_ref) {
  providers::GenerationRequest request =
      prompts::make_monitor_request(task.text, recent_lines(history, history.size()), prev_ref, cur_ref);
  std::string raw = backend_->chat_generate(request);
  try {
    json j = json::parse(providers::extract_json_span(raw, '{', '}'));
    MonitorVerdict verdict;
    verdict.deviated = j.at("deviated").get<bool>();
    if (j.contains("analysis") && j["analysis"].is_string()) verdict.analysis = j["analysis"].get<std::string>();
    if (verdict.deviated && verdict.analysis.empty()) verdict.analysis = "deviation flagged by the monitor";
    return verdict;
  } catch (const std::exception& e) {
    throw DecodeError(std::string("monitor reply unparseable: ") + e.what(), raw);
  }
}

bool OracleJudge::judge(const Trajectory& trajectory, const Environment& env) {
  const auto* sim_env = dynamic_cast<const sim::SimEnv*>(&env);
  if (!sim_env) throw ValidationError("the oracle judge requires the simulated environment");
  if (!trajectory.retained()) return false;
  return sim::goal_check(sim_env->spec(), sim_env->state(), trajectory.task.goal, sim_env->final_answer());
}

bool LlmJudge::judge(const Trajectory& trajectory, const Environment& /*env*/) {
  if (!trajectory.retained() || trajectory.steps.empty()) return false;
  providers::GenerationRequest request = prompts::make_judge_request(
      trajectory.task.text, trajectory.steps.back().observation_ref, trajectory.final_answer);
  std::string raw = backend_->chat_generate(request);
  try {
    json j = json::parse(providers::extract_json_span(raw, '{', '}'));
    return j.at("success").get<bool>();
  } catch (const std::exception& e) {
    throw DecodeError(std::string("judge reply unparseable: ") + e.what(), raw);
  }
}

// --- strategies ---

namespace {

// records the step; returns true when the action was terminal (episode done)
bool execute_step(Environment& env, ObservationStore& store, Trajectory& trajectory, Observation& obs,
                  std::string& obs_ref, int t, const Decision& decision, PolicyIdentity z) {
  TrajectoryStep step;
  step.t = t;
  step.observation_ref = obs_ref;
  step.thought = decision.thought;
  step.action = decision.action;
  step.z = z;

  if (decision.action.is_terminal()) {
    env.step(decision.action);
    trajectory.steps.push_back(std::move(step));
    if (decision.action.kind == ActionKind::answer) {
      trajectory.outcome = Outcome::answer;
      trajectory.final_answer = decision.action.text;
    } else {
      trajectory.outcome = Outcome::completed;
    }
    return true;
  }

  StepResult result = env.step(decision.action);
  if (!result.valid) step.action_error = result.error;
  trajectory.steps.push_back(std::move(step));
  obs = std::move(result.obs);
  obs_ref = store.put(obs);
  return false;
}

}  // namespace

Trajectory rollout_single_policy(const RolloutTask& task, Environment& env, ObservationStore& store,
                                 PolicyRole& policy, const std::string& strategy, uint64_t seed, int max_steps) {
  if (max_steps < 1) throw ValidationError("rollout: max_steps must be >= 1");
  Trajectory trajectory;
  trajectory.task = task;
  trajectory.strategy = strategy;
  trajectory.seed = seed;

  Observation obs = env.reset();
  std::string obs_ref = store.put(obs);
  try {
    for (int t = 0; t < max_steps; ++t) {
      Decision decision = policy.decide(task, obs, trajectory.steps, std::nullopt);
      if (execute_step(env, store, trajectory, obs, obs_ref, t, decision, policy.identity())) return trajectory;
    }
    trajectory.outcome = Outcome::step_budget_exhausted;
  } catch (const std::exception& e) {
    if (!transport_failure(e)) throw;
    trajectory.outcome = Outcome::aborted;
  }
  return trajectory;
}

Trajectory rollout_expert(const RolloutTask& task, Environment& env, ObservationStore& store, PolicyRole& expert,
                          uint64_t seed, int max_steps) {
  return rollout_single_policy(task, env, store, expert, "expert", seed, max_steps);
}

Trajectory rollout_random_switch(const RolloutTask& task, Environment& env, ObservationStore& store,
                                 PolicyRole& expert, PolicyRole& learner, double p, uint64_t seed, int max_steps) {
  if (p < 0.0 || p > 1.0) throw ValidationError("rollout_random_switch: p must be in [0, 1]");
  if (max_steps < 1) throw ValidationError("rollout: max_steps must be >= 1");
  Trajectory trajectory;
  trajectory.task = task;
  trajectory.strategy = "random-switch";
  trajectory.seed = seed;

  Rng coin(mix64(seed, fnv1a64(task.id)));
  Observation obs = env.reset();
  std::string obs_ref = store.put(obs);
  try {
    for (int t = 0; t < max_steps; ++t) {
      Decision expert_decision = expert.decide(task, obs, trajectory.steps, std::nullopt);
      Decision learner_decision = learner.decide(task, obs, trajectory.steps, std::nullopt);

      bool agree = learner_decision.action.kind == expert_decision.action.kind &&
                   learner_decision.action.element == expert_decision.action.element;
      Decision chosen = expert_decision;
      PolicyIdentity z = PolicyIdentity::expert;
      if (!agree && !learner_decision.action.is_terminal() && coin.chance(p)) {
        chosen = learner_decision;
        z = PolicyIdentity::learner;
      }
      if (execute_step(env, store, trajectory, obs, obs_ref, t, chosen, z)) return trajectory;
    }
    trajectory.outcome = Outcome::step_budget_exhausted;
  } catch (const std::exception& e) {
    if (!transport_failure(e)) throw;
    trajectory.outcome = Outcome::aborted;
  }
  return trajectory;
}

Trajectory rollout_error_intervention(const RolloutTask& task, Environment& env, ObservationStore& store,
                                      PolicyRole& learner, PolicyRole& expert, DeviationMonitor& monitor,
                                      const InterventionConfig& config, uint64_t seed, int max_steps) {
  if (config.max_interventions < 1) throw ValidationError("rollout: max_interventions must be >= 1");
  if (config.min_expert_steps < 1) throw ValidationError("rollout: min_expert_steps must be >= 1");
  if (max_steps < 1) throw ValidationError("rollout: max_steps must be >= 1");
  Trajectory trajectory;
  trajectory.task = task;
  trajectory.strategy = "error-intervention";
  trajectory.seed = seed;

  Observation obs = env.reset();
  std::string obs_ref = store.put(obs);
  int interventions = 0;
  int expert_steps_left = 0;
  std::optional<std::string> pending_analysis;
  try {
    for (int t = 0; t < max_steps; ++t) {
      bool expert_turn = expert_steps_left > 0;
      PolicyRole& active = expert_turn ? expert : learner;
      std::optional<std::string> analysis;
      if (expert_turn) {
        analysis = std::move(pending_analysis);
        pending_analysis.reset();
        --expert_steps_left;
      }
      Decision decision = active.decide(task, obs, trajectory.steps, analysis);
      std::string prev_ref = obs_ref;
      bool terminal = execute_step(env, store, trajectory, obs, obs_ref, t, decision, active.identity());
      if (terminal) return trajectory;

      if (!expert_turn) {
        MonitorVerdict verdict = monitor.assess(task, trajectory.steps, prev_ref, obs_ref);
        trajectory.steps.back().monitor_verdict = verdict;
        if (verdict.deviated && interventions < config.max_interventions) {
          ++interventions;
          expert_steps_left = config.min_expert_steps;
          pending_analysis = verdict.analysis;
        }
      }
    }
    trajectory.outcome = Outcome::step_budget_exhausted;
  } catch (const std::exception& e) {
    if (!transport_failure(e)) throw;
    trajectory.outcome = Outcome::aborted;
  }
  return trajectory;
}

SelfEvolutionResult self_evolution(const std::vector<RolloutTask>& tasks, const EnvFactory& make_env,
                                   ObservationStore& store, PolicyRole& learner, SuccessJudge& judge, int rounds,
                                   uint64_t seed, int max_steps, std::vector<std::string>* warnings) {
  if (rounds < 0) throw ValidationError("self_evolution: rounds must be >= 0");
  SelfEvolutionResult result;
  for (int round = 0; round < rounds; ++round) {
    learner.begin_round(round);
    std::vector<Trajectory> round_successes;
    for (const RolloutTask& task : tasks) {
      std::unique_ptr<Environment> env = make_env(task);
      if (!env) throw InvariantError("self_evolution: environment factory returned null");
      Trajectory trajectory =
          rollout_single_policy(task, *env, store, learner, "self-evolution", mix64(seed, round), max_steps);
      try {
        trajectory.success = judge.judge(trajectory, *env);
      } catch (const std::exception& e) {
        if (!transport_failure(e)) throw;
        if (warnings) warnings->push_back("judge failed for task " + task.id + ": " + e.what());
        continue;
      }
      if (trajectory.success) round_successes.push_back(std::move(trajectory));
    }
    learner.absorb(round_successes);
    result.successes_per_round.push_back(round_successes.size());
    for (Trajectory& trajectory : round_successes) result.successes.push_back(std::move(trajectory));
  }
  return result;
}

// --- training extraction ---

std::vector<TrainingSample> extract_training_samples(const Trajectory& trajectory) {
  std::vector<TrainingSample> samples;
  if (!trajectory.retained()) return samples;
  for (size_t i = 0; i < trajectory.steps.size(); ++i) {
    const TrajectoryStep& step = trajectory.steps[i];
    if (step.z != PolicyIdentity::expert) continue;
    TrainingSample sample;
    sample.task_id = trajectory.task.id;
    sample.instruction = trajectory.task.text;
    sample.history.assign(trajectory.steps.begin(), trajectory.steps.begin() + static_cast<long>(i));
    sample.target_thought = step.thought;
    sample.target_action = step.action;
    samples.push_back(std::move(sample));
  }
  return samples;
}

json training_sample_to_json(const TrainingSample& sample) {
  json j;
  j["task_id"] = sample.task_id;
  j["instruction"] = sample.instruction;
  j["history"] = json::array();
  for (const TrajectoryStep& step : sample.history) j["history"].push_back(step_to_json(step));
  j["target_thought"] = sample.target_thought;
  j["target_action"] = action_to_json(sample.target_action);
  return j;
}

TrainingSample training_sample_from_json(const json& j) {
  TrainingSample sample;
  sample.task_id = j.at("task_id").get<std::string>();
  sample.instruction = j.at("instruction").get<std::string>();
  for (const json& s : j.at("history")) sample.history.push_back(step_from_json(s));
  sample.target_thought = j.at("target_thought").get<std::string>();
  sample.target_action = action_from_json(j.at("target_action"));
  return sample;
}

void rewrite_thoughts(Trajectory& trajectory, providers::ChatBackend& backend, std::vector<std::string>* warnings) {
  for (size_t i = 0; i < trajectory.steps.size(); ++i) {
    TrajectoryStep& step = trajectory.steps[i];
    providers::GenerationRequest request =
        prompts::make_rewrite_request(trajectory.task.text, recent_lines(trajectory.steps, i),
                                      step.observation_ref, action_to_string(step.action), step.thought);
    try {
      std::string rewritten = trim(backend.chat_generate(request));
      if (rewritten.empty()) throw DecodeError("rewriter returned an empty thought", "");
      step.thought = rewritten;
    } catch (const std::exception& e) {
      if (!transport_failure(e)) throw;
      step.rewrite_failed = true;
      if (warnings) {
        warnings->push_back("thought rewrite failed for " + trajectory.task.id + " step " +
                            std::to_string(step.t) + ": " + e.what());
      }
    }
  }
}

int count_interventions(const Trajectory& trajectory) {
  int count = 0;
  for (size_t i = 1; i < trajectory.steps.size(); ++i) {
    if (trajectory.steps[i].z == PolicyIdentity::expert && trajectory.steps[i - 1].z == PolicyIdentity::learner) {
      ++count;
    }
  }
  return count;
}

// --- persistence ---

std::filesystem::path save_trajectory(const Trajectory& trajectory, const std::filesystem::path& root) {
  std::filesystem::path dir = root / trajectory.strategy;
  std::filesystem::create_directories(dir);
  std::filesystem::path path = dir / (trajectory.task.id + ".json");
  write_text_file_atomic(path, trajectory_to_json(trajectory).dump(2) + "\n");
  return path;
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  return trajectory_from_json(json::parse(read_text_file(path)));
}

std::vector<Trajectory> load_trajectories_for_strategy(const std::filesystem::path& root,
                                                       const std::string& strategy) {
  std::filesystem::path dir = root / strategy;
  if (!std::filesystem::exists(dir)) throw StoreError("no trajectories found under " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Trajectory> trajectories;
  trajectories.reserve(files.size());
  for (const auto& file : files) trajectories.push_back(load_trajectory(file));
  return trajectories;
}

}  // namespace agentforge::rollout
