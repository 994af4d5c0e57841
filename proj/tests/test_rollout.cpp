#include <doctest.h>

#include <filesystem>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentforge/providers.hpp"
#include "agentforge/rollout.hpp"
#include "agentforge/sim.hpp"
#include "oracles.hpp"

using namespace agentforge;
using namespace agentforge::rollout;
using nlohmann::json;

namespace {

std::shared_ptr<const sim::SimAppSpec> make_spec(const std::string& name, uint64_t seed) {
  return std::make_shared<const sim::SimAppSpec>(sim::generate_app(name, {8, 5, 3}, seed));
}

RolloutTask as_task(const sim::SimTask& t) {
  RolloutTask task;
  task.id = t.id;
  task.text = t.text;
  task.goal = t.goal;
  return task;
}

size_t plan_length(const sim::SimAppSpec& spec, const RolloutTask& task) {
  return sim::shortest_plan(spec, sim::initial_state(spec), task.goal).size();
}

std::string steps_dump(const Trajectory& trajectory) {
  return trajectory_to_json(trajectory).at("steps").dump();
}

std::string step_dump(const TrajectoryStep& step) {
  json j;
  j["t"] = step.t;
  j["obs"] = step.observation_ref;
  j["thought"] = step.thought;
  j["action"] = action_to_json(step.action);
  j["z"] = identity_name(step.z);
  j["has_monitor"] = step.monitor_verdict.has_value();
  if (step.monitor_verdict) j["deviated"] = step.monitor_verdict->deviated;
  if (step.action_error) j["error"] = *step.action_error;
  return j.dump();
}

// polymorphic test policies ---------------------------------------------------

class TerminalLearner final : public PolicyRole {
 public:
  PolicyIdentity identity() const override { return PolicyIdentity::learner; }
  Decision decide(const RolloutTask&, const Observation&, const std::vector<TrajectoryStep>&,
                  const std::optional<std::string>&) override {
    return {"declaring victory immediately", ActionCommand::complete()};
  }
};

class GhostLearner final : public PolicyRole {
 public:
  PolicyIdentity identity() const override { return PolicyIdentity::learner; }
  Decision decide(const RolloutTask&, const Observation&, const std::vector<TrajectoryStep>&,
                  const std::optional<std::string>&) override {
    return {"poking a phantom control", ActionCommand::click_on(99)};
  }
};

class NavExpert final : public PolicyRole {
 public:
  PolicyIdentity identity() const override { return PolicyIdentity::expert; }
  Decision decide(const RolloutTask&, const Observation& obs, const std::vector<TrajectoryStep>&,
                  const std::optional<std::string>& analysis) override {
    analyses.push_back(analysis);
    for (const A11yNode& node : obs.a11y) {
      if (node.interactable && node.kind == ElementKind::nav) {
        return {"wandering onward", ActionCommand::click_on(node.id)};
      }
    }
    return {"nothing to click", ActionCommand::go_back()};
  }
  std::vector<std::optional<std::string>> analyses;
};

class AlwaysDeviatedMonitor final : public DeviationMonitor {
 public:
  MonitorVerdict assess(const RolloutTask&, const std::vector<TrajectoryStep>&, const std::string&,
                        const std::string&) override {
    return {true, "flagged by the always-on monitor"};
  }
};

// every finished expert segment (not cut off by the episode end) is >= minimum
void check_expert_segments(const Trajectory& trajectory, int min_expert_steps) {
  size_t i = 0;
  while (i < trajectory.steps.size()) {
    if (trajectory.steps[i].z != PolicyIdentity::expert) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < trajectory.steps.size() && trajectory.steps[j].z == PolicyIdentity::expert) ++j;
    if (j < trajectory.steps.size()) CHECK(j - i >= static_cast<size_t>(min_expert_steps));
    i = j;
  }
}

Trajectory synthetic_trajectory(const std::string& zs, Outcome outcome) {
  Trajectory trajectory;
  trajectory.task.id = "synt-0001";
  trajectory.task.text = "do the synthetic thing";
  trajectory.strategy = "error-intervention";
  trajectory.seed = 5;
  for (size_t i = 0; i < zs.size(); ++i) {
    TrajectoryStep step;
    step.t = static_cast<int>(i);
    step.observation_ref = "obs" + std::to_string(i);
    step.thought = "thinking about step " + std::to_string(i);
    bool last = i + 1 == zs.size();
    step.action = (last && outcome == Outcome::completed) ? ActionCommand::complete()
                                                          : ActionCommand::click_on(static_cast<int>(i));
    step.z = zs[i] == 'e' ? PolicyIdentity::expert : PolicyIdentity::learner;
    if (i == 1) step.action_error = "element 1 is not interactable";
    if (step.z == PolicyIdentity::learner && !last) {
      step.monitor_verdict = MonitorVerdict{i % 2 == 1, i % 2 == 1 ? "drifting" : ""};
    }
    trajectory.steps.push_back(std::move(step));
  }
  trajectory.outcome = outcome;
  return trajectory;
}

}  // namespace

TEST_CASE("the oracle expert completes reachable tasks in plan length plus a terminal") {
  auto spec = make_spec("exproll", 501);
  ObservationStore store;
  sim::SimEnv env(spec);
  OracleExpertPolicy expert(spec);

  for (const auto& st : sim::sample_tasks(*spec, 8, 41)) {
    RolloutTask task = as_task(st);
    auto plan = sim::shortest_plan(*spec, sim::initial_state(*spec), task.goal);
    Trajectory trajectory = rollout_expert(task, env, store, expert, 1);

    REQUIRE(trajectory.retained());
    size_t expected = plan.size() + (task.goal.required_answer ? 0 : 1);
    CHECK(trajectory.steps.size() == expected);
    for (const auto& step : trajectory.steps) {
      CHECK(step.z == PolicyIdentity::expert);
      CHECK(!step.action_error.has_value());
    }
    REQUIRE(!trajectory.steps.empty());
    CHECK(trajectory.steps.back().action.is_terminal());
    for (size_t i = 0; i + 1 < trajectory.steps.size(); ++i) {
      CHECK(!trajectory.steps[i].action.is_terminal());
    }
    if (task.goal.required_answer) {
      CHECK(trajectory.outcome == Outcome::answer);
      REQUIRE(trajectory.final_answer.has_value());
      CHECK(*trajectory.final_answer == *task.goal.required_answer);
    } else {
      CHECK(trajectory.outcome == Outcome::completed);
    }
  }
}

TEST_CASE("an unreachable goal exhausts the step budget") {
  // two plain screens, one data field no element can ever touch
  auto spec = std::make_shared<sim::SimAppSpec>();
  spec->app_name = "lockedbox";
  sim::SimScreenSpec a;
  a.id = 0;
  a.name = "outside";
  a.elements.push_back({0, ElementKind::nav, "Enter", true, 1, ""});
  sim::SimScreenSpec b;
  b.id = 1;
  b.name = "inside";
  b.elements.push_back({0, ElementKind::nav, "Leave", true, 0, ""});
  spec->screens = {a, b};
  spec->nav_edges = {{0, 1}, {1, 0}};
  spec->data_fields.push_back({"locked", true, false, ""});

  RolloutTask task;
  task.id = "locked-0000";
  task.text = "unlock the box";
  task.goal.required_data["locked"] = sim::FieldValue{true, ""};

  ObservationStore store;
  sim::SimEnv env(spec);
  OracleExpertPolicy expert(spec);
  Trajectory trajectory = rollout_expert(task, env, store, expert, 2, 6);
  CHECK(trajectory.outcome == Outcome::step_budget_exhausted);
  CHECK(trajectory.steps.size() == 6);
  for (const auto& step : trajectory.steps) {
    CHECK(step.z == PolicyIdentity::expert);
    CHECK(!step.action.is_terminal());
  }
}

TEST_CASE("random switching at p=0 reproduces the pure expert rollout") {
  auto spec = make_spec("pzero", 502);
  for (const auto& st : sim::sample_tasks(*spec, 4, 17)) {
    RolloutTask task = as_task(st);
    ObservationStore store_a, store_b;
    sim::SimEnv env_a(spec), env_b(spec);
    OracleExpertPolicy expert_a(spec), expert_b(spec);
    EpsilonNoisyLearner learner(spec, 0.5, 88);

    Trajectory pure = rollout_expert(task, env_a, store_a, expert_a, 3);
    Trajectory mixed = rollout_random_switch(task, env_b, store_b, expert_b, learner, 0.0, 3);
    CHECK(mixed.strategy == "random-switch");
    CHECK(steps_dump(mixed) == steps_dump(pure));
    CHECK(mixed.outcome == pure.outcome);
    for (const auto& step : mixed.steps) CHECK(step.z == PolicyIdentity::expert);
  }
}

TEST_CASE("learner terminal proposals never execute under random switching") {
  auto spec = make_spec("guard", 503);
  sim::SimTask picked;
  bool found = false;
  for (const auto& st : sim::sample_tasks(*spec, 8, 19)) {
    if (plan_length(*spec, as_task(st)) >= 1 && !found) {
      picked = st;
      found = true;
    }
  }
  REQUIRE(found);

  RolloutTask task = as_task(picked);
  ObservationStore store;
  sim::SimEnv env(spec);
  OracleExpertPolicy expert(spec);
  TerminalLearner learner;
  Trajectory trajectory = rollout_random_switch(task, env, store, expert, learner, 1.0, 7);

  REQUIRE(!trajectory.steps.empty());
  CHECK(trajectory.steps[0].z == PolicyIdentity::expert);
  for (const auto& step : trajectory.steps) {
    CHECK(step.z == PolicyIdentity::expert);  // every learner proposal was terminal
    if (step.z == PolicyIdentity::learner) CHECK(!step.action.is_terminal());
  }
  CHECK(trajectory.retained());
}

TEST_CASE("random-switch rollouts replay their seeded coins exactly") {
  auto spec = make_spec("replayed", 504);
  auto tasks = sim::sample_tasks(*spec, 10, 23);

  size_t coin_draws = 0;
  size_t learner_steps = 0;
  for (const auto& st : tasks) {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
      RolloutTask task = as_task(st);
      ObservationStore store;
      sim::SimEnv env(spec);
      OracleExpertPolicy expert(spec);
      EpsilonNoisyLearner learner(spec, 0.5, 777);
      Trajectory trajectory = rollout_random_switch(task, env, store, expert, learner, 0.5, seed);

      // independent replay: fresh policies, a fresh environment, own coin
      sim::SimEnv env2(spec);
      Observation obs = env2.reset();
      OracleExpertPolicy expert2(spec);
      EpsilonNoisyLearner learner2(spec, 0.5, 777);
      Rng coin(mix64(seed, fnv1a64(task.id)));
      std::vector<TrajectoryStep> history;

      for (const auto& step : trajectory.steps) {
        Decision e_dec = expert2.decide(task, obs, history, std::nullopt);
        Decision l_dec = learner2.decide(task, obs, history, std::nullopt);
        bool agree = l_dec.action.kind == e_dec.action.kind && l_dec.action.element == e_dec.action.element;
        Decision expected = e_dec;
        PolicyIdentity z = PolicyIdentity::expert;
        if (!agree && !l_dec.action.is_terminal()) {
          ++coin_draws;
          if (coin.chance(0.5)) {
            expected = l_dec;
            z = PolicyIdentity::learner;
          }
        }
        REQUIRE(step.action == expected.action);
        CHECK(step.thought == expected.thought);
        REQUIRE(step.z == z);
        if (step.z == PolicyIdentity::learner) ++learner_steps;

        if (step.action.is_terminal()) break;
        StepResult result = env2.step(step.action);
        CHECK(result.valid == !step.action_error.has_value());
        obs = result.obs;
        history.push_back(step);
      }
    }
  }

  // aggregate: the executed learner fraction among coin draws tracks p
  REQUIRE(coin_draws >= 100);
  double fraction = static_cast<double>(learner_steps) / static_cast<double>(coin_draws);
  CHECK(fraction > 0.4);
  CHECK(fraction < 0.6);
}

TEST_CASE("a faithful learner is never interrupted") {
  auto spec = make_spec("faithful", 505);
  auto oracle_core = std::make_shared<OracleExpertPolicy>(spec);
  OracleMonitor monitor(oracle_core);
  ObservationStore store;
  sim::SimEnv env(spec);

  for (const auto& st : sim::sample_tasks(*spec, 5, 29)) {
    RolloutTask task = as_task(st);
    EpsilonNoisyLearner learner(spec, 0.0, 1);
    OracleExpertPolicy expert(spec);
    Trajectory trajectory =
        rollout_error_intervention(task, env, store, learner, expert, monitor, {2, 3}, 11);

    CHECK(trajectory.retained());
    CHECK(count_interventions(trajectory) == 0);
    REQUIRE(!trajectory.steps.empty());
    CHECK(trajectory.steps[0].z == PolicyIdentity::learner);
    for (size_t i = 0; i < trajectory.steps.size(); ++i) {
      const auto& step = trajectory.steps[i];
      CHECK(step.z == PolicyIdentity::learner);
      if (i + 1 < trajectory.steps.size()) {
        REQUIRE(step.monitor_verdict.has_value());
        CHECK(!step.monitor_verdict->deviated);
      } else {
        CHECK(!step.monitor_verdict.has_value());  // terminal step skips the monitor
      }
    }
  }
}

TEST_CASE("interventions rescue a fully noisy learner") {
  auto spec = make_spec("rescue", 506);
  auto oracle_core = std::make_shared<OracleExpertPolicy>(spec);
  OracleMonitor monitor(oracle_core);
  ObservationStore store;
  sim::SimEnv env(spec);

  std::vector<RolloutTask> long_tasks;
  for (const auto& st : sim::sample_tasks(*spec, 12, 31)) {
    RolloutTask task = as_task(st);
    if (plan_length(*spec, task) >= 3) long_tasks.push_back(task);
  }
  REQUIRE(long_tasks.size() >= 3);

  int completed = 0;
  uint64_t seed = 60;
  for (const auto& task : long_tasks) {
    EpsilonNoisyLearner learner(spec, 1.0, seed++);
    OracleExpertPolicy expert(spec);
    Trajectory trajectory =
        rollout_error_intervention(task, env, store, learner, expert, monitor, {2, 3}, seed);

    REQUIRE(!trajectory.steps.empty());
    CHECK(trajectory.steps[0].z == PolicyIdentity::learner);
    CHECK(count_interventions(trajectory) <= 2);
    check_expert_segments(trajectory, 3);
    for (const auto& step : trajectory.steps) {
      if (step.z == PolicyIdentity::expert) CHECK(!step.monitor_verdict.has_value());
    }
    if (trajectory.retained()) {
      ++completed;
      // a fully noisy learner never proposes a terminal: the expert finished
      CHECK(trajectory.steps.back().z == PolicyIdentity::expert);
      CHECK(count_interventions(trajectory) >= 1);
    }
  }
  CHECK(completed >= 1);
}

TEST_CASE("a third deviation is ignored once the intervention budget is spent") {
  auto spec = make_spec("budget", 507);
  RolloutTask task = as_task(sim::sample_tasks(*spec, 1, 37)[0]);
  ObservationStore store;
  sim::SimEnv env(spec);
  GhostLearner learner;
  NavExpert expert;
  AlwaysDeviatedMonitor monitor;
  Trajectory trajectory = rollout_error_intervention(task, env, store, learner, expert, monitor, {2, 3}, 13, 12);

  REQUIRE(trajectory.steps.size() == 12);
  std::string zs;
  for (const auto& step : trajectory.steps) zs += identity_name(step.z);
  CHECK(zs == "leeeleeellll");
  CHECK(count_interventions(trajectory) == 2);
  CHECK(trajectory.outcome == Outcome::step_budget_exhausted);

  // only the first step of each expert segment receives the analysis
  REQUIRE(expert.analyses.size() == 6);
  REQUIRE(expert.analyses[0].has_value());
  CHECK(expert.analyses[0]->find("flagged") != std::string::npos);
  CHECK(!expert.analyses[1].has_value());
  CHECK(!expert.analyses[2].has_value());
  CHECK(expert.analyses[3].has_value());
  CHECK(!expert.analyses[4].has_value());
  CHECK(!expert.analyses[5].has_value());

  for (const auto& step : trajectory.steps) {
    if (step.z == PolicyIdentity::learner) {
      REQUIRE(step.monitor_verdict.has_value());
      CHECK(step.monitor_verdict->deviated);
      CHECK(step.action_error.has_value());  // ghost clicks are invalid
    } else {
      CHECK(!step.monitor_verdict.has_value());
    }
  }
}

TEST_CASE("self-evolution with zero rounds changes nothing") {
  auto spec = make_spec("zeroround", 508);
  ObservationStore store;
  auto fallback = std::make_shared<EpsilonNoisyLearner>(spec, 0.5, 5);
  TabularLearner learner(fallback);
  OracleJudge judge;
  auto factory = [&](const RolloutTask&) { return std::make_unique<sim::SimEnv>(spec); };

  std::vector<RolloutTask> tasks;
  for (const auto& st : sim::sample_tasks(*spec, 3, 43)) tasks.push_back(as_task(st));

  auto result = self_evolution(tasks, factory, store, learner, judge, 0, 9);
  CHECK(result.successes.empty());
  CHECK(result.successes_per_round.empty());
  CHECK(learner.memo_size() == 0);

  CHECK_THROWS_AS(self_evolution(tasks, factory, store, learner, judge, -1, 9), ValidationError);
}

TEST_CASE("a memorizing learner never loses ground across rounds") {
  auto spec = make_spec("evolve", 509);
  ObservationStore store;
  auto fallback = std::make_shared<EpsilonNoisyLearner>(spec, 0.5, 9);
  TabularLearner learner(fallback);
  OracleJudge judge;
  auto factory = [&](const RolloutTask&) { return std::make_unique<sim::SimEnv>(spec); };

  std::vector<RolloutTask> tasks;
  for (const auto& st : sim::sample_tasks(*spec, 12, 47)) tasks.push_back(as_task(st));

  auto result = self_evolution(tasks, factory, store, learner, judge, 3, 9);
  REQUIRE(result.successes_per_round.size() == 3);
  for (size_t r = 1; r < 3; ++r) {
    CHECK(result.successes_per_round[r] >= result.successes_per_round[r - 1]);
  }
  CHECK(result.successes_per_round.back() >= 1);

  size_t total = 0;
  for (size_t n : result.successes_per_round) total += n;
  CHECK(result.successes.size() == total);
  for (const auto& trajectory : result.successes) {
    CHECK(trajectory.success);
    CHECK(trajectory.retained());
    for (const auto& step : trajectory.steps) CHECK(step.z == PolicyIdentity::learner);
  }
  CHECK(learner.memo_size() > 0);
}

TEST_CASE("extraction keeps exactly the expert steps with full prefixes") {
  Trajectory trajectory = synthetic_trajectory("lleeel", Outcome::completed);
  auto samples = extract_training_samples(trajectory);
  REQUIRE(samples.size() == 3);
  for (size_t k = 0; k < 3; ++k) {
    const auto& sample = samples[k];
    CHECK(sample.task_id == "synt-0001");
    CHECK(sample.instruction == "do the synthetic thing");
    size_t target_index = 2 + k;
    CHECK(sample.history.size() == target_index);
    for (size_t i = 0; i < sample.history.size(); ++i) {
      CHECK(step_dump(sample.history[i]) == step_dump(trajectory.steps[i]));
    }
    CHECK(sample.target_thought == trajectory.steps[target_index].thought);
    CHECK(sample.target_action == trajectory.steps[target_index].action);
  }
  // the learner's invalid action at t=1 is preserved inside every history
  REQUIRE(samples[0].history.size() >= 2);
  CHECK(samples[0].history[1].action_error.has_value());

  CHECK(extract_training_samples(synthetic_trajectory("llll", Outcome::completed)).empty());
  CHECK(extract_training_samples(synthetic_trajectory("eeee", Outcome::step_budget_exhausted)).empty());

  auto pure = extract_training_samples(synthetic_trajectory("eeee", Outcome::completed));
  REQUIRE(pure.size() == 4);
  for (size_t k = 0; k < 4; ++k) CHECK(pure[k].history.size() == k);
}

TEST_CASE("training samples and trajectories round-trip through json") {
  Trajectory trajectory = synthetic_trajectory("lleeel", Outcome::completed);
  trajectory.final_answer = std::nullopt;
  json t = trajectory_to_json(trajectory);
  CHECK(json(trajectory_to_json(trajectory_from_json(t))).dump() == t.dump());

  auto samples = extract_training_samples(trajectory);
  REQUIRE(!samples.empty());
  std::string jsonl;
  for (const auto& sample : samples) jsonl += training_sample_to_json(sample).dump() + "\n";
  std::istringstream lines(jsonl);
  std::string line;
  size_t index = 0;
  while (std::getline(lines, line)) {
    TrainingSample parsed = training_sample_from_json(json::parse(line));
    CHECK(training_sample_to_json(parsed).dump() == training_sample_to_json(samples[index]).dump());
    ++index;
  }
  CHECK(index == samples.size());

  CHECK_THROWS_AS(trajectory_from_json(json{{"version", 2}}), ParseError);
  CHECK_THROWS_AS(outcome_from_name("nope"), ParseError);
  CHECK_THROWS_AS(identity_from_name("x"), ParseError);
  CHECK(outcome_from_name(outcome_name(Outcome::answer)) == Outcome::answer);
  CHECK(identity_from_name(identity_name(PolicyIdentity::learner)) == PolicyIdentity::learner);
}

TEST_CASE("thought rewriting tags every step and leaves actions alone") {
  auto spec = make_spec("rewrite", 510);
  ObservationStore store;
  sim::SimEnv env(spec);
  OracleExpertPolicy expert(spec);
  RolloutTask task = as_task(sim::sample_tasks(*spec, 3, 53)[2]);
  Trajectory original = rollout_expert(task, env, store, expert, 21);
  REQUIRE(original.retained());

  Trajectory rewritten = original;
  providers::MockChatBackend rewriter(33);
  std::vector<std::string> warnings;
  rewrite_thoughts(rewritten, rewriter, &warnings);
  CHECK(warnings.empty());
  REQUIRE(rewritten.steps.size() == original.steps.size());
  for (size_t i = 0; i < rewritten.steps.size(); ++i) {
    CHECK(rewritten.steps[i].thought == "[refined] " + original.steps[i].thought);
    CHECK(!rewritten.steps[i].rewrite_failed);
    CHECK(rewritten.steps[i].action == original.steps[i].action);
    CHECK(rewritten.steps[i].z == original.steps[i].z);
    CHECK(rewritten.steps[i].observation_ref == original.steps[i].observation_ref);
  }

  // rewrite-then-extract and extract-then-rewrite agree on the actions
  auto before = extract_training_samples(original);
  auto after = extract_training_samples(rewritten);
  REQUIRE(before.size() == after.size());
  for (size_t i = 0; i < before.size(); ++i) {
    CHECK(before[i].target_action == after[i].target_action);
    CHECK(after[i].target_thought == "[refined] " + before[i].target_thought);
  }

  // an empty trajectory is untouched
  Trajectory empty;
  empty.task = task;
  rewrite_thoughts(empty, rewriter, nullptr);
  CHECK(empty.steps.empty());

  // per-step failures keep the original thought and set the flag
  Trajectory flaky = original;
  std::string cursed = original.steps[0].thought;
  oracle::FnChat sometimes([&](const providers::GenerationRequest& request) -> std::string {
    if (oracle::request_text(request).find("Original thought: " + cursed) != std::string::npos) {
      throw TransportError("rewriter offline");
    }
    return "better words";
  });
  warnings.clear();
  rewrite_thoughts(flaky, sometimes, &warnings);
  CHECK(flaky.steps[0].thought == cursed);
  CHECK(flaky.steps[0].rewrite_failed);
  REQUIRE(warnings.size() == 1);
  for (size_t i = 1; i < flaky.steps.size(); ++i) {
    CHECK(flaky.steps[i].thought == "better words");
    CHECK(!flaky.steps[i].rewrite_failed);
  }
}

TEST_CASE("intervention counting sees maximal learner-to-expert transitions") {
  CHECK(count_interventions(synthetic_trajectory("eee", Outcome::completed)) == 0);
  CHECK(count_interventions(synthetic_trajectory("leele", Outcome::completed)) == 2);
  CHECK(count_interventions(synthetic_trajectory("", Outcome::step_budget_exhausted)) == 0);
  CHECK(count_interventions(synthetic_trajectory("l", Outcome::completed)) == 0);
  CHECK(count_interventions(synthetic_trajectory("e", Outcome::completed)) == 0);
  CHECK(count_interventions(synthetic_trajectory("lleeelll", Outcome::completed)) == 1);
}

TEST_CASE("trajectories persist under their strategy directory") {
  auto spec = make_spec("persist", 511);
  ObservationStore store;
  sim::SimEnv env(spec);
  GhostLearner learner;
  NavExpert expert;
  AlwaysDeviatedMonitor monitor;
  RolloutTask task = as_task(sim::sample_tasks(*spec, 1, 59)[0]);
  Trajectory trajectory = rollout_error_intervention(task, env, store, learner, expert, monitor, {2, 3}, 15, 8);

  oracle::TempDir dir;
  auto path = save_trajectory(trajectory, dir.path);
  CHECK(path == dir.path / "error-intervention" / (task.id + ".json"));
  REQUIRE(std::filesystem::exists(path));

  Trajectory loaded = load_trajectory(path);
  CHECK(trajectory_to_json(loaded).dump() == trajectory_to_json(trajectory).dump());

  auto all = load_trajectories_for_strategy(dir.path, "error-intervention");
  REQUIRE(all.size() == 1);
  CHECK(trajectory_to_json(all[0]).dump() == trajectory_to_json(trajectory).dump());
  CHECK_THROWS_AS(load_trajectories_for_strategy(dir.path, "expert"), StoreError);
}

TEST_CASE("rollout entry points validate their arguments") {
  auto spec = make_spec("args", 512);
  ObservationStore store;
  sim::SimEnv env(spec);
  OracleExpertPolicy expert(spec);
  EpsilonNoisyLearner learner(spec, 0.5, 1);
  auto oracle_core = std::make_shared<OracleExpertPolicy>(spec);
  OracleMonitor monitor(oracle_core);
  RolloutTask task = as_task(sim::sample_tasks(*spec, 1, 61)[0]);

  CHECK_THROWS_AS(rollout_expert(task, env, store, expert, 1, 0), ValidationError);
  CHECK_THROWS_AS(rollout_random_switch(task, env, store, expert, learner, -0.1, 1), ValidationError);
  CHECK_THROWS_AS(rollout_random_switch(task, env, store, expert, learner, 1.1, 1), ValidationError);
  CHECK_THROWS_AS(rollout_error_intervention(task, env, store, learner, expert, monitor, {0, 3}, 1),
                  ValidationError);
  CHECK_THROWS_AS(rollout_error_intervention(task, env, store, learner, expert, monitor, {2, 0}, 1),
                  ValidationError);
  CHECK_THROWS_AS(EpsilonNoisyLearner(spec, -0.1, 1), ValidationError);
  CHECK_THROWS_AS(EpsilonNoisyLearner(spec, 1.1, 1), ValidationError);
  CHECK_THROWS_AS(TabularLearner(nullptr), ValidationError);
  CHECK_THROWS_AS(OracleExpertPolicy(nullptr), ValidationError);
}
