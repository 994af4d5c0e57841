#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentforge/common.hpp"
#include "agentforge/env.hpp"

namespace agentforge::sim {

struct UiElement {
  int id = -1;
  ElementKind kind = ElementKind::nav;
  std::string label;
  bool interactable = true;
  int target = -1;    // nav: destination screen
  std::string field;  // toggle/input: data field name
};

struct SimScreenSpec {
  int id = -1;
  std::string name;
  std::vector<UiElement> elements;
};

struct DataField {
  std::string name;
  bool is_bool = true;
  bool bool_init = false;
  std::string string_init;
};

struct GenerationParams {
  int n_screens = 8;
  int elements_per_screen = 5;
  int n_fields = 3;
};

struct SimAppSpec {
  std::string app_name;
  uint64_t seed = 0;
  GenerationParams params;
  std::vector<SimScreenSpec> screens;
  std::vector<std::pair<int, int>> nav_edges;  // directed, sorted, unique
  std::vector<DataField> data_fields;

  const SimScreenSpec& screen(int id) const;
  const DataField* field(const std::string& name) const;  // nullptr if absent
};

SimAppSpec generate_app(const std::string& name, const GenerationParams& params, uint64_t seed);
void validate_spec(const SimAppSpec& spec);

nlohmann::json spec_to_json(const SimAppSpec& spec);
SimAppSpec spec_from_json(const nlohmann::json& j);

// live value of one data field; which member applies is decided by the spec
struct FieldValue {
  bool b = false;
  std::string s;
  bool operator==(const FieldValue&) const = default;
};

struct EnvState {
  int current_screen = 0;
  std::map<std::string, FieldValue> data;
  std::vector<int> history_stack;

  bool operator==(const EnvState&) const = default;
};

EnvState initial_state(const SimAppSpec& spec);

// Applies one action's state effects (terminal actions change no state).
// Returns an error message for invalid actions and leaves state untouched.
std::optional<std::string> apply_action(const SimAppSpec& spec, EnvState& state, const ActionCommand& action);

PixelGrid render(const SimAppSpec& spec, const EnvState& state);
std::vector<A11yNode> a11y_tree(const SimAppSpec& spec, const EnvState& state);
Observation observe(const SimAppSpec& spec, const EnvState& state);

struct TaskGoal {
  std::optional<int> target_screen;
  std::map<std::string, FieldValue> required_data;
  std::optional<std::string> required_answer;

  bool operator==(const TaskGoal&) const = default;
};

nlohmann::json goal_to_json(const TaskGoal& goal);
TaskGoal goal_from_json(const nlohmann::json& j);

bool goal_check(const SimAppSpec& spec, const EnvState& state, const TaskGoal& goal,
                const std::optional<std::string>& final_answer);

class SimEnv final : public Environment {
 public:
  explicit SimEnv(std::shared_ptr<const SimAppSpec> spec);

  Observation reset() override;
  StepResult step(const ActionCommand& action) override;
  bool episode_over() const override { return episode_over_; }

  const SimAppSpec& spec() const { return *spec_; }
  std::shared_ptr<const SimAppSpec> spec_ptr() const { return spec_; }
  const EnvState& state() const { return state_; }
  const std::optional<std::string>& final_answer() const { return final_answer_; }

 private:
  std::shared_ptr<const SimAppSpec> spec_;
  EnvState state_;
  bool episode_over_ = false;
  std::optional<std::string> final_answer_;
};

// --- shortest-path machinery over the product graph (screen x relevant data) ---

// Distance-to-goal for every product node. Relevant fields are exactly the
// goal's required_data keys; string fields collapse to "equals goal value /
// anything else" so arbitrary typed text still has a well-defined distance.
// `back` is not expanded (plans never need it: the app graph is generated with
// paired forward/backward nav edges).
class GoalDistances {
 public:
  GoalDistances(const SimAppSpec& spec, TaskGoal goal);

  // distance of a concrete state; -1 when the goal is unreachable from it
  int at(const EnvState& state) const;
  // state already satisfies the goal's screen+data components
  bool satisfied(const EnvState& state) const { return at(state) == 0; }
  // next plan action from `state`; nullopt when satisfied or unreachable
  std::optional<ActionCommand> next_action(const EnvState& state) const;

  const TaskGoal& goal() const { return goal_; }

 private:
  int node_of(int screen, uint64_t mask) const;
  uint64_t mask_of(const EnvState& state) const;

  const SimAppSpec* spec_;
  TaskGoal goal_;
  std::vector<std::string> fields_;  // sorted relevant fields
  std::vector<int> dist_;
};

// minimum-length action sequence reaching a goal-satisfying state
std::vector<ActionCommand> shortest_plan(const SimAppSpec& spec, const EnvState& state, const TaskGoal& goal);

struct SimTask {
  std::string id;
  std::string text;
  TaskGoal goal;
};

// deterministic benchmark tasks, all verified reachable from the home state
std::vector<SimTask> sample_tasks(const SimAppSpec& spec, int count, uint64_t seed);

// goal proxy used to make synthesized instructions executable: reach the
// screen; if it owns an interactable toggle, also flip that field
TaskGoal derive_goal_for_screen(const SimAppSpec& spec, int screen_id);

// the 16-word lexicon used for seeded typed text
const std::vector<std::string>& typed_lexicon();

}  // namespace agentforge::sim
