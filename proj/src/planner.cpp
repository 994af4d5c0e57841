#include "agentforge/sim.hpp"

#include <algorithm>
#include <deque>

namespace agentforge::sim {

namespace {

constexpr int kMaxProductNodes = 10000;

struct CandidateAction {
  ActionCommand action;
  int screen_next = -1;
  uint64_t mask_next = 0;
};

int kind_rank(ActionKind kind) {
  switch (kind) {
    case ActionKind::click: return 0;
    case ActionKind::type: return 1;
    case ActionKind::back: return 2;
    default: return 3;
  }
}

}  // namespace

GoalDistances::GoalDistances(const SimAppSpec& spec, TaskGoal goal) : spec_(&spec), goal_(std::move(goal)) {
  if (goal_.target_screen && (*goal_.target_screen < 0 || *goal_.target_screen >= static_cast<int>(spec.screens.size()))) {
    throw PlanningError("goal targets screen " + std::to_string(*goal_.target_screen) + " which does not exist");
  }
  for (const auto& [name, value] : goal_.required_data) {
    if (!spec.field(name)) throw PlanningError("goal references unknown field '" + name + "'");
    fields_.push_back(name);
  }
  std::sort(fields_.begin(), fields_.end());

  const size_t n_screens = spec.screens.size();
  const size_t n_masks = size_t{1} << fields_.size();
  if (n_screens * n_masks > kMaxProductNodes) {
    throw PlanningError("product graph exceeds " + std::to_string(kMaxProductNodes) + " nodes");
  }
  const size_t n_nodes = n_screens * n_masks;
  const uint64_t full_mask = n_masks - 1;

  auto field_bit = [&](const std::string& name) -> int {
    auto it = std::lower_bound(fields_.begin(), fields_.end(), name);
    if (it == fields_.end() || *it != name) return -1;
    return static_cast<int>(it - fields_.begin());
  };

  // forward adjacency; `back` clicks are not expanded because the generated
  // app graphs carry paired nav edges, so plans never need history pops
  std::vector<std::vector<int>> reverse_adj(n_nodes);
  for (size_t s = 0; s < n_screens; ++s) {
    for (const UiElement& el : spec.screens[s].elements) {
      if (!el.interactable) continue;
      for (uint64_t m = 0; m < n_masks; ++m) {
        int from = static_cast<int>(s * n_masks + m);
        int to = -1;
        if (el.kind == ElementKind::nav) {
          to = static_cast<int>(static_cast<size_t>(el.target) * n_masks + m);
        } else if (el.kind == ElementKind::toggle) {
          int bit = field_bit(el.field);
          if (bit < 0) continue;
          to = static_cast<int>(s * n_masks + (m ^ (uint64_t{1} << bit)));
        } else if (el.kind == ElementKind::input) {
          int bit = field_bit(el.field);
          if (bit < 0) continue;
          uint64_t next = m | (uint64_t{1} << bit);
          if (next == m) continue;
          to = static_cast<int>(s * n_masks + next);
        } else {
          continue;
        }
        reverse_adj[static_cast<size_t>(to)].push_back(from);
      }
    }
  }

  dist_.assign(n_nodes, -1);
  std::deque<int> frontier;
  for (size_t s = 0; s < n_screens; ++s) {
    if (goal_.target_screen && static_cast<int>(s) != *goal_.target_screen) continue;
    int node = static_cast<int>(s * n_masks + full_mask);
    dist_[static_cast<size_t>(node)] = 0;
    frontier.push_back(node);
  }
  while (!frontier.empty()) {
    int cur = frontier.front();
    frontier.pop_front();
    for (int prev : reverse_adj[static_cast<size_t>(cur)]) {
      if (dist_[static_cast<size_t>(prev)] == -1) {
        dist_[static_cast<size_t>(prev)] = dist_[static_cast<size_t>(cur)] + 1;
        frontier.push_back(prev);
      }
    }
  }
}

int GoalDistances::node_of(int screen, uint64_t mask) const {
  const size_t n_masks = size_t{1} << fields_.size();
  return static_cast<int>(static_cast<size_t>(screen) * n_masks + mask);
}

uint64_t GoalDistances::mask_of(const EnvState& state) const {
  uint64_t mask = 0;
  for (size_t k = 0; k < fields_.size(); ++k) {
    const DataField* f = spec_->field(fields_[k]);
    auto it = state.data.find(fields_[k]);
    if (it == state.data.end()) throw InvariantError("state missing field " + fields_[k]);
    const FieldValue& want = goal_.required_data.at(fields_[k]);
    bool ok = f->is_bool ? (it->second.b == want.b) : (it->second.s == want.s);
    if (ok) mask |= uint64_t{1} << k;
  }
  return mask;
}

int GoalDistances::at(const EnvState& state) const {
  return dist_[static_cast<size_t>(node_of(state.current_screen, mask_of(state)))];
}

std::optional<ActionCommand> GoalDistances::next_action(const EnvState& state) const {
  int d = at(state);
  if (d <= 0) return std::nullopt;

  const uint64_t mask = mask_of(state);
  std::vector<CandidateAction> candidates;
  for (const UiElement& el : spec_->screen(state.current_screen).elements) {
    if (!el.interactable) continue;
    CandidateAction c;
    if (el.kind == ElementKind::nav) {
      c.action = ActionCommand::click_on(el.id);
      c.screen_next = el.target;
      c.mask_next = mask;
    } else if (el.kind == ElementKind::toggle) {
      auto it = std::lower_bound(fields_.begin(), fields_.end(), el.field);
      if (it == fields_.end() || *it != el.field) continue;
      c.action = ActionCommand::click_on(el.id);
      c.screen_next = state.current_screen;
      c.mask_next = mask ^ (uint64_t{1} << (it - fields_.begin()));
    } else if (el.kind == ElementKind::input) {
      auto it = std::lower_bound(fields_.begin(), fields_.end(), el.field);
      if (it == fields_.end() || *it != el.field) continue;
      c.action = ActionCommand::type_into(el.id, goal_.required_data.at(el.field).s);
      c.screen_next = state.current_screen;
      c.mask_next = mask | (uint64_t{1} << (it - fields_.begin()));
    } else {
      continue;
    }
    candidates.push_back(std::move(c));
  }
  std::sort(candidates.begin(), candidates.end(), [](const CandidateAction& a, const CandidateAction& b) {
    if (a.action.element != b.action.element) return a.action.element < b.action.element;
    return kind_rank(a.action.kind) < kind_rank(b.action.kind);
  });
  for (const CandidateAction& c : candidates) {
    int nd = dist_[static_cast<size_t>(node_of(c.screen_next, c.mask_next))];
    if (nd == d - 1) return c.action;
  }
  return std::nullopt;
}

std::vector<ActionCommand> shortest_plan(const SimAppSpec& spec, const EnvState& state, const TaskGoal& goal) {
  GoalDistances distances(spec, goal);
  int d = distances.at(state);
  if (d < 0) throw PlanningError("goal unreachable from the given state");

  std::vector<ActionCommand> plan;
  EnvState cur = state;
  while (!distances.satisfied(cur)) {
    std::optional<ActionCommand> action = distances.next_action(cur);
    if (!action) throw PlanningError("goal unreachable from the given state");
    plan.push_back(*action);
    if (apply_action(spec, cur, *action)) throw InvariantError("plan produced an invalid action");
    if (plan.size() > size_t{20000}) throw InvariantError("plan walk failed to converge");
  }
  if (goal.required_answer) plan.push_back(ActionCommand::answer_with(*goal.required_answer));
  return plan;
}

}  // namespace agentforge::sim
