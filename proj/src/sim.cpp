#include "agentforge/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace agentforge::sim {

using nlohmann::json;

namespace {

const std::vector<std::string>& screen_words() {
  static const std::vector<std::string> words = {
      "home",    "alarms",   "timers",  "settings", "profile", "inbox",   "library", "player",
      "search",  "details",  "editor",  "history",  "stats",   "labels",  "backup",  "themes",
      "widgets", "storage",  "network", "privacy",  "about",   "archive", "gallery", "queue",
      "trash",   "accounts", "devices", "calendar", "notes",   "tasks",   "alerts",  "sharing",
      "billing", "support",  "updates", "shortcuts", "folders", "filters", "sounds",  "display",
      "sensors", "battery",  "sync",    "export",   "imports", "recents", "starred", "drafts"};
  return words;
}

const std::vector<std::string>& bool_field_words() {
  static const std::vector<std::string> words = {"wifi",     "bluetooth", "darkmode", "autosync",
                                                 "notify",   "vibrate",   "location", "hotspot",
                                                 "roaming",  "airplane",  "dnd",      "batterysaver"};
  return words;
}

const std::vector<std::string>& string_field_words() {
  static const std::vector<std::string> words = {"note",   "title",  "query",  "nickname",
                                                 "city",   "song",   "folder", "greeting",
                                                 "label",  "alias",  "memo",   "topic"};
  return words;
}

std::string unique_word(const std::vector<std::string>& pool, size_t i) {
  if (i < pool.size()) return pool[i];
  return pool[i % pool.size()] + std::to_string(i / pool.size() + 1);
}

}  // namespace

const std::vector<std::string>& typed_lexicon() {
  static const std::vector<std::string> words = {"sunset", "harbor", "violet", "meadow",
                                                 "ember",  "willow", "quartz", "falcon",
                                                 "indigo", "marble", "cedar",  "lagoon",
                                                 "saffron", "orchid", "tundra", "breeze"};
  return words;
}

const SimScreenSpec& SimAppSpec::screen(int id) const {
  if (id < 0 || id >= static_cast<int>(screens.size())) {
    throw InvariantError("screen id out of range: " + std::to_string(id));
  }
  return screens[static_cast<size_t>(id)];
}

const DataField* SimAppSpec::field(const std::string& name) const {
  for (const DataField& f : data_fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

void validate_spec(const SimAppSpec& spec) {
  if (spec.app_name.empty()) throw ValidationError("spec: app_name empty");
  if (spec.screens.size() < 2) throw ValidationError("spec: need at least 2 screens");
  for (size_t i = 0; i < spec.screens.size(); ++i) {
    const SimScreenSpec& s = spec.screens[i];
    if (s.id != static_cast<int>(i)) throw ValidationError("spec: screen ids must be dense 0..n-1");
    if (s.elements.empty()) throw ValidationError("spec: screen " + std::to_string(s.id) + " has no elements");
    if (s.elements.size() > 10) throw ValidationError("spec: screen " + std::to_string(s.id) + " exceeds 10 elements");
    std::set<int> ids;
    for (const UiElement& el : s.elements) {
      if (el.id < 0 || el.id > 9) throw ValidationError("spec: element id outside 0..9 on screen " + std::to_string(s.id));
      if (!ids.insert(el.id).second) throw ValidationError("spec: duplicate element id on screen " + std::to_string(s.id));
      if (el.label.empty()) throw ValidationError("spec: empty element label");
      if (el.kind == ElementKind::nav) {
        if (el.target < 0 || el.target >= static_cast<int>(spec.screens.size())) {
          throw ValidationError("spec: nav target out of range on screen " + std::to_string(s.id));
        }
      }
      if (el.kind == ElementKind::toggle || el.kind == ElementKind::input) {
        const DataField* f = spec.field(el.field);
        if (!f) throw ValidationError("spec: element references unknown field '" + el.field + "'");
        if (el.kind == ElementKind::toggle && !f->is_bool) throw ValidationError("spec: toggle on non-bool field");
        if (el.kind == ElementKind::input && f->is_bool) throw ValidationError("spec: input on bool field");
      }
    }
  }
  // undirected connectivity over nav edges
  std::vector<std::vector<int>> adjacency(spec.screens.size());
  for (const auto& [a, b] : spec.nav_edges) {
    if (a < 0 || b < 0 || a >= static_cast<int>(spec.screens.size()) || b >= static_cast<int>(spec.screens.size())) {
      throw ValidationError("spec: nav edge endpoint out of range");
    }
    adjacency[static_cast<size_t>(a)].push_back(b);
    adjacency[static_cast<size_t>(b)].push_back(a);
  }
  std::vector<bool> seen(spec.screens.size(), false);
  std::vector<int> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    int cur = queue.back();
    queue.pop_back();
    for (int next : adjacency[static_cast<size_t>(cur)]) {
      if (!seen[static_cast<size_t>(next)]) {
        seen[static_cast<size_t>(next)] = true;
        queue.push_back(next);
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ValidationError("spec: screen graph is not connected");
  }
}

SimAppSpec generate_app(const std::string& name, const GenerationParams& params, uint64_t seed) {
  if (name.empty()) throw ValidationError("generate_app: name empty");
  if (params.n_screens < 2) throw ValidationError("generate_app: n_screens must be >= 2");
  if (params.n_screens > 200) throw ValidationError("generate_app: n_screens must be <= 200");
  if (params.elements_per_screen < 2) throw ValidationError("generate_app: elements_per_screen must be >= 2");
  if (params.elements_per_screen > 10) throw ValidationError("generate_app: elements_per_screen must be <= 10");
  if (params.n_fields < 0) throw ValidationError("generate_app: n_fields must be >= 0");

  Rng rng(mix64(fnv1a64(name), seed));
  SimAppSpec spec;
  spec.app_name = name;
  spec.seed = seed;
  spec.params = params;

  int n_bool = 0, n_string = 0;
  for (int i = 0; i < params.n_fields; ++i) {
    DataField f;
    f.is_bool = (i % 2 == 0);
    if (f.is_bool) {
      f.name = unique_word(bool_field_words(), static_cast<size_t>(n_bool++));
      f.bool_init = false;
    } else {
      f.name = unique_word(string_field_words(), static_cast<size_t>(n_string++));
      f.string_init = typed_lexicon()[rng.below(typed_lexicon().size())];
    }
    spec.data_fields.push_back(std::move(f));
  }
  std::vector<std::string> bool_names, string_names;
  for (const DataField& f : spec.data_fields) (f.is_bool ? bool_names : string_names).push_back(f.name);

  const size_t n = static_cast<size_t>(params.n_screens);
  for (size_t i = 0; i < n; ++i) {
    SimScreenSpec s;
    s.id = static_cast<int>(i);
    s.name = unique_word(screen_words(), i);
    spec.screens.push_back(std::move(s));
  }

  // spanning tree with paired directed edges keeps the graph strongly
  // connected, so every goal stays reachable without back actions
  std::set<std::pair<int, int>> edges;
  std::vector<int> out_degree(n, 0);
  auto add_edge = [&](int a, int b) {
    if (edges.insert({a, b}).second) out_degree[static_cast<size_t>(a)]++;
  };
  const int kMaxOut = 6;
  for (size_t i = 1; i < n; ++i) {
    size_t p = rng.below(i);
    for (size_t probe = 0; probe < i && out_degree[p] >= kMaxOut; ++probe) p = (p + 1) % i;
    add_edge(static_cast<int>(p), static_cast<int>(i));
    add_edge(static_cast<int>(i), static_cast<int>(p));
  }
  size_t extras = n / 2;
  for (size_t e = 0; e < extras; ++e) {
    int a = static_cast<int>(rng.below(n));
    int b = static_cast<int>(rng.below(n));
    if (a == b || out_degree[static_cast<size_t>(a)] >= kMaxOut + 1) continue;
    add_edge(a, b);
  }
  spec.nav_edges.assign(edges.begin(), edges.end());

  for (SimScreenSpec& s : spec.screens) {
    std::vector<int> targets;
    for (const auto& [a, b] : spec.nav_edges) {
      if (a == s.id) targets.push_back(b);
    }
    int next_id = 0;
    for (int target : targets) {
      UiElement el;
      el.id = next_id++;
      el.kind = ElementKind::nav;
      el.target = target;
      el.label = "open " + spec.screens[static_cast<size_t>(target)].name;
      s.elements.push_back(std::move(el));
    }
    bool have_back = false, have_terminal = false;
    while (static_cast<int>(s.elements.size()) < params.elements_per_screen) {
      UiElement el;
      el.id = next_id++;
      uint64_t r = rng.below(6);
      if ((r == 0 || r == 1) && bool_names.empty()) r = 3;
      if (r == 2 && string_names.empty()) r = 4;
      switch (r) {
        case 0:
        case 1: {
          el.kind = ElementKind::toggle;
          el.field = bool_names[rng.below(bool_names.size())];
          el.label = el.field + " switch";
          break;
        }
        case 2: {
          el.kind = ElementKind::input;
          el.field = string_names[rng.below(string_names.size())];
          el.label = el.field + " entry";
          break;
        }
        case 3: {
          if (have_back) {
            el.kind = ElementKind::terminal;
            el.label = have_terminal ? "confirm" : "done";
            have_terminal = true;
          } else {
            el.kind = ElementKind::back;
            el.label = "back";
            have_back = true;
          }
          break;
        }
        case 4: {
          if (have_terminal && !have_back) {
            el.kind = ElementKind::back;
            el.label = "back";
            have_back = true;
          } else {
            el.kind = ElementKind::terminal;
            el.label = have_terminal ? "confirm" : "done";
            have_terminal = true;
          }
          break;
        }
        default: {
          // decoy: display-only element
          el.interactable = false;
          if (!bool_names.empty() && (rng.next() & 1)) {
            el.kind = ElementKind::toggle;
            el.field = bool_names[rng.below(bool_names.size())];
            el.label = el.field + " status";
          } else if (!string_names.empty()) {
            el.kind = ElementKind::input;
            el.field = string_names[rng.below(string_names.size())];
            el.label = el.field + " readout";
          } else {
            el.kind = ElementKind::terminal;
            el.label = "status banner";
          }
          break;
        }
      }
      s.elements.push_back(std::move(el));
    }
  }

  validate_spec(spec);
  return spec;
}

json spec_to_json(const SimAppSpec& spec) {
  json j;
  j["version"] = 1;
  j["app_name"] = spec.app_name;
  j["seed"] = spec.seed;
  j["params"] = {{"n_screens", spec.params.n_screens},
                 {"elements_per_screen", spec.params.elements_per_screen},
                 {"n_fields", spec.params.n_fields}};
  j["data_fields"] = json::array();
  for (const DataField& f : spec.data_fields) {
    json fj;
    fj["name"] = f.name;
    fj["type"] = f.is_bool ? "bool" : "string";
    if (f.is_bool) fj["init"] = f.bool_init;
    else fj["init"] = f.string_init;
    j["data_fields"].push_back(fj);
  }
  j["nav_edges"] = json::array();
  for (const auto& [a, b] : spec.nav_edges) j["nav_edges"].push_back({a, b});
  j["screens"] = json::array();
  for (const SimScreenSpec& s : spec.screens) {
    json sj;
    sj["id"] = s.id;
    sj["name"] = s.name;
    sj["elements"] = json::array();
    for (const UiElement& el : s.elements) {
      json ej;
      ej["id"] = el.id;
      ej["kind"] = kind_name(el.kind);
      ej["label"] = el.label;
      ej["interactable"] = el.interactable;
      if (el.kind == ElementKind::nav) ej["target"] = el.target;
      if (el.kind == ElementKind::toggle || el.kind == ElementKind::input) ej["field"] = el.field;
      sj["elements"].push_back(ej);
    }
    j["screens"].push_back(sj);
  }
  return j;
}

SimAppSpec spec_from_json(const json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != 1) {
    throw ParseError("app spec: unsupported or missing version");
  }
  SimAppSpec spec;
  spec.app_name = j.at("app_name").get<std::string>();
  spec.seed = j.at("seed").get<uint64_t>();
  const json& p = j.at("params");
  spec.params.n_screens = p.at("n_screens").get<int>();
  spec.params.elements_per_screen = p.at("elements_per_screen").get<int>();
  spec.params.n_fields = p.at("n_fields").get<int>();
  for (const json& fj : j.at("data_fields")) {
    DataField f;
    f.name = fj.at("name").get<std::string>();
    f.is_bool = fj.at("type").get<std::string>() == "bool";
    if (f.is_bool) f.bool_init = fj.at("init").get<bool>();
    else f.string_init = fj.at("init").get<std::string>();
    spec.data_fields.push_back(std::move(f));
  }
  for (const json& ej : j.at("nav_edges")) {
    spec.nav_edges.emplace_back(ej.at(0).get<int>(), ej.at(1).get<int>());
  }
  for (const json& sj : j.at("screens")) {
    SimScreenSpec s;
    s.id = sj.at("id").get<int>();
    s.name = sj.at("name").get<std::string>();
    for (const json& ej : sj.at("elements")) {
      UiElement el;
      el.id = ej.at("id").get<int>();
      el.kind = kind_from_name(ej.at("kind").get<std::string>());
      el.label = ej.at("label").get<std::string>();
      el.interactable = ej.at("interactable").get<bool>();
      if (ej.contains("target")) el.target = ej.at("target").get<int>();
      if (ej.contains("field")) el.field = ej.at("field").get<std::string>();
      s.elements.push_back(std::move(el));
    }
    spec.screens.push_back(std::move(s));
  }
  validate_spec(spec);
  return spec;
}

EnvState initial_state(const SimAppSpec& spec) {
  EnvState state;
  state.current_screen = 0;
  for (const DataField& f : spec.data_fields) {
    FieldValue v;
    if (f.is_bool) v.b = f.bool_init;
    else v.s = f.string_init;
    state.data[f.name] = std::move(v);
  }
  return state;
}

namespace {

constexpr int kWidth = 96;
constexpr int kHeight = 160;
constexpr int kBannerRows = 20;
constexpr int kRowPitch = 13;
constexpr int kFirstElementRow = 22;

// column band per pixel, aligned with the 9-column perceptual-hash grid
const std::array<int, kWidth>& column_bands() {
  static const std::array<int, kWidth> bands = [] {
    std::array<int, kWidth> out{};
    for (int cb = 0; cb < 9; ++cb) {
      int x0 = cb * kWidth / 9;
      int x1 = (cb + 1) * kWidth / 9;
      for (int x = x0; x < x1; ++x) out[static_cast<size_t>(x)] = cb;
    }
    return out;
  }();
  return bands;
}

uint8_t kind_marker_intensity(const UiElement& el) {
  uint8_t base;
  switch (el.kind) {
    case ElementKind::nav: base = 224; break;
    case ElementKind::toggle: base = 192; break;
    case ElementKind::input: base = 160; break;
    case ElementKind::back: base = 128; break;
    case ElementKind::terminal: base = 96; break;
    default: base = 96; break;
  }
  return el.interactable ? base : base / 2;
}

}  // namespace

PixelGrid render(const SimAppSpec& spec, const EnvState& state) {
  PixelGrid grid;
  grid.width = kWidth;
  grid.height = kHeight;
  grid.pixels.assign(static_cast<size_t>(kWidth) * kHeight, 16);

  const SimScreenSpec& screen = spec.screen(state.current_screen);
  const std::string tag = spec.app_name + "\x1f" + std::to_string(screen.id);

  // banner: 16 per-screen segments across the top row band
  for (int seg = 0; seg < 16; ++seg) {
    uint8_t v = (fnv1a64(tag + "\x1f" + "b" + std::to_string(seg)) & 1) ? 208 : 48;
    for (int y = 0; y < kBannerRows; ++y) {
      for (int x = seg * 6; x < (seg + 1) * 6; ++x) grid.at(x, y) = v;
    }
  }

  // wallpaper: per-(screen, row band, col band) two-level base for bands 0..6
  // so distinct screens disagree on many hash bits
  for (int y = kBannerRows; y < kHeight; ++y) {
    int rb = y / 20;
    for (int x = 0; x < kWidth; ++x) {
      int cb = column_bands()[static_cast<size_t>(x)];
      if (cb > 6) continue;
      uint8_t v = (fnv1a64(tag + "\x1fw" + std::to_string(rb) + "," + std::to_string(cb)) & 1) ? 128 : 32;
      grid.at(x, y) = v;
    }
  }

  // constant bright stripe inside hash column band 7: keeps the band-7 vs
  // band-8 comparison fixed no matter what the data indicators (band 8) do
  for (int y = kBannerRows; y < kHeight; ++y) {
    for (int x = 78; x <= 83; ++x) grid.at(x, y) = 200;
  }

  for (const UiElement& el : screen.elements) {
    int y0 = kFirstElementRow + kRowPitch * el.id;
    if (y0 + 10 >= kHeight) throw InvariantError("render: element row out of bounds");

    uint8_t marker = kind_marker_intensity(el);
    for (int y = y0; y <= y0 + 10; ++y) {
      grid.at(0, y) = marker;
      grid.at(1, y) = marker;
    }

    // label bars: 2 columns per character
    for (size_t k = 0; k < el.label.size() && 2 + 2 * k + 1 <= 73; ++k) {
      uint8_t v = static_cast<uint8_t>(32 + (static_cast<unsigned char>(el.label[k]) % 6) * 16);
      for (int y = y0 + 1; y <= y0 + 9; ++y) {
        grid.at(static_cast<int>(2 + 2 * k), y) = v;
        grid.at(static_cast<int>(3 + 2 * k), y) = v;
      }
    }

    // data-state indicator lives entirely inside hash column band 8
    if (el.kind == ElementKind::toggle || el.kind == ElementKind::input) {
      auto it = state.data.find(el.field);
      if (it == state.data.end()) throw InvariantError("render: state missing field " + el.field);
      uint8_t v;
      if (el.kind == ElementKind::toggle) {
        v = it->second.b ? 40 : 24;
      } else {
        v = static_cast<uint8_t>(24 + (fnv1a64(it->second.s) % 3) * 8);
      }
      for (int y = y0 + 3; y <= y0 + 5; ++y) {
        for (int x = 87; x <= 89; ++x) grid.at(x, y) = v;
      }
    }
  }
  return grid;
}

std::vector<A11yNode> a11y_tree(const SimAppSpec& spec, const EnvState& state) {
  std::vector<A11yNode> nodes;
  for (const UiElement& el : spec.screen(state.current_screen).elements) {
    A11yNode node;
    node.id = el.id;
    node.kind = el.kind;
    node.label = el.label;
    node.interactable = el.interactable;
    node.x = 0;
    node.y = kFirstElementRow + kRowPitch * el.id;
    node.w = kWidth;
    node.h = 11;
    nodes.push_back(std::move(node));
  }
  return nodes;
}

Observation observe(const SimAppSpec& spec, const EnvState& state) {
  Observation obs;
  obs.screen_id = state.current_screen;
  obs.render = render(spec, state);
  obs.a11y = a11y_tree(spec, state);
  return obs;
}

bool goal_check(const SimAppSpec& spec, const EnvState& state, const TaskGoal& goal,
                const std::optional<std::string>& final_answer) {
  if (goal.target_screen && state.current_screen != *goal.target_screen) return false;
  for (const auto& [name, required] : goal.required_data) {
    const DataField* f = spec.field(name);
    if (!f) return false;
    auto it = state.data.find(name);
    if (it == state.data.end()) return false;
    if (f->is_bool ? (it->second.b != required.b) : (it->second.s != required.s)) return false;
  }
  if (goal.required_answer) {
    if (!final_answer) return false;
    if (to_lower_ascii(trim(*final_answer)) != to_lower_ascii(trim(*goal.required_answer))) return false;
  }
  return true;
}

json goal_to_json(const TaskGoal& goal) {
  json j = json::object();
  if (goal.target_screen) j["target_screen"] = *goal.target_screen;
  if (!goal.required_data.empty()) {
    json data = json::object();
    for (const auto& [name, value] : goal.required_data) {
      json v;
      v["b"] = value.b;
      v["s"] = value.s;
      data[name] = v;
    }
    j["required_data"] = data;
  }
  if (goal.required_answer) j["required_answer"] = *goal.required_answer;
  return j;
}

TaskGoal goal_from_json(const json& j) {
  TaskGoal goal;
  if (j.contains("target_screen")) goal.target_screen = j.at("target_screen").get<int>();
  if (j.contains("required_data")) {
    for (const auto& [name, v] : j.at("required_data").items()) {
      FieldValue value;
      value.b = v.at("b").get<bool>();
      value.s = v.at("s").get<std::string>();
      goal.required_data[name] = value;
    }
  }
  if (j.contains("required_answer")) goal.required_answer = j.at("required_answer").get<std::string>();
  if (!goal.target_screen && goal.required_data.empty() && !goal.required_answer) {
    throw ParseError("task goal: all components absent");
  }
  return goal;
}

SimEnv::SimEnv(std::shared_ptr<const SimAppSpec> spec) : spec_(std::move(spec)) {
  if (!spec_) throw ValidationError("SimEnv: null spec");
  state_ = initial_state(*spec_);
}

Observation SimEnv::reset() {
  state_ = initial_state(*spec_);
  episode_over_ = false;
  final_answer_.reset();
  return observe(*spec_, state_);
}

std::optional<std::string> apply_action(const SimAppSpec& spec, EnvState& state, const ActionCommand& action) {
  const SimScreenSpec& screen = spec.screen(state.current_screen);
  auto find_element = [&](int id) -> const UiElement* {
    for (const UiElement& el : screen.elements) {
      if (el.id == id) return &el;
    }
    return nullptr;
  };
  auto pop_screen = [&] {
    if (!state.history_stack.empty()) {
      state.current_screen = state.history_stack.back();
      state.history_stack.pop_back();
    }
  };

  switch (action.kind) {
    case ActionKind::click: {
      const UiElement* el = find_element(action.element);
      if (!el) return "no element " + std::to_string(action.element) + " on screen " + std::to_string(screen.id);
      if (!el->interactable) return "element " + std::to_string(action.element) + " is not interactable";
      if (el->kind == ElementKind::nav) {
        state.history_stack.push_back(state.current_screen);
        state.current_screen = el->target;
      } else if (el->kind == ElementKind::toggle) {
        state.data[el->field].b = !state.data[el->field].b;
      } else if (el->kind == ElementKind::back) {
        pop_screen();
      }
      // clicking input/terminal elements is legal and leaves state unchanged
      return std::nullopt;
    }
    case ActionKind::type: {
      const UiElement* el = find_element(action.element);
      if (!el) return "no element " + std::to_string(action.element) + " on screen " + std::to_string(screen.id);
      if (!el->interactable) return "element " + std::to_string(action.element) + " is not interactable";
      if (el->kind != ElementKind::input) return "element " + std::to_string(action.element) + " does not accept text";
      state.data[el->field].s = action.text;
      return std::nullopt;
    }
    case ActionKind::back:
      pop_screen();
      return std::nullopt;
    case ActionKind::complete:
    case ActionKind::answer:
      return std::nullopt;
  }
  throw InvariantError("apply_action: bad action kind");
}

StepResult SimEnv::step(const ActionCommand& action) {
  if (episode_over_) throw Error("step on a finished episode");

  std::optional<std::string> error = apply_action(*spec_, state_, action);
  if (error) {
    StepResult result;
    result.valid = false;
    result.error = *error;
    result.obs = observe(*spec_, state_);
    return result;
  }
  if (action.kind == ActionKind::complete) {
    episode_over_ = true;
  } else if (action.kind == ActionKind::answer) {
    episode_over_ = true;
    final_answer_ = action.text;
  }
  StepResult result;
  result.valid = true;
  result.obs = observe(*spec_, state_);
  return result;
}

TaskGoal derive_goal_for_screen(const SimAppSpec& spec, int screen_id) {
  TaskGoal goal;
  goal.target_screen = screen_id;
  for (const UiElement& el : spec.screen(screen_id).elements) {
    if (el.kind == ElementKind::toggle && el.interactable) {
      const DataField* f = spec.field(el.field);
      FieldValue v;
      v.b = !f->bool_init;
      goal.required_data[el.field] = v;
      break;
    }
  }
  return goal;
}

std::vector<SimTask> sample_tasks(const SimAppSpec& spec, int count, uint64_t seed) {
  if (count < 0) throw ValidationError("sample_tasks: count must be >= 0");
  Rng rng(mix64(fnv1a64("tasks\x1f" + spec.app_name), seed));

  std::vector<std::string> toggle_fields, input_fields;
  for (const SimScreenSpec& s : spec.screens) {
    for (const UiElement& el : s.elements) {
      if (!el.interactable) continue;
      if (el.kind == ElementKind::toggle &&
          std::find(toggle_fields.begin(), toggle_fields.end(), el.field) == toggle_fields.end()) {
        toggle_fields.push_back(el.field);
      }
      if (el.kind == ElementKind::input &&
          std::find(input_fields.begin(), input_fields.end(), el.field) == input_fields.end()) {
        input_fields.push_back(el.field);
      }
    }
  }
  std::sort(toggle_fields.begin(), toggle_fields.end());
  std::sort(input_fields.begin(), input_fields.end());

  std::vector<SimTask> tasks;
  EnvState home = initial_state(spec);
  int attempts = 0;
  const int max_attempts = count * 10 + 10;
  while (static_cast<int>(tasks.size()) < count && attempts++ < max_attempts) {
    uint64_t kind = rng.below(4);
    SimTask task;
    TaskGoal goal;
    const size_t n = spec.screens.size();
    switch (kind) {
      case 0: {
        int screen = static_cast<int>(1 + rng.below(n - 1));
        goal.target_screen = screen;
        task.text = "Open the " + spec.screens[static_cast<size_t>(screen)].name + " screen of " + spec.app_name + ".";
        break;
      }
      case 1: {
        if (toggle_fields.empty()) continue;
        const std::string& field = toggle_fields[rng.below(toggle_fields.size())];
        const DataField* f = spec.field(field);
        FieldValue v;
        v.b = !f->bool_init;
        goal.required_data[field] = v;
        if (rng.next() & 1) {
          int screen = static_cast<int>(1 + rng.below(n - 1));
          goal.target_screen = screen;
          task.text = "Turn " + field + " " + (v.b ? "on" : "off") + " and then open the " +
                      spec.screens[static_cast<size_t>(screen)].name + " screen of " + spec.app_name + ".";
        } else {
          task.text = "Turn " + field + " " + (v.b ? "on" : "off") + " in " + spec.app_name + ".";
        }
        break;
      }
      case 2: {
        if (input_fields.empty()) continue;
        const std::string& field = input_fields[rng.below(input_fields.size())];
        const DataField* f = spec.field(field);
        size_t wi = rng.below(typed_lexicon().size());
        std::string word = typed_lexicon()[wi];
        if (word == f->string_init) word = typed_lexicon()[(wi + 1) % typed_lexicon().size()];
        FieldValue v;
        v.s = word;
        goal.required_data[field] = v;
        task.text = "Set the " + field + " to '" + word + "' in " + spec.app_name + ".";
        break;
      }
      default: {
        int screen = static_cast<int>(1 + rng.below(n - 1));
        std::string word = typed_lexicon()[rng.below(typed_lexicon().size())];
        goal.target_screen = screen;
        goal.required_answer = word;
        task.text = "Open the " + spec.screens[static_cast<size_t>(screen)].name + " screen of " + spec.app_name +
                    " and answer with '" + word + "'.";
        break;
      }
    }
    try {
      shortest_plan(spec, home, goal);
    } catch (const PlanningError&) {
      continue;
    }
    task.goal = std::move(goal);
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "%04zu", tasks.size());
    task.id = spec.app_name + "-task-" + suffix;
    tasks.push_back(std::move(task));
  }
  if (static_cast<int>(tasks.size()) < count) {
    throw PlanningError("sample_tasks: could not draw enough reachable tasks");
  }
  return tasks;
}

}  // namespace agentforge::sim
