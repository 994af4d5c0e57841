#include "agentforge/env.hpp"

#include <algorithm>
#include <charconv>

#include "agentforge/common.hpp"

namespace agentforge {

std::string to_pgm(const PixelGrid& grid) {
  if (grid.width <= 0 || grid.height <= 0 ||
      grid.pixels.size() != static_cast<size_t>(grid.width) * grid.height) {
    throw InvariantError("to_pgm: malformed pixel grid");
  }
  std::string out = "P5\n" + std::to_string(grid.width) + " " + std::to_string(grid.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(grid.pixels.data()), grid.pixels.size());
  return out;
}

namespace {
int parse_pgm_int(std::string_view bytes, size_t& pos) {
  while (pos < bytes.size() && (bytes[pos] == ' ' || bytes[pos] == '\n' || bytes[pos] == '\t' || bytes[pos] == '\r')) ++pos;
  int value = 0;
  auto [ptr, ec] = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), value);
  if (ec != std::errc()) throw ParseError("from_pgm: expected integer");
  pos = static_cast<size_t>(ptr - bytes.data());
  return value;
}
}  // namespace

PixelGrid from_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw ParseError("from_pgm: not a P5 file");
  size_t pos = 2;
  PixelGrid grid;
  grid.width = parse_pgm_int(bytes, pos);
  grid.height = parse_pgm_int(bytes, pos);
  int maxval = parse_pgm_int(bytes, pos);
  if (maxval != 255) throw ParseError("from_pgm: unsupported maxval");
  if (pos >= bytes.size() || bytes[pos] != '\n') throw ParseError("from_pgm: missing raster separator");
  ++pos;
  size_t count = static_cast<size_t>(grid.width) * grid.height;
  if (grid.width <= 0 || grid.height <= 0 || bytes.size() - pos != count) {
    throw ParseError("from_pgm: raster size mismatch");
  }
  grid.pixels.assign(bytes.begin() + static_cast<ptrdiff_t>(pos), bytes.end());
  return grid;
}

std::string kind_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::nav: return "nav";
    case ElementKind::toggle: return "toggle";
    case ElementKind::input: return "input";
    case ElementKind::back: return "back";
    case ElementKind::terminal: return "terminal";
  }
  throw InvariantError("kind_name: bad enum");
}

ElementKind kind_from_name(const std::string& name) {
  if (name == "nav") return ElementKind::nav;
  if (name == "toggle") return ElementKind::toggle;
  if (name == "input") return ElementKind::input;
  if (name == "back") return ElementKind::back;
  if (name == "terminal") return ElementKind::terminal;
  throw ParseError("unknown element kind: " + name);
}

uint64_t observation_digest(const Observation& obs) {
  uint64_t h = fnv1a64("obs\x1f");
  h = fnv1a64(std::to_string(obs.screen_id), h);
  for (const A11yNode& n : obs.a11y) {
    h = fnv1a64("\x1f", h);
    h = fnv1a64(std::to_string(n.id), h);
    h = fnv1a64(kind_name(n.kind), h);
    h = fnv1a64(n.label, h);
    h = fnv1a64(n.interactable ? "1" : "0", h);
    h = fnv1a64(std::to_string(n.x) + "," + std::to_string(n.y) + "," + std::to_string(n.w) + "," + std::to_string(n.h), h);
  }
  h = fnv1a64("\x1fpx\x1f", h);
  h = fnv1a64(obs.render.pixels.data(), obs.render.pixels.size(), h);
  h = fnv1a64(std::to_string(obs.render.width) + "x" + std::to_string(obs.render.height), h);
  return h;
}

std::string action_kind_name(ActionKind kind) {
  switch (kind) {
    case ActionKind::click: return "click";
    case ActionKind::type: return "type";
    case ActionKind::back: return "back";
    case ActionKind::complete: return "complete";
    case ActionKind::answer: return "answer";
  }
  throw InvariantError("action_kind_name: bad enum");
}

ActionKind action_kind_from_name(const std::string& name) {
  if (name == "click") return ActionKind::click;
  if (name == "type") return ActionKind::type;
  if (name == "back") return ActionKind::back;
  if (name == "complete") return ActionKind::complete;
  if (name == "answer") return ActionKind::answer;
  throw ParseError("unknown action kind: " + name);
}

ActionCommand ActionCommand::click_on(int element) { return {ActionKind::click, element, ""}; }
ActionCommand ActionCommand::type_into(int element, std::string text) { return {ActionKind::type, element, std::move(text)}; }
ActionCommand ActionCommand::go_back() { return {ActionKind::back, -1, ""}; }
ActionCommand ActionCommand::complete() { return {ActionKind::complete, -1, ""}; }
ActionCommand ActionCommand::answer_with(std::string text) { return {ActionKind::answer, -1, std::move(text)}; }

std::string action_to_string(const ActionCommand& action) {
  switch (action.kind) {
    case ActionKind::click: return "click(" + std::to_string(action.element) + ")";
    case ActionKind::type: return "type(" + std::to_string(action.element) + ", \"" + action.text + "\")";
    case ActionKind::back: return "back";
    case ActionKind::complete: return "complete";
    case ActionKind::answer: return "answer(\"" + action.text + "\")";
  }
  throw InvariantError("action_to_string: bad enum");
}

nlohmann::json action_to_json(const ActionCommand& action) {
  nlohmann::json j;
  j["kind"] = action_kind_name(action.kind);
  if (action.kind == ActionKind::click || action.kind == ActionKind::type) j["element"] = action.element;
  if (action.kind == ActionKind::type || action.kind == ActionKind::answer) j["text"] = action.text;
  return j;
}

ActionCommand action_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ParseError("action: missing kind");
  }
  ActionCommand action;
  action.kind = action_kind_from_name(j["kind"].get<std::string>());
  if (action.kind == ActionKind::click || action.kind == ActionKind::type) {
    if (!j.contains("element") || !j["element"].is_number_integer()) {
      throw ParseError("action: missing element for " + action_kind_name(action.kind));
    }
    action.element = j["element"].get<int>();
  }
  if (action.kind == ActionKind::type || action.kind == ActionKind::answer) {
    if (!j.contains("text") || !j["text"].is_string()) {
      throw ParseError("action: missing text for " + action_kind_name(action.kind));
    }
    action.text = j["text"].get<std::string>();
  }
  return action;
}

nlohmann::json a11y_to_json(const A11yNode& node) {
  nlohmann::json j;
  j["id"] = node.id;
  j["kind"] = kind_name(node.kind);
  j["label"] = node.label;
  j["interactable"] = node.interactable;
  j["bounds"] = {node.x, node.y, node.w, node.h};
  return j;
}

A11yNode a11y_from_json(const nlohmann::json& j) {
  A11yNode node;
  node.id = j.at("id").get<int>();
  node.kind = kind_from_name(j.at("kind").get<std::string>());
  node.label = j.at("label").get<std::string>();
  node.interactable = j.at("interactable").get<bool>();
  const auto& b = j.at("bounds");
  if (!b.is_array() || b.size() != 4) throw ParseError("a11y: bad bounds");
  node.x = b[0].get<int>();
  node.y = b[1].get<int>();
  node.w = b[2].get<int>();
  node.h = b[3].get<int>();
  return node;
}

nlohmann::json transition_to_json(const TransitionRecord& t) {
  nlohmann::json j;
  j["step"] = t.step;
  j["obs"] = t.obs;
  j["action"] = action_to_json(t.action);
  j["obs_next"] = t.obs_next;
  return j;
}

TransitionRecord transition_from_json(const nlohmann::json& j) {
  TransitionRecord t;
  t.step = j.at("step").get<int>();
  t.obs = j.at("obs").get<std::string>();
  t.action = action_from_json(j.at("action"));
  t.obs_next = j.at("obs_next").get<std::string>();
  return t;
}

std::string ObservationStore::put(const Observation& obs) {
  std::string ref = hex16(observation_digest(obs));
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = entries_.try_emplace(ref, obs);
  if (inserted) order_.push_back(ref);
  return ref;
}

const Observation& ObservationStore::get(const std::string& ref) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(ref);
  if (it == entries_.end()) throw StoreError("observation not found: " + ref);
  return it->second;  // map nodes are stable; later puts never mutate entries
}

bool ObservationStore::contains(const std::string& ref) const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.count(ref) > 0;
}

size_t ObservationStore::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

std::vector<std::string> ObservationStore::refs() const {
  std::lock_guard<std::mutex> lock(mu_);
  return order_;
}

void ObservationStore::save(const std::filesystem::path& root) const {
  namespace fs = std::filesystem;
  fs::create_directories(root / "obs");
  fs::create_directories(root / "renders");
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& [ref, obs] : entries_) {
    fs::path meta = root / "obs" / (ref + ".json");
    if (!fs::exists(meta)) {
      nlohmann::json j;
      j["screen_id"] = obs.screen_id;
      j["render"] = ref;
      j["a11y"] = nlohmann::json::array();
      for (const A11yNode& n : obs.a11y) j["a11y"].push_back(a11y_to_json(n));
      write_text_file_atomic(meta, j.dump(2) + "\n");
    }
    fs::path img = root / "renders" / (ref + ".pgm");
    if (!fs::exists(img)) write_text_file_atomic(img, to_pgm(obs.render));
  }
}

void ObservationStore::load(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::path obs_dir = root / "obs";
  if (!fs::exists(obs_dir)) throw StoreError("observation store missing: " + obs_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(obs_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(file));
    Observation obs;
    obs.screen_id = j.at("screen_id").get<int>();
    for (const auto& n : j.at("a11y")) obs.a11y.push_back(a11y_from_json(n));
    std::string ref = j.at("render").get<std::string>();
    obs.render = from_pgm(read_text_file(root / "renders" / (ref + ".pgm")));
    std::string got = put(obs);
    if (got != ref) throw StoreError("observation store corrupt: ref mismatch for " + ref);
  }
}

}  // namespace agentforge
