#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace agentforge {

struct PixelGrid {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major grayscale

  uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  bool operator==(const PixelGrid&) const = default;
};

std::string to_pgm(const PixelGrid& grid);
PixelGrid from_pgm(std::string_view bytes);

enum class ElementKind { nav, toggle, input, back, terminal };

std::string kind_name(ElementKind kind);
ElementKind kind_from_name(const std::string& name);

struct A11yNode {
  int id = -1;
  ElementKind kind = ElementKind::nav;
  std::string label;
  bool interactable = true;
  int x = 0, y = 0, w = 0, h = 0;

  bool operator==(const A11yNode&) const = default;
};

struct Observation {
  int screen_id = -1;
  PixelGrid render;
  std::vector<A11yNode> a11y;

  bool operator==(const Observation&) const = default;
};

uint64_t observation_digest(const Observation& obs);

enum class ActionKind { click, type, back, complete, answer };

std::string action_kind_name(ActionKind kind);
ActionKind action_kind_from_name(const std::string& name);

struct ActionCommand {
  ActionKind kind = ActionKind::click;
  int element = -1;   // click / type target
  std::string text;   // typed text or submitted answer

  static ActionCommand click_on(int element);
  static ActionCommand type_into(int element, std::string text);
  static ActionCommand go_back();
  static ActionCommand complete();
  static ActionCommand answer_with(std::string text);

  bool is_terminal() const { return kind == ActionKind::complete || kind == ActionKind::answer; }
  bool operator==(const ActionCommand&) const = default;
};

// compact human form, e.g. click(3), type(2, "sunset"), back
std::string action_to_string(const ActionCommand& action);

nlohmann::json action_to_json(const ActionCommand& action);
ActionCommand action_from_json(const nlohmann::json& j);

nlohmann::json a11y_to_json(const A11yNode& node);
A11yNode a11y_from_json(const nlohmann::json& j);

struct StepResult {
  bool valid = true;
  std::string error;  // set iff !valid; the episode continues either way
  Observation obs;    // post-action observation (pre-action state when invalid)
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual Observation reset() = 0;
  virtual StepResult step(const ActionCommand& action) = 0;
  virtual bool episode_over() const = 0;
};

struct TransitionRecord {
  int step = 0;
  std::string obs;       // content ref of the pre-action observation
  ActionCommand action;
  std::string obs_next;  // content ref of the post-action observation
};

nlohmann::json transition_to_json(const TransitionRecord& t);
TransitionRecord transition_from_json(const nlohmann::json& j);

// Content-addressed observation store. Keys are the hex digest of the full
// observation (screen id, a11y tree, pixels); put is idempotent.
class ObservationStore {
 public:
  std::string put(const Observation& obs);
  const Observation& get(const std::string& ref) const;
  bool contains(const std::string& ref) const;
  size_t size() const;
  std::vector<std::string> refs() const;  // insertion order

  // store/obs/{ref}.json + store/renders/{ref}.pgm; existing files are kept
  // (content addressing makes them identical by construction)
  void save(const std::filesystem::path& root) const;
  // merges every persisted observation under root into this store
  void load(const std::filesystem::path& root);

 private:
  std::map<std::string, Observation> entries_;
  std::vector<std::string> order_;
  mutable std::mutex mu_;
};

}  // namespace agentforge
