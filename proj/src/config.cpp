#include "agentforge/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace agentforge::config {

namespace {

using RawValue = std::variant<std::string, int64_t, double, bool, std::vector<std::string>, std::vector<double>>;

struct RawEntry {
  RawValue value;
  int line = 0;
};

struct Cursor {
  std::string_view text;
  size_t pos = 0;
  int line;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void skip_spaces() {
    while (!done() && (peek() == ' ' || peek() == '\t')) ++pos;
  }
};

[[noreturn]] void fail(int line, const std::string& what) {
  throw ParseError("config line " + std::to_string(line) + ": " + what);
}

bool key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

std::string parse_quoted(Cursor& c) {
  ++c.pos;  // opening quote
  std::string out;
  while (!c.done() && c.peek() != '"') {
    char ch = c.peek();
    if (ch == '\\') {
      ++c.pos;
      if (c.done()) fail(c.line, "dangling escape");
      switch (c.peek()) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail(c.line, "unsupported escape sequence");
      }
    } else {
      out += ch;
    }
    ++c.pos;
  }
  if (c.done()) fail(c.line, "unterminated string");
  ++c.pos;  // closing quote
  return out;
}

RawValue parse_scalar(Cursor& c) {
  if (c.peek() == '"') return parse_quoted(c);
  size_t start = c.pos;
  while (!c.done() && c.peek() != ',' && c.peek() != ']' && c.peek() != ' ' && c.peek() != '\t') ++c.pos;
  std::string token(c.text.substr(start, c.pos - start));
  if (token == "true") return true;
  if (token == "false") return false;
  if (token.find_first_of(".eE") != std::string::npos && token.find_first_not_of("+-0123456789.eE") == std::string::npos) {
    try {
      size_t used = 0;
      double d = std::stod(token, &used);
      if (used == token.size()) return d;
    } catch (const std::exception&) {
    }
    fail(c.line, "malformed number '" + token + "'");
  }
  int64_t n = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), n);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail(c.line, "unrecognized value '" + token + "'");
  }
  return n;
}

RawValue parse_value(Cursor& c) {
  c.skip_spaces();
  if (c.done()) fail(c.line, "missing value");
  if (c.peek() != '[') return parse_scalar(c);

  ++c.pos;  // '['
  std::vector<RawValue> items;
  while (true) {
    c.skip_spaces();
    if (c.done()) fail(c.line, "unterminated array");
    if (c.peek() == ']') {
      ++c.pos;
      break;
    }
    items.push_back(parse_scalar(c));
    c.skip_spaces();
    if (!c.done() && c.peek() == ',') {
      ++c.pos;
      continue;
    }
    if (!c.done() && c.peek() == ']') {
      ++c.pos;
      break;
    }
    fail(c.line, "expected ',' or ']' in array");
  }

  bool all_strings = std::all_of(items.begin(), items.end(),
                                 [](const RawValue& v) { return std::holds_alternative<std::string>(v); });
  if (all_strings) {
    std::vector<std::string> out;
    for (RawValue& v : items) out.push_back(std::move(std::get<std::string>(v)));
    return out;
  }
  std::vector<double> out;
  for (const RawValue& v : items) {
    if (std::holds_alternative<int64_t>(v)) {
      out.push_back(static_cast<double>(std::get<int64_t>(v)));
    } else if (std::holds_alternative<double>(v)) {
      out.push_back(std::get<double>(v));
    } else {
      fail(c.line, "arrays must hold only strings or only numbers");
    }
  }
  return out;
}

// strips a comment that starts outside any string literal
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_string && c == '\\') {
      ++i;
      continue;
    }
    if (c == '"') in_string = !in_string;
    if (c == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::map<std::string, RawEntry> parse_entries(const std::string& text) {
  std::map<std::string, RawEntry> entries;
  std::istringstream stream(text);
  std::string raw_line;
  std::string section;
  int line_no = 0;
  while (std::getline(stream, raw_line)) {
    ++line_no;
    std::string line = trim(strip_comment(raw_line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty() || !std::all_of(section.begin(), section.end(), key_char)) {
        fail(line_no, "malformed section name");
      }
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (key.empty() || !std::all_of(key.begin(), key.end(), key_char)) fail(line_no, "malformed key");

    Cursor cursor{line, eq + 1, line_no};
    RawValue value = parse_value(cursor);
    cursor.skip_spaces();
    if (!cursor.done()) fail(line_no, "trailing characters after value");

    std::string path = section.empty() ? key : section + "." + key;
    if (entries.count(path)) fail(line_no, "duplicate key '" + path + "'");
    entries[path] = RawEntry{std::move(value), line_no};
  }
  return entries;
}

class Reader {
 public:
  Reader(std::map<std::string, RawEntry> entries, std::filesystem::path base_dir)
      : entries_(std::move(entries)), base_dir_(std::move(base_dir)) {}

  int64_t get_int(const std::string& key, int64_t fallback, int64_t lo, int64_t hi) {
    const RawEntry* e = take(key);
    int64_t v = fallback;
    if (e) {
      const int64_t* n = std::get_if<int64_t>(&e->value);
      if (!n) reject(key, *e, "an integer");
      v = *n;
    }
    if (v < lo || v > hi) {
      throw ValidationError("config: " + key + " must lie in [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
    }
    return v;
  }

  double get_double(const std::string& key, double fallback, double lo, double hi, bool lo_open = false) {
    const RawEntry* e = take(key);
    double v = fallback;
    if (e) {
      if (const double* d = std::get_if<double>(&e->value)) {
        v = *d;
      } else if (const int64_t* n = std::get_if<int64_t>(&e->value)) {
        v = static_cast<double>(*n);
      } else {
        reject(key, *e, "a number");
      }
    }
    bool ok = lo_open ? (v > lo && v <= hi) : (v >= lo && v <= hi);
    if (!ok) {
      throw ValidationError("config: " + key + " must lie in " + (lo_open ? "(" : "[") +
                            format(lo) + ", " + format(hi) + "]");
    }
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) {
    const RawEntry* e = take(key);
    if (!e) return fallback;
    const bool* b = std::get_if<bool>(&e->value);
    if (!b) reject(key, *e, "true or false");
    return *b;
  }

  std::string get_string(const std::string& key, std::string fallback,
                         const std::set<std::string>& allowed = {}) {
    const RawEntry* e = take(key);
    std::string v = std::move(fallback);
    if (e) {
      const std::string* s = std::get_if<std::string>(&e->value);
      if (!s) reject(key, *e, "a string");
      v = *s;
    }
    if (!allowed.empty() && !allowed.count(v)) {
      std::string options;
      for (const std::string& a : allowed) options += (options.empty() ? "" : ", ") + a;
      throw ValidationError("config: " + key + " must be one of: " + options);
    }
    return v;
  }

  std::filesystem::path get_path(const std::string& key, std::filesystem::path fallback) {
    std::string v = get_string(key, fallback.string());
    if (v.empty()) return {};
    std::filesystem::path p(v);
    return p.is_absolute() ? p : base_dir_ / p;
  }

  std::vector<std::string> get_string_array(const std::string& key, std::vector<std::string> fallback) {
    const RawEntry* e = take(key);
    if (!e) return fallback;
    const auto* v = std::get_if<std::vector<std::string>>(&e->value);
    if (!v) reject(key, *e, "an array of strings");
    return *v;
  }

  std::vector<double> get_double_array(const std::string& key, std::vector<double> fallback) {
    const RawEntry* e = take(key);
    if (!e) return fallback;
    const auto* v = std::get_if<std::vector<double>>(&e->value);
    if (!v) reject(key, *e, "an array of numbers");
    return *v;
  }

  uint64_t get_u64(const std::string& key, uint64_t fallback) {
    const RawEntry* e = take(key);
    if (!e) return fallback;
    const int64_t* n = std::get_if<int64_t>(&e->value);
    if (!n || *n < 0) reject(key, *e, "a non-negative integer");
    return static_cast<uint64_t>(*n);
  }

  void finish() const {
    for (const auto& [key, entry] : entries_) {
      if (!consumed_.count(key)) {
        throw ValidationError("config: unknown key '" + key + "' (line " + std::to_string(entry.line) + ")");
      }
    }
  }

 private:
  const RawEntry* take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
  }

  [[noreturn]] void reject(const std::string& key, const RawEntry& entry, const std::string& expected) {
    throw ValidationError("config: " + key + " must be " + expected + " (line " + std::to_string(entry.line) +
                          ")");
  }

  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
  }

  std::map<std::string, RawEntry> entries_;
  std::filesystem::path base_dir_;
  std::set<std::string> consumed_;
};

void append_kv(std::string& out, std::string_view key, const std::string& value) {
  out += key;
  out += '=';
  out += value;
  out += '\n';
}

std::string format_double_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  Reader r(parse_entries(text), base_dir);
  PipelineConfig cfg;

  int64_t version = r.get_int("version", 1, 1, 1);
  (void)version;
  cfg.seed = r.get_u64("seed", cfg.seed);
  cfg.output_root = r.get_path("output.root", base_dir / "out");

  cfg.providers.chat = r.get_string("providers.chat", cfg.providers.chat, {"mock", "remote"});
  cfg.providers.embed = r.get_string("providers.embed", cfg.providers.embed, {"mock", "remote"});
  cfg.providers.mock_seed = r.get_u64("providers.mock_seed", cfg.providers.mock_seed);
  cfg.providers.embed_dim = static_cast<int>(r.get_int("providers.embed_dim", cfg.providers.embed_dim, 8, 8192));
  cfg.providers.base_url = r.get_string("providers.base_url", cfg.providers.base_url);
  cfg.providers.chat_model = r.get_string("providers.chat_model", cfg.providers.chat_model);
  cfg.providers.embed_model = r.get_string("providers.embed_model", cfg.providers.embed_model);
  if ((cfg.providers.chat == "remote" || cfg.providers.embed == "remote") && cfg.providers.base_url.empty() &&
      std::getenv("AGENT_FORGE_BASE_URL") == nullptr) {
    throw ValidationError("config: providers.base_url is required for remote providers");
  }

  cfg.suite.apps = r.get_string_array("suite.apps", cfg.suite.apps);
  if (cfg.suite.apps.empty()) throw ValidationError("config: suite.apps must list at least one app");
  {
    std::set<std::string> seen;
    for (const std::string& app : cfg.suite.apps) {
      if (trim(app).empty()) throw ValidationError("config: suite.apps entries must be non-empty");
      if (!seen.insert(app).second) throw ValidationError("config: suite.apps contains '" + app + "' twice");
    }
  }
  cfg.suite.n_screens = static_cast<int>(r.get_int("suite.n_screens", cfg.suite.n_screens, 2, 64));
  cfg.suite.elements_per_screen =
      static_cast<int>(r.get_int("suite.elements_per_screen", cfg.suite.elements_per_screen, 2, 10));
  cfg.suite.n_fields = static_cast<int>(r.get_int("suite.n_fields", cfg.suite.n_fields, 1, 12));

  cfg.explore.sessions_per_app =
      static_cast<int>(r.get_int("explore.sessions_per_app", cfg.explore.sessions_per_app, 1, 1000));
  cfg.explore.steps_per_session =
      static_cast<int>(r.get_int("explore.steps_per_session", cfg.explore.steps_per_session, 1, 1000));

  cfg.memory.tau = r.get_double("memory.tau", cfg.memory.tau, 0.0, 1.0, /*lo_open=*/true);
  cfg.memory.diversity_threshold =
      r.get_double("memory.diversity_threshold", cfg.memory.diversity_threshold, 0.0, 1.0, true);

  cfg.synthesize.k_long_term = static_cast<int>(r.get_int("synthesize.k_long_term", cfg.synthesize.k_long_term, 1, 1000));
  cfg.synthesize.clarity_min = static_cast<int>(r.get_int("synthesize.clarity_min", cfg.synthesize.clarity_min, 1, 5));
  cfg.synthesize.reason_min = static_cast<int>(r.get_int("synthesize.reason_min", cfg.synthesize.reason_min, 1, 5));
  cfg.synthesize.dedup_threshold =
      r.get_double("synthesize.dedup_threshold", cfg.synthesize.dedup_threshold, 0.0, 1.0, true);
  cfg.synthesize.per_app_cap = static_cast<int>(r.get_int("synthesize.per_app_cap", cfg.synthesize.per_app_cap, 1, 100000));

  cfg.rollout.strategy = r.get_string("rollout.strategy", cfg.rollout.strategy,
                                      {"expert", "random-switch", "error-intervention", "self-evolution"});
  cfg.rollout.policy = r.get_string("rollout.policy", cfg.rollout.policy, {"oracle", "llm"});
  cfg.rollout.monitor = r.get_string("rollout.monitor", cfg.rollout.monitor, {"oracle", "llm"});
  cfg.rollout.judge = r.get_string("rollout.judge", cfg.rollout.judge, {"oracle", "llm"});
  cfg.rollout.tasks_per_app = static_cast<int>(r.get_int("rollout.tasks_per_app", cfg.rollout.tasks_per_app, 1, 10000));
  cfg.rollout.max_steps = static_cast<int>(r.get_int("rollout.max_steps", cfg.rollout.max_steps, 1, 10000));
  cfg.rollout.epsilon = r.get_double("rollout.epsilon", cfg.rollout.epsilon, 0.0, 1.0);
  cfg.rollout.switch_p = r.get_double("rollout.switch_p", cfg.rollout.switch_p, 0.0, 1.0);
  cfg.rollout.max_interventions =
      static_cast<int>(r.get_int("rollout.max_interventions", cfg.rollout.max_interventions, 1, 100));
  cfg.rollout.min_expert_steps =
      static_cast<int>(r.get_int("rollout.min_expert_steps", cfg.rollout.min_expert_steps, 1, 100));
  cfg.rollout.rounds = static_cast<int>(r.get_int("rollout.rounds", cfg.rollout.rounds, 1, 100));
  cfg.rollout.rewrite = r.get_bool("rollout.rewrite", cfg.rollout.rewrite);

  cfg.analyze.test_corpus = r.get_path("analyze.test_corpus", cfg.analyze.test_corpus);
  if (!cfg.analyze.test_corpus.empty() && !std::filesystem::exists(cfg.analyze.test_corpus)) {
    throw ValidationError("config: analyze.test_corpus does not exist: " + cfg.analyze.test_corpus.string());
  }
  cfg.analyze.test_tasks_per_app =
      static_cast<int>(r.get_int("analyze.test_tasks_per_app", cfg.analyze.test_tasks_per_app, 1, 1000));
  cfg.analyze.thresholds = r.get_double_array("analyze.thresholds", cfg.analyze.thresholds);
  for (double t : cfg.analyze.thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("config: analyze.thresholds entries must lie in (0, 1]");
  }
  cfg.analyze.ratios = r.get_double_array("analyze.ratios", cfg.analyze.ratios);
  for (double ratio : cfg.analyze.ratios) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("config: analyze.ratios entries must lie in (0, 1)");
  }
  cfg.analyze.match_threshold =
      r.get_double("analyze.match_threshold", cfg.analyze.match_threshold, 0.0, 1.0, true);
  cfg.analyze.curve_points = static_cast<int>(r.get_int("analyze.curve_points", cfg.analyze.curve_points, 1, 64));

  r.finish();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::filesystem::path dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return parse_config(read_text_file(path), dir);
}

std::string PipelineConfig::digest() const {
  std::string canon;
  append_kv(canon, "seed", std::to_string(seed));
  append_kv(canon, "output.root", output_root.string());
  append_kv(canon, "providers.chat", providers.chat);
  append_kv(canon, "providers.embed", providers.embed);
  append_kv(canon, "providers.mock_seed", std::to_string(providers.mock_seed));
  append_kv(canon, "providers.embed_dim", std::to_string(providers.embed_dim));
  append_kv(canon, "providers.base_url", providers.base_url);
  append_kv(canon, "providers.chat_model", providers.chat_model);
  append_kv(canon, "providers.embed_model", providers.embed_model);
  std::string apps;
  for (const std::string& app : suite.apps) apps += app + ",";
  append_kv(canon, "suite.apps", apps);
  append_kv(canon, "suite.n_screens", std::to_string(suite.n_screens));
  append_kv(canon, "suite.elements_per_screen", std::to_string(suite.elements_per_screen));
  append_kv(canon, "suite.n_fields", std::to_string(suite.n_fields));
  append_kv(canon, "explore.sessions_per_app", std::to_string(explore.sessions_per_app));
  append_kv(canon, "explore.steps_per_session", std::to_string(explore.steps_per_session));
  append_kv(canon, "memory.tau", format_double_exact(memory.tau));
  append_kv(canon, "memory.diversity_threshold", format_double_exact(memory.diversity_threshold));
  append_kv(canon, "synthesize.k_long_term", std::to_string(synthesize.k_long_term));
  append_kv(canon, "synthesize.clarity_min", std::to_string(synthesize.clarity_min));
  append_kv(canon, "synthesize.reason_min", std::to_string(synthesize.reason_min));
  append_kv(canon, "synthesize.dedup_threshold", format_double_exact(synthesize.dedup_threshold));
  append_kv(canon, "synthesize.per_app_cap", std::to_string(synthesize.per_app_cap));
  append_kv(canon, "rollout.strategy", rollout.strategy);
  append_kv(canon, "rollout.policy", rollout.policy);
  append_kv(canon, "rollout.monitor", rollout.monitor);
  append_kv(canon, "rollout.judge", rollout.judge);
  append_kv(canon, "rollout.tasks_per_app", std::to_string(rollout.tasks_per_app));
  append_kv(canon, "rollout.max_steps", std::to_string(rollout.max_steps));
  append_kv(canon, "rollout.epsilon", format_double_exact(rollout.epsilon));
  append_kv(canon, "rollout.switch_p", format_double_exact(rollout.switch_p));
  append_kv(canon, "rollout.max_interventions", std::to_string(rollout.max_interventions));
  append_kv(canon, "rollout.min_expert_steps", std::to_string(rollout.min_expert_steps));
  append_kv(canon, "rollout.rounds", std::to_string(rollout.rounds));
  append_kv(canon, "rollout.rewrite", rollout.rewrite ? "true" : "false");
  append_kv(canon, "analyze.test_corpus", analyze.test_corpus.string());
  append_kv(canon, "analyze.test_tasks_per_app", std::to_string(analyze.test_tasks_per_app));
  std::string thresholds;
  for (double t : analyze.thresholds) thresholds += format_double_exact(t) + ",";
  append_kv(canon, "analyze.thresholds", thresholds);
  std::string ratios;
  for (double ratio : analyze.ratios) ratios += format_double_exact(ratio) + ",";
  append_kv(canon, "analyze.ratios", ratios);
  append_kv(canon, "analyze.match_threshold", format_double_exact(analyze.match_threshold));
  append_kv(canon, "analyze.curve_points", std::to_string(analyze.curve_points));
  return hex16(fnv1a64(canon));
}

}  // namespace agentforge::config
