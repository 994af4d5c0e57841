#include "agentforge/explorer.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

#include "agentforge/phash.hpp"

namespace agentforge::explorer {

using nlohmann::json;

uint64_t screen_fingerprint(const Observation& obs) { return perceptual_hash(obs.render).bits; }

ExplorationTrajectory random_walk(Environment& env, ObservationStore& store, const std::string& app_name,
                                  int session_id, int steps, ElementBlacklist& blacklist, uint64_t seed) {
  if (steps < 0) throw ValidationError("random_walk: steps must be >= 0");
  Rng rng(seed);
  ExplorationTrajectory trajectory;
  trajectory.app_name = app_name;
  trajectory.session_id = session_id;
  trajectory.seed = seed;

  Observation obs = env.reset();
  std::string ref = store.put(obs);
  uint64_t fingerprint = screen_fingerprint(obs);

  for (int step = 0; step < steps; ++step) {
    std::vector<const A11yNode*> candidates;
    for (const A11yNode& node : obs.a11y) {
      if (!node.interactable) continue;
      if (node.kind == ElementKind::terminal) continue;
      if (blacklist.contains(fingerprint, node.id)) continue;
      candidates.push_back(&node);
    }
    if (candidates.empty()) break;

    const A11yNode* chosen = candidates[rng.below(candidates.size())];
    ActionCommand action;
    if (chosen->kind == ElementKind::input) {
      const auto& lexicon = sim::typed_lexicon();
      action = ActionCommand::type_into(chosen->id, lexicon[rng.below(lexicon.size())]);
    } else {
      action = ActionCommand::click_on(chosen->id);
    }

    StepResult result = env.step(action);
    if (!result.valid) throw InvariantError("random_walk drew an invalid action: " + result.error);
    std::string next_ref = store.put(result.obs);
    if (next_ref == ref) blacklist.add(fingerprint, chosen->id);

    TransitionRecord record;
    record.step = step;
    record.obs = ref;
    record.action = action;
    record.obs_next = next_ref;
    trajectory.transitions.push_back(std::move(record));

    obs = std::move(result.obs);
    ref = std::move(next_ref);
    fingerprint = screen_fingerprint(obs);
  }
  return trajectory;
}

CampaignResult run_campaign(const std::vector<std::shared_ptr<const sim::SimAppSpec>>& specs,
                            int sessions_per_app, int steps_per_session, uint64_t base_seed,
                            ObservationStore& store, int jobs) {
  if (sessions_per_app < 1) throw ValidationError("run_campaign: sessions_per_app must be >= 1");
  for (const auto& spec : specs) {
    if (!spec) throw ValidationError("run_campaign: null spec");
  }

  std::vector<std::vector<ExplorationTrajectory>> per_app(specs.size());
  std::vector<std::vector<std::string>> per_app_warnings(specs.size());

  parallel_for(specs.size(), jobs, [&](size_t app_index) {
    const auto& spec = specs[app_index];
    sim::SimEnv env(spec);
    ElementBlacklist blacklist;
    for (int session = 0; session < sessions_per_app; ++session) {
      uint64_t seed = base_seed + static_cast<uint64_t>(session);
      try {
        per_app[app_index].push_back(
            random_walk(env, store, spec->app_name, session, steps_per_session, blacklist, seed));
      } catch (const std::exception& e) {
        per_app_warnings[app_index].push_back(spec->app_name + " session " + std::to_string(session) +
                                              " failed: " + e.what());
      }
    }
    if (per_app[app_index].empty()) {
      throw Error("all exploration sessions failed for app " + spec->app_name);
    }
  });

  CampaignResult result;
  for (size_t i = 0; i < specs.size(); ++i) {
    for (auto& t : per_app[i]) result.trajectories.push_back(std::move(t));
    for (auto& w : per_app_warnings[i]) result.warnings.push_back(std::move(w));
  }
  return result;
}

namespace {

std::string session_file_name(int session_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "session_%03d.jsonl", session_id);
  return buf;
}

}  // namespace

void save_trajectories(const std::filesystem::path& root, const std::vector<ExplorationTrajectory>& trajectories) {
  namespace fs = std::filesystem;
  std::map<std::string, std::vector<const ExplorationTrajectory*>> by_app;
  for (const ExplorationTrajectory& t : trajectories) by_app[t.app_name].push_back(&t);

  for (const auto& [app, list] : by_app) {
    json meta;
    meta["app_name"] = app;
    meta["sessions"] = json::array();
    for (const ExplorationTrajectory* t : list) {
      std::string lines;
      for (const TransitionRecord& record : t->transitions) {
        lines += transition_to_json(record).dump() + "\n";
      }
      write_text_file_atomic(root / app / session_file_name(t->session_id), lines);
      meta["sessions"].push_back({{"session_id", t->session_id},
                                  {"seed", t->seed},
                                  {"transitions", t->transitions.size()},
                                  {"file", session_file_name(t->session_id)}});
    }
    write_text_file_atomic(root / app / "sessions.json", meta.dump(2) + "\n");
  }
}

std::vector<ExplorationTrajectory> load_trajectories(const std::filesystem::path& root, const std::string& app_name) {
  namespace fs = std::filesystem;
  fs::path meta_path = root / app_name / "sessions.json";
  if (!fs::exists(meta_path)) throw StoreError("no exploration data for app " + app_name + " under " + root.string());
  json meta = json::parse(read_text_file(meta_path));

  std::vector<ExplorationTrajectory> out;
  for (const json& s : meta.at("sessions")) {
    ExplorationTrajectory t;
    t.app_name = app_name;
    t.session_id = s.at("session_id").get<int>();
    t.seed = s.at("seed").get<uint64_t>();
    std::string body = read_text_file(root / app_name / s.at("file").get<std::string>());
    size_t pos = 0;
    while (pos < body.size()) {
      size_t end = body.find('\n', pos);
      if (end == std::string::npos) end = body.size();
      std::string line = body.substr(pos, end - pos);
      pos = end + 1;
      if (trim(line).empty()) continue;
      t.transitions.push_back(transition_from_json(json::parse(line)));
    }
    if (static_cast<size_t>(s.at("transitions").get<int>()) != t.transitions.size()) {
      throw StoreError("session file truncated for app " + app_name);
    }
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(),
            [](const ExplorationTrajectory& a, const ExplorationTrajectory& b) { return a.session_id < b.session_id; });
  return out;
}

}  // namespace agentforge::explorer
