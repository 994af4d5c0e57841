#include <doctest.h>

#include <map>
#include <memory>
#include <set>

#include "agentforge/explorer.hpp"
#include "agentforge/phash.hpp"
#include "agentforge/sim.hpp"
#include "oracles.hpp"

using namespace agentforge;
using namespace agentforge::explorer;

namespace {

std::string traj_dump(const ExplorationTrajectory& t) {
  std::string out = t.app_name + "#" + std::to_string(t.session_id) + "@" + std::to_string(t.seed);
  for (const auto& record : t.transitions) out += "\n" + transition_to_json(record).dump();
  return out;
}

}  // namespace

TEST_CASE("zero-step walks produce empty trajectories") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("walk0", {5, 4, 2}, 1));
  sim::SimEnv env(spec);
  ObservationStore store;
  ElementBlacklist blacklist;
  ExplorationTrajectory t = random_walk(env, store, "walk0", 0, 0, blacklist, 9);
  CHECK(t.transitions.empty());
  CHECK(t.app_name == "walk0");
  CHECK(store.size() == 1);  // the reset observation is still recorded
}

TEST_CASE("walks are deterministic in (spec, seed, blacklist)") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("walkdet", {8, 5, 3}, 2));
  auto run = [&] {
    sim::SimEnv env(spec);
    ObservationStore store;
    ElementBlacklist blacklist;
    return traj_dump(random_walk(env, store, "walkdet", 0, 25, blacklist, 77));
  };
  CHECK(run() == run());
  auto run_other_seed = [&] {
    sim::SimEnv env(spec);
    ObservationStore store;
    ElementBlacklist blacklist;
    return traj_dump(random_walk(env, store, "walkdet", 0, 25, blacklist, 78));
  };
  CHECK(run() != run_other_seed());
}

TEST_CASE("transitions chain within every trajectory") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("chain", {8, 5, 3}, 3));
  ObservationStore store;
  auto result = run_campaign({spec}, 10, 10, 500, store);
  REQUIRE(result.trajectories.size() == 10);
  for (const auto& t : result.trajectories) {
    for (size_t k = 0; k + 1 < t.transitions.size(); ++k) {
      CHECK(t.transitions[k].obs_next == t.transitions[k + 1].obs);
    }
    CHECK(t.transitions.size() <= 10);
  }
}

TEST_CASE("no-effect activations are blacklisted and never drawn again") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("blk", {8, 5, 3}, 4));
  sim::SimEnv env(spec);
  ObservationStore store;
  ElementBlacklist blacklist;
  std::vector<ExplorationTrajectory> walks;
  for (int session = 0; session < 30; ++session) {
    walks.push_back(random_walk(env, store, "blk", session, 10, blacklist, 900 + session));
  }

  // every observed no-change transition must be in the final blacklist
  size_t no_change = 0;
  for (const auto& t : walks) {
    for (const auto& record : t.transitions) {
      if (record.obs == record.obs_next) {
        ++no_change;
        uint64_t fp = screen_fingerprint(store.get(record.obs));
        int element = record.action.element;
        REQUIRE(element >= 0);
        CHECK(blacklist.contains(fp, element));
      }
    }
  }
  CHECK(no_change > 0);  // walks long enough to hit back-on-empty-stack no-ops

  // replay in campaign order: once a pair is added it is never drawn again
  std::set<std::pair<uint64_t, int>> seen;
  for (const auto& t : walks) {
    for (const auto& record : t.transitions) {
      uint64_t fp = screen_fingerprint(store.get(record.obs));
      CHECK(seen.count({fp, record.action.element}) == 0);
      if (record.obs == record.obs_next) seen.insert({fp, record.action.element});
    }
  }
}

TEST_CASE("campaigns produce sessions_per_app trajectories per app") {
  std::vector<std::shared_ptr<const sim::SimAppSpec>> specs;
  for (int i = 0; i < 3; ++i) {
    specs.push_back(std::make_shared<const sim::SimAppSpec>(
        sim::generate_app("campaign" + std::to_string(i), {6, 4, 2}, 10 + static_cast<uint64_t>(i))));
  }
  ObservationStore store;
  auto result = run_campaign(specs, 5, 10, 100, store);
  CHECK(result.trajectories.size() == 15);
  std::map<std::string, int> per_app;
  for (const auto& t : result.trajectories) per_app[t.app_name]++;
  for (const auto& [app, count] : per_app) CHECK(count == 5);
  // session seeds are base_seed + session index
  for (const auto& t : result.trajectories) {
    CHECK(t.seed == 100 + static_cast<uint64_t>(t.session_id));
  }
}

TEST_CASE("disjoint base seeds give disjoint trajectory seed sets") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("seeds", {6, 4, 2}, 12));
  ObservationStore store;
  auto a = run_campaign({spec}, 5, 5, 0, store);
  auto b = run_campaign({spec}, 5, 5, 1000, store);
  std::set<uint64_t> seeds_a, seeds_b;
  for (const auto& t : a.trajectories) seeds_a.insert(t.seed);
  for (const auto& t : b.trajectories) seeds_b.insert(t.seed);
  for (uint64_t s : seeds_a) CHECK(seeds_b.count(s) == 0);
}

TEST_CASE("a long campaign visits most screens") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("visits", {10, 5, 3}, 13));
  ObservationStore store;
  auto result = run_campaign({spec}, 50, 10, 7000, store);
  std::set<int> visited;
  for (const auto& t : result.trajectories) {
    for (const auto& record : t.transitions) {
      visited.insert(store.get(record.obs).screen_id);
      visited.insert(store.get(record.obs_next).screen_id);
    }
  }
  CHECK(visited.size() >= 8);  // >= 80% of the 10 screens
}

TEST_CASE("campaign results are identical across worker counts") {
  std::vector<std::shared_ptr<const sim::SimAppSpec>> specs;
  for (int i = 0; i < 4; ++i) {
    specs.push_back(std::make_shared<const sim::SimAppSpec>(
        sim::generate_app("jobs" + std::to_string(i), {6, 4, 2}, 20 + static_cast<uint64_t>(i))));
  }
  ObservationStore store1, store4;
  auto serial = run_campaign(specs, 4, 8, 3000, store1, 1);
  auto parallel = run_campaign(specs, 4, 8, 3000, store4, 4);
  REQUIRE(serial.trajectories.size() == parallel.trajectories.size());
  for (size_t i = 0; i < serial.trajectories.size(); ++i) {
    CHECK(traj_dump(serial.trajectories[i]) == traj_dump(parallel.trajectories[i]));
  }
  // the content-addressed stores end up with the same entries
  auto refs1 = store1.refs();
  auto refs4 = store4.refs();
  CHECK(std::set<std::string>(refs1.begin(), refs1.end()) ==
        std::set<std::string>(refs4.begin(), refs4.end()));
}

TEST_CASE("trajectory store round-trips through the filesystem") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("persist", {6, 4, 2}, 33));
  ObservationStore store;
  auto result = run_campaign({spec}, 3, 10, 40, store);
  oracle::TempDir dir;
  save_trajectories(dir.path, result.trajectories);
  auto loaded = load_trajectories(dir.path, "persist");
  REQUIRE(loaded.size() == result.trajectories.size());
  for (size_t i = 0; i < loaded.size(); ++i) {
    CHECK(traj_dump(loaded[i]) == traj_dump(result.trajectories[i]));
  }
  CHECK_THROWS_AS(load_trajectories(dir.path, "missing-app"), StoreError);
}

TEST_CASE("observation store persists and reloads content-addressed entries") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("obsstore", {5, 4, 2}, 44));
  ObservationStore store;
  run_campaign({spec}, 2, 8, 60, store);
  REQUIRE(store.size() > 0);
  oracle::TempDir dir;
  store.save(dir.path);
  ObservationStore reloaded;
  reloaded.load(dir.path);
  CHECK(reloaded.size() == store.size());
  for (const auto& ref : store.refs()) {
    REQUIRE(reloaded.contains(ref));
    CHECK(reloaded.get(ref) == store.get(ref));
  }
}
