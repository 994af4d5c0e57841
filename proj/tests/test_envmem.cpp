#include <doctest.h>

#include <memory>
#include <set>

#include "agentforge/envmem.hpp"
#include "agentforge/explorer.hpp"
#include "agentforge/phash.hpp"
#include "agentforge/providers.hpp"
#include "agentforge/sim.hpp"
#include "oracles.hpp"

using namespace agentforge;
using namespace agentforge::envmem;

namespace {

// 9x8 grid = one pixel per hash cell, so hash bits are directly controllable
Observation synthetic_obs(int screen_id, const std::vector<uint8_t>& row0) {
  Observation obs;
  obs.screen_id = screen_id;
  obs.render.width = 9;
  obs.render.height = 8;
  obs.render.pixels.assign(72, 100);
  for (size_t c = 0; c < row0.size() && c < 9; ++c) obs.render.pixels[c] = row0[c];
  return obs;
}

Observation random_obs(int screen_id, uint64_t seed) {
  Observation obs;
  obs.screen_id = screen_id;
  obs.render.width = 9;
  obs.render.height = 8;
  obs.render.pixels.resize(72);
  Rng rng(seed);
  for (auto& px : obs.render.pixels) px = static_cast<uint8_t>(rng.below(256));
  return obs;
}

explorer::ExplorationTrajectory chain(const std::string& app, const std::vector<std::string>& refs) {
  explorer::ExplorationTrajectory t;
  t.app_name = app;
  t.session_id = 0;
  for (size_t i = 0; i + 1 < refs.size(); ++i) {
    TransitionRecord record;
    record.step = static_cast<int>(i);
    record.obs = refs[i];
    record.action = ActionCommand::click_on(static_cast<int>(i));
    record.obs_next = refs[i + 1];
    t.transitions.push_back(std::move(record));
  }
  return t;
}

// campaign-order (ref, independently-computed hash) list for the oracle
std::vector<std::pair<std::string, uint64_t>> ordered_hashes(
    const std::vector<explorer::ExplorationTrajectory>& trajs, const ObservationStore& store) {
  std::vector<std::pair<std::string, uint64_t>> out;
  for (const auto& t : trajs) {
    for (const auto& record : t.transitions) {
      out.push_back({record.obs, oracle::dhash(store.get(record.obs).render)});
      out.push_back({record.obs_next, oracle::dhash(store.get(record.obs_next).render)});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("identical renders collapse into one node") {
  ObservationStore store;
  std::vector<std::string> refs;
  // same pixels, different a11y/screen ids -> distinct store entries, one cluster
  for (int i = 0; i < 3; ++i) refs.push_back(store.put(synthetic_obs(i, {})));
  auto [nodes, mapping] = dedup_screens({chain("app", refs)}, store);
  REQUIRE(nodes.size() == 1);
  CHECK(nodes[0].cluster_members.size() == 3);
  CHECK(nodes[0].screen_ref == refs[0]);
  for (const auto& ref : refs) CHECK(mapping.at(ref) == 0);
}

TEST_CASE("similarity below tau founds a new node") {
  ObservationStore store;
  std::string a = store.put(synthetic_obs(0, {}));
  // 4 descending pairs in row 0 -> 4 differing bits -> similarity 0.9375 < 0.95
  std::string b = store.put(synthetic_obs(1, {200, 100, 200, 100, 200, 100, 200, 100, 100}));
  double sim = hash_similarity(perceptual_hash(store.get(a).render), perceptual_hash(store.get(b).render));
  REQUIRE(sim < 0.95);
  REQUIRE(sim > 0.90);
  auto [nodes, mapping] = dedup_screens({chain("app", {a, b})}, store);
  CHECK(nodes.size() == 2);
  CHECK(mapping.at(a) == 0);
  CHECK(mapping.at(b) == 1);
}

TEST_CASE("dedup tau is validated") {
  ObservationStore store;
  std::string a = store.put(synthetic_obs(0, {}));
  CHECK_THROWS_AS(dedup_screens({chain("app", {a, a})}, store, 0.0), ValidationError);
  CHECK_THROWS_AS(dedup_screens({chain("app", {a, a})}, store, 1.5), ValidationError);
}

TEST_CASE("sim campaign dedup equals the brute-force greedy oracle") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("dedup", {8, 5, 3}, 7));
  ObservationStore store;
  auto campaign = explorer::run_campaign({spec}, 3, 10, 70, store);
  auto [nodes, mapping] = dedup_screens(campaign.trajectories, store);

  auto expected = oracle::greedy_clusters(ordered_hashes(campaign.trajectories, store), 0.95);
  REQUIRE(mapping.size() == expected.size());
  for (const auto& [ref, node] : mapping) CHECK(node == expected.at(ref));

  // membership bookkeeping: every ref appears in exactly its node's member list
  size_t total_members = 0;
  for (const auto& node : nodes) {
    total_members += node.cluster_members.size();
    for (const auto& ref : node.cluster_members) CHECK(mapping.at(ref) == node.id);
    CHECK(std::find(node.cluster_members.begin(), node.cluster_members.end(), node.screen_ref) !=
          node.cluster_members.end());
  }
  CHECK(total_members == mapping.size());
}

TEST_CASE("a single transition creates one mutual edge with direction recorded") {
  ObservationStore store;
  std::string a = store.put(random_obs(0, 1));
  std::string b = store.put(random_obs(1, 2));
  auto trajs = std::vector<explorer::ExplorationTrajectory>{chain("app", {a, b})};
  auto [nodes, mapping] = dedup_screens(trajs, store);
  REQUIRE(nodes.size() == 2);
  build_neighborhood(nodes, mapping, trajs);
  CHECK(nodes[0].neighbors == std::set<int>{1});
  CHECK(nodes[1].neighbors == std::set<int>{0});
  CHECK(nodes[0].outbound_targets == std::set<int>{1});
  CHECK(nodes[1].inbound_sources == std::set<int>{0});
  CHECK(!nodes[0].first_inbound.has_value());
  REQUIRE(nodes[1].first_inbound.has_value());
  CHECK(nodes[1].first_inbound->first == a);
  CHECK(nodes[1].first_inbound->second == ActionCommand::click_on(0));
}

TEST_CASE("within-cluster transitions create no edges") {
  ObservationStore store;
  std::string a = store.put(synthetic_obs(0, {}));
  std::string b = store.put(synthetic_obs(1, {}));  // same render bits -> same cluster
  auto trajs = std::vector<explorer::ExplorationTrajectory>{chain("app", {a, b})};
  auto [nodes, mapping] = dedup_screens(trajs, store);
  REQUIRE(nodes.size() == 1);
  build_neighborhood(nodes, mapping, trajs);
  CHECK(nodes[0].neighbors.empty());
  CHECK(nodes[0].inbound_sources.empty());
  CHECK(!nodes[0].first_inbound.has_value());
}

TEST_CASE("campaign neighborhoods equal a raw-transition recount") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("edges", {10, 5, 3}, 8));
  ObservationStore store;
  auto campaign = explorer::run_campaign({spec}, 5, 10, 90, store);
  auto [nodes, mapping] = dedup_screens(campaign.trajectories, store);
  build_neighborhood(nodes, mapping, campaign.trajectories);

  auto facts = oracle::recount_neighborhood(campaign.trajectories, mapping, nodes.size());
  for (const auto& node : nodes) {
    size_t i = static_cast<size_t>(node.id);
    CHECK(node.neighbors == facts.neighbors[i]);
    CHECK(node.inbound_sources == facts.inbound[i]);
    CHECK(node.outbound_targets == facts.outbound[i]);
    CHECK(node.first_inbound.has_value() == facts.first_inbound[i].has_value());
    if (node.first_inbound) {
      CHECK(node.first_inbound->first == facts.first_inbound[i]->first);
      CHECK(node.first_inbound->second == facts.first_inbound[i]->second);
    }
  }
}

TEST_CASE("annotation is deterministic and parse failures flag the node") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("annot", {5, 4, 2}, 9));
  ObservationStore store;
  Observation obs = sim::observe(*spec, sim::initial_state(*spec));
  ScreenNode node;
  node.id = 0;
  node.screen_ref = store.put(obs);

  providers::StoreImageResolver resolver(store);
  providers::MockChatBackend annotator(11, &resolver);
  bool failed_a = true, failed_b = true;
  auto records_a = annotate_screen(node, "annot", annotator, failed_a);
  auto records_b = annotate_screen(node, "annot", annotator, failed_b);
  CHECK(!failed_a);
  CHECK(!failed_b);
  CHECK(records_a == records_b);
  CHECK(records_a.size() == obs.a11y.size());

  oracle::ScriptedChat broken({"no list in sight"});
  bool failed_c = false;
  auto records_c = annotate_screen(node, "annot", broken, failed_c);
  CHECK(failed_c);
  CHECK(records_c.empty());
}

TEST_CASE("a screen with no elements annotates to an empty set") {
  ObservationStore store;
  Observation obs;
  obs.screen_id = 0;
  obs.render.width = 9;
  obs.render.height = 8;
  obs.render.pixels.assign(72, 10);
  std::string ref = store.put(obs);
  ScreenNode node;
  node.id = 0;
  node.screen_ref = ref;
  providers::StoreImageResolver resolver(store);
  providers::MockChatBackend annotator(1, &resolver);
  bool failed = true;
  auto records = annotate_screen(node, "emptyapp", annotator, failed);
  CHECK(!failed);
  CHECK(records.empty());
}

TEST_CASE("index admission: duplicates are skipped, orthogonal entries all admitted") {
  EnvironmentMemory memory;
  memory.app_name = "idx";
  for (int i = 0; i < 3; ++i) {
    Functionality f;
    f.id = i;
    f.screen_id = 0;
    f.label = "f" + std::to_string(i);
    f.description = (i < 2) ? "identical words here" : "completely different phrasing";
    memory.functionalities.push_back(std::move(f));
  }
  providers::MockEmbedder embedder;
  build_index(memory, embedder);
  REQUIRE(memory.index.entry_ids == std::vector<int>{0, 2});  // duplicate #1 skipped
  CHECK(memory.functionalities[0].index_row == 0);
  CHECK(memory.functionalities[1].index_row == -1);
  CHECK(memory.functionalities[2].index_row == 1);

  // orthogonal scripted embeddings: everything admitted
  EnvironmentMemory ortho;
  ortho.app_name = "ortho";
  oracle::ScriptedEmbedder scripted(8);
  for (int i = 0; i < 5; ++i) {
    Functionality f;
    f.id = i;
    f.screen_id = 0;
    f.label = "f" + std::to_string(i);
    f.description = "desc " + std::to_string(i);
    std::vector<float> basis(8, 0.0f);
    basis[static_cast<size_t>(i)] = 1.0f;
    scripted.set(f.description, basis);
    ortho.functionalities.push_back(std::move(f));
  }
  build_index(ortho, scripted);
  CHECK(ortho.index.entry_ids == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("index admission equals the O(n^2) diversity oracle on 50 entries") {
  EnvironmentMemory memory;
  memory.app_name = "fifty";
  const char* words[] = {"alarm", "wifi", "note", "timer", "photo", "event", "list", "dark"};
  for (int i = 0; i < 50; ++i) {
    Functionality f;
    f.id = i;
    f.screen_id = i / 5;
    f.label = "f" + std::to_string(i);
    f.description = std::string(words[i % 8]) + " " + words[(i * 3 + 1) % 8] + " " +
                    words[(i * 7 + 2) % 8] + " control " + std::to_string(i % 4);
    memory.functionalities.push_back(std::move(f));
  }
  providers::MockEmbedder embedder;
  build_index(memory, embedder);

  std::vector<std::vector<float>> vectors;
  for (const auto& f : memory.functionalities) vectors.push_back(oracle::embed_text(f.description));
  auto admitted = oracle::diversity_admit(vectors, 0.8);
  std::vector<int> expected_ids(admitted.begin(), admitted.end());
  CHECK(memory.index.entry_ids == expected_ids);
  REQUIRE(memory.index.entry_ids.size() < 50);  // the corpus plants near-duplicates
}

TEST_CASE("retrieval honors k, exclusions, and the diversity rule") {
  // 20 screens x 10 functionalities with orthogonal scripted embeddings
  EnvironmentMemory memory;
  memory.app_name = "retr";
  oracle::ScriptedEmbedder scripted(256);
  std::vector<std::pair<int, std::vector<float>>> pool_by_fid;
  for (int node_id = 0; node_id < 20; ++node_id) {
    ScreenNode node;
    node.id = node_id;
    node.screen_ref = "ref-" + std::to_string(node_id);
    memory.nodes.push_back(std::move(node));
  }
  for (int i = 0; i < 200; ++i) {
    Functionality f;
    f.id = i;
    f.screen_id = i / 10;
    f.label = "f" + std::to_string(i);
    f.description = "unique functionality " + std::to_string(i);
    std::vector<float> vec(256, 0.0f);
    vec[static_cast<size_t>(i)] = 1.0f;
    // overlap with a shared component so scores differ by entry
    vec[200] = static_cast<float>(0.001 * (i % 97));
    scripted.set(f.description, vec);
    memory.nodes[static_cast<size_t>(f.screen_id)].functionality_ids.push_back(i);
    memory.functionalities.push_back(std::move(f));
  }
  build_index(memory, scripted);
  REQUIRE(memory.index.entry_ids.size() == 200);

  CHECK(retrieve_related(memory, 0, 0).empty());

  std::set<int> all_screens;
  for (int s = 0; s < 20; ++s) all_screens.insert(s);
  CHECK(retrieve_related(memory, 0, 30, all_screens).empty());

  std::set<int> exclude{0, 1, 2};
  auto got = retrieve_related(memory, 0, 30, exclude);
  // oracle: same query (normalized mean of node 0's vectors), explicit pool
  std::vector<const Embedding*> parts;
  for (int fid : memory.nodes[0].functionality_ids) parts.push_back(&memory.functionality(fid).embedding);
  Embedding query = normalized_mean(parts);
  std::vector<std::pair<int, std::vector<float>>> pool;
  for (size_t row = 0; row < memory.index.entry_ids.size(); ++row) {
    int fid = memory.index.entry_ids[row];
    if (exclude.count(memory.functionality(fid).screen_id)) continue;
    pool.push_back({fid, memory.index.entry_vectors[row]});
  }
  auto expected = oracle::retrieve(pool, query, 30, 0.8);
  CHECK(got == expected);
  REQUIRE(got.size() == 30);
  for (int fid : got) CHECK(exclude.count(memory.functionality(fid).screen_id) == 0);
}

TEST_CASE("build_memory rejects empty or mixed trajectory sets") {
  ObservationStore store;
  providers::MockEmbedder embedder;
  providers::StoreImageResolver resolver(store);
  providers::MockChatBackend annotator(1, &resolver);
  MemoryBuildConfig config;
  CHECK_THROWS_AS(build_memory("app", {}, store, annotator, embedder, config), ValidationError);

  std::string a = store.put(random_obs(0, 5));
  auto traj = chain("other", {a, a});
  CHECK_THROWS_AS(build_memory("app", {traj}, store, annotator, embedder, config), ValidationError);
}

TEST_CASE("an all-distinct 10-step walk yields an 11-node chain") {
  ObservationStore store;
  std::vector<std::string> refs;
  for (int i = 0; i < 11; ++i) refs.push_back(store.put(random_obs(i, 100 + static_cast<uint64_t>(i))));
  // verify the synthetic renders are genuinely distinct under the hash
  for (size_t i = 0; i < refs.size(); ++i) {
    for (size_t j = i + 1; j < refs.size(); ++j) {
      REQUIRE(hash_similarity(perceptual_hash(store.get(refs[i]).render),
                              perceptual_hash(store.get(refs[j]).render)) < 0.95);
    }
  }
  providers::MockEmbedder embedder;
  providers::StoreImageResolver resolver(store);
  providers::MockChatBackend annotator(2, &resolver);
  MemoryBuildConfig config;
  auto memory = build_memory("chainapp", {chain("chainapp", refs)}, store, annotator, embedder, config);
  REQUIRE(memory.nodes.size() == 11);
  for (const auto& node : memory.nodes) {
    std::set<int> expected;
    if (node.id > 0) expected.insert(node.id - 1);
    if (node.id < 10) expected.insert(node.id + 1);
    CHECK(node.neighbors == expected);
  }
}

TEST_CASE("full memory build matches stage-wise oracles on three sim apps") {
  std::vector<std::shared_ptr<const sim::SimAppSpec>> specs;
  for (int i = 0; i < 3; ++i) {
    specs.push_back(std::make_shared<const sim::SimAppSpec>(
        sim::generate_app("mem" + std::to_string(i), {8, 5, 3}, 200 + static_cast<uint64_t>(i))));
  }
  ObservationStore store;
  auto campaign = explorer::run_campaign(specs, 5, 10, 800, store);
  providers::MockEmbedder embedder;
  providers::StoreImageResolver resolver(store);
  providers::MockChatBackend annotator(6, &resolver);
  MemoryBuildConfig config;

  for (const auto& spec : specs) {
    std::vector<explorer::ExplorationTrajectory> trajs;
    for (const auto& t : campaign.trajectories) {
      if (t.app_name == spec->app_name) trajs.push_back(t);
    }
    auto memory = build_memory(spec->app_name, trajs, store, annotator, embedder, config);

    auto expected_clusters = oracle::greedy_clusters(ordered_hashes(trajs, store), 0.95);
    std::set<int> node_ids;
    for (const auto& [ref, node] : expected_clusters) node_ids.insert(node);
    REQUIRE(memory.nodes.size() == node_ids.size());
    std::map<std::string, int> mapping;
    for (const auto& node : memory.nodes) {
      for (const auto& ref : node.cluster_members) mapping[ref] = node.id;
    }
    for (const auto& [ref, node] : expected_clusters) CHECK(mapping.at(ref) == node);

    auto facts = oracle::recount_neighborhood(trajs, mapping, memory.nodes.size());
    for (const auto& node : memory.nodes) {
      CHECK(node.neighbors == facts.neighbors[static_cast<size_t>(node.id)]);
    }

    std::vector<std::vector<float>> vectors;
    for (const auto& f : memory.functionalities) vectors.push_back(oracle::embed_text(f.description));
    auto admitted = oracle::diversity_admit(vectors, 0.8);
    std::vector<int> expected_ids(admitted.begin(), admitted.end());
    CHECK(memory.index.entry_ids == expected_ids);
  }
}

TEST_CASE("memory store round-trips and rebuilds byte-identically") {
  auto spec = std::make_shared<const sim::SimAppSpec>(sim::generate_app("memio", {6, 4, 2}, 300));
  ObservationStore store;
  auto campaign = explorer::run_campaign({spec}, 3, 10, 900, store);
  providers::MockEmbedder embedder;
  providers::StoreImageResolver resolver(store);
  providers::MockChatBackend annotator(4, &resolver);
  MemoryBuildConfig config;

  auto memory = build_memory("memio", campaign.trajectories, store, annotator, embedder, config);
  oracle::TempDir dir_a, dir_b;
  save_memory(dir_a.path, memory);
  auto rebuilt = build_memory("memio", campaign.trajectories, store, annotator, embedder, config);
  save_memory(dir_b.path, rebuilt);
  CHECK(oracle::read_tree(dir_a.path) == oracle::read_tree(dir_b.path));

  auto loaded = load_memory(dir_a.path, "memio");
  CHECK(loaded.app_name == memory.app_name);
  REQUIRE(loaded.nodes.size() == memory.nodes.size());
  for (size_t i = 0; i < loaded.nodes.size(); ++i) {
    CHECK(loaded.nodes[i].screen_ref == memory.nodes[i].screen_ref);
    CHECK(loaded.nodes[i].neighbors == memory.nodes[i].neighbors);
    CHECK(loaded.nodes[i].functionality_ids == memory.nodes[i].functionality_ids);
  }
  REQUIRE(loaded.functionalities.size() == memory.functionalities.size());
  for (size_t i = 0; i < loaded.functionalities.size(); ++i) {
    CHECK(loaded.functionalities[i].description == memory.functionalities[i].description);
    CHECK(loaded.functionalities[i].embedding == memory.functionalities[i].embedding);
    CHECK(loaded.functionalities[i].index_row == memory.functionalities[i].index_row);
  }
  CHECK(loaded.index.entry_ids == memory.index.entry_ids);
  CHECK(loaded.app_embedding == memory.app_embedding);
  CHECK_THROWS_AS(load_memory(dir_a.path, "absent"), StoreError);

  // parallel annotation must not change the result
  MemoryBuildConfig parallel_config;
  parallel_config.jobs = 4;
  auto parallel_memory = build_memory("memio", campaign.trajectories, store, annotator, embedder, parallel_config);
  oracle::TempDir dir_c;
  save_memory(dir_c.path, parallel_memory);
  CHECK(oracle::read_tree(dir_c.path) == oracle::read_tree(dir_a.path));
}
