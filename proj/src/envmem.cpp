#include "agentforge/envmem.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "agentforge/phash.hpp"
#include "agentforge/prompts.hpp"

namespace agentforge::envmem {

using nlohmann::json;
using providers::AnnotationRecord;

const ScreenNode& EnvironmentMemory::node(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes.size())) {
    throw InvariantError("memory node id out of range: " + std::to_string(id));
  }
  return nodes[static_cast<size_t>(id)];
}

const Functionality& EnvironmentMemory::functionality(int id) const {
  if (id < 0 || id >= static_cast<int>(functionalities.size())) {
    throw InvariantError("functionality id out of range: " + std::to_string(id));
  }
  return functionalities[static_cast<size_t>(id)];
}

std::pair<std::vector<ScreenNode>, std::map<std::string, int>> dedup_screens(
    const std::vector<explorer::ExplorationTrajectory>& trajectories, const ObservationStore& store, double tau) {
  if (tau <= 0.0 || tau > 1.0) throw ValidationError("dedup tau must be in (0, 1]");

  std::vector<ScreenNode> nodes;
  std::vector<PerceptualHash> representatives;
  std::map<std::string, int> mapping;

  auto visit = [&](const std::string& ref) {
    if (mapping.count(ref)) return;
    PerceptualHash h = perceptual_hash(store.get(ref).render);
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (hash_similarity(h, representatives[i]) >= tau) {
        mapping[ref] = static_cast<int>(i);
        nodes[i].cluster_members.push_back(ref);
        return;
      }
    }
    ScreenNode node;
    node.id = static_cast<int>(nodes.size());
    node.screen_ref = ref;
    node.cluster_members.push_back(ref);
    mapping[ref] = node.id;
    nodes.push_back(std::move(node));
    representatives.push_back(h);
  };

  for (const explorer::ExplorationTrajectory& t : trajectories) {
    for (const TransitionRecord& record : t.transitions) {
      visit(record.obs);
      visit(record.obs_next);
    }
  }
  return {std::move(nodes), std::move(mapping)};
}

void build_neighborhood(std::vector<ScreenNode>& nodes, const std::map<std::string, int>& mapping,
                        const std::vector<explorer::ExplorationTrajectory>& trajectories) {
  for (const explorer::ExplorationTrajectory& t : trajectories) {
    for (const TransitionRecord& record : t.transitions) {
      auto ia = mapping.find(record.obs);
      auto ib = mapping.find(record.obs_next);
      if (ia == mapping.end() || ib == mapping.end()) {
        throw InvariantError("build_neighborhood: unmapped observation reference");
      }
      int a = ia->second, b = ib->second;
      if (a == b) continue;
      nodes[static_cast<size_t>(a)].neighbors.insert(b);
      nodes[static_cast<size_t>(b)].neighbors.insert(a);
      nodes[static_cast<size_t>(a)].outbound_targets.insert(b);
      nodes[static_cast<size_t>(b)].inbound_sources.insert(a);
      if (!nodes[static_cast<size_t>(b)].first_inbound) {
        nodes[static_cast<size_t>(b)].first_inbound = std::make_pair(record.obs, record.action);
      }
    }
  }
}

std::vector<AnnotationRecord> annotate_screen(const ScreenNode& node, const std::string& app_name,
                                              providers::ChatBackend& annotator, bool& failed) {
  failed = false;
  std::optional<std::string> before_ref;
  std::string action_desc;
  if (node.first_inbound) {
    before_ref = node.first_inbound->first;
    action_desc = action_to_string(node.first_inbound->second);
  }
  providers::GenerationRequest request =
      prompts::make_annotation_request(app_name, action_desc, before_ref, node.screen_ref);
  std::string raw = annotator.chat_generate(request);
  try {
    return providers::parse_annotations(raw);
  } catch (const ParseError&) {
    failed = true;
    return {};
  } catch (const DecodeError&) {
    failed = true;
    return {};
  }
}

void build_index(EnvironmentMemory& memory, providers::Embedder& embedder, double diversity_threshold) {
  if (diversity_threshold <= 0.0 || diversity_threshold > 1.0) {
    throw ValidationError("diversity_threshold must be in (0, 1]");
  }
  memory.diversity_threshold = diversity_threshold;

  std::vector<std::string> texts;
  texts.reserve(memory.functionalities.size());
  for (const Functionality& f : memory.functionalities) texts.push_back(f.description);
  std::vector<Embedding> vectors = embedder.embed_texts(texts);
  if (vectors.size() != memory.functionalities.size()) {
    throw InvariantError("embedder returned wrong row count");
  }
  for (size_t i = 0; i < vectors.size(); ++i) memory.functionalities[i].embedding = std::move(vectors[i]);
  memory.app_embedding = embedder.embed_texts({memory.app_name}).at(0);

  memory.index = RetrievalIndex{};
  memory.index.dimension = static_cast<int>(memory.app_embedding.size());
  for (Functionality& f : memory.functionalities) {
    bool distinct = true;
    for (const Embedding& admitted : memory.index.entry_vectors) {
      if (cosine(f.embedding, admitted) >= diversity_threshold) {
        distinct = false;
        break;
      }
    }
    if (distinct) {
      f.index_row = static_cast<int>(memory.index.entry_ids.size());
      memory.index.entry_ids.push_back(f.id);
      memory.index.entry_vectors.push_back(f.embedding);
    } else {
      f.index_row = -1;
    }
  }
}

std::vector<int> retrieve_related(const EnvironmentMemory& memory, int query_screen_id, int k,
                                  const std::set<int>& exclude) {
  if (k <= 0 || memory.index.entry_ids.empty()) return {};
  const ScreenNode& node = memory.node(query_screen_id);

  Embedding query;
  if (node.functionality_ids.empty()) {
    query = memory.app_embedding;
  } else {
    std::vector<const Embedding*> parts;
    for (int fid : node.functionality_ids) parts.push_back(&memory.functionality(fid).embedding);
    query = normalized_mean(parts);
  }

  struct Scored {
    int fid;
    double score;
  };
  std::vector<Scored> pool;
  for (size_t row = 0; row < memory.index.entry_ids.size(); ++row) {
    int fid = memory.index.entry_ids[row];
    const Functionality& f = memory.functionality(fid);
    if (exclude.count(f.screen_id)) continue;
    pool.push_back({fid, cosine(query, memory.index.entry_vectors[row])});
  }
  std::sort(pool.begin(), pool.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.fid < b.fid;
  });

  std::vector<int> result;
  for (const Scored& candidate : pool) {
    if (static_cast<int>(result.size()) >= k) break;
    bool distinct = true;
    for (int fid : result) {
      if (cosine(memory.functionality(candidate.fid).embedding, memory.functionality(fid).embedding) >=
          memory.diversity_threshold) {
        distinct = false;
        break;
      }
    }
    if (distinct) result.push_back(candidate.fid);
  }
  return result;
}

EnvironmentMemory build_memory(const std::string& app_name,
                               const std::vector<explorer::ExplorationTrajectory>& trajectories,
                               const ObservationStore& store, providers::ChatBackend& annotator,
                               providers::Embedder& embedder, const MemoryBuildConfig& config) {
  if (trajectories.empty()) throw ValidationError("build_memory: no trajectories");
  for (const explorer::ExplorationTrajectory& t : trajectories) {
    if (t.app_name != app_name) {
      throw ValidationError("build_memory: trajectory for app " + t.app_name + " mixed into " + app_name);
    }
  }

  EnvironmentMemory memory;
  memory.app_name = app_name;
  memory.tau = config.tau;

  auto [nodes, mapping] = dedup_screens(trajectories, store, config.tau);
  build_neighborhood(nodes, mapping, trajectories);
  memory.nodes = std::move(nodes);

  std::vector<std::vector<AnnotationRecord>> per_node(memory.nodes.size());
  std::vector<char> failures(memory.nodes.size(), 0);
  parallel_for(memory.nodes.size(), config.jobs, [&](size_t i) {
    bool failed = false;
    per_node[i] = annotate_screen(memory.nodes[i], app_name, annotator, failed);
    failures[i] = failed ? 1 : 0;
  });

  for (size_t i = 0; i < memory.nodes.size(); ++i) {
    memory.nodes[i].annotation_failed = failures[i] != 0;
    for (const AnnotationRecord& record : per_node[i]) {
      Functionality f;
      f.id = static_cast<int>(memory.functionalities.size());
      f.screen_id = memory.nodes[i].id;
      f.kind = record.kind;
      f.label = record.label;
      f.description = record.description;
      memory.nodes[i].functionality_ids.push_back(f.id);
      memory.functionalities.push_back(std::move(f));
    }
  }

  build_index(memory, embedder, config.diversity_threshold);
  return memory;
}

void save_memory(const std::filesystem::path& root, const EnvironmentMemory& memory) {
  namespace fs = std::filesystem;
  fs::path dir = root / memory.app_name;

  std::string nodes_body;
  for (const ScreenNode& node : memory.nodes) {
    json j;
    j["id"] = node.id;
    j["screen_ref"] = node.screen_ref;
    j["cluster_members"] = node.cluster_members;
    j["functionality_ids"] = node.functionality_ids;
    j["annotation_failed"] = node.annotation_failed;
    if (node.first_inbound) {
      j["first_inbound"] = {{"obs", node.first_inbound->first}, {"action", action_to_json(node.first_inbound->second)}};
    }
    nodes_body += j.dump() + "\n";
  }
  write_text_file_atomic(dir / "nodes.jsonl", nodes_body);

  std::string edges_body;
  for (const ScreenNode& node : memory.nodes) {
    for (int target : node.outbound_targets) {
      json j;
      j["src"] = node.id;
      j["dst"] = target;
      edges_body += j.dump() + "\n";
    }
  }
  write_text_file_atomic(dir / "edges.jsonl", edges_body);

  std::string funcs_body;
  std::vector<Embedding> rows;
  for (const Functionality& f : memory.functionalities) {
    json j;
    j["id"] = f.id;
    j["screen_id"] = f.screen_id;
    j["kind"] = providers::annotation_kind_name(f.kind);
    j["label"] = f.label;
    j["description"] = f.description;
    j["emb_row"] = f.id;
    j["index_row"] = f.index_row;
    funcs_body += j.dump() + "\n";
    rows.push_back(f.embedding);
  }
  write_text_file_atomic(dir / "functionalities.jsonl", funcs_body);

  save_embedding_matrix(dir / "embeddings.bin", rows, memory.index.dimension);
  save_embedding_matrix(dir / "index.bin", memory.index.entry_vectors, memory.index.dimension);
  save_embedding_matrix(dir / "app.bin", {memory.app_embedding}, memory.index.dimension);

  json meta;
  meta["app_name"] = memory.app_name;
  meta["tau"] = memory.tau;
  meta["diversity_threshold"] = memory.diversity_threshold;
  meta["n_nodes"] = memory.nodes.size();
  meta["n_functionalities"] = memory.functionalities.size();
  meta["n_index_entries"] = memory.index.entry_ids.size();
  meta["dim"] = memory.index.dimension;
  write_text_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

EnvironmentMemory load_memory(const std::filesystem::path& root, const std::string& app_name) {
  namespace fs = std::filesystem;
  fs::path dir = root / app_name;
  if (!fs::exists(dir / "meta.json")) {
    throw StoreError("no memory store for app " + app_name + " under " + root.string());
  }
  json meta = json::parse(read_text_file(dir / "meta.json"));

  EnvironmentMemory memory;
  memory.app_name = meta.at("app_name").get<std::string>();
  memory.tau = meta.at("tau").get<double>();
  memory.diversity_threshold = meta.at("diversity_threshold").get<double>();
  memory.index.dimension = meta.at("dim").get<int>();

  for (const std::string& line : read_lines(dir / "nodes.jsonl")) {
    json j = json::parse(line);
    ScreenNode node;
    node.id = j.at("id").get<int>();
    node.screen_ref = j.at("screen_ref").get<std::string>();
    node.cluster_members = j.at("cluster_members").get<std::vector<std::string>>();
    node.functionality_ids = j.at("functionality_ids").get<std::vector<int>>();
    node.annotation_failed = j.at("annotation_failed").get<bool>();
    if (j.contains("first_inbound")) {
      node.first_inbound = std::make_pair(j["first_inbound"].at("obs").get<std::string>(),
                                          action_from_json(j["first_inbound"].at("action")));
    }
    if (node.id != static_cast<int>(memory.nodes.size())) throw StoreError("nodes.jsonl: ids not dense");
    memory.nodes.push_back(std::move(node));
  }

  if (fs::exists(dir / "edges.jsonl")) {
    for (const std::string& line : read_lines(dir / "edges.jsonl")) {
      json j = json::parse(line);
      int a = j.at("src").get<int>();
      int b = j.at("dst").get<int>();
      if (a < 0 || b < 0 || a >= static_cast<int>(memory.nodes.size()) || b >= static_cast<int>(memory.nodes.size())) {
        throw StoreError("edges.jsonl: node id out of range");
      }
      memory.nodes[static_cast<size_t>(a)].outbound_targets.insert(b);
      memory.nodes[static_cast<size_t>(b)].inbound_sources.insert(a);
      memory.nodes[static_cast<size_t>(a)].neighbors.insert(b);
      memory.nodes[static_cast<size_t>(b)].neighbors.insert(a);
    }
  }

  std::vector<Embedding> rows = load_embedding_matrix(dir / "embeddings.bin");
  std::vector<std::pair<int, int>> admitted;  // (index_row, fid)
  for (const std::string& line : read_lines(dir / "functionalities.jsonl")) {
    json j = json::parse(line);
    Functionality f;
    f.id = j.at("id").get<int>();
    f.screen_id = j.at("screen_id").get<int>();
    f.kind = providers::annotation_kind_from_name(j.at("kind").get<std::string>());
    f.label = j.at("label").get<std::string>();
    f.description = j.at("description").get<std::string>();
    f.index_row = j.at("index_row").get<int>();
    int emb_row = j.at("emb_row").get<int>();
    if (f.id != static_cast<int>(memory.functionalities.size())) throw StoreError("functionalities.jsonl: ids not dense");
    if (emb_row < 0 || emb_row >= static_cast<int>(rows.size())) throw StoreError("functionalities.jsonl: bad emb_row");
    f.embedding = rows[static_cast<size_t>(emb_row)];
    if (f.index_row >= 0) admitted.emplace_back(f.index_row, f.id);
    memory.functionalities.push_back(std::move(f));
  }

  std::sort(admitted.begin(), admitted.end());
  std::vector<Embedding> index_rows = load_embedding_matrix(dir / "index.bin");
  if (index_rows.size() != admitted.size()) throw StoreError("index.bin row count mismatch");
  for (size_t i = 0; i < admitted.size(); ++i) {
    if (admitted[i].first != static_cast<int>(i)) throw StoreError("functionalities.jsonl: index rows not dense");
    memory.index.entry_ids.push_back(admitted[i].second);
    memory.index.entry_vectors.push_back(index_rows[i]);
  }

  std::vector<Embedding> app_rows = load_embedding_matrix(dir / "app.bin");
  if (app_rows.size() != 1) throw StoreError("app.bin must hold exactly one row");
  memory.app_embedding = app_rows[0];

  if (memory.nodes.size() != meta.at("n_nodes").get<size_t>() ||
      memory.functionalities.size() != meta.at("n_functionalities").get<size_t>() ||
      memory.index.entry_ids.size() != meta.at("n_index_entries").get<size_t>()) {
    throw StoreError("memory store counts disagree with meta.json for app " + app_name);
  }
  return memory;
}

}  // namespace agentforge::envmem
