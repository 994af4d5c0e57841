#include "agentforge/synthesizer.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

#include "agentforge/prompts.hpp"

namespace agentforge::synthesizer {

using nlohmann::json;

namespace {

prompts::ScreenSection section_for_node(const envmem::EnvironmentMemory& memory, int node_id) {
  const envmem::ScreenNode& node = memory.node(node_id);
  prompts::ScreenSection section;
  section.render_ref = node.screen_ref;
  for (int fid : node.functionality_ids) {
    const envmem::Functionality& f = memory.functionality(fid);
    section.elements.emplace_back(providers::annotation_kind_name(f.kind), f.description);
  }
  return section;
}

}  // namespace

SynthesisContext build_context(const envmem::EnvironmentMemory& memory, int screen_id, uint64_t seed,
                               int k_long_term) {
  const envmem::ScreenNode& node = memory.node(screen_id);
  Rng rng(mix64(seed, static_cast<uint64_t>(screen_id)));

  SynthesisContext context;
  context.focal_screen = screen_id;

  std::vector<int> inbound(node.inbound_sources.begin(), node.inbound_sources.end());
  if (!inbound.empty()) context.predecessor = inbound[rng.below(inbound.size())];

  std::vector<int> outbound(node.outbound_targets.begin(), node.outbound_targets.end());
  if (outbound.size() <= 3) {
    context.successors = outbound;  // ascending id order
  } else {
    for (size_t i = 0; i < 3; ++i) {
      size_t j = i + rng.below(outbound.size() - i);
      std::swap(outbound[i], outbound[j]);
      context.successors.push_back(outbound[i]);
    }
  }

  std::set<int> exclude = node.neighbors;
  exclude.insert(screen_id);
  context.long_term = envmem::retrieve_related(memory, screen_id, k_long_term, exclude);
  return context;
}

std::vector<CandidateInstruction> generate_instructions(const envmem::EnvironmentMemory& memory,
                                                        const SynthesisContext& context,
                                                        providers::ChatBackend& generator,
                                                        std::vector<std::string>* warnings) {
  prompts::SynthesisPayload payload;
  payload.app_name = memory.app_name;
  payload.focal = section_for_node(memory, context.focal_screen);
  if (context.predecessor) payload.predecessor = section_for_node(memory, *context.predecessor);
  for (int node_id : context.successors) payload.successors.push_back(section_for_node(memory, node_id));
  for (int fid : context.long_term) payload.long_term.push_back(memory.functionality(fid).description);

  std::string raw = generator.chat_generate(prompts::make_synthesis_request(payload));

  auto warn = [&](const std::string& message) {
    if (warnings) {
      warnings->push_back(memory.app_name + " screen " + std::to_string(context.focal_screen) + ": " + message);
    }
  };

  json parsed;
  try {
    parsed = json::parse(providers::extract_json_span(raw, '[', ']'));
  } catch (const std::exception& e) {
    warn(std::string("generator output unparseable: ") + e.what());
    return {};
  }
  if (!parsed.is_array()) {
    warn("generator output is not a list");
    return {};
  }

  std::vector<CandidateInstruction> out;
  for (const json& item : parsed) {
    if (out.size() >= 3) break;
    if (!item.is_object() || !item.contains("task") || !item["task"].is_string()) {
      warn("skipping malformed task record");
      continue;
    }
    CandidateInstruction candidate;
    candidate.app_name = memory.app_name;
    candidate.text = trim(item["task"].get<std::string>());
    candidate.reasoning = item.contains("reasoning") && item["reasoning"].is_string()
                              ? trim(item["reasoning"].get<std::string>())
                              : "";
    candidate.source_screen = context.focal_screen;
    if (candidate.text.empty()) {
      warn("skipping empty task text");
      continue;
    }
    if (candidate.text.size() > 600) {
      warn("skipping overlong task text");
      continue;
    }
    out.push_back(std::move(candidate));
  }
  return out;
}

std::optional<QualityScores> parse_scores(const std::string& raw) {
  json parsed;
  try {
    parsed = json::parse(providers::extract_json_span(raw, '{', '}'));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (!parsed.is_object()) return std::nullopt;
  QualityScores scores;
  for (const auto& [key, member] : std::initializer_list<std::pair<const char*, int QualityScores::*>>{
           {"complexity", &QualityScores::complexity},
           {"clarity", &QualityScores::clarity},
           {"reasonableness", &QualityScores::reasonableness}}) {
    if (!parsed.contains(key) || !parsed[key].is_number_integer()) return std::nullopt;
    int value = parsed[key].get<int>();
    if (value < 1 || value > 5) return std::nullopt;
    scores.*member = value;
  }
  return scores;
}

std::vector<TaskInstruction> filter_instructions(std::vector<CandidateInstruction> candidates,
                                                 providers::Embedder& embedder, providers::ChatBackend& scorer,
                                                 const FilterConfig& config, std::vector<std::string>* warnings) {
  if (candidates.empty()) throw ValidationError("filter_instructions: no candidates");
  if (config.dedup_threshold <= 0.0 || config.dedup_threshold > 1.0) {
    throw ValidationError("dedup_threshold must be in (0, 1]");
  }
  if (config.per_app_cap < 1) throw ValidationError("per_app_cap must be >= 1");

  // stage 1: score every candidate; one retry per candidate, then drop
  std::vector<std::optional<QualityScores>> scored(candidates.size());
  std::vector<std::string> score_warnings(candidates.size());
  parallel_for(candidates.size(), config.jobs, [&](size_t i) {
    providers::GenerationRequest request =
        prompts::make_scoring_request(candidates[i].app_name, candidates[i].text);
    for (int attempt = 0; attempt < 2 && !scored[i]; ++attempt) {
      try {
        scored[i] = parse_scores(scorer.chat_generate(request));
      } catch (const std::exception& e) {
        score_warnings[i] = e.what();
      }
    }
  });

  std::vector<CandidateInstruction> survivors;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (!scored[i]) {
      if (warnings) {
        warnings->push_back("dropped unscorable candidate \"" + candidates[i].text + "\"" +
                            (score_warnings[i].empty() ? "" : ": " + score_warnings[i]));
      }
      continue;
    }
    candidates[i].scores = *scored[i];
    if (candidates[i].scores.clarity < config.clarity_min) continue;
    if (candidates[i].scores.reasonableness < config.reason_min) continue;
    survivors.push_back(std::move(candidates[i]));
  }

  // stage 2: order by quality, then greedy semantic dedup across all apps
  std::vector<std::string> texts;
  for (const CandidateInstruction& c : survivors) texts.push_back(c.text);
  std::vector<Embedding> vectors = embedder.embed_texts(texts);
  for (size_t i = 0; i < survivors.size(); ++i) survivors[i].embedding = std::move(vectors[i]);

  std::sort(survivors.begin(), survivors.end(), [](const CandidateInstruction& a, const CandidateInstruction& b) {
    if (a.scores.complexity != b.scores.complexity) return a.scores.complexity > b.scores.complexity;
    if (a.scores.clarity != b.scores.clarity) return a.scores.clarity > b.scores.clarity;
    if (a.scores.reasonableness != b.scores.reasonableness) return a.scores.reasonableness > b.scores.reasonableness;
    return a.text < b.text;
  });

  std::vector<CandidateInstruction> admitted;
  for (CandidateInstruction& candidate : survivors) {
    bool distinct = true;
    for (const CandidateInstruction& kept : admitted) {
      if (cosine(candidate.embedding, kept.embedding) >= config.dedup_threshold) {
        distinct = false;
        break;
      }
    }
    if (distinct) admitted.push_back(std::move(candidate));
  }

  // stage 3: per-app cap, preserving admission order
  std::map<std::string, int> per_app_count;
  std::vector<TaskInstruction> out;
  for (CandidateInstruction& candidate : admitted) {
    int& count = per_app_count[candidate.app_name];
    if (count >= config.per_app_cap) continue;
    TaskInstruction instruction;
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "%04d", count);
    instruction.id = candidate.app_name + "-" + suffix;
    instruction.app_name = std::move(candidate.app_name);
    instruction.text = std::move(candidate.text);
    instruction.reasoning = std::move(candidate.reasoning);
    instruction.source_screen = candidate.source_screen;
    instruction.scores = candidate.scores;
    instruction.embedding = std::move(candidate.embedding);
    out.push_back(std::move(instruction));
    ++count;
  }
  return out;
}

void save_instructions(const std::filesystem::path& root, const std::vector<TaskInstruction>& instructions) {
  std::map<std::string, std::vector<const TaskInstruction*>> by_app;
  for (const TaskInstruction& instruction : instructions) by_app[instruction.app_name].push_back(&instruction);

  for (const auto& [app, list] : by_app) {
    std::string body;
    std::vector<Embedding> rows;
    for (const TaskInstruction* instruction : list) {
      json j;
      j["id"] = instruction->id;
      j["app"] = instruction->app_name;
      j["text"] = instruction->text;
      j["reasoning"] = instruction->reasoning;
      j["source_screen"] = instruction->source_screen;
      j["scores"] = {{"complexity", instruction->scores.complexity},
                     {"clarity", instruction->scores.clarity},
                     {"reasonableness", instruction->scores.reasonableness}};
      j["embedding_ref"] = rows.size();
      body += j.dump() + "\n";
      rows.push_back(instruction->embedding);
    }
    int dim = rows.empty() || rows[0].empty() ? 1 : static_cast<int>(rows[0].size());
    write_text_file_atomic(root / (app + ".jsonl"), body);
    save_embedding_matrix(root / (app + ".emb.bin"), rows, dim);
  }
}

std::vector<TaskInstruction> load_instructions(const std::filesystem::path& root, const std::string& app_name) {
  namespace fs = std::filesystem;
  fs::path file = root / (app_name + ".jsonl");
  if (!fs::exists(file)) throw StoreError("no instructions for app " + app_name + " under " + root.string());
  std::vector<Embedding> rows = load_embedding_matrix(root / (app_name + ".emb.bin"));

  std::vector<TaskInstruction> out;
  for (const std::string& line : read_lines(file)) {
    json j = json::parse(line);
    TaskInstruction instruction;
    instruction.id = j.at("id").get<std::string>();
    instruction.app_name = j.at("app").get<std::string>();
    instruction.text = j.at("text").get<std::string>();
    instruction.reasoning = j.at("reasoning").get<std::string>();
    instruction.source_screen = j.at("source_screen").get<int>();
    instruction.scores.complexity = j.at("scores").at("complexity").get<int>();
    instruction.scores.clarity = j.at("scores").at("clarity").get<int>();
    instruction.scores.reasonableness = j.at("scores").at("reasonableness").get<int>();
    size_t row = j.at("embedding_ref").get<size_t>();
    if (row >= rows.size()) throw StoreError("instruction embedding_ref out of range in " + file.string());
    instruction.embedding = rows[row];
    out.push_back(std::move(instruction));
  }
  return out;
}

}  // namespace agentforge::synthesizer
