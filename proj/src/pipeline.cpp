#include "agentforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "agentforge/analyzer.hpp"
#include "agentforge/envmem.hpp"
#include "agentforge/explorer.hpp"
#include "agentforge/rollout.hpp"
#include "agentforge/synthesizer.hpp"

namespace agentforge::pipeline {

using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double elapsed_ms() const {
    auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(now - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string strategy_dir(const std::string& strategy) { return strategy; }

}  // namespace

Pipeline::Pipeline(config::PipelineConfig cfg, StageOptions opts) : cfg_(std::move(cfg)), opts_(std::move(opts)) {
  if (opts_.seed_override) cfg_.seed = *opts_.seed_override;
  if (opts_.jobs < 1) throw ValidationError("jobs must be >= 1");
}

uint64_t Pipeline::stage_seed(std::string_view stage) const { return mix64(cfg_.seed, fnv1a64(stage)); }

std::filesystem::path Pipeline::manifest_path(const std::string& stage) const {
  return cfg_.output_root / "manifests" / (stage + ".json");
}

std::optional<StageOutcome> Pipeline::begin_stage(const std::string& stage,
                                                  const std::vector<std::filesystem::path>& owned) {
  std::filesystem::path mpath = manifest_path(stage);
  if (std::filesystem::exists(mpath)) {
    json manifest = json::parse(read_text_file(mpath));
    if (!opts_.force && manifest.value("config_digest", "") == cfg_.digest()) {
      return StageOutcome{stage, /*skipped=*/true, std::move(manifest)};
    }
    if (!opts_.force) {
      throw StoreError("stage '" + stage + "' already ran with a different config; pass --force to redo it");
    }
  }
  if (opts_.force) {
    for (const std::filesystem::path& dir : owned) std::filesystem::remove_all(dir);
    std::filesystem::remove(mpath);
  }
  return std::nullopt;
}

StageOutcome Pipeline::finish_stage(const std::string& stage, uint64_t seed, json counts, double elapsed_ms) {
  json manifest;
  manifest["version"] = 1;
  manifest["stage"] = stage;
  manifest["config_digest"] = cfg_.digest();
  manifest["seed"] = seed;
  manifest["elapsed_ms"] = elapsed_ms;
  manifest["counts"] = std::move(counts);
  std::filesystem::create_directories(cfg_.output_root / "manifests");
  write_text_file_atomic(manifest_path(stage), manifest.dump(2) + "\n");
  return StageOutcome{stage, /*skipped=*/false, std::move(manifest)};
}

void Pipeline::require_stage(const std::string& stage, const std::string& command) const {
  if (!std::filesystem::exists(manifest_path(stage))) {
    throw StoreError("missing artifacts from the '" + stage + "' stage; run `" + command + "` first");
  }
}

std::vector<std::shared_ptr<const sim::SimAppSpec>> Pipeline::generate_suite() const {
  sim::GenerationParams params;
  params.n_screens = cfg_.suite.n_screens;
  params.elements_per_screen = cfg_.suite.elements_per_screen;
  params.n_fields = cfg_.suite.n_fields;
  uint64_t suite_seed = mix64(cfg_.seed, fnv1a64("suite"));
  std::vector<std::shared_ptr<const sim::SimAppSpec>> specs;
  for (const std::string& app : cfg_.suite.apps) {
    auto spec = std::make_shared<sim::SimAppSpec>(sim::generate_app(app, params, suite_seed));
    sim::validate_spec(*spec);
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::vector<std::shared_ptr<const sim::SimAppSpec>> Pipeline::load_suite() const {
  std::vector<std::shared_ptr<const sim::SimAppSpec>> specs;
  for (const std::string& app : cfg_.suite.apps) {
    std::filesystem::path path = cfg_.output_root / "suite" / (app + ".json");
    if (!std::filesystem::exists(path)) {
      throw StoreError("missing app spec " + path.string() + "; run `explore` first");
    }
    auto spec = std::make_shared<sim::SimAppSpec>(sim::spec_from_json(json::parse(read_text_file(path))));
    sim::validate_spec(*spec);
    specs.push_back(std::move(spec));
  }
  return specs;
}

providers::ProviderBundle Pipeline::make_providers(const providers::ImageResolver* resolver) const {
  providers::ProviderBundle bundle;
  if (cfg_.providers.embed == "mock") {
    bundle.embedder = std::make_shared<providers::MockEmbedder>(cfg_.providers.embed_dim);
  } else {
    providers::RemoteConfig rc;
    rc.base_url = cfg_.providers.base_url;
    rc.embed_model = cfg_.providers.embed_model;
    bundle.embedder = std::make_shared<providers::RemoteEmbedder>(providers::remote_config_from_env(rc));
  }
  std::shared_ptr<providers::ChatBackend> chat;
  if (cfg_.providers.chat == "mock") {
    chat = std::make_shared<providers::MockChatBackend>(cfg_.providers.mock_seed, resolver);
  } else {
    providers::RemoteConfig rc;
    rc.base_url = cfg_.providers.base_url;
    rc.chat_model = cfg_.providers.chat_model;
    chat = std::make_shared<providers::RemoteChatBackend>(providers::remote_config_from_env(rc), resolver);
  }
  bundle.generator = chat;
  bundle.annotator = chat;
  bundle.monitor = chat;
  bundle.judge = chat;
  return bundle;
}

StageOutcome Pipeline::explore() {
  const std::string stage = "explore";
  std::vector<std::filesystem::path> owned = {cfg_.output_root / "suite", cfg_.output_root / "exploration",
                                              cfg_.output_root / "observations"};
  if (auto done = begin_stage(stage, owned)) return *done;
  Stopwatch watch;

  std::vector<std::shared_ptr<const sim::SimAppSpec>> specs = generate_suite();
  std::filesystem::create_directories(cfg_.output_root / "suite");
  for (const auto& spec : specs) {
    write_text_file_atomic(cfg_.output_root / "suite" / (spec->app_name + ".json"),
                           sim::spec_to_json(*spec).dump(2) + "\n");
  }

  ObservationStore store;
  explorer::CampaignResult campaign = explorer::run_campaign(
      specs, cfg_.explore.sessions_per_app, cfg_.explore.steps_per_session, stage_seed(stage), store, opts_.jobs);
  for (const std::string& warning : campaign.warnings) warnings_.push_back(warning);

  explorer::save_trajectories(cfg_.output_root / "exploration", campaign.trajectories);
  store.save(cfg_.output_root / "observations");

  size_t transitions = 0;
  for (const auto& trajectory : campaign.trajectories) transitions += trajectory.transitions.size();
  json counts;
  counts["apps"] = specs.size();
  counts["sessions"] = campaign.trajectories.size();
  counts["transitions"] = transitions;
  counts["observations"] = store.size();
  counts["warnings"] = campaign.warnings.size();
  return finish_stage(stage, stage_seed(stage), std::move(counts), watch.elapsed_ms());
}

StageOutcome Pipeline::build_memory() {
  const std::string stage = "build-memory";
  require_stage("explore", "explore");
  if (auto done = begin_stage(stage, {cfg_.output_root / "memory"})) return *done;
  Stopwatch watch;

  ObservationStore store;
  store.load(cfg_.output_root / "observations");
  providers::StoreImageResolver resolver(store);
  providers::ProviderBundle bundle = make_providers(&resolver);

  envmem::MemoryBuildConfig mc;
  mc.tau = cfg_.memory.tau;
  mc.diversity_threshold = cfg_.memory.diversity_threshold;
  mc.jobs = opts_.jobs;

  size_t nodes = 0, functionalities = 0, indexed = 0;
  for (const std::string& app : cfg_.suite.apps) {
    std::vector<explorer::ExplorationTrajectory> trajectories =
        explorer::load_trajectories(cfg_.output_root / "exploration", app);
    envmem::EnvironmentMemory memory =
        envmem::build_memory(app, trajectories, store, *bundle.annotator, *bundle.embedder, mc);
    envmem::save_memory(cfg_.output_root / "memory", memory);
    nodes += memory.nodes.size();
    functionalities += memory.functionalities.size();
    indexed += memory.index.entry_ids.size();
  }

  json counts;
  counts["apps"] = cfg_.suite.apps.size();
  counts["nodes"] = nodes;
  counts["functionalities"] = functionalities;
  counts["indexed"] = indexed;
  return finish_stage(stage, stage_seed(stage), std::move(counts), watch.elapsed_ms());
}

StageOutcome Pipeline::synthesize() {
  const std::string stage = "synthesize";
  require_stage("build-memory", "build-memory");
  if (auto done = begin_stage(stage, {cfg_.output_root / "instructions"})) return *done;
  Stopwatch watch;

  providers::ProviderBundle bundle = make_providers(nullptr);
  uint64_t seed = stage_seed(stage);

  std::vector<synthesizer::CandidateInstruction> candidates;
  size_t contexts = 0;
  for (const std::string& app : cfg_.suite.apps) {
    envmem::EnvironmentMemory memory = envmem::load_memory(cfg_.output_root / "memory", app);
    uint64_t app_seed = mix64(seed, fnv1a64(app));
    for (const envmem::ScreenNode& node : memory.nodes) {
      synthesizer::SynthesisContext context =
          synthesizer::build_context(memory, node.id, app_seed, cfg_.synthesize.k_long_term);
      std::vector<synthesizer::CandidateInstruction> generated =
          synthesizer::generate_instructions(memory, context, *bundle.generator, &warnings_);
      ++contexts;
      for (auto& candidate : generated) candidates.push_back(std::move(candidate));
    }
  }

  synthesizer::FilterConfig fc;
  fc.clarity_min = cfg_.synthesize.clarity_min;
  fc.reason_min = cfg_.synthesize.reason_min;
  fc.dedup_threshold = cfg_.synthesize.dedup_threshold;
  fc.per_app_cap = cfg_.synthesize.per_app_cap;
  fc.jobs = opts_.jobs;
  std::vector<synthesizer::TaskInstruction> instructions =
      synthesizer::filter_instructions(std::move(candidates), *bundle.embedder, *bundle.generator, fc, &warnings_);
  synthesizer::save_instructions(cfg_.output_root / "instructions", instructions);

  json counts;
  counts["contexts"] = contexts;
  counts["instructions"] = instructions.size();
  return finish_stage(stage, seed, std::move(counts), watch.elapsed_ms());
}

StageOutcome Pipeline::rollout() {
  const std::string stage = "rollout";
  require_stage("synthesize", "synthesize");
  if (auto done = begin_stage(stage, {cfg_.output_root / "trajectories"})) return *done;
  Stopwatch watch;

  std::vector<std::shared_ptr<const sim::SimAppSpec>> specs = load_suite();
  ObservationStore store;
  store.load(cfg_.output_root / "observations");
  providers::StoreImageResolver resolver(store);
  providers::ProviderBundle bundle = make_providers(&resolver);

  const std::string& strategy = cfg_.rollout.strategy;
  uint64_t seed = stage_seed(stage);
  std::filesystem::path out_root = cfg_.output_root / "trajectories";

  size_t total = 0, retained = 0, succeeded = 0;
  for (const auto& spec : specs) {
    std::vector<synthesizer::TaskInstruction> instructions =
        synthesizer::load_instructions(cfg_.output_root / "instructions", spec->app_name);
    std::vector<rollout::RolloutTask> tasks;
    for (const synthesizer::TaskInstruction& instruction : instructions) {
      rollout::RolloutTask task;
      task.id = instruction.id;
      task.text = instruction.text;
      task.goal = sim::derive_goal_for_screen(*spec, instruction.source_screen);
      tasks.push_back(std::move(task));
    }
    if (static_cast<int>(tasks.size()) > cfg_.rollout.tasks_per_app) tasks.resize(cfg_.rollout.tasks_per_app);
    if (tasks.empty()) continue;

    auto expert = std::make_shared<rollout::OracleExpertPolicy>(spec);
    std::shared_ptr<rollout::PolicyRole> learner;
    if (cfg_.rollout.policy == "llm") {
      learner = std::make_shared<rollout::LlmPolicy>(bundle.generator, rollout::PolicyIdentity::learner);
    } else {
      learner = std::make_shared<rollout::EpsilonNoisyLearner>(spec, cfg_.rollout.epsilon, mix64(seed, 0x6c));
    }
    std::unique_ptr<rollout::DeviationMonitor> monitor;
    if (cfg_.rollout.monitor == "llm") {
      monitor = std::make_unique<rollout::LlmMonitor>(bundle.monitor);
    } else {
      monitor = std::make_unique<rollout::OracleMonitor>(expert);
    }
    std::unique_ptr<rollout::SuccessJudge> judge;
    if (cfg_.rollout.judge == "llm") {
      judge = std::make_unique<rollout::LlmJudge>(bundle.judge);
    } else {
      judge = std::make_unique<rollout::OracleJudge>();
    }

    std::vector<rollout::Trajectory> results;
    if (strategy == "self-evolution") {
      auto tabular = std::make_shared<rollout::TabularLearner>(learner);
      rollout::EnvFactory factory = [&spec](const rollout::RolloutTask&) {
        return std::make_unique<sim::SimEnv>(spec);
      };
      rollout::SelfEvolutionResult evo =
          rollout::self_evolution(tasks, factory, store, *tabular, *judge, cfg_.rollout.rounds,
                                  mix64(seed, fnv1a64(spec->app_name)), cfg_.rollout.max_steps, &warnings_);
      results = std::move(evo.successes);
    } else {
      results.resize(tasks.size());
      parallel_for(tasks.size(), opts_.jobs, [&](size_t i) {
        const rollout::RolloutTask& task = tasks[i];
        uint64_t task_seed = mix64(seed, fnv1a64(task.id));
        sim::SimEnv env(spec);
        rollout::Trajectory trajectory;
        if (strategy == "expert") {
          trajectory = rollout::rollout_expert(task, env, store, *expert, task_seed, cfg_.rollout.max_steps);
        } else if (strategy == "random-switch") {
          trajectory = rollout::rollout_random_switch(task, env, store, *expert, *learner, cfg_.rollout.switch_p,
                                                      task_seed, cfg_.rollout.max_steps);
        } else {
          rollout::InterventionConfig ic;
          ic.max_interventions = cfg_.rollout.max_interventions;
          ic.min_expert_steps = cfg_.rollout.min_expert_steps;
          trajectory = rollout::rollout_error_intervention(task, env, store, *learner, *expert, *monitor, ic,
                                                           task_seed, cfg_.rollout.max_steps);
        }
        trajectory.success = judge->judge(trajectory, env);
        results[i] = std::move(trajectory);
      });
    }

    for (const rollout::Trajectory& trajectory : results) {
      rollout::save_trajectory(trajectory, out_root);
      ++total;
      if (trajectory.retained()) ++retained;
      if (trajectory.success) ++succeeded;
    }
  }
  store.save(cfg_.output_root / "observations");

  json counts;
  counts["strategy"] = strategy_dir(strategy);
  counts["trajectories"] = total;
  counts["retained"] = retained;
  counts["succeeded"] = succeeded;
  return finish_stage(stage, seed, std::move(counts), watch.elapsed_ms());
}

StageOutcome Pipeline::analyze_overlap() {
  const std::string stage = "analyze-overlap";
  require_stage("synthesize", "synthesize");
  if (auto done = begin_stage(stage, {cfg_.output_root / "analysis" / "overlap"})) return *done;
  Stopwatch watch;

  providers::ProviderBundle bundle = make_providers(nullptr);
  uint64_t seed = stage_seed(stage);

  std::vector<analyzer::CorpusItem> synthetic;
  for (const std::string& app : cfg_.suite.apps) {
    for (const synthesizer::TaskInstruction& instruction :
         synthesizer::load_instructions(cfg_.output_root / "instructions", app)) {
      synthetic.push_back(analyzer::CorpusItem{instruction.id, instruction.text});
    }
  }

  std::vector<analyzer::CorpusItem> test;
  if (!cfg_.analyze.test_corpus.empty()) {
    test = analyzer::load_corpus_file(cfg_.analyze.test_corpus);
  } else {
    for (const auto& spec : load_suite()) {
      for (const sim::SimTask& task :
           sim::sample_tasks(*spec, cfg_.analyze.test_tasks_per_app, mix64(seed, fnv1a64(spec->app_name)))) {
        test.push_back(analyzer::CorpusItem{task.id, task.text});
      }
    }
  }

  analyzer::SimilarityReport report =
      analyzer::overlap_report(synthetic, test, *bundle.embedder, cfg_.analyze.thresholds);
  std::vector<analyzer::RemovalSubsets> removals =
      analyzer::removal_subsets(synthetic, report, cfg_.analyze.ratios, seed);

  std::filesystem::path dir = cfg_.output_root / "analysis" / "overlap";
  analyzer::save_similarity_report(report, dir);
  json removal_json = json::array();
  for (const analyzer::RemovalSubsets& subsets : removals) {
    char tag[16];
    std::snprintf(tag, sizeof(tag), "r%.2f", subsets.ratio);
    json entry;
    entry["ratio"] = subsets.ratio;
    entry["removed_by_similarity"] = subsets.removed_by_similarity;
    entry["removed_at_random"] = subsets.removed_at_random;
    removal_json.push_back(std::move(entry));

    auto dump_kept = [&](const std::vector<analyzer::CorpusItem>& kept, const std::string& name) {
      std::string body;
      for (const analyzer::CorpusItem& item : kept) {
        body += json{{"id", item.id}, {"text", item.text}}.dump() + "\n";
      }
      std::filesystem::create_directories(dir / tag);
      write_text_file_atomic(dir / tag / name, body);
    };
    dump_kept(subsets.kept_after_similarity, "kept_similar.jsonl");
    dump_kept(subsets.kept_after_random, "kept_random.jsonl");
  }
  write_text_file_atomic(dir / "removal.json", removal_json.dump(2) + "\n");

  json counts;
  counts["synthetic"] = synthetic.size();
  counts["test"] = test.size();
  counts["ratios"] = removals.size();
  return finish_stage(stage, seed, std::move(counts), watch.elapsed_ms());
}

StageOutcome Pipeline::analyze_coverage() {
  const std::string stage = "analyze-coverage";
  require_stage("synthesize", "synthesize");
  if (auto done = begin_stage(stage, {cfg_.output_root / "analysis" / "coverage"})) return *done;
  Stopwatch watch;

  providers::ProviderBundle bundle = make_providers(nullptr);
  uint64_t seed = stage_seed(stage);

  std::vector<std::string> instructions;
  for (const std::string& app : cfg_.suite.apps) {
    for (const synthesizer::TaskInstruction& instruction :
         synthesizer::load_instructions(cfg_.output_root / "instructions", app)) {
      instructions.push_back(instruction.text);
    }
  }
  if (instructions.empty()) throw StoreError("no instructions to analyze; run `synthesize` first");

  std::vector<analyzer::CorpusItem> test;
  if (!cfg_.analyze.test_corpus.empty()) {
    test = analyzer::load_corpus_file(cfg_.analyze.test_corpus);
  } else {
    for (const auto& spec : load_suite()) {
      for (const sim::SimTask& task :
           sim::sample_tasks(*spec, cfg_.analyze.test_tasks_per_app, mix64(seed, fnv1a64(spec->app_name)))) {
        test.push_back(analyzer::CorpusItem{task.id, task.text});
      }
    }
  }

  std::vector<analyzer::RequiredSet> required;
  for (const analyzer::CorpusItem& item : test) {
    analyzer::Decomposition decomposition = analyzer::decompose_task(item.text, *bundle.generator, *bundle.embedder);
    if (decomposition.parse_failed) warnings_.push_back("decomposition failed for test task " + item.id);
    required.push_back(analyzer::RequiredSet{item.id, std::move(decomposition.items)});
  }

  std::vector<analyzer::AtomicFunctionality> pool;
  for (const std::string& text : instructions) {
    analyzer::Decomposition decomposition = analyzer::decompose_task(text, *bundle.generator, *bundle.embedder);
    for (analyzer::AtomicFunctionality& item : decomposition.items) pool.push_back(std::move(item));
  }
  analyzer::CoverageReport report = analyzer::coverage(required, pool, cfg_.analyze.match_threshold);

  std::vector<size_t> sizes;
  for (int i = 1; i <= cfg_.analyze.curve_points; ++i) {
    size_t size = static_cast<size_t>(
        std::llround(static_cast<double>(instructions.size()) * i / cfg_.analyze.curve_points));
    if (size >= 1 && (sizes.empty() || size > sizes.back())) sizes.push_back(size);
  }
  std::vector<analyzer::CurvePoint> curve = analyzer::coverage_curve(
      instructions, sizes, required, *bundle.generator, *bundle.embedder, cfg_.analyze.match_threshold, &warnings_);

  analyzer::save_coverage_report(report, curve, cfg_.output_root / "analysis" / "coverage");

  json counts;
  counts["test_tasks"] = test.size();
  counts["skipped_tasks"] = report.skipped_tasks.size();
  counts["pool"] = pool.size();
  counts["curve_points"] = curve.size();
  return finish_stage(stage, seed, std::move(counts), watch.elapsed_ms());
}

StageOutcome Pipeline::export_training() {
  const std::string stage = "export-training";
  require_stage("rollout", "rollout");
  if (auto done = begin_stage(stage, {cfg_.output_root / "training"})) return *done;
  Stopwatch watch;

  providers::ProviderBundle bundle = make_providers(nullptr);
  const std::string& strategy = cfg_.rollout.strategy;
  std::vector<rollout::Trajectory> trajectories =
      rollout::load_trajectories_for_strategy(cfg_.output_root / "trajectories", strategy);

  size_t retained = 0, samples = 0;
  std::string body;
  for (rollout::Trajectory& trajectory : trajectories) {
    if (!trajectory.retained()) continue;
    ++retained;
    if (cfg_.rollout.rewrite) rollout::rewrite_thoughts(trajectory, *bundle.generator, &warnings_);
    for (const rollout::TrainingSample& sample : rollout::extract_training_samples(trajectory)) {
      body += rollout::training_sample_to_json(sample).dump() + "\n";
      ++samples;
    }
  }
  std::filesystem::create_directories(cfg_.output_root / "training");
  write_text_file_atomic(cfg_.output_root / "training" / (strategy_dir(strategy) + ".jsonl"), body);

  json counts;
  counts["strategy"] = strategy_dir(strategy);
  counts["trajectories"] = trajectories.size();
  counts["retained"] = retained;
  counts["samples"] = samples;
  return finish_stage(stage, stage_seed(stage), std::move(counts), watch.elapsed_ms());
}

}  // namespace agentforge::pipeline
