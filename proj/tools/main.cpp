#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "agentforge/pipeline.hpp"

namespace af = agentforge;

int main(int argc, char** argv) {
  CLI::App app{"GUI-agent data-synthesis pipeline: explore a simulated app suite, build environment "
               "memory, synthesize task instructions, roll out policy-switching trajectories, and "
               "analyze the resulting corpus."};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  bool force = false;
  int jobs = 1;
  app.add_option("--config", config_path, "pipeline config file (defaults apply when omitted)");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_flag("--force", force, "wipe this stage's artifacts and rerun");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  CLI::App* c_explore = app.add_subcommand("explore", "generate the app suite and run random-walk sessions");
  CLI::App* c_memory = app.add_subcommand("build-memory", "deduplicate screens, annotate, and index");
  CLI::App* c_synth = app.add_subcommand("synthesize", "generate, score, and filter task instructions");
  CLI::App* c_rollout = app.add_subcommand("rollout", "roll out trajectories with the configured strategy");
  CLI::App* c_analyze = app.add_subcommand("analyze", "corpus analysis reports");
  c_analyze->require_subcommand(1);
  CLI::App* c_overlap = c_analyze->add_subcommand("overlap", "instruction overlap against a test corpus");
  CLI::App* c_coverage = c_analyze->add_subcommand("coverage", "atomic-functionality coverage");
  CLI::App* c_export = app.add_subcommand("export-training", "extract training samples from rollouts");
  for (CLI::App* sub : {c_explore, c_memory, c_synth, c_rollout, c_analyze, c_overlap, c_coverage, c_export}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    af::config::PipelineConfig cfg =
        config_path.empty() ? af::config::parse_config("", std::filesystem::current_path())
                            : af::config::load_config(config_path);
    af::pipeline::StageOptions opts;
    opts.force = force;
    opts.jobs = jobs;
    if (seed_opt->count() > 0) opts.seed_override = seed;
    af::pipeline::Pipeline pipeline(std::move(cfg), opts);

    af::pipeline::StageOutcome outcome;
    if (c_explore->parsed()) {
      outcome = pipeline.explore();
    } else if (c_memory->parsed()) {
      outcome = pipeline.build_memory();
    } else if (c_synth->parsed()) {
      outcome = pipeline.synthesize();
    } else if (c_rollout->parsed()) {
      outcome = pipeline.rollout();
    } else if (c_analyze->parsed()) {
      outcome = c_overlap->parsed() ? pipeline.analyze_overlap() : pipeline.analyze_coverage();
    } else {
      outcome = pipeline.export_training();
    }

    for (const std::string& warning : pipeline.warnings()) std::cerr << "warning: " << warning << "\n";
    std::cout << outcome.stage << (outcome.skipped ? ": up to date " : ": completed ")
              << outcome.manifest["counts"].dump() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
