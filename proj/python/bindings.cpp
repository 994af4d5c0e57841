#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "agentforge/analyzer.hpp"
#include "agentforge/config.hpp"
#include "agentforge/embedding.hpp"
#include "agentforge/env.hpp"
#include "agentforge/phash.hpp"
#include "agentforge/pipeline.hpp"
#include "agentforge/providers.hpp"
#include "agentforge/sim.hpp"

namespace py = pybind11;
namespace af = agentforge;

namespace {

std::string outcome_json(const af::pipeline::StageOutcome& outcome) {
  nlohmann::json j;
  j["stage"] = outcome.stage;
  j["skipped"] = outcome.skipped;
  j["manifest"] = outcome.manifest;
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "GUI-agent data-synthesis pipeline bindings";

  py::class_<af::config::PipelineConfig>(m, "Config")
      .def_property_readonly("digest", &af::config::PipelineConfig::digest)
      .def_property_readonly("output_root",
                             [](const af::config::PipelineConfig& cfg) { return cfg.output_root.string(); })
      .def_property_readonly("seed", [](const af::config::PipelineConfig& cfg) { return cfg.seed; });

  m.def("parse_config", &af::config::parse_config, py::arg("text"), py::arg("base_dir"),
        "Parse a pipeline config from its TOML-style text.");
  m.def("load_config", &af::config::load_config, py::arg("path"));

  py::class_<af::pipeline::Pipeline>(m, "Pipeline")
      .def(py::init([](const af::config::PipelineConfig& cfg, bool force, int jobs,
                       std::optional<uint64_t> seed) {
             af::pipeline::StageOptions opts;
             opts.force = force;
             opts.jobs = jobs;
             opts.seed_override = seed;
             return std::make_unique<af::pipeline::Pipeline>(cfg, opts);
           }),
           py::arg("config"), py::arg("force") = false, py::arg("jobs") = 1,
           py::arg("seed") = std::nullopt)
      .def("explore", [](af::pipeline::Pipeline& p) { return outcome_json(p.explore()); })
      .def("build_memory", [](af::pipeline::Pipeline& p) { return outcome_json(p.build_memory()); })
      .def("synthesize", [](af::pipeline::Pipeline& p) { return outcome_json(p.synthesize()); })
      .def("rollout", [](af::pipeline::Pipeline& p) { return outcome_json(p.rollout()); })
      .def("analyze_overlap", [](af::pipeline::Pipeline& p) { return outcome_json(p.analyze_overlap()); })
      .def("analyze_coverage", [](af::pipeline::Pipeline& p) { return outcome_json(p.analyze_coverage()); })
      .def("export_training", [](af::pipeline::Pipeline& p) { return outcome_json(p.export_training()); })
      .def_property_readonly("warnings", &af::pipeline::Pipeline::warnings);

  m.def(
      "generate_app_json",
      [](const std::string& name, int n_screens, int elements_per_screen, int n_fields, uint64_t seed) {
        af::sim::GenerationParams params;
        params.n_screens = n_screens;
        params.elements_per_screen = elements_per_screen;
        params.n_fields = n_fields;
        af::sim::SimAppSpec spec = af::sim::generate_app(name, params, seed);
        af::sim::validate_spec(spec);
        return af::sim::spec_to_json(spec).dump();
      },
      py::arg("name"), py::arg("n_screens") = 8, py::arg("elements_per_screen") = 5, py::arg("n_fields") = 3,
      py::arg("seed") = 1);

  m.def(
      "sample_tasks_json",
      [](const std::string& spec_json, int count, uint64_t seed) {
        af::sim::SimAppSpec spec = af::sim::spec_from_json(nlohmann::json::parse(spec_json));
        nlohmann::json out = nlohmann::json::array();
        for (const af::sim::SimTask& task : af::sim::sample_tasks(spec, count, seed)) {
          out.push_back({{"id", task.id}, {"text", task.text}, {"goal", af::sim::goal_to_json(task.goal)}});
        }
        return out.dump();
      },
      py::arg("spec_json"), py::arg("count"), py::arg("seed") = 1);

  m.def(
      "render_screen_pgm",
      [](const std::string& spec_json, int screen_id) {
        af::sim::SimAppSpec spec = af::sim::spec_from_json(nlohmann::json::parse(spec_json));
        af::sim::EnvState state = af::sim::initial_state(spec);
        state.current_screen = screen_id;
        return py::bytes(af::to_pgm(af::sim::render(spec, state)));
      },
      py::arg("spec_json"), py::arg("screen_id"));

  m.def(
      "hash_similarity",
      [](const py::bytes& pgm_a, const py::bytes& pgm_b) {
        af::PixelGrid a = af::from_pgm(std::string(pgm_a));
        af::PixelGrid b = af::from_pgm(std::string(pgm_b));
        return af::hash_similarity(af::perceptual_hash(a), af::perceptual_hash(b));
      },
      py::arg("pgm_a"), py::arg("pgm_b"), "Perceptual-hash similarity of two P5 images in [0, 1].");

  m.def(
      "embed_texts",
      [](const std::vector<std::string>& texts, int dim) {
        af::providers::MockEmbedder embedder(dim);
        return embedder.embed_texts(texts);
      },
      py::arg("texts"), py::arg("dim") = 256, "Deterministic hashing embedder used by the mock provider.");

  m.def("cosine", &af::cosine, py::arg("a"), py::arg("b"));
}
