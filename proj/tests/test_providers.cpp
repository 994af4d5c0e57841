#include <doctest.h>

#include <cmath>

#include "agentforge/common.hpp"
#include "agentforge/prompts.hpp"
#include "agentforge/providers.hpp"
#include "agentforge/sim.hpp"
#include "oracles.hpp"

using namespace agentforge;
using providers::GenerationPart;
using providers::GenerationRequest;

TEST_CASE("empty texts embed to the first basis vector") {
  providers::MockEmbedder embedder(16);
  auto vecs = embedder.embed_texts({"", ""});
  REQUIRE(vecs.size() == 2);
  for (const auto& v : vecs) {
    REQUIRE(v.size() == 16);
    CHECK(v[0] == 1.0f);
    for (size_t i = 1; i < v.size(); ++i) CHECK(v[i] == 0.0f);
  }
  // punctuation-only text has an empty token multiset too
  auto punct = embedder.embed_texts({"?!... --- !!"});
  CHECK(punct[0] == vecs[0]);
}

TEST_CASE("embedding depends only on the token multiset") {
  providers::MockEmbedder embedder;
  auto vecs = embedder.embed_texts({"set alarm time", "Set  ALARM time!", "time set alarm"});
  CHECK(vecs[0] == vecs[1]);
  // multiset ignores order as well
  CHECK(vecs[0] == vecs[2]);
  CHECK(cosine(vecs[0], vecs[1]) == doctest::Approx(1.0));
}

TEST_CASE("embedding matches an independent feature-hash reimplementation") {
  providers::MockEmbedder embedder;
  std::vector<std::string> texts{"wifi toggle", "calendar event reminder",
                                 "open the gallery, pick IMG_001 and share it",
                                 "repeat repeat repeat once"};
  auto vecs = embedder.embed_texts(texts);
  for (size_t i = 0; i < texts.size(); ++i) {
    auto expected = oracle::embed_text(texts[i]);
    REQUIRE(vecs[i].size() == expected.size());
    for (size_t j = 0; j < expected.size(); ++j) {
      CHECK(vecs[i][j] == doctest::Approx(expected[j]).epsilon(1e-6));
    }
  }
  CHECK(cosine(vecs[0], vecs[1]) ==
        doctest::Approx(oracle::cosine(oracle::embed_text(texts[0]), oracle::embed_text(texts[1])))
            .epsilon(1e-9));
}

TEST_CASE("every returned embedding is unit norm") {
  providers::MockEmbedder embedder(64);
  auto vecs = embedder.embed_texts({"a", "b c d", "toggle wifi now", ""});
  for (const auto& v : vecs) {
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("embed input validation") {
  providers::MockEmbedder embedder;
  CHECK_THROWS_AS(embedder.embed_texts({}), ValidationError);
  CHECK_THROWS_AS(embedder.embed_texts({std::string(8193, 'x')}), ValidationError);
  CHECK_THROWS_AS(providers::MockEmbedder(0), ValidationError);
}

TEST_CASE("mock chat output is a pure function of request and seed") {
  GenerationRequest req;
  req.system_text = "free-form probe";
  req.user_parts.push_back(GenerationPart::text_part("hello"));

  providers::MockChatBackend a(7), b(7), c(8);
  CHECK(a.chat_generate(req) == b.chat_generate(req));
  CHECK(a.chat_generate(req) == a.chat_generate(req));
  CHECK(a.chat_generate(req) != c.chat_generate(req));

  GenerationRequest other = req;
  other.user_parts.push_back(GenerationPart::text_part("more"));
  CHECK(a.chat_generate(req) != a.chat_generate(other));
}

TEST_CASE("request validation rejects malformed requests") {
  GenerationRequest empty;
  CHECK_THROWS_AS(providers::validate_request(empty), ValidationError);
  GenerationRequest bad_temp;
  bad_temp.system_text = "x";
  bad_temp.user_parts.push_back(GenerationPart::text_part("y"));
  bad_temp.temperature = -0.5;
  CHECK_THROWS_AS(providers::validate_request(bad_temp), ValidationError);
}

TEST_CASE("mock annotator describes exactly the screen's elements") {
  // hand-built screen: one nav, one toggle, one input
  sim::SimAppSpec spec;
  spec.app_name = "notes";
  spec.data_fields.push_back({"dark_mode", true, false, ""});
  spec.data_fields.push_back({"title", false, false, "untitled"});
  sim::SimScreenSpec home;
  home.id = 0;
  home.name = "home";
  home.elements.push_back({0, ElementKind::nav, "Open editor", true, 1, ""});
  home.elements.push_back({1, ElementKind::toggle, "Dark mode", true, -1, "dark_mode"});
  home.elements.push_back({2, ElementKind::input, "Title", true, -1, "title"});
  sim::SimScreenSpec editor;
  editor.id = 1;
  editor.name = "editor";
  editor.elements.push_back({0, ElementKind::nav, "Back home", true, 0, ""});
  spec.screens = {home, editor};
  spec.nav_edges = {{0, 1}, {1, 0}};

  ObservationStore store;
  Observation obs = sim::observe(spec, sim::initial_state(spec));
  std::string ref = store.put(obs);
  providers::StoreImageResolver resolver(store);
  providers::MockChatBackend annotator(3, &resolver);

  GenerationRequest req = prompts::make_annotation_request("notes", "initial screen", std::nullopt, ref);
  auto records = providers::parse_annotations(annotator.chat_generate(req));

  REQUIRE(records.size() == 3);
  CHECK(records[0].label == "Open editor");
  CHECK(records[0].kind == providers::AnnotationRecord::Kind::functionality);
  CHECK(records[1].label == "Dark mode");
  CHECK(records[1].kind == providers::AnnotationRecord::Kind::functionality);
  CHECK(records[2].label == "Title");
  CHECK(records[2].kind == providers::AnnotationRecord::Kind::data);
  for (const auto& r : records) {
    CHECK(!r.description.empty());
    CHECK(r.description.find("notes") != std::string::npos);
  }
}

TEST_CASE("annotation parsing handles direct, wrapped and empty lists") {
  auto direct = providers::parse_annotations(
      R"([{"type":"functionality","label":"WiFi toggle","description":"switches wifi"}])");
  REQUIRE(direct.size() == 1);
  CHECK(direct[0].kind == providers::AnnotationRecord::Kind::functionality);
  CHECK(direct[0].label == "WiFi toggle");

  auto wrapped = providers::parse_annotations(
      "Here you go: [{\"type\":\"data\",\"label\":\"Title\",\"description\":\"stores text\"}] thanks");
  REQUIRE(wrapped.size() == 1);
  CHECK(wrapped[0].kind == providers::AnnotationRecord::Kind::data);

  CHECK(providers::parse_annotations("[]").empty());
  CHECK_THROWS(providers::parse_annotations("no list here at all"));
}

TEST_CASE("annotation serialize/parse is the identity") {
  std::vector<providers::AnnotationRecord> records{
      {providers::AnnotationRecord::Kind::functionality, "Open tab", "opens the tab"},
      {providers::AnnotationRecord::Kind::data, "Name field", "holds the name"},
  };
  auto round = providers::parse_annotations(providers::serialize_annotations(records));
  CHECK(round == records);
}

TEST_CASE("extract_json_span is string-literal aware") {
  CHECK(providers::extract_json_span("x [1, \"a]b\", 2] y", '[', ']') == "[1, \"a]b\", 2]");
  CHECK(providers::extract_json_span("{\"k\": \"}\"}", '{', '}') == "{\"k\": \"}\"}");
  CHECK_THROWS_AS(providers::extract_json_span("nothing", '[', ']'), DecodeError);
  CHECK_THROWS_AS(providers::extract_json_span("[1, 2", '[', ']'), DecodeError);
}

TEST_CASE("remote config honors environment overrides") {
  providers::RemoteConfig base;
  base.base_url = "http://file.example/v1";
  // no env set in tests by default: values pass through
  unsetenv("AGENT_FORGE_BASE_URL");
  unsetenv("AGENT_FORGE_API_KEY");
  auto same = providers::remote_config_from_env(base);
  CHECK(same.base_url == base.base_url);
  setenv("AGENT_FORGE_BASE_URL", "http://env.example/v1", 1);
  setenv("AGENT_FORGE_API_KEY", "sk-test", 1);
  auto overridden = providers::remote_config_from_env(base);
  CHECK(overridden.base_url == "http://env.example/v1");
  CHECK(overridden.api_key == "sk-test");
  unsetenv("AGENT_FORGE_BASE_URL");
  unsetenv("AGENT_FORGE_API_KEY");
}

TEST_CASE("base64 encoding matches known vectors") {
  CHECK(providers::base64_encode("") == "");
  CHECK(providers::base64_encode("f") == "Zg==");
  CHECK(providers::base64_encode("fo") == "Zm8=");
  CHECK(providers::base64_encode("foo") == "Zm9v");
  CHECK(providers::base64_encode("foobar") == "Zm9vYmFy");
}
