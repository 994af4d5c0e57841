#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentforge/common.hpp"
#include "agentforge/embedding.hpp"
#include "agentforge/env.hpp"

namespace agentforge::providers {

struct GenerationPart {
  enum class Kind { text, image };
  Kind kind = Kind::text;
  std::string content;  // text body, or a render-store ref for images

  static GenerationPart text_part(std::string body) { return {Kind::text, std::move(body)}; }
  static GenerationPart image_part(std::string ref) { return {Kind::image, std::move(ref)}; }
};

struct GenerationRequest {
  std::string system_text;
  std::vector<GenerationPart> user_parts;
  double temperature = 0.0;
  std::optional<int64_t> seed;
};

void validate_request(const GenerationRequest& request);
uint64_t request_digest(const GenerationRequest& request);

struct AnnotationRecord {
  enum class Kind { functionality, data };
  Kind kind = Kind::functionality;
  std::string label;
  std::string description;

  bool operator==(const AnnotationRecord&) const = default;
};

std::string annotation_kind_name(AnnotationRecord::Kind kind);
AnnotationRecord::Kind annotation_kind_from_name(const std::string& name);

// Scans for the first balanced bracketed span (string-literal aware) so that
// prose-wrapped model output still parses.
std::string extract_json_span(const std::string& raw, char open, char close);

std::vector<AnnotationRecord> parse_annotations(const std::string& raw);
std::string serialize_annotations(const std::vector<AnnotationRecord>& records);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual int dimension() const = 0;
  // one unit-norm vector per text, same order
  virtual std::vector<Embedding> embed_texts(const std::vector<std::string>& texts) = 0;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string chat_generate(const GenerationRequest& request) = 0;
};

// Token-multiset feature hashing: lowercase, split on non-alphanumerics,
// FNV-1a picks the bucket and the sign, then L2-normalize.
class MockEmbedder final : public Embedder {
 public:
  explicit MockEmbedder(int dim = 256);
  int dimension() const override { return dim_; }
  std::vector<Embedding> embed_texts(const std::vector<std::string>& texts) override;

 private:
  int dim_;
};

// How backends that need pixels (remote) or structure (mock annotator) get at
// the content behind an image ref.
struct ResolvedImage {
  int screen_id = -1;
  PixelGrid render;
  std::vector<A11yNode> elements;
};

class ImageResolver {
 public:
  virtual ~ImageResolver() = default;
  virtual ResolvedImage resolve(const std::string& ref) const = 0;
};

class StoreImageResolver final : public ImageResolver {
 public:
  explicit StoreImageResolver(const ObservationStore& store) : store_(store) {}
  ResolvedImage resolve(const std::string& ref) const override;

 private:
  const ObservationStore& store_;
};

// Deterministic stand-in for every chat role; dispatches on the system-prompt
// marker and answers as that role. Pure function of (request, seed).
class MockChatBackend final : public ChatBackend {
 public:
  explicit MockChatBackend(uint64_t seed, const ImageResolver* resolver = nullptr)
      : seed_(seed), resolver_(resolver) {}
  std::string chat_generate(const GenerationRequest& request) override;

 private:
  std::string annotate(const GenerationRequest& request, uint64_t h);
  std::string synthesize(const GenerationRequest& request, uint64_t h);
  std::string score(const GenerationRequest& request);
  std::string decompose(const GenerationRequest& request);

  uint64_t seed_;
  const ImageResolver* resolver_;
};

struct RemoteConfig {
  std::string base_url;     // e.g. http://127.0.0.1:8080/v1
  std::string api_key;      // empty → no Authorization header
  std::string chat_model = "gui-agent-chat";
  std::string embed_model = "gui-agent-embed";
  double temperature = 0.0;
  int max_attempts = 3;
  int backoff_ms = 500;     // doubles per retry
};

// Reads AGENT_FORGE_BASE_URL / AGENT_FORGE_API_KEY on top of config values;
// the environment wins.
RemoteConfig remote_config_from_env(RemoteConfig base);

class RemoteChatBackend final : public ChatBackend {
 public:
  RemoteChatBackend(RemoteConfig config, const ImageResolver* resolver = nullptr);
  std::string chat_generate(const GenerationRequest& request) override;

 private:
  RemoteConfig config_;
  const ImageResolver* resolver_;
};

class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteConfig config);
  int dimension() const override { return dim_; }
  std::vector<Embedding> embed_texts(const std::vector<std::string>& texts) override;

 private:
  RemoteConfig config_;
  int dim_ = -1;  // learned from the first response
};

// The five pluggable model roles.
struct ProviderBundle {
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<ChatBackend> generator;
  std::shared_ptr<ChatBackend> annotator;
  std::shared_ptr<ChatBackend> monitor;
  std::shared_ptr<ChatBackend> judge;
};

std::string base64_encode(std::string_view bytes);

}  // namespace agentforge::providers
