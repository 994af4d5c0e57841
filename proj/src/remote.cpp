#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "agentforge/providers.hpp"

namespace agentforge::providers {

using nlohmann::json;

std::string base64_encode(std::string_view bytes) {
  static const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 3 <= bytes.size()) {
    uint32_t v = (static_cast<uint8_t>(bytes[i]) << 16) | (static_cast<uint8_t>(bytes[i + 1]) << 8) |
                 static_cast<uint8_t>(bytes[i + 2]);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
    i += 3;
  }
  size_t rest = bytes.size() - i;
  if (rest == 1) {
    uint32_t v = static_cast<uint8_t>(bytes[i]) << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back('=');
    out.push_back('=');
  } else if (rest == 2) {
    uint32_t v = (static_cast<uint8_t>(bytes[i]) << 16) | (static_cast<uint8_t>(bytes[i + 1]) << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

RemoteConfig remote_config_from_env(RemoteConfig base) {
  if (const char* url = std::getenv("AGENT_FORGE_BASE_URL")) base.base_url = url;
  if (const char* key = std::getenv("AGENT_FORGE_API_KEY")) base.api_key = key;
  return base;
}

namespace {

struct SplitUrl {
  std::string host;         // scheme://host[:port]
  std::string path_prefix;  // possibly empty, no trailing slash
};

SplitUrl split_base_url(const std::string& base_url) {
  if (base_url.empty()) {
    throw ValidationError("remote backend: base URL not set (config or AGENT_FORGE_BASE_URL)");
  }
  size_t scheme = base_url.find("://");
  if (scheme == std::string::npos) throw ValidationError("remote backend: base URL must include a scheme: " + base_url);
  if (base_url.compare(0, scheme, "http") != 0) {
    throw ValidationError("remote backend: this build supports http base URLs only, got: " + base_url);
  }
  size_t path = base_url.find('/', scheme + 3);
  SplitUrl out;
  if (path == std::string::npos) {
    out.host = base_url;
  } else {
    out.host = base_url.substr(0, path);
    out.path_prefix = base_url.substr(path);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  }
  return out;
}

bool retriable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

// POST with the shared retry budget; returns the 2xx body
std::string post_with_retries(const RemoteConfig& config, const std::string& endpoint, const json& body) {
  SplitUrl url = split_base_url(config.base_url);
  httplib::Client client(url.host);
  client.set_connection_timeout(30, 0);
  client.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

  std::string payload = body.dump();
  std::string last_error;
  int attempts = std::max(1, config.max_attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      int delay = config.backoff_ms << (attempt - 1);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    httplib::Result result = client.Post(url.path_prefix + endpoint, headers, payload, "application/json");
    if (!result) {
      last_error = "transport failure: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 200 && result->status < 300) return result->body;
    last_error = "HTTP " + std::to_string(result->status) + ": " + result->body;
    if (!retriable_status(result->status)) {
      throw TransportError("remote backend request failed (" + endpoint + "): " + last_error);
    }
  }
  throw TransportError("remote backend request failed after " + std::to_string(attempts) + " attempts (" +
                       endpoint + "): " + last_error);
}

json parse_response(const std::string& body, const char* endpoint) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw DecodeError(std::string("remote backend returned unparseable JSON from ") + endpoint + ": " + e.what(), body);
  }
}

}  // namespace

RemoteChatBackend::RemoteChatBackend(RemoteConfig config, const ImageResolver* resolver)
    : config_(std::move(config)), resolver_(resolver) {}

std::string RemoteChatBackend::chat_generate(const GenerationRequest& request) {
  validate_request(request);
  json content = json::array();
  for (const GenerationPart& part : request.user_parts) {
    if (part.kind == GenerationPart::Kind::text) {
      content.push_back({{"type", "text"}, {"text", part.content}});
    } else {
      if (!resolver_) throw Error("remote chat backend needs an image resolver to send image parts");
      ResolvedImage image = resolver_->resolve(part.content);
      std::string data_url = "data:image/x-portable-graymap;base64," + base64_encode(to_pgm(image.render));
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", data_url}}}});
    }
  }
  json body;
  body["model"] = config_.chat_model;
  body["temperature"] = request.temperature;
  if (request.seed) body["seed"] = *request.seed;
  body["messages"] = json::array({
      json{{"role", "system"}, {"content", request.system_text}},
      json{{"role", "user"}, {"content", content}},
  });

  std::string raw = post_with_retries(config_, "/chat/completions", body);
  json parsed = parse_response(raw, "/chat/completions");
  if (!parsed.contains("choices") || !parsed["choices"].is_array() || parsed["choices"].empty() ||
      !parsed["choices"][0].contains("message") || !parsed["choices"][0]["message"].contains("content") ||
      !parsed["choices"][0]["message"]["content"].is_string()) {
    throw DecodeError("remote chat response missing choices[0].message.content", raw);
  }
  return parsed["choices"][0]["message"]["content"].get<std::string>();
}

RemoteEmbedder::RemoteEmbedder(RemoteConfig config) : config_(std::move(config)) {}

std::vector<Embedding> RemoteEmbedder::embed_texts(const std::vector<std::string>& texts) {
  if (texts.empty()) throw ValidationError("embed_texts: empty batch");
  for (const std::string& text : texts) {
    if (text.size() > 8192) throw ValidationError("embed_texts: text longer than 8192 characters");
  }
  json body;
  body["model"] = config_.embed_model;
  body["input"] = texts;

  std::string raw = post_with_retries(config_, "/embeddings", body);
  json parsed = parse_response(raw, "/embeddings");
  if (!parsed.contains("data") || !parsed["data"].is_array() || parsed["data"].size() != texts.size()) {
    throw DecodeError("remote embeddings response has wrong data cardinality", raw);
  }
  std::vector<Embedding> out(texts.size());
  for (const json& item : parsed["data"]) {
    if (!item.contains("index") || !item.contains("embedding") || !item["embedding"].is_array()) {
      throw DecodeError("remote embeddings item missing index/embedding", raw);
    }
    size_t index = item["index"].get<size_t>();
    if (index >= out.size()) throw DecodeError("remote embeddings item index out of range", raw);
    Embedding v;
    v.reserve(item["embedding"].size());
    for (const json& x : item["embedding"]) v.push_back(x.get<float>());
    out[index] = std::move(v);
  }
  for (const Embedding& v : out) {
    if (v.empty()) throw DecodeError("remote embeddings response left a gap in the batch", raw);
  }
  int dim = static_cast<int>(out.front().size());
  if (dim_ == -1) dim_ = dim;
  for (Embedding& v : out) {
    if (static_cast<int>(v.size()) != dim_) {
      throw InvariantError("remote embedder returned mixed dimensions in one batch");
    }
    l2_normalize(v);
  }
  return out;
}

}  // namespace agentforge::providers
