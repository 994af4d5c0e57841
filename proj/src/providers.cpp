#include "agentforge/providers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agentforge/prompts.hpp"

namespace agentforge::providers {

using nlohmann::json;

void validate_request(const GenerationRequest& request) {
  if (request.user_parts.empty()) throw ValidationError("generation request has no user parts");
  if (request.temperature < 0.0) throw ValidationError("generation request temperature < 0");
  for (const GenerationPart& part : request.user_parts) {
    if (part.kind == GenerationPart::Kind::image && part.content.empty()) {
      throw ValidationError("generation request has an empty image reference");
    }
  }
}

uint64_t request_digest(const GenerationRequest& request) {
  uint64_t h = fnv1a64("req\x1f");
  h = fnv1a64(request.system_text, h);
  for (const GenerationPart& part : request.user_parts) {
    h = fnv1a64(part.kind == GenerationPart::Kind::text ? "\x1ft\x1f" : "\x1fi\x1f", h);
    h = fnv1a64(part.content, h);
  }
  char temp[64];
  std::snprintf(temp, sizeof(temp), "\x1f%.9g", request.temperature);
  h = fnv1a64(temp, h);
  if (request.seed) h = fnv1a64("\x1fs" + std::to_string(*request.seed), h);
  return h;
}

std::string annotation_kind_name(AnnotationRecord::Kind kind) {
  return kind == AnnotationRecord::Kind::functionality ? "functionality" : "data";
}

AnnotationRecord::Kind annotation_kind_from_name(const std::string& name) {
  if (name == "functionality") return AnnotationRecord::Kind::functionality;
  if (name == "data") return AnnotationRecord::Kind::data;
  throw ParseError("unknown annotation kind: " + name);
}

std::string extract_json_span(const std::string& raw, char open, char close) {
  size_t start = raw.find(open);
  if (start == std::string::npos) throw ParseError(std::string("no '") + open + "' found in response");
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = start; i < raw.size(); ++i) {
    char c = raw[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == open) ++depth;
    else if (c == close) {
      --depth;
      if (depth == 0) return raw.substr(start, i - start + 1);
    }
  }
  throw ParseError(std::string("unbalanced '") + open + "' span in response");
}

std::vector<AnnotationRecord> parse_annotations(const std::string& raw) {
  std::string span = extract_json_span(raw, '[', ']');
  json parsed;
  try {
    parsed = json::parse(span);
  } catch (const json::exception& e) {
    throw ParseError(std::string("annotation list is not valid JSON: ") + e.what());
  }
  if (!parsed.is_array()) throw ParseError("annotation span is not a list");
  std::vector<AnnotationRecord> records;
  for (const json& item : parsed) {
    if (!item.is_object() || !item.contains("type") || !item.contains("label") || !item.contains("description") ||
        !item["type"].is_string() || !item["label"].is_string() || !item["description"].is_string()) {
      throw ParseError("annotation record missing type/label/description strings");
    }
    AnnotationRecord record;
    record.kind = annotation_kind_from_name(item["type"].get<std::string>());
    record.label = item["label"].get<std::string>();
    record.description = item["description"].get<std::string>();
    if (record.label.empty() || record.description.empty()) {
      throw ParseError("annotation record with empty label or description");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::string serialize_annotations(const std::vector<AnnotationRecord>& records) {
  json list = json::array();
  for (const AnnotationRecord& record : records) {
    json item;
    item["type"] = annotation_kind_name(record.kind);
    item["label"] = record.label;
    item["description"] = record.description;
    list.push_back(item);
  }
  return list.dump();
}

MockEmbedder::MockEmbedder(int dim) : dim_(dim) {
  if (dim < 1) throw ValidationError("embedder dimension must be >= 1");
}

std::vector<Embedding> MockEmbedder::embed_texts(const std::vector<std::string>& texts) {
  if (texts.empty()) throw ValidationError("embed_texts: empty batch");
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) {
    if (text.size() > 8192) throw ValidationError("embed_texts: text longer than 8192 characters");
    std::vector<int64_t> counts(static_cast<size_t>(dim_), 0);
    bool any_token = false;
    size_t i = 0;
    while (i < text.size()) {
      char c = text[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      bool token_char = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
      if (!token_char) {
        ++i;
        continue;
      }
      std::string token;
      while (i < text.size()) {
        char t = text[i];
        if (t >= 'A' && t <= 'Z') t = static_cast<char>(t - 'A' + 'a');
        if (!((t >= 'a' && t <= 'z') || (t >= '0' && t <= '9'))) break;
        token.push_back(t);
        ++i;
      }
      uint64_t h = fnv1a64(token);
      int64_t sign = (h >> 63) ? -1 : 1;
      counts[h % static_cast<uint64_t>(dim_)] += sign;
      any_token = true;
    }
    Embedding v(static_cast<size_t>(dim_), 0.0f);
    double norm_sq = 0.0;
    for (int64_t c : counts) norm_sq += static_cast<double>(c) * static_cast<double>(c);
    if (!any_token || norm_sq == 0.0) {
      // empty token multiset (or full sign cancellation) maps to e0
      v[0] = 1.0f;
    } else {
      double norm = std::sqrt(norm_sq);
      for (size_t k = 0; k < counts.size(); ++k) {
        v[k] = static_cast<float>(static_cast<double>(counts[k]) / norm);
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

ResolvedImage StoreImageResolver::resolve(const std::string& ref) const {
  const Observation& obs = store_.get(ref);
  return ResolvedImage{obs.screen_id, obs.render, obs.a11y};
}

namespace {

bool starts_with(const std::string& text, std::string_view prefix) {
  return text.size() >= prefix.size() && text.compare(0, prefix.size(), prefix) == 0;
}

std::string joined_user_text(const GenerationRequest& request) {
  std::string out;
  for (const GenerationPart& part : request.user_parts) {
    if (part.kind == GenerationPart::Kind::text) {
      out += part.content;
      out += "\n";
    }
  }
  return out;
}

// value of the first "{key}" line, e.g. find_line_value(text, "App: ")
std::optional<std::string> find_line_value(const std::string& text, std::string_view key) {
  size_t pos = text.find(key);
  if (pos == std::string::npos) return std::nullopt;
  // must be at line start
  if (pos != 0 && text[pos - 1] != '\n') {
    pos = text.find(std::string("\n") + std::string(key));
    if (pos == std::string::npos) return std::nullopt;
    pos += 1;
  }
  size_t begin = pos + key.size();
  size_t end = text.find('\n', begin);
  if (end == std::string::npos) end = text.size();
  return trim(text.substr(begin, end - begin));
}

const std::optional<std::string>& require(const std::optional<std::string>& value, const char* what) {
  if (!value) throw ParseError(std::string("mock backend: request is missing ") + what);
  return value;
}

// the last image ref in the request (annotation: Screen After)
std::string last_image_ref(const GenerationRequest& request) {
  for (auto it = request.user_parts.rbegin(); it != request.user_parts.rend(); ++it) {
    if (it->kind == GenerationPart::Kind::image) return it->content;
  }
  throw ParseError("mock backend: request carries no image");
}

std::string quoted_span(const std::string& text) {
  size_t a = text.find('\'');
  if (a == std::string::npos) return "";
  size_t b = text.find('\'', a + 1);
  if (b == std::string::npos) return "";
  return text.substr(a + 1, b - a - 1);
}

std::string strip_leading_stopwords(std::string phrase) {
  static const char* kStops[] = {"then ", "and ", "first ", "next ", "afterwards ", "finally ", "also "};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const char* stop : kStops) {
      if (starts_with(phrase, stop)) {
        phrase = phrase.substr(std::string_view(stop).size());
        changed = true;
      }
    }
  }
  return phrase;
}

}  // namespace

std::string MockChatBackend::chat_generate(const GenerationRequest& request) {
  validate_request(request);
  uint64_t h = mix64(seed_, request_digest(request));
  const std::string& sys = request.system_text;
  if (starts_with(sys, prompts::kAnnotationMarker)) return annotate(request, h);
  if (starts_with(sys, prompts::kSynthesisMarker)) return synthesize(request, h);
  if (starts_with(sys, prompts::kScoringMarker)) return score(request);
  if (starts_with(sys, prompts::kDecomposeMarker)) return decompose(request);
  if (starts_with(sys, prompts::kMonitorMarker)) {
    json verdict;
    verdict["deviated"] = (h & 1) != 0;
    verdict["analysis"] = "mock monitor analysis " + hex16(h);
    return verdict.dump();
  }
  if (starts_with(sys, prompts::kJudgeMarker)) {
    json verdict;
    verdict["success"] = (h & 1) != 0;
    return verdict.dump();
  }
  if (starts_with(sys, prompts::kRewriteMarker)) {
    std::string text = joined_user_text(request);
    auto original = require(find_line_value(text, "Original thought: "), "an original thought");
    return "[refined] " + *original;
  }
  if (starts_with(sys, prompts::kPolicyMarker)) {
    json decision;
    decision["thought"] = "The mock policy finishes immediately.";
    decision["action"] = {{"kind", "complete"}};
    return decision.dump();
  }
  return "mock-response-" + hex16(h);
}

std::string MockChatBackend::annotate(const GenerationRequest& request, uint64_t h) {
  if (!resolver_) throw Error("mock annotator needs an image resolver");
  ResolvedImage image = resolver_->resolve(last_image_ref(request));
  std::string text = joined_user_text(request);
  std::string app = *require(find_line_value(text, "App: "), "an App line");

  json list = json::array();
  for (const A11yNode& el : image.elements) {
    uint64_t eh = fnv1a64(app + "\x1f" + std::to_string(image.screen_id) + "\x1f" + el.label + "\x1f" + kind_name(el.kind));
    std::string phrase;
    switch (el.kind) {
      case ElementKind::nav:
        phrase = (eh & 1) ? "opens another screen of the app so the user can continue in that section"
                          : "navigates deeper into the corresponding section of the app";
        break;
      case ElementKind::toggle:
        phrase = (eh & 1) ? "switches the associated device setting on or off, taking effect immediately"
                          : "turns the associated setting on or off for the whole device";
        break;
      case ElementKind::input:
        phrase = (eh & 1) ? "stores whatever text the user types, keeping it as app data until changed"
                          : "accepts typed text and saves it as persistent app data";
        break;
      case ElementKind::back:
        phrase = "returns to the previously visited screen of the app";
        break;
      case ElementKind::terminal:
        phrase = "ends the current flow on this screen, confirming the user is done";
        break;
    }
    json item;
    item["type"] = annotation_kind_name(el.kind == ElementKind::input ? AnnotationRecord::Kind::data
                                                                      : AnnotationRecord::Kind::functionality);
    item["label"] = el.label;
    item["description"] = "In the " + app + " app, the '" + el.label + "' control on screen " +
                          std::to_string(image.screen_id) + " " + phrase + ".";
    list.push_back(item);
  }
  std::string body = list.dump();
  if (h & 1) return "Here are the extracted elements: " + body + "\nDone.";
  return body;
}

std::string MockChatBackend::synthesize(const GenerationRequest& request, uint64_t h) {
  std::string text = joined_user_text(request);
  std::string app = *require(find_line_value(text, "App: "), "an App line");

  // labels = quoted spans of the focal-screen element descriptions
  std::vector<std::string> labels;
  size_t begin = text.find("Elements on Current Screen");
  size_t end = text.find("These are screens", begin == std::string::npos ? 0 : begin);
  if (begin != std::string::npos) {
    std::string section = text.substr(begin, (end == std::string::npos ? text.size() : end) - begin);
    std::istringstream lines(section);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.find("\"description\":") == std::string::npos) continue;
      std::string label = quoted_span(line);
      if (!label.empty()) labels.push_back(label);
    }
  }
  if (labels.empty()) labels.push_back("main screen");

  const size_t n_tasks = 1 + h % 3;
  json tasks = json::array();
  for (size_t j = 0; j < n_tasks; ++j) {
    uint64_t hj = mix64(h, j + 1);
    size_t i1 = hj % labels.size();
    size_t i2 = labels.size() > 1 ? (i1 + 1 + (hj >> 8) % (labels.size() - 1)) % labels.size() : i1;
    const std::string& l1 = labels[i1];
    const std::string& l2 = labels[i2];
    std::string task;
    switch ((hj >> 16) % 4) {
      case 0:
        task = "In " + app + ", open " + l1 + " and then use " + l2 + ".";
        break;
      case 1:
        task = "In " + app + ", use " + l1 + " and report what you find under " + l2 + ".";
        break;
      case 2:
        task = "From " + app + "'s home screen, adjust " + l1 + ", then check " + l2 + ".";
        break;
      default:
        task = "In " + app + ", visit " + l1 + ", change " + l2 + ", and review the result.";
        break;
    }
    json item;
    item["reasoning"] = "The '" + l1 + "' and '" + l2 + "' controls combine into one multi-step flow starting from the home screen.";
    item["task"] = task;
    tasks.push_back(item);
  }
  std::string body = tasks.dump();
  if ((h >> 2) & 1) return "Sure - here are the tasks: " + body;
  return body;
}

std::string MockChatBackend::score(const GenerationRequest& request) {
  std::string text = joined_user_text(request);
  std::string task = *require(find_line_value(text, "Task: "), "a Task line");
  uint64_t th = mix64(seed_, fnv1a64(task));
  json scores;
  scores["complexity"] = static_cast<int>(1 + th % 5);
  scores["clarity"] = static_cast<int>(4 + (th >> 8) % 2);
  scores["reasonableness"] = static_cast<int>(3 + (th >> 16) % 3);
  return scores.dump();
}

std::string MockChatBackend::decompose(const GenerationRequest& request) {
  std::string text = joined_user_text(request);
  std::string task = *require(find_line_value(text, "Task: "), "a Task line");
  std::string lowered = to_lower_ascii(task);

  json out = json::array();
  if (lowered.find("calendar event titled") != std::string::npos) {
    out = {"create calendar event", "set date", "set title", "set start time"};
    return out.dump();
  }

  // clause split on connective boundaries
  static const std::string_view seps[] = {" and ", " then ", ", ", "; "};
  std::vector<std::string> clauses{lowered};
  for (std::string_view sep : seps) {
    std::vector<std::string> next;
    for (const std::string& clause : clauses) {
      size_t pos = 0;
      while (true) {
        size_t hit = clause.find(sep, pos);
        if (hit == std::string::npos) {
          next.push_back(clause.substr(pos));
          break;
        }
        next.push_back(clause.substr(pos, hit - pos));
        pos = hit + sep.size();
      }
    }
    clauses = std::move(next);
  }
  for (std::string clause : clauses) {
    while (!clause.empty() && (clause.back() == '.' || clause.back() == '!' || clause.back() == '?')) clause.pop_back();
    clause = strip_leading_stopwords(trim(clause));
    if (clause.size() < 3) continue;
    out.push_back(clause);
  }
  return out.dump();
}

}  // namespace agentforge::providers
