#include "agentforge/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agentforge/prompts.hpp"

namespace agentforge::analyzer {

using nlohmann::json;

namespace {

std::vector<Embedding> embed_corpus(const std::vector<CorpusItem>& items, providers::Embedder& embedder) {
  std::vector<std::string> texts;
  texts.reserve(items.size());
  for (const CorpusItem& item : items) texts.push_back(item.text);
  return embedder.embed_texts(texts);
}

int histogram_bin(double score) {
  int bin = static_cast<int>(std::floor(score / 0.05));
  return std::clamp(bin, 0, 19);
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

json pair_to_json(const PairScore& pair) {
  return json{{"synthetic_id", pair.synthetic_id}, {"test_id", pair.test_id}, {"score", pair.score}};
}

}  // namespace

SimilarityReport overlap_report(const std::vector<CorpusItem>& synthetic, const std::vector<CorpusItem>& test,
                                providers::Embedder& embedder, const std::vector<double>& thresholds) {
  if (synthetic.empty() || test.empty()) throw ValidationError("overlap_report: both corpora must be non-empty");
  std::vector<Embedding> syn_vecs = embed_corpus(synthetic, embedder);
  std::vector<Embedding> test_vecs = embed_corpus(test, embedder);

  SimilarityReport report;
  report.matrix.resize(synthetic.size());
  report.pair_scores.reserve(synthetic.size());
  for (size_t i = 0; i < synthetic.size(); ++i) {
    report.matrix[i].resize(test.size());
    size_t best = 0;
    for (size_t j = 0; j < test.size(); ++j) {
      double score = cosine(syn_vecs[i], test_vecs[j]);
      report.matrix[i][j] = score;
      if (score > report.matrix[i][best]) best = j;
    }
    PairScore pair{synthetic[i].id, test[best].id, report.matrix[i][best]};
    report.histogram[static_cast<size_t>(histogram_bin(pair.score))] += 1;
    report.pair_scores.push_back(std::move(pair));
  }

  for (double threshold : thresholds) {
    size_t above = 0;
    for (const PairScore& pair : report.pair_scores) {
      if (pair.score > threshold) ++above;
    }
    report.fraction_above[threshold] = static_cast<double>(above) / static_cast<double>(synthetic.size());
  }

  report.top_pairs = report.pair_scores;
  std::sort(report.top_pairs.begin(), report.top_pairs.end(), [](const PairScore& a, const PairScore& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.synthetic_id != b.synthetic_id) return a.synthetic_id < b.synthetic_id;
    return a.test_id < b.test_id;
  });
  if (report.top_pairs.size() > 20) report.top_pairs.resize(20);
  return report;
}

std::vector<RemovalSubsets> removal_subsets(const std::vector<CorpusItem>& synthetic,
                                            const SimilarityReport& report,
                                            const std::vector<double>& ratios, uint64_t seed) {
  if (report.pair_scores.size() != synthetic.size()) {
    throw ValidationError("removal_subsets: report does not match the synthetic corpus");
  }
  for (double r : ratios) {
    if (!(r > 0.0 && r < 1.0)) throw ValidationError("removal_subsets: ratios must lie in (0, 1)");
  }

  const size_t n = synthetic.size();
  // similarity ranking: score desc, id asc
  std::vector<size_t> ranked(n);
  for (size_t i = 0; i < n; ++i) ranked[i] = i;
  std::sort(ranked.begin(), ranked.end(), [&](size_t a, size_t b) {
    if (report.pair_scores[a].score != report.pair_scores[b].score) {
      return report.pair_scores[a].score > report.pair_scores[b].score;
    }
    return synthetic[a].id < synthetic[b].id;
  });

  std::vector<RemovalSubsets> result;
  for (double ratio : ratios) {
    RemovalSubsets subsets;
    subsets.ratio = ratio;
    size_t drop = static_cast<size_t>(std::ceil(ratio * static_cast<double>(n)));

    std::vector<bool> dropped_sim(n, false);
    for (size_t k = 0; k < drop && k < n; ++k) {
      dropped_sim[ranked[k]] = true;
      subsets.removed_by_similarity.push_back(synthetic[ranked[k]].id);
    }

    Rng rng(mix64(seed, static_cast<uint64_t>(std::llround(ratio * 1e6))));
    std::vector<size_t> indices(n);
    for (size_t i = 0; i < n; ++i) indices[i] = i;
    std::vector<bool> dropped_rng(n, false);
    for (size_t k = 0; k < drop && k < n; ++k) {
      size_t pick = k + rng.below(n - k);
      std::swap(indices[k], indices[pick]);
      dropped_rng[indices[k]] = true;
    }
    for (size_t i = 0; i < n; ++i) {
      if (dropped_rng[i]) subsets.removed_at_random.push_back(synthetic[i].id);
    }

    for (size_t i = 0; i < n; ++i) {
      if (!dropped_sim[i]) subsets.kept_after_similarity.push_back(synthetic[i]);
      if (!dropped_rng[i]) subsets.kept_after_random.push_back(synthetic[i]);
    }
    result.push_back(std::move(subsets));
  }
  return result;
}

Decomposition decompose_task(const std::string& task_text, providers::ChatBackend& decomposer,
                             providers::Embedder& embedder) {
  if (trim(task_text).empty()) throw ValidationError("decompose_task: empty task text");
  Decomposition out;
  std::string raw = decomposer.chat_generate(prompts::make_decompose_request(task_text));
  std::vector<std::string> phrases;
  try {
    json j = json::parse(providers::extract_json_span(raw, '[', ']'));
    for (const json& entry : j) {
      if (!entry.is_string()) throw ParseError("decomposition entries must be strings");
      std::string phrase = trim(entry.get<std::string>());
      if (!phrase.empty()) phrases.push_back(std::move(phrase));
    }
  } catch (const std::exception&) {
    out.parse_failed = true;
    return out;
  }
  if (phrases.empty()) {
    out.parse_failed = true;
    return out;
  }
  std::vector<Embedding> vecs = embedder.embed_texts(phrases);
  for (size_t i = 0; i < phrases.size(); ++i) {
    out.items.push_back(AtomicFunctionality{std::move(phrases[i]), std::move(vecs[i])});
  }
  return out;
}

CoverageReport coverage(const std::vector<RequiredSet>& required, const std::vector<AtomicFunctionality>& pool,
                        double match_threshold) {
  if (!(match_threshold > 0.0 && match_threshold <= 1.0)) {
    throw ValidationError("coverage: match_threshold must lie in (0, 1]");
  }
  CoverageReport report;
  double total = 0.0;
  for (const RequiredSet& task : required) {
    if (task.items.empty()) {
      report.skipped_tasks.push_back(task.task_id);
      continue;
    }
    TaskCoverage tc;
    tc.task_id = task.task_id;
    tc.required = static_cast<int>(task.items.size());
    for (const AtomicFunctionality& need : task.items) {
      bool hit = false;
      for (const AtomicFunctionality& have : pool) {
        if (cosine(need.embedding, have.embedding) >= match_threshold) {
          hit = true;
          break;
        }
      }
      if (hit) ++tc.covered;
    }
    tc.fraction = static_cast<double>(tc.covered) / static_cast<double>(tc.required);
    total += tc.fraction;
    int bin = std::min(3, static_cast<int>(std::floor(tc.fraction * 4.0)));
    report.grid[tc.required][static_cast<size_t>(bin)] += 1;
    report.per_task.push_back(std::move(tc));
  }
  if (!report.per_task.empty()) total /= static_cast<double>(report.per_task.size());
  report.aggregate = report.per_task.empty() ? 0.0 : total;
  return report;
}

std::vector<CurvePoint> coverage_curve(const std::vector<std::string>& instructions,
                                       const std::vector<size_t>& sizes, const std::vector<RequiredSet>& required,
                                       providers::ChatBackend& decomposer, providers::Embedder& embedder,
                                       double match_threshold, std::vector<std::string>* warnings) {
  for (size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0 || sizes[i] > instructions.size()) {
      throw ValidationError("coverage_curve: sizes must lie in [1, corpus size]");
    }
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw ValidationError("coverage_curve: sizes must strictly increase");
  }

  size_t deepest = sizes.empty() ? 0 : sizes.back();
  std::vector<std::vector<AtomicFunctionality>> decomposed(deepest);
  for (size_t i = 0; i < deepest; ++i) {
    Decomposition d = decompose_task(instructions[i], decomposer, embedder);
    if (d.parse_failed && warnings) {
      warnings->push_back("decomposition failed for instruction " + std::to_string(i + 1) + "; skipped");
    }
    decomposed[i] = std::move(d.items);
  }

  std::vector<CurvePoint> curve;
  std::vector<AtomicFunctionality> pool;
  size_t consumed = 0;
  for (size_t size : sizes) {
    for (; consumed < size; ++consumed) {
      for (AtomicFunctionality& item : decomposed[consumed]) pool.push_back(std::move(item));
    }
    CoverageReport report = coverage(required, pool, match_threshold);
    curve.push_back(CurvePoint{size, report.aggregate});
  }
  return curve;
}

std::vector<CorpusItem> load_corpus_file(const std::filesystem::path& path) {
  std::vector<CorpusItem> items;
  std::vector<std::string> lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    CorpusItem item;
    if (!lines[i].empty() && lines[i].front() == '{') {
      try {
        json j = json::parse(lines[i]);
        item.id = j.at("id").get<std::string>();
        item.text = j.at("text").get<std::string>();
      } catch (const json::exception& e) {
        throw ParseError("corpus line " + std::to_string(i + 1) + ": " + e.what());
      }
    } else {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "test-%04zu", i + 1);
      item.id = buf;
      item.text = lines[i];
    }
    if (trim(item.text).empty()) throw ParseError("corpus line " + std::to_string(i + 1) + " has empty text");
    items.push_back(std::move(item));
  }
  if (items.empty()) throw ParseError("corpus file has no instructions: " + path.string());
  return items;
}

void save_similarity_report(const SimilarityReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  json j;
  j["version"] = 1;
  j["pair_scores"] = json::array();
  for (const PairScore& pair : report.pair_scores) j["pair_scores"].push_back(pair_to_json(pair));
  j["histogram"] = report.histogram;
  j["fraction_above"] = json::object();
  for (const auto& [threshold, fraction] : report.fraction_above) {
    char key[16];
    std::snprintf(key, sizeof(key), "%.2f", threshold);
    j["fraction_above"][key] = fraction;
  }
  j["top_pairs"] = json::array();
  for (const PairScore& pair : report.top_pairs) j["top_pairs"].push_back(pair_to_json(pair));
  write_text_file_atomic(dir / "overlap.json", j.dump(2) + "\n");

  std::ostringstream pairs;
  pairs << "synthetic_id,test_id,score\n";
  for (const PairScore& pair : report.pair_scores) {
    pairs << csv_quote(pair.synthetic_id) << ',' << csv_quote(pair.test_id) << ',' << format_double(pair.score)
          << '\n';
  }
  write_text_file_atomic(dir / "pairs.csv", pairs.str());

  std::ostringstream hist;
  hist << "bin_low,bin_high,count\n";
  for (size_t bin = 0; bin < report.histogram.size(); ++bin) {
    hist << format_double(0.05 * static_cast<double>(bin)) << ','
         << format_double(0.05 * static_cast<double>(bin + 1)) << ',' << report.histogram[bin] << '\n';
  }
  write_text_file_atomic(dir / "histogram.csv", hist.str());
}

void save_coverage_report(const CoverageReport& report, const std::vector<CurvePoint>& curve,
                          const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  json j;
  j["version"] = 1;
  j["aggregate"] = report.aggregate;
  j["per_task"] = json::array();
  for (const TaskCoverage& tc : report.per_task) {
    j["per_task"].push_back(json{{"task_id", tc.task_id},
                                 {"required", tc.required},
                                 {"covered", tc.covered},
                                 {"fraction", tc.fraction}});
  }
  j["skipped_tasks"] = report.skipped_tasks;
  j["curve"] = json::array();
  for (const CurvePoint& point : curve) {
    j["curve"].push_back(json{{"size", point.size}, {"aggregate", point.aggregate}});
  }
  write_text_file_atomic(dir / "coverage.json", j.dump(2) + "\n");

  std::ostringstream grid;
  grid << "complexity,bin_low,bin_high,count\n";
  for (const auto& [complexity, bins] : report.grid) {
    for (size_t bin = 0; bin < bins.size(); ++bin) {
      grid << complexity << ',' << format_double(0.25 * static_cast<double>(bin)) << ','
           << format_double(0.25 * static_cast<double>(bin + 1)) << ',' << bins[bin] << '\n';
    }
  }
  write_text_file_atomic(dir / "coverage_grid.csv", grid.str());

  if (!curve.empty()) {
    std::ostringstream curve_csv;
    curve_csv << "size,aggregate\n";
    for (const CurvePoint& point : curve) {
      curve_csv << point.size << ',' << format_double(point.aggregate) << '\n';
    }
    write_text_file_atomic(dir / "coverage_curve.csv", curve_csv.str());
  }
}

}  // namespace agentforge::analyzer
