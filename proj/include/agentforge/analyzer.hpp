#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "agentforge/common.hpp"
#include "agentforge/embedding.hpp"
#include "agentforge/providers.hpp"

namespace agentforge::analyzer {

struct CorpusItem {
  std::string id;
  std::string text;
};

struct PairScore {
  std::string synthetic_id;
  std::string test_id;
  double score = 0.0;
};

struct SimilarityReport {
  std::vector<std::vector<double>> matrix;   // [synthetic][test] cosine
  std::vector<PairScore> pair_scores;        // per synthetic: its best test match
  std::array<int, 20> histogram{};           // per-synthetic max, bins of width 0.05 over [0,1]
  std::map<double, double> fraction_above;   // threshold -> fraction with max strictly above
  std::vector<PairScore> top_pairs;          // best 20 of pair_scores, descending
};

struct RemovalSubsets {
  double ratio = 0.0;
  std::vector<std::string> removed_by_similarity;  // ids dropped as most test-similar
  std::vector<std::string> removed_at_random;      // ids dropped by the seeded sample
  std::vector<CorpusItem> kept_after_similarity;   // original order
  std::vector<CorpusItem> kept_after_random;       // original order
};

struct AtomicFunctionality {
  std::string text;
  Embedding embedding;
};

struct Decomposition {
  std::vector<AtomicFunctionality> items;
  bool parse_failed = false;
};

struct RequiredSet {
  std::string task_id;
  std::vector<AtomicFunctionality> items;
};

struct TaskCoverage {
  std::string task_id;
  int required = 0;
  int covered = 0;
  double fraction = 0.0;
};

struct CoverageReport {
  std::vector<TaskCoverage> per_task;           // tasks with non-empty required sets, input order
  std::vector<std::string> skipped_tasks;       // empty required set
  double aggregate = 0.0;                       // mean per-task fraction (0 when no tasks)
  // rows keyed by task complexity (= |required|); columns are coverage bins
  // [0,.25) [.25,.5) [.5,.75) [.75,1]
  std::map<int, std::array<int, 4>> grid;
};

struct CurvePoint {
  size_t size = 0;
  double aggregate = 0.0;
};

// embeds both corpora, computes the full cosine matrix, per-synthetic max
// scores, their histogram, and strict-exceedance fractions per threshold
SimilarityReport overlap_report(const std::vector<CorpusItem>& synthetic, const std::vector<CorpusItem>& test,
                                providers::Embedder& embedder, const std::vector<double>& thresholds = {0.7});

// per ratio r: drop the ceil(r*n) most test-similar items (score desc, id asc)
// and, independently, a seeded uniform sample of the same size
std::vector<RemovalSubsets> removal_subsets(const std::vector<CorpusItem>& synthetic,
                                            const SimilarityReport& report,
                                            const std::vector<double>& ratios, uint64_t seed);

// one decomposer call; unparseable or empty output gives an empty, flagged result
Decomposition decompose_task(const std::string& task_text, providers::ChatBackend& decomposer,
                             providers::Embedder& embedder);

// a required functionality is covered iff some pool entry reaches the match
// threshold; per-task fraction = covered/required, aggregate = mean over tasks
CoverageReport coverage(const std::vector<RequiredSet>& required, const std::vector<AtomicFunctionality>& pool,
                        double match_threshold = 0.8);

// coverage of growing instruction prefixes; each instruction is decomposed
// once, so the pool is nested and the curve is non-decreasing
std::vector<CurvePoint> coverage_curve(const std::vector<std::string>& instructions,
                                       const std::vector<size_t>& sizes, const std::vector<RequiredSet>& required,
                                       providers::ChatBackend& decomposer, providers::Embedder& embedder,
                                       double match_threshold = 0.8, std::vector<std::string>* warnings = nullptr);

// JSONL records {"id","text"} or plain text lines (ids test-0001, test-0002, ...)
std::vector<CorpusItem> load_corpus_file(const std::filesystem::path& path);

// overlap.json + pairs.csv + histogram.csv
void save_similarity_report(const SimilarityReport& report, const std::filesystem::path& dir);
// coverage.json + coverage_grid.csv (+ coverage_curve.csv when points given)
void save_coverage_report(const CoverageReport& report, const std::vector<CurvePoint>& curve,
                          const std::filesystem::path& dir);

}  // namespace agentforge::analyzer
