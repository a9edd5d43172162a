#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "densereg/core.hpp"

namespace densereg {

struct LandmarkPair {
  Point2 fixed;
  Point2 moving;
};
using LandmarkPairs = std::vector<LandmarkPair>;

/// CSV rows "fx,fy,mx,my" in original image coordinates; '#' comments allowed.
LandmarkPairs parse_landmarks(const std::string& text);
LandmarkPairs read_landmarks(const std::string& path);
void write_landmarks(const LandmarkPairs& lm, const std::string& path);

/// Mean Euclidean distance between chain(fixed_i) and moving_i.
double mean_landmark_error(const TransformChain& chain, const LandmarkPairs& lm);

/// Per-pair outcome: the MLE, or nullopt when registration failed.
using PairOutcome = std::optional<double>;

/// Fraction of pairs registered with MLE < threshold.
double registration_accuracy(std::span<const PairOutcome> outcomes, double threshold);
/// (1/T) * sum over integer thresholds 1..T of registration_accuracy.
double auc(std::span<const PairOutcome> outcomes, int auc_threshold);
/// Fraction of pairs registered with MLE <= threshold.
double success_rate(std::span<const PairOutcome> outcomes, double threshold);

struct ManifestEntry {
  std::string pair_id;
  std::string fixed_path;
  std::string moving_path;
  std::string landmarks_path;
  std::string category;
};

/// Header "pair_id,fixed_path,moving_path,landmarks_path,category". Relative
/// paths are resolved against the manifest's directory by read_manifest.
std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);

struct PairEvaluation {
  std::string pair_id;
  std::string category;
  PairOutcome mle;
  std::optional<double> seconds;
  std::string note;
};

struct MetricSummary {
  std::size_t pairs = 0;
  std::size_t registered = 0;
  std::size_t successes = 0;
  double auc = 0.0;
  double success_rate = 0.0;
  std::optional<double> mean_mle;             // over successful pairs
  std::optional<double> mean_mle_registered;  // over every pair with a transform
};

struct DatasetReport {
  EvaluationThresholds thresholds;
  std::vector<PairEvaluation> pairs;
  MetricSummary overall;
  std::map<std::string, MetricSummary> categories;
  std::optional<double> mean_seconds;
  std::optional<double> max_seconds;
};

MetricSummary summarize(std::span<const PairEvaluation> pairs, const EvaluationThresholds& thresholds);
DatasetReport evaluate_dataset(std::vector<PairEvaluation> pairs, const EvaluationThresholds& thresholds);

/// Reads <results_dir>/<pair_id>.transform.txt (and .diagnostics.json for
/// timing) for each manifest row. A missing transform counts as a failure.
DatasetReport evaluate_results_dir(const std::vector<ManifestEntry>& manifest, const std::string& results_dir,
                                   const EvaluationThresholds& thresholds);

nlohmann::json to_json(const DatasetReport& report);
std::string format_table(const DatasetReport& report);

}  // namespace densereg
