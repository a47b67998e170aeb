#pragma once

// Evaluation: confusion matrices, the environment ablation, posterior
// distribution statistics, zero-shot evaluation and the grasp point metric.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "afford/datasets.hpp"
#include "afford/pipeline.hpp"

namespace afford {

struct ConfusionMatrix {
  // rows: true class, cols: predicted class
  std::array<std::array<std::size_t, kAffordanceCount>, kAffordanceCount> counts{};

  std::size_t total() const;
  std::size_t row_total(AffordanceClass truth) const;
  /// Recall of a class; nullopt when it never occurs in the truth.
  std::optional<double> recall(AffordanceClass truth) const;
  /// Mean recall over classes present in the truth.
  double diagonal_accuracy() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

using LabelPair = std::pair<AffordanceClass, AffordanceClass>;  // (true, predicted)

ConfusionMatrix confusion(std::span<const LabelPair> pairs);

struct ObjectOutcome {
  std::string id;
  std::string category;
  AffordanceClass truth = AffordanceClass::ToEat;
  InferenceResult result;
};

/// Runs inference over every record (OpenMP-parallel, order preserved).
std::vector<ObjectOutcome> evaluate_records(const Model& model, std::span<const ObjectRecord> records);

ConfusionMatrix confusion_of(std::span<const ObjectOutcome> outcomes);

struct AblationReport {
  ConfusionMatrix with_environment;
  ConfusionMatrix without_environment;
  double accuracy_with = 0.0;
  double accuracy_without = 0.0;
  double delta = 0.0;  // accuracy_with - accuracy_without
};

AblationReport ablate_environment(const Manifest& train, const Manifest& test, const RunConfig& config);

struct FiveNumberSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  friend bool operator==(const FiveNumberSummary&, const FiveNumberSummary&) = default;
};

/// Linear interpolation between order statistics at position p * (n - 1).
double quantile(std::span<const double> sorted, double p);
FiveNumberSummary summarize(std::vector<double> values);

using PosteriorStats = std::map<AffordanceClass, FiveNumberSummary>;

/// Normalised R(x) score of the final class, grouped by final class.
PosteriorStats posterior_stats(std::span<const InferenceResult> results);

struct ZeroShotReport {
  std::vector<std::string> holdout_categories;
  std::size_t evaluated = 0;
  double accuracy = 0.0;  // fraction of holdout objects with the correct final affordance
  ConfusionMatrix confusion;
};

/// Evaluates only records of the held-out categories. The model must have
/// been trained with those categories excluded (recorded in its config).
ZeroShotReport zero_shot_eval(const Model& model, const Manifest& manifest,
                              std::span<const std::string> holdout_categories);

enum class Effect { Positive, Negative };

struct PointMetricInput {
  std::string id;
  std::optional<Point3> center;  // nullopt when no feasible region was found
  std::vector<GraspRectangle> rectangles;
  double bbox_diagonal = 0.0;
};

struct PointMatch {
  std::string id;
  std::optional<double> distance;  // to the nearest rectangle centre
  double threshold = 0.0;          // absolute, metres
  bool matched = false;
  Effect effect = Effect::Negative;
};

struct PointMetricReport {
  double threshold_frac = 0.0;
  std::vector<PointMatch> objects;  // labelled objects only
  std::size_t matches = 0;
  double percentage = 0.0;
};

PointMetricReport point_metric(std::span<const PointMetricInput> inputs, double threshold_frac);

/// Grasp ellipses for each record's final affordance (OpenMP-parallel).
std::vector<PointMetricInput> grasp_inputs(const Model& model, const Manifest& manifest,
                                           std::span<const ObjectRecord> records,
                                           std::span<const ObjectOutcome> outcomes);

/// Rounds to 6 decimals for serialisation.
double round6(double v);

nlohmann::json to_json(const ConfusionMatrix& cm);
nlohmann::json to_json(const AblationReport& report);
nlohmann::json to_json(const PosteriorStats& stats);
nlohmann::json to_json(const ZeroShotReport& report);
nlohmann::json to_json(const PointMetricReport& report);
std::string to_csv(const ConfusionMatrix& cm);

}  // namespace afford
