#pragma once

// End-to-end model: attribute classifiers + knowledge base + decision tree,
// its run configuration, and the model directory layout.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "afford/attribute_model.hpp"
#include "afford/datasets.hpp"
#include "afford/grasp_region.hpp"
#include "afford/kb_graph.hpp"
#include "afford/predictive_tree.hpp"

namespace afford {

// Tree depth used by the pipeline; train_tree alone is unlimited.
inline constexpr std::size_t kDefaultPipelineDepth = 1;

struct RunConfig {
  std::uint64_t seed = 7;
  std::size_t bins = kDefaultBins;
  double theta = kDefaultTheta;
  double tau = kDefaultFallbackTau;
  double epsilon = kDefaultVarianceFloor;
  double train_fraction = 0.7;
  double threshold_frac = 0.1;
  std::array<double, 2> semi_axes = kDefaultSemiAxes;
  bool environment = true;
  TreeConfig tree{.max_depth = kDefaultPipelineDepth};
  std::vector<std::string> holdout_categories;  // excluded from training

  /// Throws InvalidArgument when a value is out of range.
  void validate() const;
  std::vector<AttributeKind> layers() const;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& doc);

struct Model {
  RunConfig config;
  ClassifierSet classifiers;
  KnowledgeBaseGraph kb;
  DecisionTree tree;
};

/// Fits classifiers on ground-truth labels, builds the KB from the resulting
/// training contexts and trains the tree on their concatenated evidence.
Model train_model(std::span<const ObjectRecord> training, const RunConfig& config);

InferenceResult infer_record(const Model& model, const ObjectRecord& record);

struct GraspResult {
  GraspRegion region;
  GraspEllipse ellipse;
  double bbox_diagonal = 0.0;
};

GraspResult compute_grasp(const Model& model, const Manifest& manifest, const ObjectRecord& record,
                          AffordanceClass affordance);

void save_model(const Model& model, const std::filesystem::path& dir);
Model load_model(const std::filesystem::path& dir);

/// Serialises with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace afford
