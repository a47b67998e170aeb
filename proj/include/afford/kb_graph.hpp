#pragma once

// Layered knowledge-base graph: attribute layers connected by row-stochastic
// weight matrices, a final edge set into the affordance layer, and the
// entity-to-affordance ranking matrix used by R(x) = rankingᵀ y(x).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "afford/attribute_model.hpp"
#include "afford/taxonomy.hpp"

namespace afford {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct LayerSpec {
  std::string name;
  std::vector<std::string> entities;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct WeightMatrix {
  std::string from;
  std::string to;
  Matrix weights;

  friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;
};

inline constexpr const char* kAffordanceLayerName = "affordance";

struct KnowledgeBaseGraph {
  std::vector<LayerSpec> layers;        // attribute layers in order
  std::vector<std::string> affordances;  // final layer
  std::vector<WeightMatrix> edges;       // edges[k]: layers[k] -> layers[k+1]; last one -> affordances
  Matrix ranking;                        // rows: all entities concatenated, cols: affordances

  std::size_t entity_count() const;
  /// Offset of layer `k` inside the concatenated evidence vector.
  std::size_t layer_offset(std::size_t k) const;

  /// Checks matrix shapes against the layer layout; throws LayerMismatch.
  void validate_shapes() const;

  friend bool operator==(const KnowledgeBaseGraph&, const KnowledgeBaseGraph&) = default;
};

/// Per-layer posterior evidence, one vector per attribute layer.
using LayeredEvidence = std::vector<std::vector<double>>;

struct LabelledEvidence {
  LayeredEvidence evidence;
  std::size_t label = 0;  // index into affordances
};

struct LabelledContext {
  ObjectContext context;
  AffordanceClass label = AffordanceClass::ToEat;
};

/// Concatenated per-attribute posteriors in layer order (the y(x) vector).
struct ConcatenatedEvidence {
  std::vector<double> y;
};

struct AffordancePath {
  std::vector<std::size_t> entities;  // one index per attribute layer
  std::size_t affordance = 0;
  double log_score = 0.0;

  friend bool operator==(const AffordancePath&, const AffordancePath&) = default;
};

struct AffordanceScores {
  std::vector<double> raw;
  std::vector<double> normalized;
  std::size_t best = 0;
};

std::vector<LayerSpec> layer_specs(std::span<const AttributeKind> kinds);

KnowledgeBaseGraph build_kb(std::span<const LabelledEvidence> training,
                            std::vector<LayerSpec> layers, std::vector<std::string> affordances);

/// Layer names must be attribute names; each context's posterior for a layer
/// must follow that layer's entity order.
KnowledgeBaseGraph build_kb(std::span<const LabelledContext> contexts, std::vector<LayerSpec> layers);

KnowledgeBaseGraph build_kb(std::span<const LabelledContext> contexts,
                            std::span<const AttributeKind> layers);

/// Classifies each layer and lays the posterior out over the layer's entities.
/// Entities a classifier was not fitted on get probability 0; a classifier
/// entity outside the layer throws LayerMismatch.
ObjectContext layered_context(const ClassifierSet& classifiers, const FeatureSet& features,
                              std::span<const LayerSpec> layers);

/// Extracts the KB's layers from a context; throws LayerMismatch.
LayeredEvidence layered_evidence(const KnowledgeBaseGraph& kb, const ObjectContext& ctx);

ConcatenatedEvidence concatenate(const KnowledgeBaseGraph& kb, const LayeredEvidence& evidence);

/// Σ log evidence(entity) + Σ log ψ(edge) along the chain, summed in chain order.
double score_chain(const KnowledgeBaseGraph& kb, const LayeredEvidence& evidence,
                   std::span<const std::size_t> entities, std::size_t affordance);

AffordancePath rank_path(const KnowledgeBaseGraph& kb, const LayeredEvidence& evidence);
AffordancePath rank_path(const KnowledgeBaseGraph& kb, const ObjectContext& ctx);

inline constexpr std::size_t kDefaultPathCap = 1'000'000;

std::vector<AffordancePath> enumerate_paths(const KnowledgeBaseGraph& kb,
                                            const LayeredEvidence& evidence,
                                            std::size_t cap = kDefaultPathCap);

AffordanceScores affordance_scores(const KnowledgeBaseGraph& kb, const ConcatenatedEvidence& y);

nlohmann::json to_json(const KnowledgeBaseGraph& kb);
KnowledgeBaseGraph kb_from_json(const nlohmann::json& doc);

}  // namespace afford
