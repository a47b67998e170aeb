#pragma once

// CART decision tree over concatenated posterior evidence, and the composed
// inference that combines it with the knowledge-base ranking.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "afford/attribute_model.hpp"
#include "afford/kb_graph.hpp"
#include "afford/taxonomy.hpp"

namespace afford {

struct TrainingRow {
  std::vector<double> y;
  AffordanceClass z = AffordanceClass::ToEat;
};

struct TreeConfig {
  std::optional<std::size_t> max_depth;  // nullopt: unlimited
  std::size_t min_leaf_size = 1;
};

using ClassHistogram = std::array<std::size_t, kAffordanceCount>;

class DecisionTree {
 public:
  struct Node {
    // Internal nodes have children; leaves carry the histogram.
    std::size_t feature = 0;
    double threshold = 0.0;
    std::optional<std::size_t> left;
    std::optional<std::size_t> right;
    ClassHistogram histogram{};

    bool is_leaf() const { return !left.has_value(); }
    friend bool operator==(const Node&, const Node&) = default;
  };

  DecisionTree() = default;
  DecisionTree(std::size_t dimension, std::vector<Node> nodes);

  std::size_t dimension() const { return dimension_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& root() const { return nodes_.front(); }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<Node> nodes_;  // nodes_[0] is the root
};

/// Majority class (lowest index on ties) and its share of the histogram.
std::pair<AffordanceClass, double> leaf_vote(const ClassHistogram& histogram);

DecisionTree train_tree(std::span<const TrainingRow> rows, const TreeConfig& config = {});

struct TreePrediction {
  AffordanceClass affordance = AffordanceClass::ToEat;
  double leaf_purity = 0.0;
};

/// Goes left when y[feature] <= threshold.
TreePrediction predict_affordance(const DecisionTree& tree, std::span<const double> y);

inline constexpr double kDefaultFallbackTau = 0.6;

struct InferenceResult {
  AffordancePath path;
  AffordanceClass tree_prediction = AffordanceClass::ToEat;
  AffordanceScores scores;
  AffordanceClass final_affordance = AffordanceClass::ToEat;
  double leaf_purity = 0.0;
};

/// Tree prediction when its leaf purity reaches tau, otherwise the argmax of R(x).
AffordanceClass resolve_final(const TreePrediction& tree, const AffordanceScores& scores, double tau);

InferenceResult infer(const ClassifierSet& classifiers, const KnowledgeBaseGraph& kb,
                      const DecisionTree& tree, const FeatureSet& features,
                      double tau = kDefaultFallbackTau);

nlohmann::json to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::json& doc);

}  // namespace afford
