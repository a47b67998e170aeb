#include "afford/predictive_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "afford/error.hpp"

namespace afford {

namespace {

std::size_t total_of(const ClassHistogram& h) { return std::accumulate(h.begin(), h.end(), std::size_t{0}); }

// n * gini(h) = n - Σ c² / n; children are compared by the sum of these.
double weighted_impurity(const ClassHistogram& h) {
  const auto n = static_cast<double>(total_of(h));
  if (n == 0.0) return 0.0;
  double sq = 0.0;
  for (auto c : h) sq += static_cast<double>(c) * static_cast<double>(c);
  return n - sq / n;
}

bool is_pure(const ClassHistogram& h) {
  return std::count_if(h.begin(), h.end(), [](std::size_t c) { return c > 0; }) <= 1;
}

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const TrainingRow> rows, const TreeConfig& config, std::size_t dim)
      : rows_(rows), config_(config), dim_(dim) {}

  std::vector<DecisionTree::Node> build() {
    std::vector<std::size_t> all(rows_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    grow(all, 0);
    return std::move(nodes_);
  }

 private:
  std::size_t grow(const std::vector<std::size_t>& idx, std::size_t depth) {
    const std::size_t me = nodes_.size();
    nodes_.emplace_back();
    ClassHistogram hist{};
    for (auto i : idx) ++hist[index_of(rows_[i].z)];
    nodes_[me].histogram = hist;

    const bool depth_left = !config_.max_depth || depth < *config_.max_depth;
    if (is_pure(hist) || !depth_left || idx.size() < 2 * config_.min_leaf_size) return me;
    auto split = best_split(idx);
    if (!split) return me;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (rows_[i].y[split->feature] <= split->threshold ? left : right).push_back(i);
    nodes_[me].feature = split->feature;
    nodes_[me].threshold = split->threshold;
    const auto l = grow(left, depth + 1);
    const auto r = grow(right, depth + 1);
    nodes_[me].left = l;
    nodes_[me].right = r;
    return me;
  }

  std::optional<Split> best_split(const std::vector<std::size_t>& idx) const {
    std::optional<Split> best;
    const std::size_t n = idx.size();
    const std::size_t min_leaf = std::max<std::size_t>(config_.min_leaf_size, 1);
    std::vector<std::size_t> order(idx);
    for (std::size_t f = 0; f < dim_; ++f) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = rows_[a].y[f], vb = rows_[b].y[f];
        return va < vb || (va == vb && a < b);
      });
      ClassHistogram left{}, right{};
      for (auto i : order) ++right[index_of(rows_[i].z)];
      for (std::size_t pos = 1; pos < n; ++pos) {
        const auto moved = index_of(rows_[order[pos - 1]].z);
        ++left[moved];
        --right[moved];
        const double lo = rows_[order[pos - 1]].y[f];
        const double hi = rows_[order[pos]].y[f];
        if (!(lo < hi)) continue;
        if (pos < min_leaf || n - pos < min_leaf) continue;
        const double impurity = weighted_impurity(left) + weighted_impurity(right);
        if (!best || impurity < best->impurity) {
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          best = Split{f, threshold, impurity};
        }
      }
    }
    return best;
  }

  std::span<const TrainingRow> rows_;
  const TreeConfig& config_;
  std::size_t dim_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

DecisionTree::DecisionTree(std::size_t dimension, std::vector<Node> nodes)
    : dimension_(dimension), nodes_(std::move(nodes)) {
  if (nodes_.empty()) fail(ErrorCode::InvalidArgument, "tree has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (node.left.has_value() != node.right.has_value())
      fail(ErrorCode::InvalidArgument, "internal node needs two children");
    if (node.is_leaf()) {
      if (total_of(node.histogram) == 0) fail(ErrorCode::InvalidArgument, "leaf with empty histogram");
    } else {
      if (node.feature >= dimension_) fail(ErrorCode::InvalidArgument, "split feature out of range");
      if (*node.left <= i || *node.right <= i || *node.left >= nodes_.size() ||
          *node.right >= nodes_.size())
        fail(ErrorCode::InvalidArgument, "bad child index");
    }
  }
}

std::size_t DecisionTree::depth() const {
  std::function<std::size_t(std::size_t)> walk = [&](std::size_t i) -> std::size_t {
    const auto& node = nodes_[i];
    if (node.is_leaf()) return 0;
    return 1 + std::max(walk(*node.left), walk(*node.right));
  };
  return walk(0);
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::pair<AffordanceClass, double> leaf_vote(const ClassHistogram& histogram) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < histogram.size(); ++c)
    if (histogram[c] > histogram[best]) best = c;
  const auto total = total_of(histogram);
  const double purity =
      total == 0 ? 0.0 : static_cast<double>(histogram[best]) / static_cast<double>(total);
  return {affordance_at(best), purity};
}

DecisionTree train_tree(std::span<const TrainingRow> rows, const TreeConfig& config) {
  if (rows.empty()) fail(ErrorCode::EmptyTrainingSet, "no training rows");
  const std::size_t dim = rows.front().y.size();
  for (const auto& row : rows) {
    if (row.y.size() != dim)
      fail(ErrorCode::InconsistentDimensions, "training rows differ in length");
    for (double v : row.y)
      if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "training row has a non-finite entry");
  }
  TreeBuilder builder(rows, config, dim);
  return DecisionTree(dim, builder.build());
}

TreePrediction predict_affordance(const DecisionTree& tree, std::span<const double> y) {
  if (y.size() != tree.dimension())
    fail(ErrorCode::DimensionMismatch, "evidence length " + std::to_string(y.size()) +
                                           " does not match tree dimension " +
                                           std::to_string(tree.dimension()));
  const auto& nodes = tree.nodes();
  std::size_t at = 0;
  while (!nodes[at].is_leaf())
    at = y[nodes[at].feature] <= nodes[at].threshold ? *nodes[at].left : *nodes[at].right;
  const auto [cls, purity] = leaf_vote(nodes[at].histogram);
  return {cls, purity};
}

AffordanceClass resolve_final(const TreePrediction& tree, const AffordanceScores& scores, double tau) {
  return tree.leaf_purity >= tau ? tree.affordance : affordance_at(scores.best);
}

InferenceResult infer(const ClassifierSet& classifiers, const KnowledgeBaseGraph& kb,
                      const DecisionTree& tree, const FeatureSet& features, double tau) {
  if (kb.affordances != affordance_names())
    fail(ErrorCode::LayerMismatch, "graph affordance layer is not the standard class set");
  const auto ctx = layered_context(classifiers, features, kb.layers);
  const auto evidence = layered_evidence(kb, ctx);
  const auto y = concatenate(kb, evidence);

  InferenceResult result;
  result.path = rank_path(kb, evidence);
  result.scores = affordance_scores(kb, y);
  const auto tree_pred = predict_affordance(tree, y.y);
  result.tree_prediction = tree_pred.affordance;
  result.leaf_purity = tree_pred.leaf_purity;
  result.final_affordance = resolve_final(tree_pred, result.scores, tau);
  return result;
}

namespace {

nlohmann::json node_json(const DecisionTree& tree, std::size_t i) {
  const auto& node = tree.nodes()[i];
  nlohmann::json out;
  out["histogram"] = node.histogram;
  if (node.is_leaf()) {
    out["class"] = std::string(to_string(leaf_vote(node.histogram).first));
  } else {
    out["feature"] = node.feature;
    out["threshold"] = node.threshold;
    out["left"] = node_json(tree, *node.left);
    out["right"] = node_json(tree, *node.right);
  }
  return out;
}

std::size_t node_from_json(const nlohmann::json& doc, std::vector<DecisionTree::Node>& nodes) {
  const std::size_t me = nodes.size();
  nodes.emplace_back();
  const auto hist = doc.at("histogram").get<std::vector<std::size_t>>();
  if (hist.size() != kAffordanceCount) fail(ErrorCode::ParseError, "tree json: histogram size");
  std::copy(hist.begin(), hist.end(), nodes[me].histogram.begin());
  if (doc.contains("left")) {
    nodes[me].feature = doc.at("feature").get<std::size_t>();
    nodes[me].threshold = doc.at("threshold").get<double>();
    const auto l = node_from_json(doc.at("left"), nodes);
    const auto r = node_from_json(doc.at("right"), nodes);
    nodes[me].left = l;
    nodes[me].right = r;
  }
  return me;
}

}  // namespace

nlohmann::json to_json(const DecisionTree& tree) {
  return {{"dimension", tree.dimension()}, {"root", node_json(tree, 0)}};
}

DecisionTree tree_from_json(const nlohmann::json& doc) {
  try {
    std::vector<DecisionTree::Node> nodes;
    node_from_json(doc.at("root"), nodes);
    return DecisionTree(doc.at("dimension").get<std::size_t>(), std::move(nodes));
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::ParseError, std::string("tree json: ") + ex.what());
  }
}

}  // namespace afford
