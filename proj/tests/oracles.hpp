#pragma once

// Reference implementations shared by the unit tests and the acceptance run.

#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <span>

#include "afford/attribute_model.hpp"
#include "afford/kb_graph.hpp"
#include "afford/predictive_tree.hpp"
#include "support.hpp"

namespace test {

// Direct density evaluation, no log space.
inline std::vector<double> density_ratio_oracle(const afford::GaussianAttributeClassifier& clf,
                                                const afford::FeatureVector& x) {
  std::vector<double> w;
  for (const auto& e : clf.entities()) {
    double p = e.prior;
    for (std::size_t k = 0; k < x.values.size(); ++k) {
      const double d = x.values[k] - e.mean[k];
      p *= std::exp(-d * d / (2.0 * e.variance[k])) / std::sqrt(2.0 * M_PI * e.variance[k]);
    }
    w.push_back(p);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return w;
}

inline afford::GaussianAttributeClassifier random_classifier(std::mt19937_64& rng, std::size_t dim) {
  using namespace afford;
  using Entity = GaussianAttributeClassifier::Entity;
  const auto kind = AttributeKind::Texture;
  const auto names = entities_of(kind);
  const std::size_t n = uniform_index(rng, 2, names.size());
  std::vector<double> priors(n);
  for (auto& p : priors) p = uniform(rng, 0.1, 1.0);
  const double total = std::accumulate(priors.begin(), priors.end(), 0.0);
  std::vector<Entity> ents;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Entity e{std::string(names[i]), i + 1 == n ? 1.0 - acc : priors[i] / total, {}, {}};
    acc += e.prior;
    for (std::size_t k = 0; k < dim; ++k) {
      e.mean.push_back(uniform(rng, -2.0, 2.0));
      e.variance.push_back(uniform(rng, 0.5, 2.0));
    }
    ents.push_back(std::move(e));
  }
  return GaussianAttributeClassifier(kind, dim, std::move(ents));
}

inline afford::FeatureVector random_x(std::mt19937_64& rng, std::size_t dim) {
  afford::FeatureVector x;
  for (std::size_t k = 0; k < dim; ++k) x.values.push_back(uniform(rng, -3.0, 3.0));
  return x;
}

// Exhaustive recursion, independent of enumerate_paths.
struct BruteBest {
  std::vector<std::size_t> entities;
  std::size_t affordance = 0;
  double score = -INFINITY;
};

inline BruteBest brute_force(const afford::KnowledgeBaseGraph& kb, const afford::LayeredEvidence& ev) {
  BruteBest best;
  std::vector<std::size_t> chain(kb.layers.size());
  std::function<void(std::size_t, double)> walk = [&](std::size_t k, double acc) {
    if (k == kb.layers.size()) {
      const auto& w = kb.edges.back().weights;
      for (std::size_t z = 0; z < kb.affordances.size(); ++z) {
        const double s = acc + std::log(w(chain.back(), z));
        if (s > best.score) best = {chain, z, s};
      }
      return;
    }
    for (std::size_t e = 0; e < kb.layers[k].entities.size(); ++e) {
      chain[k] = e;
      double s = acc + std::log(ev[k][e]);
      if (k > 0) s += std::log(kb.edges[k - 1].weights(chain[k - 1], e));
      walk(k + 1, s);
    }
  };
  walk(0, 0.0);
  return best;
}

// Recursive descent over the JSON form, independent of predict_affordance.
inline afford::AffordanceClass descend(const nlohmann::json& node, std::span<const double> y) {
  if (!node.contains("left")) return afford::parse_affordance(node.at("class").get<std::string>());
  const auto f = node.at("feature").get<std::size_t>();
  return y[f] <= node.at("threshold").get<double>() ? descend(node.at("left"), y) : descend(node.at("right"), y);
}

// Random rows with repeated values; identical y always share a label.
inline std::vector<afford::TrainingRow> consistent_rows(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::map<std::vector<double>, afford::AffordanceClass> seen;
  std::vector<afford::TrainingRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    afford::TrainingRow r;
    for (std::size_t k = 0; k < dim; ++k)
      r.y.push_back(k % 3 == 0 ? static_cast<double>(uniform_index(rng, 0, 3)) / 3.0 : uniform(rng, 0.0, 1.0));
    auto [it, fresh] = seen.emplace(r.y, afford::affordance_at(uniform_index(rng, 0, 6)));
    r.z = it->second;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace test
