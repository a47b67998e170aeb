#pragma once

#include <random>
#include <string>

#include "afford/kb_graph.hpp"
#include "support.hpp"

namespace test {

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, double floor = 0.01) {
  std::vector<double> v(n);
  double total = 0.0;
  for (auto& x : v) total += (x = uniform(rng, floor, 1.0));
  for (auto& x : v) x /= total;
  return v;
}

// Random graph with row-stochastic edges and a column-stochastic ranking.
inline afford::KnowledgeBaseGraph random_kb(std::mt19937_64& rng, std::size_t n_layers, std::size_t max_entities,
                                            std::size_t n_affordances) {
  using namespace afford;
  KnowledgeBaseGraph kb;
  for (std::size_t k = 0; k < n_layers; ++k) {
    LayerSpec layer{"layer" + std::to_string(k), {}};
    const auto n = uniform_index(rng, 1, max_entities);
    for (std::size_t e = 0; e < n; ++e) layer.entities.push_back("e" + std::to_string(e));
    kb.layers.push_back(std::move(layer));
  }
  for (std::size_t z = 0; z < n_affordances; ++z) kb.affordances.push_back("z" + std::to_string(z));
  for (std::size_t k = 0; k < n_layers; ++k) {
    const auto rows = kb.layers[k].entities.size();
    const auto cols = k + 1 < n_layers ? kb.layers[k + 1].entities.size() : n_affordances;
    Matrix w(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = random_simplex(rng, cols);
      for (std::size_t c = 0; c < cols; ++c) w(r, c) = row[c];
    }
    kb.edges.push_back({kb.layers[k].name, k + 1 < n_layers ? kb.layers[k + 1].name : kAffordanceLayerName, w});
  }
  kb.ranking = Matrix(kb.entity_count(), n_affordances);
  for (std::size_t z = 0; z < n_affordances; ++z) {
    const auto col = random_simplex(rng, kb.entity_count(), 0.0);
    for (std::size_t r = 0; r < kb.entity_count(); ++r) kb.ranking(r, z) = col[r];
  }
  return kb;
}

inline afford::LayeredEvidence random_evidence(std::mt19937_64& rng, const afford::KnowledgeBaseGraph& kb) {
  afford::LayeredEvidence ev;
  for (const auto& layer : kb.layers) ev.push_back(random_simplex(rng, layer.entities.size()));
  return ev;
}

}  // namespace test
