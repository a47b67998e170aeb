#include "afford/kb_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "afford/error.hpp"

namespace afford {

namespace {

std::size_t target_size(const KnowledgeBaseGraph& kb, std::size_t k) {
  return k + 1 < kb.layers.size() ? kb.layers[k + 1].entities.size() : kb.affordances.size();
}

const std::string& target_name(const KnowledgeBaseGraph& kb, std::size_t k) {
  static const std::string affordance_layer = kAffordanceLayerName;
  return k + 1 < kb.layers.size() ? kb.layers[k + 1].name : affordance_layer;
}

void normalize_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) total += m(r, c);
    for (std::size_t c = 0; c < m.cols; ++c)
      m(r, c) = total > 0.0 ? m(r, c) / total : 1.0 / static_cast<double>(m.cols);
  }
}

void normalize_cols(Matrix& m) {
  for (std::size_t c = 0; c < m.cols; ++c) {
    double total = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) total += m(r, c);
    for (std::size_t r = 0; r < m.rows; ++r)
      m(r, c) = total > 0.0 ? m(r, c) / total : 1.0 / static_cast<double>(m.rows);
  }
}

void check_evidence(const KnowledgeBaseGraph& kb, const LayeredEvidence& evidence) {
  if (evidence.size() != kb.layers.size())
    fail(ErrorCode::LayerMismatch, "evidence has " + std::to_string(evidence.size()) +
                                       " layers, graph has " + std::to_string(kb.layers.size()));
  for (std::size_t k = 0; k < evidence.size(); ++k)
    if (evidence[k].size() != kb.layers[k].entities.size())
      fail(ErrorCode::LayerMismatch, "layer '" + kb.layers[k].name + "' has wrong entity count");
}

nlohmann::json matrix_rows(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::vector<double> row(m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols),
                            m.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * m.cols));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_rows(const nlohmann::json& rows, std::size_t n_rows, std::size_t n_cols) {
  Matrix m(n_rows, n_cols);
  if (rows.size() != n_rows) fail(ErrorCode::ParseError, "matrix row count mismatch");
  for (std::size_t r = 0; r < n_rows; ++r) {
    auto row = rows[r].get<std::vector<double>>();
    if (row.size() != n_cols) fail(ErrorCode::ParseError, "matrix column count mismatch");
    std::copy(row.begin(), row.end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * n_cols));
  }
  return m;
}

}  // namespace

std::size_t KnowledgeBaseGraph::entity_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.entities.size();
  return n;
}

std::size_t KnowledgeBaseGraph::layer_offset(std::size_t k) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < k; ++i) n += layers[i].entities.size();
  return n;
}

void KnowledgeBaseGraph::validate_shapes() const {
  if (layers.empty() || affordances.empty())
    fail(ErrorCode::LayerMismatch, "graph needs attribute layers and affordances");
  if (edges.size() != layers.size())
    fail(ErrorCode::LayerMismatch, "expected one edge matrix per attribute layer");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& w = edges[k].weights;
    if (w.rows != layers[k].entities.size() || w.cols != target_size(*this, k) ||
        w.data.size() != w.rows * w.cols)
      fail(ErrorCode::LayerMismatch, "edge matrix " + std::to_string(k) + " has wrong shape");
  }
  if (ranking.rows != entity_count() || ranking.cols != affordances.size() ||
      ranking.data.size() != ranking.rows * ranking.cols)
    fail(ErrorCode::LayerMismatch, "ranking matrix has wrong shape");
}

std::vector<LayerSpec> layer_specs(std::span<const AttributeKind> kinds) {
  std::vector<LayerSpec> specs;
  for (auto kind : kinds) {
    auto names = entities_of(kind);
    specs.push_back({std::string(to_string(kind)), {names.begin(), names.end()}});
  }
  return specs;
}

KnowledgeBaseGraph build_kb(std::span<const LabelledEvidence> training,
                            std::vector<LayerSpec> layers, std::vector<std::string> affordances) {
  if (training.empty()) fail(ErrorCode::EmptyTrainingSet, "no training contexts");
  KnowledgeBaseGraph kb;
  kb.layers = std::move(layers);
  kb.affordances = std::move(affordances);
  if (kb.layers.empty() || kb.affordances.empty())
    fail(ErrorCode::LayerMismatch, "graph needs attribute layers and affordances");
  for (const auto& item : training) {
    check_evidence(kb, item.evidence);
    if (item.label >= kb.affordances.size())
      fail(ErrorCode::LayerMismatch, "label outside the affordance layer");
  }

  // Canonical order makes the floating-point sums independent of input order.
  std::vector<const LabelledEvidence*> order;
  order.reserve(training.size());
  for (const auto& item : training) order.push_back(&item);
  std::sort(order.begin(), order.end(), [](const LabelledEvidence* a, const LabelledEvidence* b) {
    if (a->label != b->label) return a->label < b->label;
    return a->evidence < b->evidence;
  });

  const std::size_t n_layers = kb.layers.size();
  for (std::size_t k = 0; k < n_layers; ++k) {
    Matrix w(kb.layers[k].entities.size(), target_size(kb, k));
    for (const auto* item : order) {
      const auto& src = item->evidence[k];
      for (std::size_t i = 0; i < w.rows; ++i) {
        if (src[i] == 0.0) continue;
        if (k + 1 < n_layers) {
          const auto& dst = item->evidence[k + 1];
          for (std::size_t j = 0; j < w.cols; ++j) w(i, j) += src[i] * dst[j];
        } else {
          w(i, item->label) += src[i];
        }
      }
    }
    normalize_rows(w);
    kb.edges.push_back({kb.layers[k].name, target_name(kb, k), std::move(w)});
  }

  kb.ranking = Matrix(kb.entity_count(), kb.affordances.size());
  for (const auto* item : order) {
    std::size_t row = 0;
    for (const auto& layer : item->evidence)
      for (double p : layer) kb.ranking(row++, item->label) += p;
  }
  normalize_cols(kb.ranking);
  return kb;
}

KnowledgeBaseGraph build_kb(std::span<const LabelledContext> contexts, std::vector<LayerSpec> layers) {
  if (contexts.empty()) fail(ErrorCode::EmptyTrainingSet, "no training contexts");
  std::vector<AttributeKind> kinds;
  for (const auto& layer : layers) {
    auto kind = try_parse_attribute(layer.name);
    if (!kind) fail(ErrorCode::LayerMismatch, "layer '" + layer.name + "' is not an attribute");
    kinds.push_back(*kind);
  }
  std::vector<LabelledEvidence> training;
  training.reserve(contexts.size());
  for (const auto& item : contexts) {
    LabelledEvidence ev;
    for (auto kind : kinds) {
      if (!item.context.contains(kind))
        fail(ErrorCode::LayerMismatch, "context lacks layer " + std::string(to_string(kind)));
      ev.evidence.push_back(item.context.at(kind).probs);
    }
    ev.label = index_of(item.label);
    training.push_back(std::move(ev));
  }
  return build_kb(training, std::move(layers), affordance_names());
}

KnowledgeBaseGraph build_kb(std::span<const LabelledContext> contexts,
                            std::span<const AttributeKind> layers) {
  return build_kb(contexts, layer_specs(layers));
}

ObjectContext layered_context(const ClassifierSet& classifiers, const FeatureSet& features,
                              std::span<const LayerSpec> layers) {
  ObjectContext ctx;
  for (const auto& layer : layers) {
    auto kind = try_parse_attribute(layer.name);
    if (!kind) fail(ErrorCode::LayerMismatch, "layer '" + layer.name + "' is not an attribute");
    const AttributeKind one[] = {*kind};
    const auto raw = classify_context(classifiers, features, one).at(*kind);
    const auto& ents = classifiers.at(*kind).entities();
    PosteriorVector aligned{*kind, std::vector<double>(layer.entities.size(), 0.0)};
    for (std::size_t e = 0; e < ents.size(); ++e) {
      auto it = std::find(layer.entities.begin(), layer.entities.end(), ents[e].name);
      if (it == layer.entities.end())
        fail(ErrorCode::LayerMismatch, "entity '" + ents[e].name + "' is not in layer '" + layer.name + "'");
      aligned.probs[static_cast<std::size_t>(it - layer.entities.begin())] = raw.probs[e];
    }
    ctx.set(std::move(aligned));
  }
  return ctx;
}

LayeredEvidence layered_evidence(const KnowledgeBaseGraph& kb, const ObjectContext& ctx) {
  LayeredEvidence out;
  for (const auto& layer : kb.layers) {
    auto kind = try_parse_attribute(layer.name);
    if (!kind || !ctx.contains(*kind))
      fail(ErrorCode::LayerMismatch, "context lacks layer '" + layer.name + "'");
    out.push_back(ctx.at(*kind).probs);
  }
  check_evidence(kb, out);
  return out;
}

ConcatenatedEvidence concatenate(const KnowledgeBaseGraph& kb, const LayeredEvidence& evidence) {
  check_evidence(kb, evidence);
  ConcatenatedEvidence out;
  out.y.reserve(kb.entity_count());
  for (const auto& layer : evidence) out.y.insert(out.y.end(), layer.begin(), layer.end());
  return out;
}

double score_chain(const KnowledgeBaseGraph& kb, const LayeredEvidence& evidence,
                   std::span<const std::size_t> entities, std::size_t affordance) {
  const std::size_t n_layers = kb.layers.size();
  double score = 0.0;
  for (std::size_t k = 0; k < n_layers; ++k) {
    score += std::log(evidence[k][entities[k]]);
    const std::size_t next = k + 1 < n_layers ? entities[k + 1] : affordance;
    score += std::log(kb.edges[k].weights(entities[k], next));
  }
  return score;
}

AffordancePath rank_path(const KnowledgeBaseGraph& kb, const LayeredEvidence& evidence) {
  kb.validate_shapes();
  check_evidence(kb, evidence);
  const std::size_t n_layers = kb.layers.size();

  // best[k][e]: best log-score of the chain suffix after entity e of layer k,
  // excluding e's own evidence term.
  std::vector<std::vector<double>> best(n_layers);
  {
    const auto& w = kb.edges[n_layers - 1].weights;
    best[n_layers - 1].resize(w.rows);
    for (std::size_t e = 0; e < w.rows; ++e) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t z = 0; z < w.cols; ++z) m = std::max(m, std::log(w(e, z)));
      best[n_layers - 1][e] = m;
    }
  }
  for (std::size_t k = n_layers - 1; k-- > 0;) {
    const auto& w = kb.edges[k].weights;
    best[k].resize(w.rows);
    for (std::size_t e = 0; e < w.rows; ++e) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t n = 0; n < w.cols; ++n)
        m = std::max(m, std::log(w(e, n)) + std::log(evidence[k + 1][n]) + best[k + 1][n]);
      best[k][e] = m;
    }
  }

  // Forward pass: the first index reaching the optimum at every step yields the
  // lexicographically smallest optimal chain.
  AffordancePath path;
  path.entities.resize(n_layers);
  {
    std::size_t arg = 0;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < evidence[0].size(); ++e) {
      const double v = std::log(evidence[0][e]) + best[0][e];
      if (e == 0 || v > top) {
        top = v;
        arg = e;
      }
    }
    path.entities[0] = arg;
  }
  for (std::size_t k = 0; k + 1 < n_layers; ++k) {
    const auto& w = kb.edges[k].weights;
    const std::size_t e = path.entities[k];
    std::size_t arg = 0;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < w.cols; ++n) {
      const double v = std::log(w(e, n)) + std::log(evidence[k + 1][n]) + best[k + 1][n];
      if (n == 0 || v > top) {
        top = v;
        arg = n;
      }
    }
    path.entities[k + 1] = arg;
  }
  {
    const auto& w = kb.edges[n_layers - 1].weights;
    const std::size_t e = path.entities[n_layers - 1];
    std::size_t arg = 0;
    for (std::size_t z = 1; z < w.cols; ++z)
      if (w(e, z) > w(e, arg)) arg = z;
    path.affordance = arg;
  }
  path.log_score = score_chain(kb, evidence, path.entities, path.affordance);
  return path;
}

AffordancePath rank_path(const KnowledgeBaseGraph& kb, const ObjectContext& ctx) {
  return rank_path(kb, layered_evidence(kb, ctx));
}

std::vector<AffordancePath> enumerate_paths(const KnowledgeBaseGraph& kb,
                                            const LayeredEvidence& evidence, std::size_t cap) {
  kb.validate_shapes();
  check_evidence(kb, evidence);
  std::size_t total = kb.affordances.size();
  for (const auto& layer : kb.layers) {
    const std::size_t n = layer.entities.size();
    if (n != 0 && total > cap / n)
      fail(ErrorCode::PathExplosion, "chain count exceeds cap " + std::to_string(cap));
    total *= layer.entities.size();
  }
  if (total > cap) fail(ErrorCode::PathExplosion, "chain count exceeds cap " + std::to_string(cap));

  std::vector<AffordancePath> paths;
  paths.reserve(total);
  const std::size_t n_layers = kb.layers.size();
  std::vector<std::size_t> odometer(n_layers + 1, 0);
  for (std::size_t count = 0; count < total; ++count) {
    AffordancePath p;
    p.entities.assign(odometer.begin(), odometer.begin() + static_cast<std::ptrdiff_t>(n_layers));
    p.affordance = odometer[n_layers];
    p.log_score = score_chain(kb, evidence, p.entities, p.affordance);
    paths.push_back(std::move(p));
    for (std::size_t pos = n_layers + 1; pos-- > 0;) {
      const std::size_t limit = pos < n_layers ? kb.layers[pos].entities.size() : kb.affordances.size();
      if (++odometer[pos] < limit) break;
      odometer[pos] = 0;
    }
  }
  std::stable_sort(paths.begin(), paths.end(), [](const AffordancePath& a, const AffordancePath& b) {
    return a.log_score > b.log_score;
  });
  return paths;
}

AffordanceScores affordance_scores(const KnowledgeBaseGraph& kb, const ConcatenatedEvidence& y) {
  if (y.y.size() != kb.ranking.rows)
    fail(ErrorCode::DimensionMismatch, "evidence length " + std::to_string(y.y.size()) +
                                           " does not match " + std::to_string(kb.ranking.rows));
  AffordanceScores out;
  out.raw.assign(kb.ranking.cols, 0.0);
  for (std::size_t i = 0; i < kb.ranking.rows; ++i)
    for (std::size_t z = 0; z < kb.ranking.cols; ++z) out.raw[z] += kb.ranking(i, z) * y.y[i];
  const double total = std::accumulate(out.raw.begin(), out.raw.end(), 0.0);
  out.normalized.resize(out.raw.size());
  for (std::size_t z = 0; z < out.raw.size(); ++z)
    out.normalized[z] = total > 0.0 ? out.raw[z] / total : 1.0 / static_cast<double>(out.raw.size());
  out.best = argmax(out.raw);
  return out;
}

nlohmann::json to_json(const KnowledgeBaseGraph& kb) {
  nlohmann::json doc;
  auto& layers = doc["layers"] = nlohmann::json::array();
  for (const auto& layer : kb.layers) layers.push_back({{"name", layer.name}, {"entities", layer.entities}});
  layers.push_back({{"name", kAffordanceLayerName}, {"entities", kb.affordances}});

  auto& edges = doc["edges"] = nlohmann::json::array();
  for (const auto& e : kb.edges) {
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"rows", e.weights.rows},
                     {"cols", e.weights.cols},
                     {"weights", matrix_rows(e.weights)}});
  }
  std::vector<std::string> entity_names;
  for (const auto& layer : kb.layers)
    for (const auto& name : layer.entities) entity_names.push_back(layer.name + ":" + name);
  doc["ranking"] = {{"entities", entity_names},
                    {"affordances", kb.affordances},
                    {"weights", matrix_rows(kb.ranking)}};
  return doc;
}

KnowledgeBaseGraph kb_from_json(const nlohmann::json& doc) {
  try {
    KnowledgeBaseGraph kb;
    const auto& layers = doc.at("layers");
    if (layers.size() < 2 || layers.back().at("name").get<std::string>() != kAffordanceLayerName)
      fail(ErrorCode::ParseError, "kb json: last layer must be the affordance layer");
    for (std::size_t i = 0; i + 1 < layers.size(); ++i)
      kb.layers.push_back({layers[i].at("name").get<std::string>(),
                           layers[i].at("entities").get<std::vector<std::string>>()});
    kb.affordances = layers.back().at("entities").get<std::vector<std::string>>();
    for (const auto& e : doc.at("edges")) {
      const auto rows = e.at("rows").get<std::size_t>();
      const auto cols = e.at("cols").get<std::size_t>();
      kb.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                          matrix_from_rows(e.at("weights"), rows, cols)});
    }
    const auto& ranking = doc.at("ranking");
    if (ranking.at("affordances").get<std::vector<std::string>>() != kb.affordances)
      fail(ErrorCode::ParseError, "kb json: ranking affordances disagree with layers");
    if (ranking.at("entities").size() != kb.entity_count())
      fail(ErrorCode::ParseError, "kb json: ranking entity count mismatch");
    kb.ranking = matrix_from_rows(ranking.at("weights"), kb.entity_count(), kb.affordances.size());
    kb.validate_shapes();
    return kb;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::ParseError, std::string("kb json: ") + ex.what());
  }
}

}  // namespace afford
