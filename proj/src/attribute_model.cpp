#include "afford/attribute_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "afford/error.hpp"

namespace afford {

namespace {

void check_finite(const FeatureVector& x) {
  for (double v : x.values)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "feature vector has a non-finite entry");
}

}  // namespace

GaussianAttributeClassifier::GaussianAttributeClassifier(AttributeKind kind, std::size_t dimension,
                                                         std::vector<Entity> entities)
    : kind_(kind), dimension_(dimension), entities_(std::move(entities)) {
  if (entities_.empty()) fail(ErrorCode::InvalidArgument, "classifier needs at least one entity");
  double prior_sum = 0.0;
  for (const auto& e : entities_) {
    if (e.mean.size() != dimension_ || e.variance.size() != dimension_)
      fail(ErrorCode::DimensionMismatch, "entity '" + e.name + "' has wrong dimension");
    if (!(e.prior >= 0.0 && e.prior <= 1.0))
      fail(ErrorCode::InvalidArgument, "prior of '" + e.name + "' outside [0,1]");
    for (double v : e.variance)
      if (!(v > 0.0) || !std::isfinite(v))
        fail(ErrorCode::InvalidArgument, "variance of '" + e.name + "' must be positive");
    for (double m : e.mean)
      if (!std::isfinite(m)) fail(ErrorCode::InvalidArgument, "mean of '" + e.name + "' not finite");
    prior_sum += e.prior;
  }
  if (std::abs(prior_sum - 1.0) > 1e-9) fail(ErrorCode::InvalidArgument, "priors must sum to 1");
}

std::vector<double> GaussianAttributeClassifier::log_joint(const FeatureVector& x) const {
  if (x.dimension() != dimension_)
    fail(ErrorCode::DimensionMismatch, "expected dimension " + std::to_string(dimension_) +
                                           ", got " + std::to_string(x.dimension()));
  check_finite(x);
  constexpr double log_two_pi = 1.8378770664093454835606594728112;  // log(2*pi)
  std::vector<double> out(entities_.size());
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    const auto& e = entities_[i];
    double acc = 0.0;
    for (std::size_t k = 0; k < dimension_; ++k) {
      const double diff = x.values[k] - e.mean[k];
      acc += log_two_pi + std::log(e.variance[k]) + diff * diff / e.variance[k];
    }
    out[i] = std::log(e.prior) - 0.5 * acc;
  }
  return out;
}

GaussianAttributeClassifier fit_gaussian(std::span<const LabelledFeature> samples,
                                         AttributeKind kind, double epsilon) {
  auto names = entities_of(kind);
  std::vector<std::string> vocabulary(names.begin(), names.end());
  return fit_gaussian(samples, kind, vocabulary, epsilon);
}

GaussianAttributeClassifier fit_gaussian(std::span<const LabelledFeature> samples,
                                         AttributeKind kind,
                                         std::span<const std::string> vocabulary,
                                         double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (vocabulary.empty()) fail(ErrorCode::InvalidArgument, "empty vocabulary");
  for (const auto& name : vocabulary) make_entity(kind, name);
  if (samples.empty()) fail(ErrorCode::MissingEntitySamples, "no samples");

  const std::size_t dim = samples.front().x.dimension();
  const std::size_t n_entities = vocabulary.size();
  std::vector<std::size_t> counts(n_entities, 0);
  std::vector<std::vector<double>> sums(n_entities, std::vector<double>(dim, 0.0));

  std::vector<std::size_t> assignment(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& sample = samples[s];
    if (sample.x.dimension() != dim)
      fail(ErrorCode::DimensionMismatch, "samples do not share one dimension");
    check_finite(sample.x);
    if (sample.entity.kind != kind)
      fail(ErrorCode::InvalidArgument, "sample labelled with a different attribute kind");
    auto it = std::find(vocabulary.begin(), vocabulary.end(), sample.entity.name);
    if (it == vocabulary.end())
      fail(ErrorCode::UnknownEntityName, "sample entity '" + sample.entity.name +
                                             "' not in the classifier vocabulary");
    const auto e = static_cast<std::size_t>(it - vocabulary.begin());
    assignment[s] = e;
    ++counts[e];
    for (std::size_t k = 0; k < dim; ++k) sums[e][k] += sample.x.values[k];
  }
  for (std::size_t e = 0; e < n_entities; ++e)
    if (counts[e] == 0) fail(ErrorCode::MissingEntitySamples, "no samples for '" + vocabulary[e] + "'");

  std::vector<GaussianAttributeClassifier::Entity> entities(n_entities);
  for (std::size_t e = 0; e < n_entities; ++e) {
    entities[e].name = vocabulary[e];
    entities[e].prior = static_cast<double>(counts[e]) / static_cast<double>(samples.size());
    entities[e].mean.resize(dim);
    for (std::size_t k = 0; k < dim; ++k)
      entities[e].mean[k] = sums[e][k] / static_cast<double>(counts[e]);
    entities[e].variance.assign(dim, 0.0);
  }
  // Second pass keeps the variance numerically centred.
  for (std::size_t s = 0; s < samples.size(); ++s) {
    auto& ent = entities[assignment[s]];
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = samples[s].x.values[k] - ent.mean[k];
      ent.variance[k] += d * d;
    }
  }
  for (std::size_t e = 0; e < n_entities; ++e)
    for (auto& v : entities[e].variance)
      v = std::max(v / static_cast<double>(counts[e]), epsilon);

  return GaussianAttributeClassifier(kind, dim, std::move(entities));
}

PosteriorVector posterior(const GaussianAttributeClassifier& clf, const FeatureVector& x) {
  auto logs = clf.log_joint(x);
  const double peak = *std::max_element(logs.begin(), logs.end());
  if (peak == -std::numeric_limits<double>::infinity())
    fail(ErrorCode::NumericalUnderflow, "every log-density is -inf");
  double total = 0.0;
  for (auto& v : logs) {
    v = std::exp(v - peak);
    total += v;
  }
  for (auto& v : logs) v /= total;
  return PosteriorVector{clf.kind(), std::move(logs)};
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

EntityId predict(const GaussianAttributeClassifier& clf, const FeatureVector& x) {
  const auto post = posterior(clf, x);
  // Entity order is lexicographic for fitted classifiers; resolve ties by name
  // so loaded models with arbitrary order behave the same.
  std::size_t best = 0;
  for (std::size_t i = 1; i < post.probs.size(); ++i) {
    if (post.probs[i] > post.probs[best] ||
        (post.probs[i] == post.probs[best] && clf.entities()[i].name < clf.entities()[best].name))
      best = i;
  }
  return EntityId{clf.kind(), clf.entities()[best].name};
}

void ObjectContext::set(PosteriorVector posterior) {
  const auto kind = posterior.kind;
  posteriors_[kind] = std::move(posterior);
}

const PosteriorVector& ObjectContext::at(AttributeKind kind) const {
  auto it = posteriors_.find(kind);
  if (it == posteriors_.end())
    fail(ErrorCode::MissingAttribute, "context lacks " + std::string(to_string(kind)));
  return it->second;
}

ObjectContext classify_context(const ClassifierSet& classifiers, const FeatureSet& features,
                               std::span<const AttributeKind> kinds) {
  ObjectContext ctx;
  for (auto kind : kinds) {
    auto clf = classifiers.find(kind);
    if (clf == classifiers.end())
      fail(ErrorCode::MissingAttribute, "no classifier for " + std::string(to_string(kind)));
    auto x = features.find(kind);
    if (x == features.end())
      fail(ErrorCode::MissingAttribute, "no features for " + std::string(to_string(kind)));
    ctx.set(posterior(clf->second, x->second));
  }
  return ctx;
}

nlohmann::json to_json(const GaussianAttributeClassifier& clf) {
  nlohmann::json doc;
  doc["kind"] = std::string(to_string(clf.kind()));
  doc["dimension"] = clf.dimension();
  auto& entities = doc["entities"] = nlohmann::json::array();
  for (const auto& e : clf.entities()) {
    entities.push_back({{"name", e.name}, {"prior", e.prior}, {"mean", e.mean}, {"variance", e.variance}});
  }
  return doc;
}

GaussianAttributeClassifier classifier_from_json(const nlohmann::json& doc) {
  try {
    const auto kind = parse_attribute(doc.at("kind").get<std::string>());
    const auto dim = doc.at("dimension").get<std::size_t>();
    std::vector<GaussianAttributeClassifier::Entity> entities;
    for (const auto& e : doc.at("entities")) {
      GaussianAttributeClassifier::Entity ent;
      ent.name = make_entity(kind, e.at("name").get<std::string>()).name;
      ent.prior = e.at("prior").get<double>();
      ent.mean = e.at("mean").get<std::vector<double>>();
      ent.variance = e.at("variance").get<std::vector<double>>();
      entities.push_back(std::move(ent));
    }
    return GaussianAttributeClassifier(kind, dim, std::move(entities));
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::ParseError, std::string("classifier json: ") + ex.what());
  }
}

}  // namespace afford
