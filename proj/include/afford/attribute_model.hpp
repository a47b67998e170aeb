#pragma once

// Per-attribute Gaussian generative classifier and its Bayes posterior.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "afford/taxonomy.hpp"

namespace afford {

struct FeatureVector {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct PosteriorVector {
  AttributeKind kind = AttributeKind::Shape;
  std::vector<double> probs;
};

struct LabelledFeature {
  FeatureVector x;
  EntityId entity;
};

inline constexpr double kDefaultVarianceFloor = 1e-6;

/// Diagonal-covariance Gaussian per entity. Entities are kept in the order
/// given at fit time (the kind's lexicographic order by default), and that
/// order is the tie-break order for `predict`.
class GaussianAttributeClassifier {
 public:
  struct Entity {
    std::string name;
    double prior = 0.0;
    std::vector<double> mean;
    std::vector<double> variance;

    friend bool operator==(const Entity&, const Entity&) = default;
  };

  GaussianAttributeClassifier() = default;
  /// Validates shapes, priors and variances; throws DimensionMismatch or InvalidArgument.
  GaussianAttributeClassifier(AttributeKind kind, std::size_t dimension,
                              std::vector<Entity> entities);

  AttributeKind kind() const { return kind_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t entity_count() const { return entities_.size(); }
  const std::vector<Entity>& entities() const { return entities_; }

  /// log(prior) + log N(x; mean, diag(variance)) for each entity.
  std::vector<double> log_joint(const FeatureVector& x) const;

  friend bool operator==(const GaussianAttributeClassifier&,
                         const GaussianAttributeClassifier&) = default;

 private:
  AttributeKind kind_ = AttributeKind::Shape;
  std::size_t dimension_ = 0;
  std::vector<Entity> entities_;
};

GaussianAttributeClassifier fit_gaussian(std::span<const LabelledFeature> samples,
                                         AttributeKind kind,
                                         double epsilon = kDefaultVarianceFloor);

/// Restricts the classifier to `vocabulary` (names must belong to `kind`).
GaussianAttributeClassifier fit_gaussian(std::span<const LabelledFeature> samples,
                                         AttributeKind kind,
                                         std::span<const std::string> vocabulary,
                                         double epsilon = kDefaultVarianceFloor);

PosteriorVector posterior(const GaussianAttributeClassifier& clf, const FeatureVector& x);

EntityId predict(const GaussianAttributeClassifier& clf, const FeatureVector& x);

/// Index of the maximum; the lowest index wins ties.
std::size_t argmax(std::span<const double> values);

class ObjectContext {
 public:
  void set(PosteriorVector posterior);
  bool contains(AttributeKind kind) const { return posteriors_.count(kind) != 0; }
  /// Throws MissingAttribute.
  const PosteriorVector& at(AttributeKind kind) const;
  std::size_t size() const { return posteriors_.size(); }

 private:
  std::map<AttributeKind, PosteriorVector> posteriors_;
};

using ClassifierSet = std::map<AttributeKind, GaussianAttributeClassifier>;
using FeatureSet = std::map<AttributeKind, FeatureVector>;

ObjectContext classify_context(const ClassifierSet& classifiers, const FeatureSet& features,
                               std::span<const AttributeKind> kinds = kAllAttributes);

nlohmann::json to_json(const GaussianAttributeClassifier& clf);
GaussianAttributeClassifier classifier_from_json(const nlohmann::json& doc);

}  // namespace afford
