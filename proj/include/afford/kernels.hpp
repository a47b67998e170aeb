#pragma once

// Batch kernels. `serial` is the reference implementation; `parallel` runs the
// same per-item work under OpenMP and must return identical results in the
// same order regardless of thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "afford/attribute_model.hpp"
#include "afford/grasp_region.hpp"
#include "afford/pipeline.hpp"

namespace afford::kernels {

namespace serial {

std::vector<PosteriorVector> posteriors(const GaussianAttributeClassifier& clf,
                                        std::span<const FeatureVector> xs);

std::vector<std::size_t> bin_counts(std::span<const Point3> points, const ZPartition& part);

std::vector<InferenceResult> infer_batch(const Model& model, std::span<const ObjectRecord> records);

}  // namespace serial

namespace parallel {

std::vector<PosteriorVector> posteriors(const GaussianAttributeClassifier& clf,
                                        std::span<const FeatureVector> xs);

std::vector<std::size_t> bin_counts(std::span<const Point3> points, const ZPartition& part);

std::vector<InferenceResult> infer_batch(const Model& model, std::span<const ObjectRecord> records);

}  // namespace parallel

/// Worker threads OpenMP would use; 1 when built without OpenMP.
int max_threads();

}  // namespace afford::kernels
