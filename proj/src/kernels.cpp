#include "afford/kernels.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace afford::kernels {

namespace {

// Runs body(i) for every index, rethrowing the error of the lowest failing
// index so failures are reported the same way as in the serial loop.
template <typename Body>
void for_each_index(std::size_t n, Body body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

namespace serial {

std::vector<PosteriorVector> posteriors(const GaussianAttributeClassifier& clf,
                                        std::span<const FeatureVector> xs) {
  std::vector<PosteriorVector> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(posterior(clf, x));
  return out;
}

std::vector<std::size_t> bin_counts(std::span<const Point3> points, const ZPartition& part) {
  return afford::bin_counts(points, part);
}

std::vector<InferenceResult> infer_batch(const Model& model, std::span<const ObjectRecord> records) {
  std::vector<InferenceResult> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(infer_record(model, r));
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<PosteriorVector> posteriors(const GaussianAttributeClassifier& clf,
                                        std::span<const FeatureVector> xs) {
  std::vector<PosteriorVector> out(xs.size());
  for_each_index(xs.size(), [&](std::size_t i) { out[i] = posterior(clf, xs[i]); });
  return out;
}

std::vector<std::size_t> bin_counts(std::span<const Point3> points, const ZPartition& part) {
  const std::size_t bins = part.bins;
  std::vector<std::size_t> counts(bins, 0);
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel
  {
    std::vector<std::size_t> local(bins, 0);
#pragma omp for nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto b = part.bin_of(points[static_cast<std::size_t>(i)][2]);
      if (b >= 0) ++local[static_cast<std::size_t>(b)];
    }
#pragma omp critical
    for (std::size_t b = 0; b < bins; ++b) counts[b] += local[b];
  }
  return counts;
}

std::vector<InferenceResult> infer_batch(const Model& model, std::span<const ObjectRecord> records) {
  std::vector<InferenceResult> out(records.size());
  for_each_index(records.size(), [&](std::size_t i) { out[i] = infer_record(model, records[i]); });
  return out;
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace afford::kernels
