#include "afford/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "afford/error.hpp"
#include "afford/kernels.hpp"

namespace afford {

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts)
    for (auto c : row) n += c;
  return n;
}

std::size_t ConfusionMatrix::row_total(AffordanceClass truth) const {
  std::size_t n = 0;
  for (auto c : counts[index_of(truth)]) n += c;
  return n;
}

std::optional<double> ConfusionMatrix::recall(AffordanceClass truth) const {
  const auto n = row_total(truth);
  if (n == 0) return std::nullopt;
  return static_cast<double>(counts[index_of(truth)][index_of(truth)]) / static_cast<double>(n);
}

double ConfusionMatrix::diagonal_accuracy() const {
  double sum = 0.0;
  std::size_t present = 0;
  for (auto cls : kAllAffordances) {
    if (auto r = recall(cls)) {
      sum += *r;
      ++present;
    }
  }
  return present == 0 ? 0.0 : sum / static_cast<double>(present);
}

ConfusionMatrix confusion(std::span<const LabelPair> pairs) {
  if (pairs.empty()) fail(ErrorCode::EmptyInput, "no (true, predicted) pairs");
  ConfusionMatrix cm;
  for (const auto& [truth, predicted] : pairs) ++cm.counts[index_of(truth)][index_of(predicted)];
  return cm;
}

std::vector<ObjectOutcome> evaluate_records(const Model& model, std::span<const ObjectRecord> records) {
  auto results = kernels::parallel::infer_batch(model, records);
  std::vector<ObjectOutcome> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    out.push_back({records[i].id, records[i].category, records[i].affordance, std::move(results[i])});
  return out;
}

ConfusionMatrix confusion_of(std::span<const ObjectOutcome> outcomes) {
  std::vector<LabelPair> pairs;
  pairs.reserve(outcomes.size());
  for (const auto& o : outcomes) pairs.emplace_back(o.truth, o.result.final_affordance);
  return confusion(pairs);
}

AblationReport ablate_environment(const Manifest& train, const Manifest& test, const RunConfig& config) {
  AblationReport report;
  RunConfig with = config, without = config;
  with.environment = true;
  without.environment = false;
  const auto model_with = train_model(train.records, with);
  const auto model_without = train_model(train.records, without);
  report.with_environment = confusion_of(evaluate_records(model_with, test.records));
  report.without_environment = confusion_of(evaluate_records(model_without, test.records));
  report.accuracy_with = report.with_environment.diagonal_accuracy();
  report.accuracy_without = report.without_environment.diagonal_accuracy();
  report.delta = report.accuracy_with - report.accuracy_without;
  return report;
}

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) fail(ErrorCode::EmptyInput, "quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

FiveNumberSummary summarize(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::EmptyInput, "summary of an empty sample");
  std::sort(values.begin(), values.end());
  return {values.front(), quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75),
          values.back(), values.size()};
}

PosteriorStats posterior_stats(std::span<const InferenceResult> results) {
  if (results.empty()) fail(ErrorCode::EmptyInput, "no inference results");
  std::map<AffordanceClass, std::vector<double>> grouped;
  for (const auto& r : results)
    grouped[r.final_affordance].push_back(r.scores.normalized.at(index_of(r.final_affordance)));
  PosteriorStats stats;
  for (auto& [cls, values] : grouped) stats[cls] = summarize(std::move(values));
  return stats;
}

ZeroShotReport zero_shot_eval(const Model& model, const Manifest& manifest,
                              std::span<const std::string> holdout_categories) {
  if (holdout_categories.empty()) fail(ErrorCode::EmptyHoldout, "no holdout categories given");
  for (const auto& cat : holdout_categories) {
    const bool present = std::any_of(manifest.records.begin(), manifest.records.end(),
                                     [&](const ObjectRecord& r) { return r.category == cat; });
    if (!present) fail(ErrorCode::EmptyHoldout, "holdout category '" + cat + "' has no records");
    const auto& excluded = model.config.holdout_categories;
    if (std::find(excluded.begin(), excluded.end(), cat) == excluded.end())
      fail(ErrorCode::InvalidArgument, "model was not trained with '" + cat + "' held out");
  }
  const auto holdout = filter_records(manifest, [&](const ObjectRecord& r) {
    return std::find(holdout_categories.begin(), holdout_categories.end(), r.category) !=
           holdout_categories.end();
  });
  const auto outcomes = evaluate_records(model, holdout.records);

  ZeroShotReport report;
  report.holdout_categories.assign(holdout_categories.begin(), holdout_categories.end());
  report.evaluated = outcomes.size();
  report.confusion = confusion_of(outcomes);
  std::size_t correct = 0;
  for (const auto& o : outcomes) correct += o.truth == o.result.final_affordance ? 1 : 0;
  report.accuracy = static_cast<double>(correct) / static_cast<double>(outcomes.size());
  return report;
}

PointMetricReport point_metric(std::span<const PointMetricInput> inputs, double threshold_frac) {
  if (!(threshold_frac > 0.0)) fail(ErrorCode::InvalidArgument, "threshold fraction must be positive");
  PointMetricReport report;
  report.threshold_frac = threshold_frac;
  for (const auto& in : inputs) {
    if (in.rectangles.empty()) continue;
    PointMatch m;
    m.id = in.id;
    m.threshold = threshold_frac * in.bbox_diagonal;
    if (in.center) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& rect : in.rectangles) {
        const auto c = rect.center();
        best = std::min(best, std::hypot(c[0] - (*in.center)[0], c[1] - (*in.center)[1],
                                         c[2] - (*in.center)[2]));
      }
      m.distance = best;
      m.matched = best <= m.threshold;
    }
    m.effect = m.matched ? Effect::Positive : Effect::Negative;
    report.matches += m.matched ? 1 : 0;
    report.objects.push_back(std::move(m));
  }
  if (report.objects.empty()) fail(ErrorCode::NoLabels, "no object carries a labelled rectangle");
  report.percentage = 100.0 * static_cast<double>(report.matches) / static_cast<double>(report.objects.size());
  return report;
}

std::vector<PointMetricInput> grasp_inputs(const Model& model, const Manifest& manifest,
                                           std::span<const ObjectRecord> records,
                                           std::span<const ObjectOutcome> outcomes) {
  if (records.size() != outcomes.size())
    fail(ErrorCode::InvalidArgument, "records and outcomes differ in length");
  std::vector<PointMetricInput> out(records.size());
  std::vector<std::exception_ptr> errors(records.size());
  const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel for schedule(dynamic, 2)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    auto& in = out[k];
    in.id = records[k].id;
    in.rectangles = records[k].rectangles;
    try {
      in.bbox_diagonal = bbox_diagonal(load_cloud(manifest, records[k]).points);
      try {
        const auto grasp = compute_grasp(model, manifest, records[k], outcomes[k].result.final_affordance);
        in.center = grasp.ellipse.center;
      } catch (const Error& e) {
        // Infeasible regions stay unmatched.
        if (e.code() != ErrorCode::NoFeasibleRegion) throw;
      }
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

nlohmann::json to_json(const ConfusionMatrix& cm) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : cm.counts) rows.push_back(row);
  nlohmann::json recalls = nlohmann::json::object();
  for (auto cls : kAllAffordances) {
    auto r = cm.recall(cls);
    recalls[std::string(to_string(cls))] = r ? nlohmann::json(round6(*r)) : nlohmann::json(nullptr);
  }
  return {{"labels", affordance_names()},
          {"matrix", rows},
          {"total", cm.total()},
          {"recall", recalls},
          {"diagonal_accuracy", round6(cm.diagonal_accuracy())}};
}

nlohmann::json to_json(const AblationReport& report) {
  return {{"with_environment", to_json(report.with_environment)},
          {"without_environment", to_json(report.without_environment)},
          {"accuracy_with", round6(report.accuracy_with)},
          {"accuracy_without", round6(report.accuracy_without)},
          {"delta", round6(report.delta)}};
}

nlohmann::json to_json(const PosteriorStats& stats) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [cls, s] : stats) {
    out[std::string(to_string(cls))] = {{"min", round6(s.min)},       {"q1", round6(s.q1)},
                                        {"median", round6(s.median)}, {"q3", round6(s.q3)},
                                        {"max", round6(s.max)},       {"count", s.count}};
  }
  return out;
}

nlohmann::json to_json(const ZeroShotReport& report) {
  return {{"holdout_categories", report.holdout_categories},
          {"evaluated", report.evaluated},
          {"accuracy", round6(report.accuracy)},
          {"confusion", to_json(report.confusion)}};
}

nlohmann::json to_json(const PointMetricReport& report) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& m : report.objects) {
    objects.push_back({{"id", m.id},
                       {"distance", m.distance ? nlohmann::json(round6(*m.distance)) : nlohmann::json(nullptr)},
                       {"threshold", round6(m.threshold)},
                       {"matched", m.matched},
                       {"effect", m.effect == Effect::Positive ? "positive" : "negative"}});
  }
  return {{"threshold_frac", round6(report.threshold_frac)},
          {"labelled_objects", report.objects.size()},
          {"matches", report.matches},
          {"percentage", round6(report.percentage)},
          {"objects", objects}};
}

std::string to_csv(const ConfusionMatrix& cm) {
  std::string out = "true\\predicted";
  for (auto cls : kAllAffordances) out += "," + std::string(to_string(cls));
  out += "\n";
  for (auto truth : kAllAffordances) {
    out += std::string(to_string(truth));
    for (auto c : cm.counts[index_of(truth)]) out += "," + std::to_string(c);
    out += "\n";
  }
  return out;
}

}  // namespace afford
