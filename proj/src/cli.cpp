#include "afford/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "afford/datasets.hpp"
#include "afford/error.hpp"
#include "afford/eval.hpp"
#include "afford/pipeline.hpp"

namespace afford::cli {

namespace {

// AFFORD_SEED applies only when --seed was not given.
std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t value) {
  if (flag->count() > 0) return value;
  if (const char* env = std::getenv("AFFORD_SEED")) {
    try {
      std::size_t used = 0;
      const auto parsed = std::stoull(env, &used);
      if (used == std::string(env).size()) return parsed;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::InvalidArgument, "AFFORD_SEED is not an unsigned integer");
  }
  return value;
}

std::pair<Manifest, Manifest> split_without_holdout(const Manifest& manifest, const RunConfig& config) {
  const auto& held = config.holdout_categories;
  const auto pool = filter_records(manifest, [&](const ObjectRecord& r) {
    return std::find(held.begin(), held.end(), r.category) == held.end();
  });
  return split(pool, config.train_fraction, config.seed);
}

nlohmann::json outcome_json(const KnowledgeBaseGraph& kb, const ObjectOutcome& o) {
  nlohmann::json path_entities = nlohmann::json::array();
  for (std::size_t k = 0; k < o.result.path.entities.size(); ++k)
    path_entities.push_back(kb.layers[k].entities[o.result.path.entities[k]]);
  std::vector<double> scores;
  for (double v : o.result.scores.normalized) scores.push_back(round6(v));
  return {{"id", o.id},
          {"category", o.category},
          {"truth", std::string(to_string(o.truth))},
          {"final", std::string(to_string(o.result.final_affordance))},
          {"tree_prediction", std::string(to_string(o.result.tree_prediction))},
          {"leaf_purity", round6(o.result.leaf_purity)},
          {"path",
           {{"entities", path_entities},
            {"affordance", kb.affordances[o.result.path.affordance]},
            {"log_score", round6(o.result.path.log_score)}}},
          {"scores", scores}};
}

struct TrainFlags {
  std::string manifest;
  std::string out;
  std::uint64_t seed = 7;
  RunConfig config;
  std::vector<double> semi_axes;
  std::string max_depth;
  bool no_environment = false;
  CLI::Option* seed_opt = nullptr;
};

struct EvalFlags {
  std::string model;
  std::string manifest;
  std::string report;
  std::string csv;
  bool ablate = false;
  std::vector<std::string> zero_shot;
  bool point_metric = false;
  std::optional<double> threshold_frac;
  bool no_environment = false;
};

struct InferFlags {
  std::string model;
  std::string manifest;
  std::vector<std::string> ids;
  bool grasp = false;
  std::string out;
};

struct SynthFlags {
  std::string out;
  SynthConfig config;
  CLI::Option* seed_opt = nullptr;
};

int do_synth(SynthFlags& f, std::ostream& out) {
  f.config.seed = resolve_seed(f.seed_opt, f.config.seed);
  const auto manifest = synth_generate(f.config, f.out);
  out << "synth: wrote " << manifest.records.size() << " objects to " << (fs::path(f.out) / "manifest.json").string()
      << "\n";
  return kOk;
}

int do_train(TrainFlags& f, std::ostream& out) {
  auto& config = f.config;
  config.seed = resolve_seed(f.seed_opt, f.seed);
  if (!f.semi_axes.empty()) {
    if (f.semi_axes.size() != 2) fail(ErrorCode::InvalidArgument, "--semi-axes expects two values a,b");
    config.semi_axes = {f.semi_axes[0], f.semi_axes[1]};
  }
  if (f.max_depth == "unlimited") {
    config.tree.max_depth.reset();
  } else if (!f.max_depth.empty()) {
    std::size_t used = 0;
    try {
      config.tree.max_depth = std::stoul(f.max_depth, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != f.max_depth.size() || f.max_depth[0] == '-')
      fail(ErrorCode::InvalidArgument, "--max-depth expects a non-negative integer or 'unlimited'");
  }
  config.environment = !f.no_environment;
  config.validate();

  const auto manifest = load_manifest(f.manifest);
  const auto [train, test] = split_without_holdout(manifest, config);
  const auto model = train_model(train.records, config);
  save_model(model, f.out);
  out << "train: " << train.records.size() << " training objects, " << model.kb.layers.size()
      << " attribute layers, " << model.tree.leaf_count() << " tree leaves -> " << f.out << "\n";
  return kOk;
}

int do_infer(InferFlags& f, std::ostream& out) {
  const auto model = load_model(f.model);
  const auto manifest = load_manifest(f.manifest);
  std::vector<ObjectRecord> records;
  if (f.ids.empty()) {
    records = manifest.records;
  } else {
    for (const auto& id : f.ids) {
      auto it = std::find_if(manifest.records.begin(), manifest.records.end(),
                             [&](const ObjectRecord& r) { return r.id == id; });
      if (it == manifest.records.end()) fail(ErrorCode::InvalidArgument, "no record with id '" + id + "'");
      records.push_back(*it);
    }
  }
  const auto outcomes = evaluate_records(model, records);
  nlohmann::json doc = nlohmann::json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto entry = outcome_json(model.kb, outcomes[i]);
    if (f.grasp) {
      const auto grasp = compute_grasp(model, manifest, records[i], outcomes[i].result.final_affordance);
      auto ellipse = to_json(grasp.ellipse, grasp.region);
      for (auto& v : ellipse["center"]) v = round6(v.get<double>());
      entry["grasp"] = ellipse;
    }
    doc.push_back(std::move(entry));
  }
  if (!f.out.empty()) write_json(f.out, doc);
  if (outcomes.size() == 1) {
    out << "infer: " << outcomes[0].id << " -> " << to_string(outcomes[0].result.final_affordance);
    if (f.grasp) {
      const auto& c = doc[0]["grasp"]["center"];
      out << " grasp centre (" << c[0].get<double>() << ", " << c[1].get<double>() << ", "
          << c[2].get<double>() << ")";
    }
    out << "\n";
  } else {
    out << "infer: " << outcomes.size() << " objects" << (f.out.empty() ? "" : " -> " + f.out) << "\n";
  }
  return kOk;
}

int do_eval(EvalFlags& f, std::ostream& out) {
  const auto model = load_model(f.model);
  if (f.no_environment && model.config.environment)
    fail(ErrorCode::LayerMismatch, "--no-environment given but the model uses the environment layer");
  const auto manifest = load_manifest(f.manifest);
  const auto [train, test] = split_without_holdout(manifest, model.config);
  if (test.records.empty()) fail(ErrorCode::EmptyInput, "the test split is empty");

  const auto outcomes = evaluate_records(model, test.records);
  const auto cm = confusion_of(outcomes);
  std::vector<InferenceResult> results;
  for (const auto& o : outcomes) results.push_back(o.result);

  nlohmann::json report;
  report["evaluated"] = outcomes.size();
  report["layers"] = model.kb.layers.size();
  report["confusion"] = to_json(cm);
  report["diagonal_accuracy"] = round6(cm.diagonal_accuracy());
  report["posterior_stats"] = to_json(posterior_stats(results));
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : outcomes) objects.push_back(outcome_json(model.kb, o));
  report["objects"] = objects;

  std::string summary = "eval: " + std::to_string(outcomes.size()) + " objects, diagonal accuracy " +
                        std::to_string(round6(cm.diagonal_accuracy()));
  if (f.ablate) {
    const auto ablation = ablate_environment(train, test, model.config);
    report["ablation"] = to_json(ablation);
    summary += ", ablation delta " + std::to_string(round6(ablation.delta));
  }
  if (!f.zero_shot.empty()) {
    const auto zs = zero_shot_eval(model, manifest, f.zero_shot);
    report["zero_shot"] = to_json(zs);
    summary += ", zero-shot accuracy " + std::to_string(round6(zs.accuracy));
  }
  if (f.point_metric) {
    const double frac = f.threshold_frac.value_or(model.config.threshold_frac);
    const auto inputs = grasp_inputs(model, manifest, test.records, outcomes);
    const auto pm = point_metric(inputs, frac);
    report["point_metric"] = to_json(pm);
    summary += ", point-metric match " + std::to_string(round6(pm.percentage)) + "%";
  }
  write_json(f.report, report);
  if (!f.csv.empty()) {
    std::error_code ec;
    const fs::path csv(f.csv);
    if (csv.has_parent_path()) fs::create_directories(csv.parent_path(), ec);
    std::ofstream o(csv, std::ios::binary);
    if (!o) fail(ErrorCode::IoError, "cannot write " + f.csv);
    o << to_csv(cm);
  }
  out << summary << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grasp-affordance reasoning over attribute evidence", "afford"};
  app.require_subcommand(1);

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth.seed_opt = synth_cmd->add_option("--seed", synth.config.seed, "Random seed");
  synth_cmd->add_option("--per-class", synth.config.per_class, "Objects per affordance class");
  synth_cmd->add_option("--dimension", synth.config.dimension, "Feature dimension per attribute");
  synth_cmd->add_option("--separation", synth.config.separation, "Distance between entity means");
  synth_cmd->add_option("--env-informativeness", synth.config.env_informativeness,
                        "P(environment is the class canonical one)");
  synth_cmd->add_option("--points", synth.config.points_per_object, "Surface points per object");

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Fit classifiers, build the KB and train the tree");
  train_cmd->add_option("--manifest", train.manifest, "Dataset manifest")->required();
  train_cmd->add_option("--out", train.out, "Model directory")->required();
  train.seed_opt = train_cmd->add_option("--seed", train.seed, "Split seed");
  train_cmd->add_option("--bins", train.config.bins, "Number of z bins");
  train_cmd->add_option("--theta", train.config.theta, "Relative density threshold");
  train_cmd->add_option("--tau", train.config.tau, "Leaf purity needed to trust the tree");
  train_cmd->add_option("--epsilon", train.config.epsilon, "Variance floor");
  train_cmd->add_option("--train-fraction", train.config.train_fraction, "Training share per class");
  train_cmd->add_option("--threshold-frac", train.config.threshold_frac, "Point-metric threshold");
  train_cmd->add_option("--semi-axes", train.semi_axes, "End-effector semi-axes a,b (m)")->delimiter(',');
  train_cmd->add_option("--max-depth", train.max_depth, "Maximum tree depth, or 'unlimited' (default 1)");
  train_cmd->add_option("--min-leaf", train.config.tree.min_leaf_size, "Minimum rows per leaf");
  train_cmd->add_option("--holdout", train.config.holdout_categories, "Categories excluded from training")
      ->delimiter(',');
  train_cmd->add_flag("--no-environment", train.no_environment, "Drop the environment layer");

  InferFlags infer;
  auto* infer_cmd = app.add_subcommand("infer", "Infer affordances (and grasps) for manifest objects");
  infer_cmd->add_option("--model", infer.model, "Model directory")->required();
  infer_cmd->add_option("--manifest", infer.manifest, "Dataset manifest")->required();
  infer_cmd->add_option("--id", infer.ids, "Object id (repeatable; default all)");
  infer_cmd->add_flag("--grasp", infer.grasp, "Also compute the grasp ellipse");
  infer_cmd->add_option("--out", infer.out, "Write results as JSON");

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on the held-out split");
  eval_cmd->add_option("--model", eval.model, "Model directory")->required();
  eval_cmd->add_option("--manifest", eval.manifest, "Dataset manifest")->required();
  eval_cmd->add_option("--report", eval.report, "Report JSON path")->required();
  eval_cmd->add_option("--csv", eval.csv, "Confusion matrix CSV path");
  eval_cmd->add_flag("--ablate", eval.ablate, "Environment ablation");
  eval_cmd->add_option("--zero-shot-holdout", eval.zero_shot, "Held-out categories")->delimiter(',');
  eval_cmd->add_flag("--point-metric", eval.point_metric, "Grasp point metric");
  eval_cmd->add_option("--threshold-frac", eval.threshold_frac, "Point-metric threshold override");
  eval_cmd->add_flag("--no-environment", eval.no_environment, "Require a 3-layer model");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    out << app.help();
    return kUsageError;
  }

  try {
    if (synth_cmd->parsed()) return do_synth(synth, out);
    if (train_cmd->parsed()) return do_train(train, out);
    if (infer_cmd->parsed()) return do_infer(infer, out);
    return do_eval(eval, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_data_error(e.code()) ? kDataError : kModelError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kModelError;
  }
}

}  // namespace afford::cli
