#include "afford/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "afford/error.hpp"

namespace afford {

void RunConfig::validate() const {
  if (bins < 3) fail(ErrorCode::BadBinCount, "bins must be at least 3");
  if (!(theta > 0.0 && theta <= 1.0)) fail(ErrorCode::InvalidArgument, "theta must lie in (0, 1]");
  if (!(tau >= 0.0 && tau <= 1.0)) fail(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
  if (!(threshold_frac > 0.0)) fail(ErrorCode::InvalidArgument, "threshold fraction must be positive");
  if (!(semi_axes[0] > 0.0 && semi_axes[1] > 0.0))
    fail(ErrorCode::InvalidArgument, "end-effector semi-axes must be positive");
  if (tree.min_leaf_size == 0) fail(ErrorCode::InvalidArgument, "min leaf size must be positive");
}

std::vector<AttributeKind> RunConfig::layers() const {
  if (environment) return {kAllAttributes.begin(), kAllAttributes.end()};
  return {kObjectAttributes.begin(), kObjectAttributes.end()};
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"bins", c.bins},
          {"theta", c.theta},
          {"tau", c.tau},
          {"epsilon", c.epsilon},
          {"train_fraction", c.train_fraction},
          {"threshold_frac", c.threshold_frac},
          {"semi_axes", c.semi_axes},
          {"environment", c.environment},
          {"tree",
           {{"max_depth", c.tree.max_depth ? nlohmann::json(*c.tree.max_depth) : nlohmann::json(nullptr)},
            {"min_leaf_size", c.tree.min_leaf_size}}},
          {"holdout_categories", c.holdout_categories}};
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
  try {
    RunConfig c;
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.bins = doc.at("bins").get<std::size_t>();
    c.theta = doc.at("theta").get<double>();
    c.tau = doc.at("tau").get<double>();
    c.epsilon = doc.at("epsilon").get<double>();
    c.train_fraction = doc.at("train_fraction").get<double>();
    c.threshold_frac = doc.at("threshold_frac").get<double>();
    c.semi_axes = doc.at("semi_axes").get<std::array<double, 2>>();
    c.environment = doc.at("environment").get<bool>();
    const auto& tree = doc.at("tree");
    if (!tree.at("max_depth").is_null()) c.tree.max_depth = tree.at("max_depth").get<std::size_t>();
    c.tree.min_leaf_size = tree.at("min_leaf_size").get<std::size_t>();
    c.holdout_categories = doc.at("holdout_categories").get<std::vector<std::string>>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::ParseError, std::string("config json: ") + ex.what());
  }
}

namespace {

// Classifiers over the entities observed in `records`; the graph keeps the full vocabulary.
ClassifierSet fit_classifiers(std::span<const ObjectRecord* const> records, std::span<const AttributeKind> kinds,
                              double epsilon) {
  ClassifierSet out;
  for (auto kind : kinds) {
    std::vector<LabelledFeature> samples;
    samples.reserve(records.size());
    for (const auto* r : records) samples.push_back({r->features.at(kind), make_entity(kind, r->labels.at(kind))});
    std::vector<std::string> vocabulary;
    for (auto name : entities_of(kind)) {
      if (std::any_of(samples.begin(), samples.end(), [&](const LabelledFeature& f) { return f.entity.name == name; }))
        vocabulary.emplace_back(name);
    }
    out.emplace(kind, fit_gaussian(samples, kind, vocabulary, epsilon));
  }
  return out;
}

}  // namespace

Model train_model(std::span<const ObjectRecord> training, const RunConfig& config) {
  config.validate();
  if (training.empty()) fail(ErrorCode::EmptyTrainingSet, "no training records");
  Model model;
  model.config = config;
  const auto kinds = config.layers();
  const auto layers = layer_specs(kinds);
  for (const auto& r : training)
    for (auto kind : kinds)
      if (!r.labels.count(kind) || !r.features.count(kind))
        fail(ErrorCode::MissingAttribute, "record '" + r.id + "' lacks " + std::string(to_string(kind)));

  std::vector<const ObjectRecord*> all;
  for (const auto& r : training) all.push_back(&r);
  model.classifiers = fit_classifiers(all, kinds, config.epsilon);

  std::vector<LabelledContext> contexts;
  contexts.reserve(training.size());
  for (const auto& r : training)
    contexts.push_back({layered_context(model.classifiers, r.features, layers), r.affordance});
  model.kb = build_kb(contexts, layers);

  std::vector<TrainingRow> rows;
  rows.reserve(contexts.size());
  for (const auto& c : contexts)
    rows.push_back({concatenate(model.kb, layered_evidence(model.kb, c.context)).y, c.label});
  model.tree = train_tree(rows, config.tree);
  return model;
}

InferenceResult infer_record(const Model& model, const ObjectRecord& record) {
  return infer(model.classifiers, model.kb, model.tree, record.features, model.config.tau);
}

GraspResult compute_grasp(const Model& model, const Manifest& manifest, const ObjectRecord& record,
                          AffordanceClass affordance) {
  const auto cloud = load_cloud(manifest, record);
  const auto candidates = load_candidates(manifest, record);
  const auto part = partition_z(cloud, model.config.bins);
  GraspResult out;
  out.region = select_region(candidates, part, affordance, model.config.theta);
  out.ellipse = fit_ellipse(out.region, model.config.semi_axes);
  out.bbox_diagonal = bbox_diagonal(cloud.points);
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + path.parent_path().string());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingFile, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    fail(ErrorCode::ParseError, path.string() + ": " + ex.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& dir) {
  for (const auto& [kind, clf] : model.classifiers)
    write_json(dir / "classifiers" / (std::string(to_string(kind)) + ".json"), to_json(clf));
  write_json(dir / "kb.json", to_json(model.kb));
  write_json(dir / "tree.json", to_json(model.tree));
  write_json(dir / "config.json", to_json(model.config));
}

Model load_model(const std::filesystem::path& dir) {
  Model model;
  model.config = run_config_from_json(read_json(dir / "config.json"));
  for (auto kind : model.config.layers()) {
    auto clf = classifier_from_json(read_json(dir / "classifiers" / (std::string(to_string(kind)) + ".json")));
    if (clf.kind() != kind) fail(ErrorCode::ParseError, "classifier file holds the wrong attribute");
    model.classifiers.emplace(kind, std::move(clf));
  }
  model.kb = kb_from_json(read_json(dir / "kb.json"));
  model.tree = tree_from_json(read_json(dir / "tree.json"));
  if (model.kb.layers.size() != model.config.layers().size())
    fail(ErrorCode::LayerMismatch, "kb layers disagree with the model configuration");
  if (model.tree.dimension() != model.kb.entity_count())
    fail(ErrorCode::LayerMismatch, "tree dimension disagrees with the kb entity count");
  return model;
}

}  // namespace afford
