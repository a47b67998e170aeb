#pragma once

// Dataset manifests, ASCII geometry files, stratified splitting and the
// seeded synthetic generator.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "afford/attribute_model.hpp"
#include "afford/grasp_region.hpp"
#include "afford/taxonomy.hpp"

namespace afford {

namespace fs = std::filesystem;

struct GraspRectangle {
  std::array<Point3, 4> corners{};

  Point3 center() const;
  friend bool operator==(const GraspRectangle&, const GraspRectangle&) = default;
};

struct ObjectRecord {
  std::string id;
  std::string category;
  AffordanceClass affordance = AffordanceClass::ToEat;
  std::map<AttributeKind, std::string> labels;  // ground-truth entity per attribute
  FeatureSet features;
  std::string point_cloud;                 // relative to the manifest directory
  std::string candidates;                  // relative to the manifest directory
  std::optional<std::string> rectangles_file;
  std::vector<GraspRectangle> rectangles;  // loaded from rectangles_file

  const std::string& environment() const { return labels.at(AttributeKind::Environment); }
  friend bool operator==(const ObjectRecord&, const ObjectRecord&) = default;
};

inline constexpr int kManifestSchemaVersion = 1;

struct Manifest {
  int schema_version = kManifestSchemaVersion;
  std::map<AttributeKind, std::size_t> feature_dims;
  std::vector<ObjectRecord> records;
  fs::path base_dir;  // directory the relative paths resolve against

  fs::path resolve(const std::string& relative) const { return base_dir / relative; }
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

// ASCII "x y z" per line, '#' comments and blank lines ignored.
std::vector<Point3> read_xyz(const fs::path& path);
void write_xyz(const fs::path& path, std::span<const Point3> points);

/// Four-line groups of "x y z" corners.
std::vector<GraspRectangle> import_rectangles(const fs::path& path);
void write_rectangles(const fs::path& path, std::span<const GraspRectangle> rectangles);

nlohmann::json to_json(const Manifest& manifest);
/// Validates vocabulary and dimensions; with `check_files`, also checks that
/// referenced files exist and loads rectangle files.
Manifest manifest_from_json(const nlohmann::json& doc, const fs::path& base_dir,
                            bool check_files = true);

Manifest load_manifest(const fs::path& path);
void save_manifest(const Manifest& manifest, const fs::path& path);

PointCloud load_cloud(const Manifest& manifest, const ObjectRecord& record);
GraspCandidateSet load_candidates(const Manifest& manifest, const ObjectRecord& record);

/// Copy of `manifest` holding only the records accepted by `keep`.
template <typename Pred>
Manifest filter_records(const Manifest& manifest, Pred keep) {
  Manifest out = manifest;
  out.records.clear();
  for (const auto& r : manifest.records)
    if (keep(r)) out.records.push_back(r);
  return out;
}

/// Seeded, stratified by affordance; round(fraction * n) training records per class.
std::pair<Manifest, Manifest> split(const Manifest& manifest, double train_fraction,
                                    std::uint64_t seed);

struct SynthConfig {
  std::size_t per_class = 20;
  std::size_t dimension = 8;          // must cover the largest vocabulary (8)
  double separation = 4.0;            // distance between entity means
  double env_informativeness = 0.95;  // P(environment = class canonical), in [1/7, 1]
  std::uint64_t seed = 7;
  std::size_t points_per_object = 400;
  std::size_t bins = kDefaultBins;    // used to place rule-consistent rectangles
  double theta = kDefaultTheta;
};

struct CategorySpec {
  std::string name;
  std::string shape;
  std::string texture;
  std::string categorical;
};

struct AffordanceProfile {
  AffordanceClass affordance;
  std::string environment;               // canonical environment
  std::vector<CategorySpec> categories;  // all share the class triple
};

/// Built-in class -> (categories, entity triples, canonical environment) table.
const std::vector<AffordanceProfile>& synth_profiles();

/// Writes manifest.json plus clouds/, candidates/ and rectangles/ under out_dir.
Manifest synth_generate(const SynthConfig& config, const fs::path& out_dir);

}  // namespace afford
