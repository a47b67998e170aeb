#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "afford/datasets.hpp"
#include "support.hpp"

using namespace afford;
using test::error_of;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small synthetic manifest with n records per class and no files.
Manifest bare_manifest(std::size_t per_class) {
  Manifest m;
  for (auto kind : kAllAttributes) m.feature_dims[kind] = 1;
  for (auto cls : kAllAffordances) {
    for (std::size_t i = 0; i < per_class; ++i) {
      ObjectRecord r;
      r.id = std::string(to_string(cls)) + std::to_string(i);
      r.affordance = cls;
      m.records.push_back(r);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("xyz files") {
  test::TempDir dir("xyz");
  write_file(dir / "a.xyz", "# header\n0 0 0\n\n1.5 -2 3e-1\n");
  const auto pts = read_xyz(dir / "a.xyz");
  REQUIRE(pts.size() == 2);
  CHECK(pts[1] == Point3{1.5, -2.0, 0.3});

  std::mt19937_64 rng(50);
  std::vector<Point3> random(100);
  for (auto& p : random) p = {test::uniform(rng, -1, 1), test::uniform(rng, -1, 1), test::uniform(rng, -1, 1)};
  write_xyz(dir / "b.xyz", random);
  CHECK(read_xyz(dir / "b.xyz") == random);

  write_file(dir / "bad.xyz", "0 0\n");
  CHECK(error_of([&] { read_xyz(dir / "bad.xyz"); }) == ErrorCode::ParseError);
  write_file(dir / "nan.xyz", "0 x 1\n");
  CHECK(error_of([&] { read_xyz(dir / "nan.xyz"); }) == ErrorCode::ParseError);
  CHECK(error_of([&] { read_xyz(dir / "none.xyz"); }) == ErrorCode::MissingFile);
}

TEST_CASE("rectangle import") {
  test::TempDir dir("rect");
  std::string eight, six;
  for (int g = 0; g < 2; ++g) eight += "0 0 0\n1 0 0\n1 1 0\n0 1 0\n";
  for (int i = 0; i < 6; ++i) six += "0 0 0\n";
  write_file(dir / "eight.txt", eight);
  write_file(dir / "six.txt", six);
  const auto rects = import_rectangles(dir / "eight.txt");
  REQUIRE(rects.size() == 2);
  CHECK(rects[0].center() == Point3{0.5, 0.5, 0.0});
  CHECK(error_of([&] { import_rectangles(dir / "six.txt"); }) == ErrorCode::TruncatedGroup);

  write_rectangles(dir / "copy.txt", rects);
  CHECK(import_rectangles(dir / "copy.txt") == rects);
}

TEST_CASE("manifest round trip and validation") {
  test::TempDir dir("manifest");
  SynthConfig cfg;
  cfg.per_class = 2;
  cfg.points_per_object = 40;
  const auto m = synth_generate(cfg, dir.path());
  const auto loaded = load_manifest(dir / "manifest.json");
  CHECK(loaded == m);
  CHECK(to_json(loaded) == to_json(m));

  auto doc = to_json(m);
  doc["records"][0]["labels"]["shape"] = "sphere";
  CHECK(error_of([&] { manifest_from_json(doc, dir.path()); }) == ErrorCode::UnknownEntityName);

  doc = to_json(m);
  doc["records"][0]["point_cloud"] = "clouds/absent.xyz";
  CHECK(error_of([&] { manifest_from_json(doc, dir.path()); }) == ErrorCode::MissingFile);
  CHECK_NOTHROW(manifest_from_json(doc, dir.path(), false));

  doc = to_json(m);
  doc["records"][0]["features"]["texture"] = std::vector<double>{1.0};
  CHECK(error_of([&] { manifest_from_json(doc, dir.path()); }) == ErrorCode::ParseError);

  doc = to_json(m);
  doc["records"][1]["id"] = doc["records"][0]["id"];
  CHECK(error_of([&] { manifest_from_json(doc, dir.path()); }) == ErrorCode::ParseError);

  doc = to_json(m);
  doc["records"][0].erase("category");
  CHECK(error_of([&] { manifest_from_json(doc, dir.path()); }) == ErrorCode::ParseError);

  write_file(dir / "broken.json", "{");
  CHECK(error_of([&] { load_manifest(dir / "broken.json"); }) == ErrorCode::ParseError);
  CHECK(error_of([&] { load_manifest(dir / "absent.json"); }) == ErrorCode::MissingFile);
}

TEST_CASE("stratified split") {
  const auto m = bare_manifest(10);
  const auto [train, test] = split(m, 0.7, 3);
  std::map<AffordanceClass, std::size_t> n_train, n_test;
  for (const auto& r : train.records) ++n_train[r.affordance];
  for (const auto& r : test.records) ++n_test[r.affordance];
  for (auto cls : kAllAffordances) {
    CHECK(n_train[cls] == 7);
    CHECK(n_test[cls] == 3);
  }
  std::set<std::string> seen;
  for (const auto& r : train.records) seen.insert(r.id);
  for (const auto& r : test.records) CHECK(seen.insert(r.id).second);
  CHECK(seen.size() == m.records.size());

  const auto again = split(m, 0.7, 3);
  CHECK(again.first == train);
  CHECK(again.second == test);
  CHECK(split(m, 0.7, 4).first != train);

  CHECK(error_of([] { split(bare_manifest(1), 0.7, 3); }) == ErrorCode::ClassTooSmall);
  CHECK(error_of([&] { split(m, 1.0, 3); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("property: split sizes follow the rounding rule") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const auto per_class = test::uniform_index(rng, 2, 25);
    const double f = test::uniform(rng, 0.05, 0.95);
    const auto [train, test] = split(bare_manifest(per_class), f, trial);
    const auto expected = static_cast<std::size_t>(std::lround(f * static_cast<double>(per_class)));
    CHECK(train.records.size() == 7 * expected);
    CHECK(test.records.size() == 7 * (per_class - expected));
  }
}

TEST_CASE("synthetic generator is deterministic") {
  test::TempDir a("synth_a"), b("synth_b");
  SynthConfig cfg;
  cfg.per_class = 3;
  cfg.points_per_object = 60;
  synth_generate(cfg, a.path());
  synth_generate(cfg, b.path());
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a.path());
    CHECK(slurp(entry.path()) == slurp(b.path() / rel));
    ++files;
  }
  CHECK(files > 7 * 3 * 2);
}

TEST_CASE("synthetic labels follow the class table") {
  test::TempDir dir("synth_table");
  SynthConfig cfg;
  cfg.per_class = 4;
  cfg.points_per_object = 80;
  cfg.env_informativeness = 1.0;
  const auto m = synth_generate(cfg, dir.path());
  CHECK(m.records.size() == 28);
  for (const auto& r : m.records) {
    const auto& profile = *std::find_if(synth_profiles().begin(), synth_profiles().end(),
                                        [&](const AffordanceProfile& p) { return p.affordance == r.affordance; });
    CHECK(r.environment() == profile.environment);
    const auto cat = std::find_if(profile.categories.begin(), profile.categories.end(),
                                  [&](const CategorySpec& c) { return c.name == r.category; });
    REQUIRE(cat != profile.categories.end());
    CHECK(r.labels.at(AttributeKind::Shape) == cat->shape);
    CHECK(r.labels.at(AttributeKind::Texture) == cat->texture);
    CHECK(r.labels.at(AttributeKind::Categorical) == cat->categorical);
    for (auto kind : kAllAttributes) CHECK(r.features.at(kind).dimension() == cfg.dimension);
  }
  CHECK(error_of([&] {
          auto bad = cfg;
          bad.dimension = 7;
          synth_generate(bad, dir / "x");
        }) == ErrorCode::InvalidArgument);
  CHECK(error_of([&] {
          auto bad = cfg;
          bad.env_informativeness = 0.1;
          synth_generate(bad, dir / "x");
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("property: rectangles sit in the rule-consistent bins") {
  test::TempDir dir("synth_rect");
  SynthConfig cfg;
  cfg.per_class = 6;
  cfg.points_per_object = 300;
  const auto m = synth_generate(cfg, dir.path());
  std::size_t labelled = 0;
  for (const auto& r : m.records) {
    if (r.rectangles.empty()) continue;
    ++labelled;
    const auto cloud = load_cloud(m, r);
    const auto part = partition_z(cloud, cfg.bins);
    const auto region = select_region(load_candidates(m, r), part, r.affordance, cfg.theta);
    const double z = r.rectangles[0].center()[2];
    CHECK(z >= part.edges[region.bins.front()] - 1e-12);
    CHECK(z <= part.edges[region.bins.back() + 1] + 1e-12);
    if (r.affordance == AffordanceClass::ToContain || r.affordance == AffordanceClass::ToEat)
      CHECK(in_central_band(part, static_cast<std::size_t>(part.bin_of(z))));
  }
  CHECK(labelled > m.records.size() / 2);
}

TEST_CASE("property: zero separation makes features label independent") {
  test::TempDir dir("synth_s0");
  SynthConfig cfg;
  cfg.per_class = 150;
  cfg.points_per_object = 3;
  cfg.separation = 0.0;
  const auto m = synth_generate(cfg, dir.path());
  // Per-entity coordinate means are N(0, 1/n); none should stray past 5 sigma.
  for (auto kind : kAllAttributes) {
    std::map<std::string, std::pair<std::vector<double>, std::size_t>> sums;
    for (const auto& r : m.records) {
      auto& [sum, n] = sums[r.labels.at(kind)];
      sum.resize(cfg.dimension, 0.0);
      for (std::size_t k = 0; k < cfg.dimension; ++k) sum[k] += r.features.at(kind).values[k];
      ++n;
    }
    for (const auto& [name, entry] : sums)
      for (double s : entry.first)
        CHECK(std::abs(s / static_cast<double>(entry.second)) < 5.0 / std::sqrt(static_cast<double>(entry.second)));
  }
}

TEST_CASE("property: uninformative environments are independent of the class") {
  test::TempDir dir("synth_env");
  SynthConfig cfg;
  cfg.per_class = 1430;
  cfg.points_per_object = 2;
  cfg.env_informativeness = 1.0 / 7.0;
  const auto m = synth_generate(cfg, dir.path());
  const auto envs = entities_of(AttributeKind::Environment);
  std::array<std::array<double, 7>, 7> table{};
  for (const auto& r : m.records)
    table[index_of(r.affordance)][*entity_index(AttributeKind::Environment, r.environment())] += 1.0;
  // Pearson chi-square against uniform cells; row totals are fixed, so 7 * 6 = 42 dof,
  // critical value 76.084 at 0.001.
  const double expected = static_cast<double>(m.records.size()) / 49.0;
  double chi2 = 0.0;
  for (const auto& row : table)
    for (double o : row) chi2 += (o - expected) * (o - expected) / expected;
  CHECK(envs.size() == 7);
  CHECK(chi2 < 76.084);
}
