#include "afford/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "afford/error.hpp"

namespace afford {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct NumberedLine {
  std::size_t number;
  std::string text;
};

std::vector<NumberedLine> content_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingFile, "cannot open " + path.string());
  std::vector<NumberedLine> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back({n, std::move(t)});
  }
  return out;
}

Point3 parse_point(const NumberedLine& line, const fs::path& path) {
  Point3 p{};
  const char* at = line.text.data();
  const char* end = at + line.text.size();
  auto bad = [&](const std::string& why) {
    fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line.number) + ": " + why);
  };
  for (std::size_t k = 0; k < 3; ++k) {
    while (at < end && (*at == ' ' || *at == '\t')) ++at;
    if (at < end && *at == '+') ++at;
    auto [ptr, ec] = std::from_chars(at, end, p[k]);
    if (ec != std::errc{}) bad("expected three numbers \"x y z\"");
    at = ptr;
  }
  while (at < end && (*at == ' ' || *at == '\t')) ++at;
  if (at != end) bad("trailing characters after \"x y z\"");
  if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) bad("non-finite coordinate");
  return p;
}

void ensure_parent(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + path.parent_path().string());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

std::string point_line(const Point3& p) {
  return format_double(p[0]) + " " + format_double(p[1]) + " " + format_double(p[2]) + "\n";
}

}  // namespace

Point3 GraspRectangle::center() const {
  Point3 c{};
  for (const auto& p : corners)
    for (std::size_t k = 0; k < 3; ++k) c[k] += p[k];
  for (auto& v : c) v /= 4.0;
  return c;
}

std::vector<Point3> read_xyz(const fs::path& path) {
  std::vector<Point3> points;
  for (const auto& line : content_lines(path)) points.push_back(parse_point(line, path));
  return points;
}

void write_xyz(const fs::path& path, std::span<const Point3> points) {
  std::string text;
  for (const auto& p : points) text += point_line(p);
  write_text(path, text);
}

std::vector<GraspRectangle> import_rectangles(const fs::path& path) {
  const auto lines = content_lines(path);
  if (lines.size() % 4 != 0)
    fail(ErrorCode::TruncatedGroup, path.string() + ": " + std::to_string(lines.size()) +
                                        " corner lines is not a multiple of 4");
  std::vector<GraspRectangle> out(lines.size() / 4);
  for (std::size_t i = 0; i < lines.size(); ++i) out[i / 4].corners[i % 4] = parse_point(lines[i], path);
  return out;
}

void write_rectangles(const fs::path& path, std::span<const GraspRectangle> rectangles) {
  std::string text;
  for (const auto& r : rectangles)
    for (const auto& p : r.corners) text += point_line(p);
  write_text(path, text);
}

nlohmann::json to_json(const Manifest& manifest) {
  nlohmann::json doc;
  doc["schema_version"] = manifest.schema_version;
  auto& dims = doc["feature_dims"] = nlohmann::json::object();
  for (const auto& [kind, d] : manifest.feature_dims) dims[std::string(to_string(kind))] = d;
  auto& records = doc["records"] = nlohmann::json::array();
  for (const auto& r : manifest.records) {
    nlohmann::json rec;
    rec["id"] = r.id;
    rec["category"] = r.category;
    rec["affordance"] = std::string(to_string(r.affordance));
    auto& labels = rec["labels"] = nlohmann::json::object();
    for (const auto& [kind, name] : r.labels) labels[std::string(to_string(kind))] = name;
    auto& features = rec["features"] = nlohmann::json::object();
    for (const auto& [kind, x] : r.features) features[std::string(to_string(kind))] = x.values;
    rec["point_cloud"] = r.point_cloud;
    rec["candidates"] = r.candidates;
    rec["rectangles"] = r.rectangles_file ? nlohmann::json(*r.rectangles_file) : nlohmann::json(nullptr);
    records.push_back(std::move(rec));
  }
  return doc;
}

Manifest manifest_from_json(const nlohmann::json& doc, const fs::path& base_dir, bool check_files) {
  std::string field = "<root>";
  try {
    Manifest m;
    m.base_dir = base_dir;
    field = "schema_version";
    m.schema_version = doc.at("schema_version").get<int>();
    if (m.schema_version != kManifestSchemaVersion)
      fail(ErrorCode::ParseError, "unsupported manifest schema_version " + std::to_string(m.schema_version));
    field = "feature_dims";
    for (const auto& [key, value] : doc.at("feature_dims").items())
      m.feature_dims[parse_attribute(key)] = value.get<std::size_t>();
    for (auto kind : kAllAttributes)
      if (!m.feature_dims.count(kind))
        fail(ErrorCode::ParseError, "feature_dims lacks " + std::string(to_string(kind)));

    std::set<std::string> ids;
    const auto& records = doc.at("records");
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& rec = records[i];
      const std::string where = "records[" + std::to_string(i) + "]";
      ObjectRecord r;
      field = where + ".id";
      r.id = rec.at("id").get<std::string>();
      if (!ids.insert(r.id).second) fail(ErrorCode::ParseError, "duplicate record id '" + r.id + "'");
      field = where + ".category";
      r.category = rec.at("category").get<std::string>();
      field = where + ".affordance";
      r.affordance = parse_affordance(rec.at("affordance").get<std::string>());
      for (auto kind : kAllAttributes) {
        const std::string kname(to_string(kind));
        field = where + ".labels." + kname;
        r.labels[kind] = make_entity(kind, rec.at("labels").at(kname).get<std::string>()).name;
        field = where + ".features." + kname;
        FeatureVector x{rec.at("features").at(kname).get<std::vector<double>>()};
        if (x.dimension() != m.feature_dims.at(kind))
          fail(ErrorCode::ParseError, field + " has dimension " + std::to_string(x.dimension()) +
                                          ", expected " + std::to_string(m.feature_dims.at(kind)));
        for (double v : x.values)
          if (!std::isfinite(v)) fail(ErrorCode::ParseError, field + " has a non-finite entry");
        r.features[kind] = std::move(x);
      }
      field = where + ".point_cloud";
      r.point_cloud = rec.at("point_cloud").get<std::string>();
      field = where + ".candidates";
      r.candidates = rec.at("candidates").get<std::string>();
      field = where + ".rectangles";
      if (rec.contains("rectangles") && !rec.at("rectangles").is_null())
        r.rectangles_file = rec.at("rectangles").get<std::string>();

      if (check_files) {
        for (const auto* rel : {&r.point_cloud, &r.candidates})
          if (!fs::exists(m.resolve(*rel)))
            fail(ErrorCode::MissingFile, where + " references missing file " + m.resolve(*rel).string());
        if (r.rectangles_file) {
          const auto p = m.resolve(*r.rectangles_file);
          if (!fs::exists(p)) fail(ErrorCode::MissingFile, where + " references missing file " + p.string());
          r.rectangles = import_rectangles(p);
        }
      }
      m.records.push_back(std::move(r));
    }
    return m;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::ParseError, "manifest field " + field + ": " + ex.what());
  }
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingFile, "cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    fail(ErrorCode::ParseError, path.string() + ": " + ex.what());
  }
  return manifest_from_json(doc, path.parent_path(), true);
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  write_text(path, to_json(manifest).dump(2) + "\n");
}

PointCloud load_cloud(const Manifest& manifest, const ObjectRecord& record) {
  return PointCloud{read_xyz(manifest.resolve(record.point_cloud))};
}

GraspCandidateSet load_candidates(const Manifest& manifest, const ObjectRecord& record) {
  return GraspCandidateSet{read_xyz(manifest.resolve(record.candidates))};
}

std::pair<Manifest, Manifest> split(const Manifest& manifest, double train_fraction,
                                    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
  std::array<std::vector<std::size_t>, kAffordanceCount> by_class;
  for (std::size_t i = 0; i < manifest.records.size(); ++i)
    by_class[index_of(manifest.records[i].affordance)].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<bool> in_train(manifest.records.size(), false);
  for (std::size_t c = 0; c < kAffordanceCount; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < 2)
      fail(ErrorCode::ClassTooSmall, std::string(to_string(affordance_at(c))) +
                                         " has a single record and cannot be stratified");
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = true;
  }
  Manifest train = manifest, test = manifest;
  train.records.clear();
  test.records.clear();
  for (std::size_t i = 0; i < manifest.records.size(); ++i)
    (in_train[i] ? train : test).records.push_back(manifest.records[i]);
  return {std::move(train), std::move(test)};
}

const std::vector<AffordanceProfile>& synth_profiles() {
  static const std::vector<AffordanceProfile> profiles = {
      {AffordanceClass::ToEat, "living room",
       {{"apple", "round", "smooth", "food"},
        {"orange", "round", "smooth", "food"}}},
      {AffordanceClass::ToContain, "kitchen",
       {{"glass", "cylinder", "glass", "container"},
        {"mug", "cylinder", "glass", "container"}}},
      {AffordanceClass::ToHandOver, "office",
       {{"cereal_box", "box", "cardboard", "miscellaneous"},
        {"tissue_box", "box", "cardboard", "miscellaneous"}}},
      {AffordanceClass::ToBrush, "bathroom",
       {{"toothbrush", "long", "plastic", "personal"},
        {"hairbrush", "long", "plastic", "personal"}}},
      {AffordanceClass::ToSqueeze, "play-room",
       {{"rubber_duck", "irregular", "rubber", "miscellaneous"},
        {"squeeze_toy", "irregular", "rubber", "miscellaneous"}}},
      {AffordanceClass::ToClean, "closet",
       {{"cloth", "irregular", "fabric", "miscellaneous"},
        {"towel", "irregular", "fabric", "miscellaneous"}}},
      {AffordanceClass::ToWear, "bedroom",
       {{"cap", "round", "fabric", "personal"},
        {"beanie", "round", "fabric", "personal"}}},
  };
  return profiles;
}

namespace {

class SurfaceSampler {
 public:
  explicit SurfaceSampler(std::mt19937_64& rng) : rng_(rng) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  Point3 unit_direction() {
    std::normal_distribution<double> n(0.0, 1.0);
    for (;;) {
      Point3 v{n(rng_), n(rng_), n(rng_)};
      const double len = std::hypot(v[0], v[1], v[2]);
      if (len > 1e-12) return {v[0] / len, v[1] / len, v[2] / len};
    }
  }

  std::vector<Point3> box(double w, double d, double h, std::size_t n) {
    const std::array<double, 3> areas = {w * d, w * h, d * h};  // top/bottom, front/back, left/right
    const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
    std::vector<Point3> pts;
    for (std::size_t i = 0; i < n; ++i) {
      double pick = uniform(0.0, total);
      const double side = uniform(0.0, 1.0) < 0.5 ? 0.0 : 1.0;
      const double u = uniform(-0.5, 0.5), v = uniform(0.0, 1.0);
      if ((pick -= 2.0 * areas[0]) < 0.0)
        pts.push_back({u * w, uniform(-0.5, 0.5) * d, side * h});
      else if ((pick -= 2.0 * areas[1]) < 0.0)
        pts.push_back({u * w, (side - 0.5) * d, v * h});
      else
        pts.push_back({(side - 0.5) * w, u * d, v * h});
    }
    return pts;
  }

  std::vector<Point3> cylinder(double r, double h, std::size_t n) {
    const double lateral = 2.0 * std::numbers::pi * r * h;
    const double caps = 2.0 * std::numbers::pi * r * r;
    std::vector<Point3> pts;
    for (std::size_t i = 0; i < n; ++i) {
      const double phi = uniform(0.0, 2.0 * std::numbers::pi);
      if (uniform(0.0, lateral + caps) < lateral) {
        pts.push_back({r * std::cos(phi), r * std::sin(phi), uniform(0.0, h)});
      } else {
        const double rho = r * std::sqrt(uniform(0.0, 1.0));
        const double z = uniform(0.0, 1.0) < 0.5 ? 0.0 : h;
        pts.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
      }
    }
    return pts;
  }

  std::vector<Point3> ellipsoid(double a, double b, double c, std::size_t n) {
    std::vector<Point3> pts;
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = unit_direction();
      pts.push_back({a * d[0], b * d[1], c + c * d[2]});
    }
    return pts;
  }

 private:
  std::mt19937_64& rng_;
};

std::vector<Point3> sample_shape(const std::string& shape, SurfaceSampler& s, std::size_t n) {
  if (shape == "box") return s.box(s.uniform(0.06, 0.2), s.uniform(0.04, 0.15), s.uniform(0.08, 0.3), n);
  if (shape == "cylinder") return s.cylinder(s.uniform(0.03, 0.06), s.uniform(0.08, 0.2), n);
  if (shape == "long") return s.cylinder(s.uniform(0.008, 0.015), s.uniform(0.15, 0.25), n);
  if (shape == "round") {
    const double r = s.uniform(0.03, 0.08);
    return s.ellipsoid(r, r, r, n);
  }
  return s.ellipsoid(s.uniform(0.03, 0.1), s.uniform(0.03, 0.1), s.uniform(0.02, 0.06), n);
}

// Rectangle in the x-z plane centred on the rule-consistent region centroid,
// clamped to the selected bins' z-span.
std::optional<GraspRectangle> rule_rectangle(const std::vector<Point3>& cloud, AffordanceClass cls,
                                             const SynthConfig& config) {
  try {
    const auto part = partition_z(PointCloud{cloud}, config.bins);
    const auto region = select_region(GraspCandidateSet{cloud}, part, cls, config.theta);
    const auto centre = fit_ellipse(region, kDefaultSemiAxes).center;
    const double z_lo = part.edges[region.bins.front()];
    const double z_hi = part.edges[region.bins.back() + 1];
    const double half_h = std::min({0.25 * part.width(), centre[2] - z_lo, z_hi - centre[2]});
    const double half_w = kDefaultSemiAxes[0];
    GraspRectangle rect;
    rect.corners = {Point3{centre[0] - half_w, centre[1], centre[2] - half_h},
                    Point3{centre[0] + half_w, centre[1], centre[2] - half_h},
                    Point3{centre[0] + half_w, centre[1], centre[2] + half_h},
                    Point3{centre[0] - half_w, centre[1], centre[2] + half_h}};
    return rect;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string padded(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

}  // namespace

Manifest synth_generate(const SynthConfig& config, const fs::path& out_dir) {
  std::size_t largest = 0;
  for (auto kind : kAllAttributes) largest = std::max(largest, entities_of(kind).size());
  if (config.dimension < largest)
    fail(ErrorCode::InvalidArgument, "synthetic feature dimension must be at least " + std::to_string(largest));
  if (config.per_class == 0) fail(ErrorCode::InvalidArgument, "per_class must be positive");
  if (!(config.env_informativeness >= 1.0 / 7.0 - 1e-12 && config.env_informativeness <= 1.0))
    fail(ErrorCode::InvalidArgument, "environment informativeness must lie in [1/7, 1]");
  if (!(config.separation >= 0.0)) fail(ErrorCode::InvalidArgument, "separation must be non-negative");
  if (config.points_per_object == 0) fail(ErrorCode::InvalidArgument, "points_per_object must be positive");

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SurfaceSampler sampler(rng);
  // Entity i of a kind sits at (s / sqrt 2) e_i, so any two means are s apart.
  const double scale = config.separation / std::numbers::sqrt2;

  Manifest m;
  m.base_dir = out_dir;
  for (auto kind : kAllAttributes) m.feature_dims[kind] = config.dimension;

  for (const auto& profile : synth_profiles()) {
    const std::string cls(to_string(profile.affordance));
    for (std::size_t i = 0; i < config.per_class; ++i) {
      const auto& cat = profile.categories[i % profile.categories.size()];
      ObjectRecord r;
      r.id = cls + "_" + padded(i);
      r.category = cat.name;
      r.affordance = profile.affordance;
      r.labels[AttributeKind::Shape] = cat.shape;
      r.labels[AttributeKind::Texture] = cat.texture;
      r.labels[AttributeKind::Categorical] = cat.categorical;

      std::string env = profile.environment;
      if (unit(rng) >= config.env_informativeness) {
        auto all = entities_of(AttributeKind::Environment);
        std::vector<std::string> others;
        for (auto e : all)
          if (e != profile.environment) others.emplace_back(e);
        env = others[std::uniform_int_distribution<std::size_t>(0, others.size() - 1)(rng)];
      }
      r.labels[AttributeKind::Environment] = env;

      for (auto kind : kAllAttributes) {
        const auto e = *entity_index(kind, r.labels[kind]);
        FeatureVector x;
        x.values.resize(config.dimension);
        for (std::size_t k = 0; k < config.dimension; ++k)
          x.values[k] = (k == e ? scale : 0.0) + noise(rng);
        r.features[kind] = std::move(x);
      }

      const auto cloud = sample_shape(cat.shape, sampler, config.points_per_object);
      r.point_cloud = "clouds/" + r.id + ".xyz";
      r.candidates = "candidates/" + r.id + ".xyz";
      write_xyz(out_dir / r.point_cloud, cloud);
      write_xyz(out_dir / r.candidates, cloud);
      if (auto rect = rule_rectangle(cloud, profile.affordance, config)) {
        r.rectangles_file = "rectangles/" + r.id + ".txt";
        r.rectangles = {*rect};
        write_rectangles(out_dir / *r.rectangles_file, r.rectangles);
      }
      m.records.push_back(std::move(r));
    }
  }
  save_manifest(m, out_dir / "manifest.json");
  return m;
}

}  // namespace afford
