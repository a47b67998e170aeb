#include <cmath>

#include "afford/grasp_region.hpp"
#include "support.hpp"

using namespace afford;
using test::error_of;

namespace {

// Lateral surface of an upright cylinder.
std::vector<Point3> cylinder(std::mt19937_64& rng, std::size_t n, double radius, double z0, double z1) {
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = test::uniform(rng, 0.0, 2.0 * M_PI);
    pts.push_back({radius * std::cos(a), radius * std::sin(a), test::uniform(rng, z0, z1)});
  }
  return pts;
}

// Box surface with area-proportional face sampling.
std::vector<Point3> box(std::mt19937_64& rng, std::size_t n, Point3 size) {
  std::vector<Point3> pts;
  const double axy = size[0] * size[1], axz = size[0] * size[2], ayz = size[1] * size[2];
  const double total = 2 * (axy + axz + ayz);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = test::uniform(rng, 0.0, total);
    Point3 p{test::uniform(rng, 0.0, size[0]), test::uniform(rng, 0.0, size[1]), test::uniform(rng, 0.0, size[2])};
    const bool high = test::uniform(rng, 0.0, 1.0) < 0.5;
    if (pick < 2 * axy) p[2] = high ? size[2] : 0.0;
    else if (pick < 2 * (axy + axz)) p[1] = high ? size[1] : 0.0;
    else p[0] = high ? size[0] : 0.0;
    pts.push_back(p);
  }
  return pts;
}

std::vector<Point3> with_z(std::vector<double> zs) {
  std::vector<Point3> pts;
  for (double z : zs) pts.push_back({0.0, 0.0, z});
  return pts;
}

bool contains_bin(const GraspRegion& r, std::size_t b) {
  return std::find(r.bins.begin(), r.bins.end(), b) != r.bins.end();
}

}  // namespace

TEST_CASE("partition_z") {
  const auto part = partition_z(PointCloud{with_z({0.0, 0.5, 1.0})}, 5);
  const std::vector<double> expected = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  REQUIRE(part.edges.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(part.edges[i] == doctest::Approx(expected[i]));
  CHECK(part.edges.back() == 1.0);
  CHECK(part.bin_of(1.0) == 4);
  CHECK(part.bin_of(0.0) == 0);
  CHECK(part.bin_of(1.5) == -1);
  CHECK(error_of([] { partition_z(PointCloud{with_z({0.3, 0.3})}, 5); }) == ErrorCode::FlatCloud);
  CHECK(error_of([] { partition_z(PointCloud{with_z({0.0, 1.0})}, 2); }) == ErrorCode::BadBinCount);
  CHECK(error_of([] { partition_z(PointCloud{}, 5); }) == ErrorCode::EmptyInput);
}

TEST_CASE("bin_of agrees with the edges") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const double z0 = test::uniform(rng, -1.0, 1.0), z1 = z0 + test::uniform(rng, 1e-3, 2.0);
    const auto part = partition_z(PointCloud{with_z({z0, z1})}, 3 + trial);
    for (int i = 0; i < 200; ++i) {
      const double z = test::uniform(rng, z0, z1);
      const auto b = static_cast<std::size_t>(part.bin_of(z));
      CHECK(part.edges[b] <= z);
      CHECK((z < part.edges[b + 1] || b + 1 == part.bins));
    }
    for (std::size_t b = 0; b + 1 < part.bins; ++b) CHECK(part.bin_of(part.edges[b + 1]) == static_cast<std::ptrdiff_t>(b + 1));
  }
}

TEST_CASE("central band on a 1000-point cylinder") {
  std::mt19937_64 rng(42);
  const auto pts = cylinder(rng, 1000, 0.04, 0.0, 0.3);
  auto cloud = pts;
  cloud.push_back({0.0, 0.0, 0.0});
  cloud.push_back({0.0, 0.0, 0.3});
  const auto part = partition_z(PointCloud{cloud}, 9);
  const auto region = select_region(GraspCandidateSet{pts}, part, AffordanceClass::ToContain);
  CHECK(region.rule == RegionRule::CentralBand);
  CHECK(region.bins == std::vector<std::size_t>{3, 4, 5});
  std::size_t oracle = 0;
  for (const auto& p : pts) oracle += p[2] >= part.edges[3] && p[2] < part.edges[6] ? 1 : 0;
  CHECK(region.points.size() == oracle);
  for (const auto& p : region.points) {
    CHECK(p[2] >= 0.1 - 1e-12);
    CHECK(p[2] <= 0.2 + 1e-12);
  }
}

TEST_CASE("density rule and infeasible regions") {
  const auto one_bin = with_z({0.55, 0.56, 0.57, 0.58});
  const auto part = partition_z(PointCloud{with_z({0.0, 1.0})}, 10);
  const auto region = select_region(GraspCandidateSet{one_bin}, part, AffordanceClass::ToClean, 0.5);
  CHECK(region.bins == std::vector<std::size_t>{5});
  CHECK(region.points.size() == 4);
  CHECK(region.rule == RegionRule::DensityThreshold);

  const auto rim = with_z({0.95, 0.97, 1.0});
  CHECK(error_of([&] { select_region(GraspCandidateSet{rim}, part, AffordanceClass::ToContain); }) ==
        ErrorCode::NoFeasibleRegion);
  CHECK(error_of([&] { select_region(GraspCandidateSet{}, part, AffordanceClass::ToClean); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_of([&] { select_region(GraspCandidateSet{rim}, part, AffordanceClass::ToClean, 0.0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("property: density selection over cylinders and boxes") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = trial % 2 == 0 ? cylinder(rng, 1000, 0.05, 0.0, test::uniform(rng, 0.1, 0.4))
                                    : box(rng, 1000, {0.2, 0.1, test::uniform(rng, 0.05, 0.3)});
    const auto part = partition_z(PointCloud{pts}, 10);
    const auto counts = bin_counts(pts, part);
    const std::size_t top = *std::max_element(counts.begin(), counts.end());
    std::vector<std::size_t> previous;
    for (int t = 10; t >= 1; --t) {
      const double theta = t / 10.0;
      const auto region = select_region(GraspCandidateSet{pts}, part, AffordanceClass::ToHandOver, theta);
      for (auto b : region.bins) CHECK(static_cast<double>(counts[b]) >= theta * static_cast<double>(top));
      for (std::size_t b = 0; b < counts.size(); ++b)
        if (counts[b] > 0 && static_cast<double>(counts[b]) >= theta * static_cast<double>(top)) CHECK(contains_bin(region, b));
      // Lowering theta never drops a bin.
      for (auto b : previous) CHECK(contains_bin(region, b));
      previous = region.bins;
      if (t == 10)
        for (auto b : region.bins) CHECK(counts[b] == top);
    }
    const auto all = select_region(GraspCandidateSet{pts}, part, AffordanceClass::ToClean, 1e-9);
    for (std::size_t b = 0; b < counts.size(); ++b) CHECK(contains_bin(all, b) == (counts[b] > 0));

    for (auto cls : {AffordanceClass::ToContain, AffordanceClass::ToEat}) {
      const auto band = select_region(GraspCandidateSet{pts}, part, cls);
      for (auto b : band.bins) CHECK(in_central_band(part, b));
      for (const auto& p : band.points) CHECK(in_central_band(part, static_cast<std::size_t>(part.bin_of(p[2]))));
    }
  }
}

TEST_CASE("fit_ellipse") {
  GraspRegion two;
  two.points = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.2}};
  const auto e = fit_ellipse(two, {0.03, 0.02});
  CHECK(e.center[2] == doctest::Approx(0.1));
  CHECK(e.semi_axes == std::array<double, 2>{0.03, 0.02});

  GraspRegion single;
  single.points = {{0.1, -0.2, 0.3}};
  CHECK(fit_ellipse(single).center == Point3{0.1, -0.2, 0.3});
  CHECK(error_of([] { fit_ellipse(GraspRegion{}); }) == ErrorCode::EmptyRegion);
  CHECK(error_of([&] { fit_ellipse(single, {0.0, 0.02}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("property: ellipse centre matches a streaming mean and stays in the box") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    GraspRegion region;
    region.points = cylinder(rng, 1000, 0.05, 0.0, 0.2);
    const auto e = fit_ellipse(region);
    Point3 mean{};
    for (std::size_t i = 0; i < region.points.size(); ++i)
      for (std::size_t k = 0; k < 3; ++k) mean[k] += (region.points[i][k] - mean[k]) / static_cast<double>(i + 1);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(std::abs(e.center[k] - mean[k]) < 1e-12);
      double lo = INFINITY, hi = -INFINITY;
      for (const auto& p : region.points) {
        lo = std::min(lo, p[k]);
        hi = std::max(hi, p[k]);
      }
      CHECK(e.center[k] >= lo);
      CHECK(e.center[k] <= hi);
    }
  }
}

TEST_CASE("property: rigid z-translation shifts edges and centre") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pts = box(rng, 1000, {0.1, 0.1, 0.2});
    const double dz = test::uniform(rng, -1.0, 1.0);
    auto moved = pts;
    for (auto& p : moved) p[2] += dz;
    const auto a = partition_z(PointCloud{pts}, 10);
    const auto b = partition_z(PointCloud{moved}, 10);
    for (std::size_t i = 0; i < a.edges.size(); ++i) CHECK(b.edges[i] == doctest::Approx(a.edges[i] + dz));
    const auto ra = select_region(GraspCandidateSet{pts}, a, AffordanceClass::ToEat);
    const auto rb = select_region(GraspCandidateSet{moved}, b, AffordanceClass::ToEat);
    CHECK(ra.bins == rb.bins);
    const auto ea = fit_ellipse(ra), eb = fit_ellipse(rb);
    CHECK(std::abs(eb.center[2] - (ea.center[2] + dz)) < 1e-3);
  }
}

TEST_CASE("ellipse JSON layout") {
  GraspRegion r;
  r.points = {{0.0, 0.0, 0.1}};
  r.bins = {3, 4};
  r.rule = RegionRule::CentralBand;
  const auto doc = to_json(fit_ellipse(r), r);
  CHECK(doc.at("rule") == "central_band");
  CHECK(doc.at("bins").size() == 2);
  CHECK(doc.at("semi_axes")[0] == 0.03);
  CHECK(bbox_diagonal(std::vector<Point3>{{0, 0, 0}, {1, 2, 2}}) == 3.0);
}
