#include "afford/grasp_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "afford/error.hpp"

namespace afford {

std::string_view to_string(RegionRule rule) {
  return rule == RegionRule::CentralBand ? "central_band" : "density_threshold";
}

bool uses_central_band(AffordanceClass affordance) {
  return affordance == AffordanceClass::ToContain || affordance == AffordanceClass::ToEat;
}

std::ptrdiff_t ZPartition::bin_of(double z) const {
  if (!(z >= z_min && z <= z_max)) return -1;
  const auto last = static_cast<std::ptrdiff_t>(bins) - 1;
  auto idx = static_cast<std::ptrdiff_t>(std::floor((z - z_min) / width()));
  idx = std::clamp<std::ptrdiff_t>(idx, 0, last);
  // Division rounding can land one bin off; the edges are authoritative.
  while (idx > 0 && z < edges[static_cast<std::size_t>(idx)]) --idx;
  while (idx < last && z >= edges[static_cast<std::size_t>(idx) + 1]) ++idx;
  return idx;
}

ZPartition partition_z(const PointCloud& cloud, std::size_t bins) {
  if (bins < 3) fail(ErrorCode::BadBinCount, "need at least 3 bins, got " + std::to_string(bins));
  if (cloud.points.empty()) fail(ErrorCode::EmptyInput, "empty point cloud");
  ZPartition part;
  part.z_min = std::numeric_limits<double>::infinity();
  part.z_max = -std::numeric_limits<double>::infinity();
  for (const auto& p : cloud.points) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2]))
      fail(ErrorCode::InvalidArgument, "point cloud has a non-finite coordinate");
    part.z_min = std::min(part.z_min, p[2]);
    part.z_max = std::max(part.z_max, p[2]);
  }
  if (!(part.z_max > part.z_min)) fail(ErrorCode::FlatCloud, "point cloud has zero z-extent");
  part.bins = bins;
  part.edges.resize(bins + 1);
  const double extent = part.z_max - part.z_min;
  for (std::size_t i = 0; i < bins; ++i)
    part.edges[i] = part.z_min + extent * static_cast<double>(i) / static_cast<double>(bins);
  part.edges[bins] = part.z_max;
  return part;
}

bool in_central_band(const ZPartition& part, std::size_t bin) {
  const double extent = part.z_max - part.z_min;
  const double c = part.center(bin);
  return c >= part.z_min + extent / 3.0 && c <= part.z_min + 2.0 * extent / 3.0;
}

std::vector<std::size_t> bin_counts(std::span<const Point3> points, const ZPartition& part) {
  std::vector<std::size_t> counts(part.bins, 0);
  for (const auto& p : points) {
    const auto b = part.bin_of(p[2]);
    if (b >= 0) ++counts[static_cast<std::size_t>(b)];
  }
  return counts;
}

std::vector<std::size_t> dense_bins(std::span<const std::size_t> counts, double theta) {
  const std::size_t top = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  std::vector<std::size_t> out;
  if (top == 0) return out;
  const double cut = theta * static_cast<double>(top);
  for (std::size_t b = 0; b < counts.size(); ++b)
    if (counts[b] > 0 && static_cast<double>(counts[b]) >= cut) out.push_back(b);
  return out;
}

GraspRegion select_region(const GraspCandidateSet& candidates, const ZPartition& part,
                          AffordanceClass affordance, double theta) {
  if (candidates.candidates.empty()) fail(ErrorCode::InvalidArgument, "empty candidate set");
  if (!(theta > 0.0 && theta <= 1.0)) fail(ErrorCode::InvalidArgument, "theta must lie in (0, 1]");

  GraspRegion region;
  if (uses_central_band(affordance)) {
    region.rule = RegionRule::CentralBand;
    for (std::size_t b = 0; b < part.bins; ++b)
      if (in_central_band(part, b)) region.bins.push_back(b);
  } else {
    region.rule = RegionRule::DensityThreshold;
    region.bins = dense_bins(bin_counts(candidates.candidates, part), theta);
  }

  std::vector<bool> chosen(part.bins, false);
  for (auto b : region.bins) chosen[b] = true;
  for (const auto& p : candidates.candidates) {
    const auto b = part.bin_of(p[2]);
    if (b >= 0 && chosen[static_cast<std::size_t>(b)]) region.points.push_back(p);
  }
  if (region.points.empty())
    fail(ErrorCode::NoFeasibleRegion, "no candidates in the " + std::string(to_string(region.rule)) +
                                          " bins for " + std::string(to_string(affordance)));
  return region;
}

GraspEllipse fit_ellipse(const GraspRegion& region, std::array<double, 2> semi_axes) {
  if (region.points.empty()) fail(ErrorCode::EmptyRegion, "grasp region has no points");
  if (!(semi_axes[0] > 0.0 && semi_axes[1] > 0.0))
    fail(ErrorCode::InvalidArgument, "semi-axes must be positive");
  GraspEllipse ellipse;
  Point3 sum{};
  for (const auto& p : region.points)
    for (std::size_t k = 0; k < 3; ++k) sum[k] += p[k];
  const auto n = static_cast<double>(region.points.size());
  for (std::size_t k = 0; k < 3; ++k) ellipse.center[k] = sum[k] / n;
  ellipse.semi_axes = semi_axes;
  return ellipse;
}

double bbox_diagonal(std::span<const Point3> points) {
  if (points.empty()) return 0.0;
  Point3 lo = points.front(), hi = points.front();
  for (const auto& p : points)
    for (std::size_t k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  return std::hypot(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]);
}

nlohmann::json to_json(const GraspEllipse& ellipse, const GraspRegion& region) {
  return {{"center", ellipse.center},
          {"semi_axes", ellipse.semi_axes},
          {"rule", std::string(to_string(region.rule))},
          {"bins", region.bins}};
}

}  // namespace afford
