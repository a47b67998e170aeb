#pragma once

// Affordance-constrained grasp region on a z-discretised candidate set.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "afford/taxonomy.hpp"

namespace afford {

using Point3 = std::array<double, 3>;

struct PointCloud {
  std::vector<Point3> points;  // metres, object frame, z up
};

struct GraspCandidateSet {
  std::vector<Point3> candidates;
};

struct ZPartition {
  double z_min = 0.0;
  double z_max = 0.0;
  std::size_t bins = 0;
  std::vector<double> edges;  // bins + 1 ascending

  double width() const { return (z_max - z_min) / static_cast<double>(bins); }
  double center(std::size_t bin) const { return edges[bin] + 0.5 * (edges[bin + 1] - edges[bin]); }
  /// Bin containing z (the top edge belongs to the last bin); -1 when outside.
  std::ptrdiff_t bin_of(double z) const;
};

enum class RegionRule { CentralBand, DensityThreshold };

std::string_view to_string(RegionRule rule);

struct GraspRegion {
  std::vector<std::size_t> bins;  // ascending
  std::vector<Point3> points;
  RegionRule rule = RegionRule::DensityThreshold;
};

struct GraspEllipse {
  Point3 center{};
  std::array<double, 2> semi_axes{};
  // Orientation is intentionally not modelled.
};

inline constexpr std::size_t kDefaultBins = 10;
inline constexpr double kDefaultTheta = 0.5;
inline constexpr std::array<double, 2> kDefaultSemiAxes = {0.03, 0.02};

/// Affordances whose grasps are confined to the central band.
bool uses_central_band(AffordanceClass affordance);

ZPartition partition_z(const PointCloud& cloud, std::size_t bins);

/// Whether a bin's centre lies in the middle third of [z_min, z_max].
bool in_central_band(const ZPartition& part, std::size_t bin);

std::vector<std::size_t> bin_counts(std::span<const Point3> points, const ZPartition& part);

/// Bins with count >= theta * max_count (and at least one candidate).
std::vector<std::size_t> dense_bins(std::span<const std::size_t> counts, double theta);

GraspRegion select_region(const GraspCandidateSet& candidates, const ZPartition& part,
                          AffordanceClass affordance, double theta = kDefaultTheta);

GraspEllipse fit_ellipse(const GraspRegion& region,
                         std::array<double, 2> semi_axes = kDefaultSemiAxes);

/// Axis-aligned bounding-box diagonal length.
double bbox_diagonal(std::span<const Point3> points);

nlohmann::json to_json(const GraspEllipse& ellipse, const GraspRegion& region);

}  // namespace afford
