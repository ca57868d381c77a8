#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "mutomo/grid.hpp"
#include "mutomo/volume.hpp"

namespace mutomo {

struct RegionStats {
  double mean = 0.0;
  double stddev = 0.0;  // population convention
  std::size_t count = 0;
};

/// Throws EmptyRegionError for an empty mask and InvalidArgument naming the
/// first masked voxel without data.
RegionStats region_stats(const ImageVolume& volume, const VoxelMask& mask);

/// Pools statistics of two disjoint regions.
RegionStats pool(const RegionStats& a, const RegionStats& b);

/// Contrast-to-noise ratio (fg.mean - bg.mean) / bg.stddev.
/// Throws InvalidArgument when bg.stddev is not positive.
double cnr(const RegionStats& fg, const RegionStats& bg);

struct ValueWithError {
  double value = 0.0;
  double error = 0.0;
};

/// Affine map sending the smallest value to 0 and the largest to 1; errors
/// are scaled only. Throws InvalidArgument when fewer than two distinct values.
std::vector<ValueWithError> normalize_unit(const std::vector<ValueWithError>& values);
std::vector<double> normalize_unit(const std::vector<double>& values);

struct EdgeRise {
  double distance = 0.0;  // pixels
  double low_crossing = 0.0;
  double high_crossing = 0.0;
};

/// 10%-90% rise distance across an edge. The profile is rescaled so that
/// low_ref maps to 0 and high_ref to 1, then scanned from the end nearer to
/// low_ref for the first upward 0.1 crossing and the next upward 0.9 crossing.
/// Crossing positions are sample indices in scan order.
EdgeRise edge_rise(const std::vector<double>& profile, double low_ref, double high_ref);

/// Valid voxels with value >= theta_min.
VoxelMask threshold_voxels(const ImageVolume& volume, double theta_min);

/// 6-connected components of a mask, largest first (ties by lowest index).
std::vector<std::vector<std::size_t>> connected_components(const VoxelMask& mask);

/// Fraction of `component` voxels that lie in `region`.
double overlap_fraction(const std::vector<std::size_t>& component, const VoxelMask& region);

/// Voxel values sampled at the integer cells from `from` to `to` inclusive,
/// stepping one voxel along `axis`. Throws on out-of-range or invalid voxels.
std::vector<double> extract_profile(const ImageVolume& volume, int axis, std::array<int, 3> from, int to);

/// Value at quantile q of the valid voxels in slab x = ix (nearest rank).
double slab_quantile(const ImageVolume& volume, int ix, double q);

}  // namespace mutomo
