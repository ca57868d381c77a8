#pragma once

#include <limits>
#include <span>
#include <vector>

#include "mutomo/events.hpp"
#include "mutomo/fixed_sum.hpp"
#include "mutomo/grid.hpp"
#include "mutomo/volume.hpp"

namespace mutomo {

struct VoxelHit {
  std::size_t index;  // GridSpec::index order
  double length;      // chord length inside the voxel, cm
};

/// Exact incremental grid walk (Amanatides-Woo) over the part of `ray` with
/// parameter in [t_min, t_max] that lies inside the grid. Hits are appended
/// in ray order; zero-length touches are skipped. Axis ties step x, then y,
/// then z.
void traverse_voxels(const Ray& ray, const GridSpec& grid, std::vector<VoxelHit>& out, double t_min = 0.0,
                     double t_max = std::numeric_limits<double>::infinity());

/// Slab-method intersection of a ray with an axis-aligned box. Returns false
/// when the clipped parameter range is empty.
bool clip_to_box(const Ray& ray, const Vec3& lo, const Vec3& hi, double& t0, double& t1);

/// Path-length-weighted mean scattering angle per voxel.
///
/// Sums are fixed-point, so tallies form an exact commutative monoid under
/// merge: shard, reorder, and merge freely without changing a single bit.
class DofTally {
 public:
  explicit DofTally(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }

  /// Rotates `event` into the drum frame, projects it straight from the top
  /// module to the bottom plane, and adds theta_s * l and l to each voxel.
  void tally_event(const MuonEvent& event, double orientation);
  void tally_dataset(const EventDataset& dataset, unsigned workers = 1);

  void merge(const DofTally& other);

  double weighted_sum(std::size_t i) const { return weighted_[i].value(); }
  double length_sum(std::size_t i) const { return length_[i].value(); }
  bool has_data(std::size_t i) const { return length_[i].positive(); }
  /// Mean angle in rad; only meaningful where has_data().
  double intensity(std::size_t i) const { return FixedSum::ratio(weighted_[i], length_[i]); }

  ImageVolume finalize() const;
  VoxelFile raw_file() const;

  bool operator==(const DofTally& o) const;

 private:
  GridSpec grid_;
  std::vector<FixedSum> weighted_;
  std::vector<FixedSum> length_;
  std::vector<VoxelHit> scratch_;
};

/// Parameter along the top-module ray at which it reaches the bottom plane.
double bottom_plane_parameter(const MuonEvent& event);

/// Single shared tally over all orientations; throws on empty input.
DofTally reconstruct_dof(std::span<const EventDataset> datasets, const GridSpec& grid, unsigned workers = 1);

}  // namespace mutomo
