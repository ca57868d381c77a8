#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "mutomo/events.hpp"
#include "mutomo/fixed_sum.hpp"
#include "mutomo/grid.hpp"

namespace mutomo {

/// Line of a drum-frame track projected onto the (y, z) plane.
struct LineParams {
  double r;       // signed distance from the drum axis, cm
  double theta;   // normal angle from +y, [0, pi)
  double x_star;  // x at the track's closest approach to the axis
};

/// Folds (r, theta) onto theta in [0, pi), flipping r when theta is folded.
LineParams fold_line(double r, double theta, double x_star = 0.0);

/// Returns nullopt when the track is parallel to the drum axis.
std::optional<LineParams> line_params(const Ray& drum_frame_ray);

enum class SlabAssignment {
  closest_approach,  // one slab, the one holding x_star
  all_crossed,       // every slab the in-grid part of the track touches
};

struct SinogramSpec {
  int n_r = 80;
  double r_min = -40.0;  // lower edge of the first radial bin, cm
  double dr = 1.0;
  int n_theta = 180;     // bins cover [0, pi)
  SlabAssignment slabs = SlabAssignment::closest_approach;
  bool inpaint = false;  // fill empty bins from angular neighbors before filtering

  double dtheta() const { return std::numbers::pi / n_theta; }
  bool operator==(const SinogramSpec&) const = default;
};

void validate(const SinogramSpec& spec);

struct SinogramDrops {
  std::uint64_t parallel_to_axis = 0;
  std::uint64_t radial_range = 0;
  std::uint64_t slab_range = 0;
};

/// Per-x-slab (r, theta) tallies of scattering angle. Slabs are the grid's
/// x voxels. Bin order is slab-major with theta fastest.
class SinogramStack {
 public:
  SinogramStack(const GridSpec& grid, const SinogramSpec& spec);

  const GridSpec& grid() const { return grid_; }
  const SinogramSpec& spec() const { return spec_; }
  int n_slabs() const { return grid_.dims[0]; }
  std::size_t bin(int slab, int ir, int it) const {
    return (static_cast<std::size_t>(slab) * static_cast<std::size_t>(spec_.n_r) + static_cast<std::size_t>(ir)) *
               static_cast<std::size_t>(spec_.n_theta) +
           static_cast<std::size_t>(it);
  }
  std::size_t size() const { return counts_.size(); }

  /// Adds one angle to a bin.
  void add(int slab, int ir, int it, double theta_s);
  /// Rotates to the drum frame, projects from the top module, and bins.
  void add_event(const MuonEvent& event, double orientation);
  void add_dataset(const EventDataset& dataset, unsigned workers = 1);
  void merge(const SinogramStack& other);

  std::uint64_t count(std::size_t b) const { return counts_[b]; }
  double sum(std::size_t b) const { return sums_[b].value(); }
  /// Mean angle; 0 for empty bins.
  double mean(std::size_t b) const { return counts_[b] ? sums_[b].value() / static_cast<double>(counts_[b]) : 0.0; }
  const SinogramDrops& drops() const { return drops_; }

  /// Radial bin of `r`, or -1.
  int radial_bin(double r) const;
  int theta_bin(double theta) const;

  bool operator==(const SinogramStack& o) const {
    return grid_ == o.grid_ && spec_ == o.spec_ && sums_ == o.sums_ && counts_ == o.counts_;
  }

 private:
  GridSpec grid_;
  SinogramSpec spec_;
  std::vector<FixedSum> sums_;
  std::vector<std::uint64_t> counts_;
  SinogramDrops drops_;
};

SinogramStack accumulate_sinogram(std::span<const EventDataset> datasets, const GridSpec& grid,
                                  const SinogramSpec& spec, unsigned workers = 1);

/// Sinogram file, little-endian:
///   "MUSIN001" | u32 n_slabs n_r n_theta | f64 r_min dr dtheta x_min dx
///   f32 means[n_slabs*n_r*n_theta] (theta fastest) | u32 counts, same order
struct SinogramFile {
  std::uint32_t n_slabs = 0, n_r = 0, n_theta = 0;
  double r_min = 0, dr = 0, dtheta = 0, x_min = 0, dx = 0;
  std::vector<float> means;
  std::vector<std::uint32_t> counts;

  bool operator==(const SinogramFile& o) const;
};

SinogramFile to_sinogram_file(const SinogramStack& stack);
void write_sinogram_file(std::ostream& out, const SinogramFile& file);
SinogramFile read_sinogram_file(std::istream& in);
void write_sinogram_file(const std::filesystem::path& path, const SinogramFile& file);
SinogramFile read_sinogram_file(const std::filesystem::path& path);

}  // namespace mutomo
