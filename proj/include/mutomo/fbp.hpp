#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mutomo/sinogram.hpp"
#include "mutomo/volume.hpp"

namespace mutomo {

/// One slab's sinogram: values[ir * n_theta + it] with bin centers at
/// r_min + (ir + 0.5) dr and (it + 0.5) pi / n_theta.
struct SinogramSlab {
  int n_r = 0;
  double r_min = 0.0;
  double dr = 1.0;
  int n_theta = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> populated;

  SinogramSlab() = default;
  SinogramSlab(int nr, double rmin, double step, int ntheta)
      : n_r(nr), r_min(rmin), dr(step), n_theta(ntheta),
        values(static_cast<std::size_t>(nr) * static_cast<std::size_t>(ntheta), 0.0),
        populated(values.size(), 0) {}

  double& at(int ir, int it) { return values[static_cast<std::size_t>(ir) * static_cast<std::size_t>(n_theta) + static_cast<std::size_t>(it)]; }
  double r_center(int ir) const { return r_min + (ir + 0.5) * dr; }
};

/// Mean-angle slab with populated flags set where count > 0.
SinogramSlab extract_slab(const SinogramStack& stack, int slab);

/// Fills empty bins from the nearest populated bins along theta in the same row.
void inpaint_angular(SinogramSlab& slab);

/// Reconstructed (y, z) slice; pixels[iy * n_z + iz].
struct SliceImage {
  int slab = 0;
  int n_y = 0;
  int n_z = 0;
  std::vector<double> pixels;
  bool empty = false;
};

/// Ram-Lak filter applied by FFT with zero padding to the next power of two
/// >= 2 n_r. The FFT plan is built once; apply() is safe to call concurrently.
class RampFilter {
 public:
  explicit RampFilter(int n_r);
  ~RampFilter();
  RampFilter(const RampFilter&) = delete;
  RampFilter& operator=(const RampFilter&) = delete;

  int padded_size() const { return n_pad_; }
  /// Filters `profile` (length n_r) in place; the ramp response is 2|f| in
  /// cycles per sample, as in common inverse-Radon routines.
  void apply(std::span<double> profile) const;

 private:
  struct Plans;
  int n_r_;
  int n_pad_;
  std::vector<double> response_;
  std::unique_ptr<Plans> plans_;
};

/// Filtered backprojection of one slab onto the grid's (y, z) pixel centers.
/// Theta columns without any populated bin are skipped and the result is
/// scaled by pi / (2 * used_columns * dr).
SliceImage fbp_slice(const SinogramSlab& slab, const GridSpec& grid, int slab_index);
SliceImage fbp_slice(const SinogramSlab& slab, const GridSpec& grid, int slab_index, const RampFilter& filter);

struct FbpResult {
  ImageVolume volume;         // raw filtered-backprojection values
  ValueRange normalization;   // min/max over valid voxels, for [0, 1] scaling
  std::vector<int> empty_slabs;
};

FbpResult reconstruct_fbp(const SinogramStack& stack, unsigned workers = 1);

struct FbpReconstruction {
  SinogramStack sinogram;
  FbpResult image;
};

FbpReconstruction reconstruct_fbp(std::span<const EventDataset> datasets, const GridSpec& grid,
                                  const SinogramSpec& spec, unsigned workers = 1);

}  // namespace mutomo
