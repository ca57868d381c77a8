#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "mutomo/grid.hpp"

namespace mutomo {

/// Finalized image over a voxel grid. Voxels without data are flagged invalid.
struct ImageVolume {
  GridSpec grid;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  ImageVolume() = default;
  explicit ImageVolume(const GridSpec& g) : grid(g), values(g.size(), 0.0), valid(g.size(), 0) {}

  bool is_valid(std::size_t i) const { return valid[i] != 0; }
  double at(int ix, int iy, int iz) const { return values[grid.index(ix, iy, iz)]; }
  std::size_t valid_count() const;
};

struct ValueRange {
  double min = 0.0;
  double max = 0.0;
};

/// Min and max over valid voxels; throws EmptyRegionError when none are valid.
ValueRange value_range(const ImageVolume& volume);

/// Affine map of valid voxels sending range.min to 0 and range.max to 1.
ImageVolume normalize_volume(const ImageVolume& volume, const ValueRange& range);

enum class VoxelPayload : std::uint8_t { intensity = 0, raw_sums = 1 };

/// On-disk voxel grid, little-endian:
///   "MUVOX001" | u32 nx ny nz | f64 origin x y z | f64 voxel | u8 kind
///   kind 0: f32 intensities (z fastest, then y, then x), validity bitmap
///           (1 bit per voxel, LSB first, zero-padded to a byte), NaN where invalid
///   kind 1: f64 weighted_sum[n] then f64 length_sum[n]
struct VoxelFile {
  GridSpec grid;
  VoxelPayload kind = VoxelPayload::intensity;
  std::vector<float> intensity;
  std::vector<std::uint8_t> valid;  // one entry per voxel
  std::vector<double> weighted_sum;
  std::vector<double> length_sum;

  bool operator==(const VoxelFile& o) const;
};

VoxelFile to_voxel_file(const ImageVolume& volume);
ImageVolume from_voxel_file(const VoxelFile& file);

void write_voxel_file(std::ostream& out, const VoxelFile& file);
VoxelFile read_voxel_file(std::istream& in);
void write_voxel_file(const std::filesystem::path& path, const VoxelFile& file);
VoxelFile read_voxel_file(const std::filesystem::path& path);

}  // namespace mutomo
