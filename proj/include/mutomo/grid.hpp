#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "mutomo/vec3.hpp"

namespace mutomo {

/// Regular grid of cubic voxels. Memory order is z fastest, then y, then x.
struct GridSpec {
  std::array<int, 3> dims{50, 50, 60};
  Vec3 origin{-25.0, -25.0, -30.0};  // minimum corner, cm
  double voxel = 1.0;                // edge length, cm

  std::size_t size() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * static_cast<std::size_t>(dims[1]) +
            static_cast<std::size_t>(iy)) *
               static_cast<std::size_t>(dims[2]) +
           static_cast<std::size_t>(iz);
  }
  std::array<int, 3> coords(std::size_t idx) const {
    const auto nz = static_cast<std::size_t>(dims[2]);
    const auto ny = static_cast<std::size_t>(dims[1]);
    return {static_cast<int>(idx / (ny * nz)), static_cast<int>((idx / nz) % ny),
            static_cast<int>(idx % nz)};
  }
  bool contains(int ix, int iy, int iz) const {
    return ix >= 0 && iy >= 0 && iz >= 0 && ix < dims[0] && iy < dims[1] && iz < dims[2];
  }
  Vec3 center(int ix, int iy, int iz) const {
    return {origin.x + (ix + 0.5) * voxel, origin.y + (iy + 0.5) * voxel,
            origin.z + (iz + 0.5) * voxel};
  }
  Vec3 upper() const {
    return {origin.x + dims[0] * voxel, origin.y + dims[1] * voxel, origin.z + dims[2] * voxel};
  }
  /// Voxel index along `axis` containing coordinate `c`, or -1 when outside.
  int cell_of(int axis, double c) const {
    const double f = std::floor((c - origin[axis]) / voxel);
    if (!(f >= 0.0) || f >= dims[axis]) return -1;
    return static_cast<int>(f);
  }

  bool operator==(const GridSpec&) const = default;
};

/// Boolean voxel set over a grid.
struct VoxelMask {
  GridSpec grid;
  std::vector<std::uint8_t> on;

  VoxelMask() = default;
  explicit VoxelMask(const GridSpec& g) : grid(g), on(g.size(), 0) {}

  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : on) n += v ? 1 : 0;
    return n;
  }
  bool test(std::size_t i) const { return on[i] != 0; }
  bool empty() const { return count() == 0; }
};

/// Morphological erosion with the 6-neighborhood; out-of-grid counts as outside.
VoxelMask erode(const VoxelMask& mask, int iterations);

/// True when every voxel of `inner` is also in `outer`.
bool is_subset(const VoxelMask& inner, const VoxelMask& outer);

VoxelMask mask_and(const VoxelMask& a, const VoxelMask& b);

}  // namespace mutomo
