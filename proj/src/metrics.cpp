#include "mutomo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "mutomo/error.hpp"

namespace mutomo {

RegionStats region_stats(const ImageVolume& volume, const VoxelMask& mask) {
  if (!(mask.grid == volume.grid)) throw InvalidArgument("region_stats: mask grid differs from volume grid");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.on.size(); ++i) {
    if (!mask.test(i)) continue;
    if (!volume.is_valid(i)) {
      const auto c = volume.grid.coords(i);
      std::ostringstream msg;
      msg << "region_stats: voxel (" << c[0] << ", " << c[1] << ", " << c[2] << ") has no data";
      throw InvalidArgument(msg.str());
    }
    sum += volume.values[i];
    ++n;
  }
  if (n == 0) throw EmptyRegionError("region_stats: empty mask");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < mask.on.size(); ++i) {
    if (!mask.test(i)) continue;
    const double d = volume.values[i] - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(n)), n};
}

RegionStats pool(const RegionStats& a, const RegionStats& b) {
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double n = na + nb;
  if (n == 0.0) throw EmptyRegionError("pool: both regions empty");
  const double mean = (na * a.mean + nb * b.mean) / n;
  const double da = a.mean - mean;
  const double db = b.mean - mean;
  const double var = (na * (a.stddev * a.stddev + da * da) + nb * (b.stddev * b.stddev + db * db)) / n;
  return {mean, std::sqrt(var), a.count + b.count};
}

double cnr(const RegionStats& fg, const RegionStats& bg) {
  if (!(bg.stddev > 0.0)) throw InvalidArgument("cnr: background standard deviation is zero; CNR undefined");
  return (fg.mean - bg.mean) / bg.stddev;
}

std::vector<ValueWithError> normalize_unit(const std::vector<ValueWithError>& values) {
  if (values.empty()) throw InvalidArgument("normalize_unit: no values");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end(),
                                      [](const auto& a, const auto& b) { return a.value < b.value; });
  const double min = lo->value;
  const double span = hi->value - min;
  if (!(span > 0.0)) throw InvalidArgument("normalize_unit: need at least two distinct values");
  std::vector<ValueWithError> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back({(v.value - min) / span, v.error / span});
  return out;
}

std::vector<double> normalize_unit(const std::vector<double>& values) {
  std::vector<ValueWithError> in;
  in.reserve(values.size());
  for (double v : values) in.push_back({v, 0.0});
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : normalize_unit(in)) out.push_back(v.value);
  return out;
}

namespace {

std::optional<double> upward_crossing(const std::vector<double>& n, double level, std::size_t from,
                                      std::size_t& segment) {
  for (std::size_t i = from; i + 1 < n.size(); ++i) {
    if (n[i] < level && n[i + 1] >= level) {
      segment = i;
      return static_cast<double>(i) + (level - n[i]) / (n[i + 1] - n[i]);
    }
  }
  return std::nullopt;
}

}  // namespace

EdgeRise edge_rise(const std::vector<double>& profile, double low_ref, double high_ref) {
  if (profile.size() < 2) throw InvalidArgument("edge_rise: profile needs at least 2 samples");
  if (!(low_ref != high_ref)) throw InvalidArgument("edge_rise: low_ref equals high_ref");
  std::vector<double> n(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) n[i] = (profile[i] - low_ref) / (high_ref - low_ref);
  if (std::abs(n.back()) < std::abs(n.front())) std::reverse(n.begin(), n.end());

  std::size_t seg = 0;
  const auto x10 = upward_crossing(n, 0.1, 0, seg);
  if (!x10) throw InvalidArgument("edge_rise: profile never rises through the 10% level");
  const auto x90 = upward_crossing(n, 0.9, seg, seg);
  if (!x90) throw InvalidArgument("edge_rise: profile never rises through the 90% level after the 10% crossing");
  return {*x90 - *x10, *x10, *x90};
}

VoxelMask threshold_voxels(const ImageVolume& volume, double theta_min) {
  VoxelMask m(volume.grid);
  for (std::size_t i = 0; i < m.on.size(); ++i) m.on[i] = volume.is_valid(i) && volume.values[i] >= theta_min;
  return m;
}

std::vector<std::vector<std::size_t>> connected_components(const VoxelMask& mask) {
  const GridSpec& g = mask.grid;
  std::vector<std::uint8_t> seen(mask.on.size(), 0);
  std::vector<std::vector<std::size_t>> comps;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.on.size(); ++start) {
    if (!mask.test(start) || seen[start]) continue;
    std::vector<std::size_t> comp;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      const auto c = g.coords(v);
      constexpr int nb[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
      for (const auto& d : nb) {
        const int jx = c[0] + d[0], jy = c[1] + d[1], jz = c[2] + d[2];
        if (!g.contains(jx, jy, jz)) continue;
        const std::size_t w = g.index(jx, jy, jz);
        if (mask.test(w) && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  std::stable_sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return comps;
}

double overlap_fraction(const std::vector<std::size_t>& component, const VoxelMask& region) {
  if (component.empty()) return 0.0;
  std::size_t hit = 0;
  for (auto v : component) hit += region.test(v) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(component.size());
}

std::vector<double> extract_profile(const ImageVolume& volume, int axis, std::array<int, 3> from, int to) {
  if (axis < 0 || axis > 2) throw InvalidArgument("extract_profile: axis must be 0, 1 or 2");
  const GridSpec& g = volume.grid;
  if (!g.contains(from[0], from[1], from[2]) || to < 0 || to >= g.dims[axis]) {
    throw InvalidArgument("extract_profile: endpoints outside the grid");
  }
  const int step = to >= from[axis] ? 1 : -1;
  std::vector<double> out;
  for (int k = from[axis];; k += step) {
    auto c = from;
    c[axis] = k;
    const std::size_t i = g.index(c[0], c[1], c[2]);
    if (!volume.is_valid(i)) throw InvalidArgument("extract_profile: profile crosses a voxel without data");
    out.push_back(volume.values[i]);
    if (k == to) break;
  }
  return out;
}

double slab_quantile(const ImageVolume& volume, int ix, double q) {
  const GridSpec& g = volume.grid;
  if (ix < 0 || ix >= g.dims[0]) throw InvalidArgument("slab_quantile: slab out of range");
  std::vector<double> v;
  for (int iy = 0; iy < g.dims[1]; ++iy) {
    for (int iz = 0; iz < g.dims[2]; ++iz) {
      const std::size_t i = g.index(ix, iy, iz);
      if (volume.is_valid(i)) v.push_back(volume.values[i]);
    }
  }
  if (v.empty()) throw EmptyRegionError("slab_quantile: slab has no valid voxels");
  q = std::clamp(q, 0.0, 1.0);
  const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  const std::size_t rank = k == 0 ? 0 : k - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank), v.end());
  return v[rank];
}

}  // namespace mutomo
