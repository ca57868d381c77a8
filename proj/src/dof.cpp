#include "mutomo/dof.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mutomo/error.hpp"
#include "mutomo/parallel.hpp"

namespace mutomo {

namespace {

constexpr std::size_t kShardEvents = 1 << 15;

}  // namespace

bool clip_to_box(const Ray& ray, const Vec3& lo, const Vec3& hi, double& t0, double& t1) {
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a];
    const double d = ray.direction[a];
    if (d == 0.0) {
      if (o < lo[a] || o > hi[a]) return false;
      continue;
    }
    double ta = (lo[a] - o) / d;
    double tb = (hi[a] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

void traverse_voxels(const Ray& ray, const GridSpec& grid, std::vector<VoxelHit>& out, double t_min,
                     double t_max) {
  double t0 = t_min;
  double t1 = t_max;
  if (!clip_to_box(ray, grid.origin, grid.upper(), t0, t1) || !(t1 > t0)) return;

  const double vox = grid.voxel;
  int cell[3];
  int step[3];
  double next[3];
  auto boundary = [&](int a) {
    const double d = ray.direction[a];
    const double plane = grid.origin[a] + (cell[a] + (d > 0.0 ? 1 : 0)) * vox;
    return (plane - ray.origin[a]) / d;
  };
  for (int a = 0; a < 3; ++a) {
    const double d = ray.direction[a];
    const double p = ray.origin[a] + d * t0;
    cell[a] = std::clamp(static_cast<int>(std::floor((p - grid.origin[a]) / vox)), 0, grid.dims[a] - 1);
    if (d > 0.0) {
      step[a] = 1;
    } else if (d < 0.0) {
      step[a] = -1;
    } else {
      step[a] = 0;
    }
    next[a] = step[a] != 0 ? boundary(a) : std::numeric_limits<double>::infinity();
  }

  double t = t0;
  for (;;) {
    int a = 0;
    if (next[1] < next[a]) a = 1;
    if (next[2] < next[a]) a = 2;
    const double end = std::min(next[a], t1);
    if (end > t) {
      out.push_back({grid.index(cell[0], cell[1], cell[2]), end - t});
      t = end;
    }
    if (next[a] >= t1) break;
    cell[a] += step[a];
    if (cell[a] < 0 || cell[a] >= grid.dims[a]) break;
    next[a] = boundary(a);
  }
}

double bottom_plane_parameter(const MuonEvent& e) {
  return (e.top.position.z - e.bottom.position.z) / -e.top.direction.z;
}

DofTally::DofTally(const GridSpec& grid) : grid_(grid), weighted_(grid.size()), length_(grid.size()) {
  if (!(grid.voxel > 0.0) || grid.size() == 0) throw InvalidArgument("DofTally: invalid grid");
}

void DofTally::tally_event(const MuonEvent& event, double orientation) {
  const double theta = scattering_angle(event);
  const double t_end = bottom_plane_parameter(event);
  const Ray ray = project_track(to_drum_frame(event, orientation));
  scratch_.clear();
  traverse_voxels(ray, grid_, scratch_, 0.0, t_end);
  for (const auto& h : scratch_) {
    weighted_[h.index].add(theta * h.length);
    length_[h.index].add(h.length);
  }
}

void DofTally::tally_dataset(const EventDataset& ds, unsigned workers) {
  const std::size_t n = ds.events.size();
  const std::size_t shards = (n + kShardEvents - 1) / kShardEvents;
  if (workers <= 1 || shards <= 1) {
    for (const auto& e : ds.events) tally_event(e, ds.orientation);
    return;
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(shards));
  std::vector<std::unique_ptr<DofTally>> partial(workers);
  parallel_for(shards, workers, [&](std::size_t s, unsigned w) {
    if (!partial[w]) partial[w] = std::make_unique<DofTally>(grid_);
    const std::size_t end = std::min(n, (s + 1) * kShardEvents);
    for (std::size_t i = s * kShardEvents; i < end; ++i) partial[w]->tally_event(ds.events[i], ds.orientation);
  });
  for (const auto& p : partial) {
    if (p) merge(*p);
  }
}

void DofTally::merge(const DofTally& other) {
  if (!(other.grid_ == grid_)) throw InvalidArgument("DofTally::merge: grids differ");
  for (std::size_t i = 0; i < weighted_.size(); ++i) {
    weighted_[i] += other.weighted_[i];
    length_[i] += other.length_[i];
  }
}

ImageVolume DofTally::finalize() const {
  ImageVolume v(grid_);
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (has_data(i)) {
      v.valid[i] = 1;
      v.values[i] = intensity(i);
    }
  }
  return v;
}

VoxelFile DofTally::raw_file() const {
  VoxelFile f;
  f.grid = grid_;
  f.kind = VoxelPayload::raw_sums;
  f.weighted_sum.resize(weighted_.size());
  f.length_sum.resize(length_.size());
  for (std::size_t i = 0; i < weighted_.size(); ++i) {
    f.weighted_sum[i] = weighted_[i].value();
    f.length_sum[i] = length_[i].value();
  }
  return f;
}

bool DofTally::operator==(const DofTally& o) const {
  return grid_ == o.grid_ && weighted_ == o.weighted_ && length_ == o.length_;
}

DofTally reconstruct_dof(std::span<const EventDataset> datasets, const GridSpec& grid, unsigned workers) {
  if (datasets.empty()) throw InvalidArgument("reconstruct_dof: no datasets");
  DofTally tally(grid);
  for (const auto& ds : datasets) tally.tally_dataset(ds, workers);
  return tally;
}

}  // namespace mutomo
