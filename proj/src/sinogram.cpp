#include "mutomo/sinogram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <memory>

#include "mutomo/binary_io.hpp"
#include "mutomo/dof.hpp"
#include "mutomo/error.hpp"
#include "mutomo/parallel.hpp"

namespace mutomo {

namespace {

constexpr std::string_view kMagic = "MUSIN001";
constexpr std::size_t kShardEvents = 1 << 15;

}  // namespace

LineParams fold_line(double r, double theta, double x_star) {
  constexpr double pi = std::numbers::pi;
  double t = std::fmod(theta, 2.0 * pi);
  if (t < 0.0) t += 2.0 * pi;
  if (t >= pi) {
    t -= pi;
    r = -r;
  }
  if (t >= pi) t = 0.0;  // rounding at the fold
  return {r, t, x_star};
}

std::optional<LineParams> line_params(const Ray& ray) {
  const double dy = ray.direction.y;
  const double dz = ray.direction.z;
  const double q2 = dy * dy + dz * dz;
  if (q2 < 1e-24) return std::nullopt;
  const double q = std::sqrt(q2);
  const double ny = dz / q;
  const double nz = -dy / q;
  const double r = ny * ray.origin.y + nz * ray.origin.z;
  const double t_star = -(ray.origin.y * dy + ray.origin.z * dz) / q2;
  return fold_line(r, std::atan2(nz, ny), ray.origin.x + t_star * ray.direction.x);
}

void validate(const SinogramSpec& s) {
  if (s.n_r <= 0 || s.n_theta <= 0) throw InvalidArgument("sinogram bin counts must be > 0");
  if (!(s.dr > 0.0)) throw InvalidArgument("sinogram dr must be > 0");
}

SinogramStack::SinogramStack(const GridSpec& grid, const SinogramSpec& spec) : grid_(grid), spec_(spec) {
  validate(spec);
  const std::size_t n = static_cast<std::size_t>(grid.dims[0]) * static_cast<std::size_t>(spec.n_r) *
                        static_cast<std::size_t>(spec.n_theta);
  sums_.resize(n);
  counts_.resize(n, 0);
}

int SinogramStack::radial_bin(double r) const {
  const double f = std::floor((r - spec_.r_min) / spec_.dr);
  if (!(f >= 0.0) || f >= spec_.n_r) return -1;
  return static_cast<int>(f);
}

int SinogramStack::theta_bin(double theta) const {
  const int it = static_cast<int>(std::floor(theta / spec_.dtheta()));
  return std::clamp(it, 0, spec_.n_theta - 1);
}

void SinogramStack::add(int slab, int ir, int it, double theta_s) {
  const std::size_t b = bin(slab, ir, it);
  sums_[b].add(theta_s);
  ++counts_[b];
}

void SinogramStack::add_event(const MuonEvent& event, double orientation) {
  const double theta_s = scattering_angle(event);
  const Ray ray = project_track(to_drum_frame(event, orientation));
  const auto lp = line_params(ray);
  if (!lp) {
    ++drops_.parallel_to_axis;
    return;
  }
  const int ir = radial_bin(lp->r);
  if (ir < 0) {
    ++drops_.radial_range;
    return;
  }
  const int it = theta_bin(lp->theta);
  if (spec_.slabs == SlabAssignment::closest_approach) {
    const int slab = grid_.cell_of(0, lp->x_star);
    if (slab < 0) {
      ++drops_.slab_range;
      return;
    }
    add(slab, ir, it, theta_s);
    return;
  }
  double t0 = 0.0;
  double t1 = bottom_plane_parameter(event);
  if (!clip_to_box(ray, grid_.origin, grid_.upper(), t0, t1)) {
    ++drops_.slab_range;
    return;
  }
  const double xa = ray.at(t0).x;
  const double xb = ray.at(t1).x;
  const auto clamp_cell = [&](double x) {
    return std::clamp(static_cast<int>(std::floor((x - grid_.origin.x) / grid_.voxel)), 0, grid_.dims[0] - 1);
  };
  const int s0 = clamp_cell(std::min(xa, xb));
  const int s1 = clamp_cell(std::max(xa, xb));
  for (int s = s0; s <= s1; ++s) add(s, ir, it, theta_s);
}

void SinogramStack::add_dataset(const EventDataset& ds, unsigned workers) {
  const std::size_t n = ds.events.size();
  const std::size_t shards = (n + kShardEvents - 1) / kShardEvents;
  if (workers <= 1 || shards <= 1) {
    for (const auto& e : ds.events) add_event(e, ds.orientation);
    return;
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(shards));
  std::vector<std::unique_ptr<SinogramStack>> partial(workers);
  parallel_for(shards, workers, [&](std::size_t s, unsigned w) {
    if (!partial[w]) partial[w] = std::make_unique<SinogramStack>(grid_, spec_);
    const std::size_t end = std::min(n, (s + 1) * kShardEvents);
    for (std::size_t i = s * kShardEvents; i < end; ++i) partial[w]->add_event(ds.events[i], ds.orientation);
  });
  for (const auto& p : partial) {
    if (p) merge(*p);
  }
}

void SinogramStack::merge(const SinogramStack& o) {
  if (!(o.grid_ == grid_) || !(o.spec_ == spec_)) throw InvalidArgument("SinogramStack::merge: layouts differ");
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    sums_[i] += o.sums_[i];
    counts_[i] += o.counts_[i];
  }
  drops_.parallel_to_axis += o.drops_.parallel_to_axis;
  drops_.radial_range += o.drops_.radial_range;
  drops_.slab_range += o.drops_.slab_range;
}

SinogramStack accumulate_sinogram(std::span<const EventDataset> datasets, const GridSpec& grid,
                                  const SinogramSpec& spec, unsigned workers) {
  if (datasets.empty()) throw InvalidArgument("accumulate_sinogram: no datasets");
  SinogramStack stack(grid, spec);
  for (const auto& ds : datasets) stack.add_dataset(ds, workers);
  return stack;
}

bool SinogramFile::operator==(const SinogramFile& o) const {
  if (n_slabs != o.n_slabs || n_r != o.n_r || n_theta != o.n_theta || counts != o.counts) return false;
  for (auto [a, b] : {std::pair{r_min, o.r_min}, {dr, o.dr}, {dtheta, o.dtheta}, {x_min, o.x_min}, {dx, o.dx}}) {
    if (std::bit_cast<std::uint64_t>(a) != std::bit_cast<std::uint64_t>(b)) return false;
  }
  if (means.size() != o.means.size()) return false;
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (std::bit_cast<std::uint32_t>(means[i]) != std::bit_cast<std::uint32_t>(o.means[i])) return false;
  }
  return true;
}

SinogramFile to_sinogram_file(const SinogramStack& s) {
  SinogramFile f;
  f.n_slabs = static_cast<std::uint32_t>(s.n_slabs());
  f.n_r = static_cast<std::uint32_t>(s.spec().n_r);
  f.n_theta = static_cast<std::uint32_t>(s.spec().n_theta);
  f.r_min = s.spec().r_min;
  f.dr = s.spec().dr;
  f.dtheta = s.spec().dtheta();
  f.x_min = s.grid().origin.x;
  f.dx = s.grid().voxel;
  f.means.resize(s.size());
  f.counts.resize(s.size());
  for (std::size_t b = 0; b < s.size(); ++b) {
    if (s.count(b) > 0xffffffffULL) throw Error("sinogram bin count exceeds u32");
    f.means[b] = static_cast<float>(s.mean(b));
    f.counts[b] = static_cast<std::uint32_t>(s.count(b));
  }
  return f;
}

void write_sinogram_file(std::ostream& out, const SinogramFile& f) {
  const std::size_t n = static_cast<std::size_t>(f.n_slabs) * f.n_r * f.n_theta;
  if (f.means.size() != n || f.counts.size() != n) throw InvalidArgument("sinogram payload size mismatch");
  std::string buf;
  buf.reserve(60 + n * 8);
  binio::put_bytes(buf, kMagic);
  binio::put_u32(buf, f.n_slabs);
  binio::put_u32(buf, f.n_r);
  binio::put_u32(buf, f.n_theta);
  for (double v : {f.r_min, f.dr, f.dtheta, f.x_min, f.dx}) binio::put_f64(buf, v);
  for (float m : f.means) binio::put_f32(buf, m);
  for (auto c : f.counts) binio::put_u32(buf, c);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("sinogram write failed");
}

SinogramFile read_sinogram_file(std::istream& in) {
  const std::string data = binio::slurp(in);
  binio::Reader r(data);
  if (r.bytes(8, "magic") != kMagic) throw DecodeError(DecodeErrorKind::bad_magic, "expected MUSIN001");
  SinogramFile f;
  f.n_slabs = r.u32("n_slabs");
  f.n_r = r.u32("n_r");
  f.n_theta = r.u32("n_theta");
  f.r_min = r.f64("r_min");
  f.dr = r.f64("dr");
  f.dtheta = r.f64("dtheta");
  f.x_min = r.f64("x_min");
  f.dx = r.f64("dx");
  const std::size_t n = static_cast<std::size_t>(f.n_slabs) * f.n_r * f.n_theta;
  if (r.remaining() < n * 8) throw DecodeError(DecodeErrorKind::truncated, "sinogram payload");
  if (r.remaining() > n * 8) throw DecodeError(DecodeErrorKind::count_mismatch, "trailing bytes after sinogram");
  f.means.resize(n);
  f.counts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.means[i] = r.f32("mean");
    if (std::isnan(f.means[i])) throw DecodeError(DecodeErrorKind::nan_field, "bin " + std::to_string(i));
  }
  for (auto& c : f.counts) c = r.u32("count");
  return f;
}

void write_sinogram_file(const std::filesystem::path& path, const SinogramFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_sinogram_file(out, file);
}

SinogramFile read_sinogram_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError(DecodeErrorKind::io, "cannot open " + path.string());
  return read_sinogram_file(in);
}

}  // namespace mutomo
