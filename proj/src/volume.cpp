#include "mutomo/volume.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "mutomo/binary_io.hpp"
#include "mutomo/error.hpp"

namespace mutomo {

namespace {

constexpr std::string_view kMagic = "MUVOX001";

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint32_t>(a[i]) != std::bit_cast<std::uint32_t>(b[i])) return false;
  }
  return true;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

}  // namespace

std::size_t ImageVolume::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid) n += v ? 1 : 0;
  return n;
}

ValueRange value_range(const ImageVolume& v) {
  ValueRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (!v.is_valid(i)) continue;
    any = true;
    r.min = std::min(r.min, v.values[i]);
    r.max = std::max(r.max, v.values[i]);
  }
  if (!any) throw EmptyRegionError("volume has no valid voxels");
  return r;
}

ImageVolume normalize_volume(const ImageVolume& v, const ValueRange& range) {
  const double span = range.max - range.min;
  if (!(span > 0.0)) throw InvalidArgument("normalize_volume: degenerate value range");
  ImageVolume out = v;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (out.is_valid(i)) out.values[i] = (out.values[i] - range.min) / span;
  }
  return out;
}

bool VoxelFile::operator==(const VoxelFile& o) const {
  return grid == o.grid && kind == o.kind && valid == o.valid && same_bits(intensity, o.intensity) &&
         same_bits(weighted_sum, o.weighted_sum) && same_bits(length_sum, o.length_sum);
}

VoxelFile to_voxel_file(const ImageVolume& v) {
  VoxelFile f;
  f.grid = v.grid;
  f.kind = VoxelPayload::intensity;
  f.intensity.resize(v.values.size());
  f.valid = v.valid;
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    f.intensity[i] = v.is_valid(i) ? static_cast<float>(v.values[i]) : std::numeric_limits<float>::quiet_NaN();
  }
  return f;
}

ImageVolume from_voxel_file(const VoxelFile& f) {
  ImageVolume v(f.grid);
  if (f.kind == VoxelPayload::intensity) {
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      v.valid[i] = f.valid[i];
      v.values[i] = f.valid[i] ? static_cast<double>(f.intensity[i]) : 0.0;
    }
  } else {
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      if (f.length_sum[i] > 0.0) {
        v.valid[i] = 1;
        v.values[i] = f.weighted_sum[i] / f.length_sum[i];
      }
    }
  }
  return v;
}

void write_voxel_file(std::ostream& out, const VoxelFile& f) {
  const std::size_t n = f.grid.size();
  std::string buf;
  binio::put_bytes(buf, kMagic);
  for (int d : f.grid.dims) binio::put_u32(buf, static_cast<std::uint32_t>(d));
  binio::put_f64(buf, f.grid.origin.x);
  binio::put_f64(buf, f.grid.origin.y);
  binio::put_f64(buf, f.grid.origin.z);
  binio::put_f64(buf, f.grid.voxel);
  binio::put_u8(buf, static_cast<std::uint8_t>(f.kind));
  if (f.kind == VoxelPayload::intensity) {
    if (f.intensity.size() != n || f.valid.size() != n) throw InvalidArgument("voxel payload size mismatch");
    for (float x : f.intensity) binio::put_f32(buf, x);
    std::string bits((n + 7) / 8, '\0');
    for (std::size_t i = 0; i < n; ++i) {
      if (f.valid[i]) bits[i / 8] = static_cast<char>(bits[i / 8] | (1 << (i % 8)));
    }
    buf += bits;
  } else {
    if (f.weighted_sum.size() != n || f.length_sum.size() != n)
      throw InvalidArgument("voxel payload size mismatch");
    for (double x : f.weighted_sum) binio::put_f64(buf, x);
    for (double x : f.length_sum) binio::put_f64(buf, x);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("voxel write failed");
}

VoxelFile read_voxel_file(std::istream& in) {
  const std::string data = binio::slurp(in);
  binio::Reader r(data);
  if (r.bytes(8, "magic") != kMagic) throw DecodeError(DecodeErrorKind::bad_magic, "expected MUVOX001");
  VoxelFile f;
  for (auto& d : f.grid.dims) {
    const auto v = r.u32("dims");
    if (v == 0 || v > (1u << 16)) throw DecodeError(DecodeErrorKind::invalid_record, "voxel dims");
    d = static_cast<int>(v);
  }
  f.grid.origin = {r.f64("origin"), r.f64("origin"), r.f64("origin")};
  f.grid.voxel = r.f64("voxel");
  const auto kind = r.u8("kind");
  if (kind > 1) throw DecodeError(DecodeErrorKind::invalid_record, "payload kind " + std::to_string(kind));
  f.kind = static_cast<VoxelPayload>(kind);
  const std::size_t n = f.grid.size();
  if (f.kind == VoxelPayload::intensity) {
    f.intensity.resize(n);
    for (auto& x : f.intensity) x = r.f32("intensity");
    auto bits = r.bytes((n + 7) / 8, "validity bitmap");
    f.valid.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      f.valid[i] = (static_cast<unsigned char>(bits[i / 8]) >> (i % 8)) & 1u;
      if (f.valid[i] && std::isnan(f.intensity[i]))
        throw DecodeError(DecodeErrorKind::nan_field, "valid voxel " + std::to_string(i) + " is NaN");
    }
  } else {
    f.weighted_sum.resize(n);
    f.length_sum.resize(n);
    for (auto& x : f.weighted_sum) x = r.f64("weighted_sum");
    for (auto& x : f.length_sum) x = r.f64("length_sum");
  }
  if (r.remaining() != 0) throw DecodeError(DecodeErrorKind::count_mismatch, "trailing bytes after voxel payload");
  return f;
}

void write_voxel_file(const std::filesystem::path& path, const VoxelFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_voxel_file(out, file);
}

VoxelFile read_voxel_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError(DecodeErrorKind::io, "cannot open " + path.string());
  return read_voxel_file(in);
}

}  // namespace mutomo
