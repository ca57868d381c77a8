#include "mutomo/events.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mutomo/binary_io.hpp"
#include "mutomo/error.hpp"

namespace mutomo {

namespace {

constexpr std::string_view kMagic = "MUTOMO01";
constexpr std::uint32_t kVersion = 1;

std::array<double, 13> flatten(const MuonEvent& e) {
  return {e.timestamp,
          e.top.position.x,     e.top.position.y,     e.top.position.z,
          e.top.direction.x,    e.top.direction.y,    e.top.direction.z,
          e.bottom.position.x,  e.bottom.position.y,  e.bottom.position.z,
          e.bottom.direction.x, e.bottom.direction.y, e.bottom.direction.z};
}

MuonEvent unflatten(const std::array<double, 13>& f) {
  return {f[0], {{f[1], f[2], f[3]}, {f[4], f[5], f[6]}}, {{f[7], f[8], f[9]}, {f[10], f[11], f[12]}}};
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

const char* to_string(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::io: return "io error";
    case DecodeErrorKind::bad_magic: return "bad magic";
    case DecodeErrorKind::bad_version: return "bad version";
    case DecodeErrorKind::truncated: return "truncated payload";
    case DecodeErrorKind::count_mismatch: return "count mismatch";
    case DecodeErrorKind::nan_field: return "NaN field";
    case DecodeErrorKind::invalid_record: return "invalid record";
  }
  return "decode error";
}

void validate_event(const MuonEvent& e) {
  for (double v : flatten(e)) {
    if (!std::isfinite(v)) throw InvalidArgument("event has a non-finite field");
  }
  for (const auto* tp : {&e.top, &e.bottom}) {
    if (std::abs(norm(tp->direction) - 1.0) > 1e-9) throw InvalidArgument("event direction is not unit-norm");
    if (!(tp->direction.z < 0.0)) throw InvalidArgument("event direction is not downward");
  }
  if (!(e.top.position.z > e.bottom.position.z)) throw InvalidArgument("event top lies below bottom");
}

double scattering_angle(const Vec3& v1, const Vec3& v2) {
  // Same angle as acos of the clamped normalized dot product, without its
  // loss of precision near 0 and pi.
  return std::atan2(norm(cross(v1, v2)), dot(v1, v2));
}

Ray project_track(const MuonEvent& event) { return Ray{event.top.position, event.top.direction}; }

MuonEvent to_drum_frame(const MuonEvent& e, double orientation) {
  if (orientation == 0.0) return e;
  const double a = -orientation;
  return {e.timestamp,
          {rotate_x(e.top.position, a), rotate_x(e.top.direction, a)},
          {rotate_x(e.bottom.position, a), rotate_x(e.bottom.direction, a)}};
}

double wrap_orientation(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(angle, two_pi);
  if (w < 0.0) w += two_pi;
  if (w >= two_pi) w = 0.0;
  return w;
}

void write_events(std::ostream& out, const EventDataset& d) {
  if (!(d.orientation >= 0.0 && d.orientation < 2.0 * std::numbers::pi))
    throw InvalidArgument("dataset orientation must lie in [0, 2pi)");
  std::string buf;
  buf.reserve(kEventHeaderBytes + d.events.size() * kEventRecordBytes);
  binio::put_bytes(buf, kMagic);
  binio::put_u32(buf, kVersion);
  binio::put_f64(buf, d.orientation);
  binio::put_u64(buf, d.events.size());
  buf.append(12, '\0');
  for (const auto& e : d.events) {
    validate_event(e);
    for (double v : flatten(e)) binio::put_f64(buf, v);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("event write failed");
}

EventDataset read_events(std::istream& in) {
  const std::string data = binio::slurp(in);
  binio::Reader r(data);
  if (r.remaining() < kEventHeaderBytes) throw DecodeError(DecodeErrorKind::truncated, "event file header");
  if (r.bytes(8, "magic") != kMagic) throw DecodeError(DecodeErrorKind::bad_magic, "expected MUTOMO01");
  if (const auto v = r.u32("version"); v != kVersion)
    throw DecodeError(DecodeErrorKind::bad_version, "event file version " + std::to_string(v));
  EventDataset d;
  d.orientation = r.f64("orientation");
  if (std::isnan(d.orientation)) throw DecodeError(DecodeErrorKind::nan_field, "orientation");
  const std::uint64_t count = r.u64("count");
  r.bytes(12, "reserved");
  const std::size_t whole = r.remaining() / kEventRecordBytes;
  if (whole < count)
    throw DecodeError(DecodeErrorKind::truncated, "header declares " + std::to_string(count) +
                                                      " events, payload holds " + std::to_string(whole));
  if (r.remaining() != count * kEventRecordBytes)
    throw DecodeError(DecodeErrorKind::count_mismatch, "header declares " + std::to_string(count) +
                                                           " events, payload holds " +
                                                           std::to_string(r.remaining()) + " bytes");
  d.events.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::array<double, 13> f{};
    for (auto& v : f) {
      v = r.f64("event field");
      if (std::isnan(v)) throw DecodeError(DecodeErrorKind::nan_field, "event " + std::to_string(i));
    }
    d.events.push_back(unflatten(f));
  }
  return d;
}

void write_events(const std::filesystem::path& path, const EventDataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_events(out, dataset);
}

EventDataset read_events(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError(DecodeErrorKind::io, "cannot open " + path.string());
  return read_events(in);
}

void write_events_csv(std::ostream& out, const EventDataset& d) {
  std::string buf = "t,x1,y1,z1,cx1,cy1,cz1,x2,y2,z2,cx2,cy2,cz2\n";
  for (const auto& e : d.events) {
    const auto f = flatten(e);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) buf.push_back(',');
      append_number(buf, f[i]);
    }
    buf.push_back('\n');
  }
  out << buf;
}

std::vector<MuonEvent> read_events_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,x1,y1,z1,cx1,cy1,cz1,x2,y2,z2,cx2,cy2,cz2")
    throw DecodeError(DecodeErrorKind::bad_magic, "missing CSV header");
  std::vector<MuonEvent> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 13> f{};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto res = std::from_chars(p, end, f[i]);
      if (res.ec != std::errc{})
        throw DecodeError(DecodeErrorKind::invalid_record, "line " + std::to_string(lineno));
      if (std::isnan(f[i])) throw DecodeError(DecodeErrorKind::nan_field, "line " + std::to_string(lineno));
      p = res.ptr;
      if (i + 1 < f.size()) {
        if (p == end || *p != ',')
          throw DecodeError(DecodeErrorKind::invalid_record, "line " + std::to_string(lineno));
        ++p;
      }
    }
    if (p != end) throw DecodeError(DecodeErrorKind::invalid_record, "line " + std::to_string(lineno));
    out.push_back(unflatten(f));
  }
  return out;
}

}  // namespace mutomo
