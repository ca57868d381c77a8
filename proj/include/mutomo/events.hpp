#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mutomo/geometry.hpp"

namespace mutomo {

struct TrackPoint {
  Vec3 position;   // cm
  Vec3 direction;  // direction cosines

  bool operator==(const TrackPoint&) const = default;
};

/// One muon recorded by both detector modules.
struct MuonEvent {
  double timestamp = 0.0;  // s
  TrackPoint top;
  TrackPoint bottom;

  bool operator==(const MuonEvent&) const = default;
};

/// Events recorded at one drum orientation.
struct EventDataset {
  double orientation = 0.0;  // rad, [0, 2pi)
  std::vector<MuonEvent> events;
  std::string provenance;  // in-memory only; not part of the file format

  /// Compares orientation and events; provenance is metadata.
  bool same_data(const EventDataset& o) const {
    return orientation == o.orientation && events == o.events;
  }
};

/// Throws InvalidArgument unless directions are unit, downward, and top lies above bottom.
void validate_event(const MuonEvent& event);

/// Angle between two directions, in [0, pi].
double scattering_angle(const Vec3& v1, const Vec3& v2);

inline double scattering_angle(const MuonEvent& e) {
  return scattering_angle(e.top.direction, e.bottom.direction);
}

/// Straight-line track from the top module.
Ray project_track(const MuonEvent& event);

/// Rotates positions and directions about +x by -orientation. The result is a
/// drum-frame record and is not required to satisfy lab-frame invariants.
MuonEvent to_drum_frame(const MuonEvent& event, double orientation);

/// Wraps an angle into [0, 2pi).
double wrap_orientation(double angle);

// Binary event file, little-endian:
//   "MUTOMO01" | u32 version=1 | f64 orientation | u64 count | 12 zero bytes
//   then per event 13 x f64: t, x1 y1 z1, cx1 cy1 cz1, x2 y2 z2, cx2 cy2 cz2
inline constexpr std::size_t kEventHeaderBytes = 40;
inline constexpr std::size_t kEventRecordBytes = 13 * 8;

void write_events(std::ostream& out, const EventDataset& dataset);
EventDataset read_events(std::istream& in);
void write_events(const std::filesystem::path& path, const EventDataset& dataset);
EventDataset read_events(const std::filesystem::path& path);

/// CSV mirror with header t,x1,y1,z1,cx1,cy1,cz1,x2,y2,z2,cx2,cy2,cz2.
void write_events_csv(std::ostream& out, const EventDataset& dataset);
std::vector<MuonEvent> read_events_csv(std::istream& in);

}  // namespace mutomo
