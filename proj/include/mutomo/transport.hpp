#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mutomo/events.hpp"
#include "mutomo/geometry.hpp"
#include "mutomo/source.hpp"

namespace mutomo {

/// Two horizontal recording planes bounding the imaging gap.
struct DetectorPair {
  double top_z = 30.0;
  double bottom_z = -30.0;
  double half_x = 50.0;  // active area half-extent, cm
  double half_y = 50.0;
};

void validate(const DetectorPair& detectors);

struct TransportConfig {
  double substep_dense = 0.5;       // cm, any non-background material
  double substep_background = 5.0;  // cm, background material
  bool energy_loss = false;
  double stopping_power = 2.0;  // MeV cm^2/g, used when energy_loss is on
  double muon_mass = kMuonMass;
};

void validate(const TransportConfig& cfg);

/// Highland width of the projected scattering angle (rad) for a unit-charge
/// particle after `length` cm of material with radiation length `rad_length`.
/// Returns 0 for zero length, infinite radiation length, or a negative
/// log-correction bracket.
double highland_sigma(double p, double beta, double length, double rad_length);

/// Orthonormal pair (u, v) transverse to unit `dir`, built from the coordinate
/// axis with the smallest |component|.
std::pair<Vec3, Vec3> transverse_basis(const Vec3& dir);

/// Rotates `dir` by the projected angles (theta_u, theta_v) in its transverse
/// frame. The angle between input and output equals hypot(theta_u, theta_v).
Vec3 apply_kick(const Vec3& dir, double theta_u, double theta_v);

enum class Rejection { none, missed_top, missed_bottom, upward, stopped, escaped };

/// Per-step record of a transported track, for diagnostics and tests.
struct TransportStep {
  int material;
  double length;
  double sigma;
  double theta_u;
  double theta_v;
};

struct Propagation {
  std::optional<MuonEvent> event;
  Rejection reason = Rejection::none;
};

/// Tracks one muon from `seed` (lab frame, above the top plane) through the
/// scene rotated by `orientation` about the drum axis, with stepwise
/// Gaussian multiple-scattering kicks. The returned event has timestamp 0.
Propagation propagate(const Scene& scene, const DetectorPair& detectors, const Ray& seed, double p,
                      const TransportConfig& cfg, Rng& rng, double orientation = 0.0,
                      std::vector<TransportStep>* trace = nullptr);

struct CampaignResult {
  std::vector<EventDataset> datasets;
  std::vector<std::uint64_t> generated;  // seeds transported per orientation
};

/// Accepted events per random stream. Streams are keyed by (seed,
/// orientation, chunk), so results do not depend on worker count and a
/// shorter campaign is a prefix of a longer one.
inline constexpr std::size_t kCampaignChunk = 4096;

/// Stable stream key for an orientation angle (micro-radian resolution).
std::uint64_t orientation_key(double orientation);

/// Statistics for one simulated orientation.
struct OrientationStats {
  double orientation = 0.0;
  std::uint64_t generated = 0;
  std::uint64_t accepted = 0;
};

/// Simulates one orientation at a time and hands each finished dataset to
/// `sink` in list order, so only one dataset is held in memory.
void run_campaign_streaming(const Scene& scene, const DetectorPair& detectors, const FluxModel& flux,
                            const SourcePlane& plane, const std::vector<double>& orientations,
                            std::size_t events_per_orientation, const TransportConfig& cfg,
                            std::uint64_t seed, unsigned workers,
                            const std::function<void(EventDataset&&, const OrientationStats&)>& sink);

CampaignResult run_campaign(const Scene& scene, const DetectorPair& detectors, const FluxModel& flux,
                            const SourcePlane& plane, const std::vector<double>& orientations,
                            std::size_t events_per_orientation, const TransportConfig& cfg,
                            std::uint64_t seed, unsigned workers = 1);

}  // namespace mutomo
