#include "mutomo/transport.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mutomo/error.hpp"
#include "mutomo/parallel.hpp"

namespace mutomo {

namespace {

constexpr double kEscapeExtent = 1000.0;  // cm from the axis in x or y

bool inside_active(const Vec3& p, const DetectorPair& d) {
  return std::abs(p.x) <= d.half_x && std::abs(p.y) <= d.half_y;
}

struct ChunkResult {
  std::vector<MuonEvent> events;  // timestamps relative to the chunk start
  std::uint64_t generated = 0;
};

ChunkResult simulate_chunk(const Scene& scene, const DetectorPair& detectors, const FluxModel& flux,
                           const SourcePlane& plane, double orientation, std::size_t quota,
                           const TransportConfig& cfg, Rng rng) {
  ChunkResult out;
  out.events.reserve(quota);
  double last_time = 0.0;
  while (out.events.size() < quota) {
    const EventSeed s = sample_event_seed(rng, flux, plane, last_time);
    const double zenith = std::acos(std::clamp(-s.ray.direction.z, -1.0, 1.0));
    const double p = sample_momentum(rng, flux, zenith);
    ++out.generated;
    Propagation r = propagate(scene, detectors, s.ray, p, cfg, rng, orientation);
    if (!r.event) continue;
    r.event->timestamp = s.timestamp;
    last_time = s.timestamp;
    out.events.push_back(*r.event);
  }
  return out;
}

}  // namespace

void validate(const DetectorPair& d) {
  if (!(d.top_z > d.bottom_z)) throw InvalidArgument("detector top plane must lie above bottom plane");
  if (!(d.half_x > 0.0 && d.half_y > 0.0)) throw InvalidArgument("detector extents must be > 0");
}

void validate(const TransportConfig& cfg) {
  if (!(cfg.substep_dense > 0.0 && cfg.substep_background > 0.0))
    throw InvalidArgument("substep lengths must be > 0");
  if (!(cfg.muon_mass > 0.0)) throw InvalidArgument("muon mass must be > 0");
  if (cfg.energy_loss && !(cfg.stopping_power > 0.0)) throw InvalidArgument("stopping power must be > 0");
}

double highland_sigma(double p, double beta, double length, double rad_length) {
  if (!(p > 0.0) || !(beta > 0.0 && beta <= 1.0) || !(length >= 0.0) || !(rad_length > 0.0))
    throw InvalidArgument("highland_sigma: need p > 0, 0 < beta <= 1, L >= 0, L0 > 0");
  if (length == 0.0 || std::isinf(rad_length)) return 0.0;
  const double x = length / rad_length;
  const double bracket = 1.0 + 0.038 * std::log(x / (beta * beta));
  if (bracket <= 0.0) return 0.0;
  return 13.6 / (beta * p) * std::sqrt(x) * bracket;
}

std::pair<Vec3, Vec3> transverse_basis(const Vec3& dir) {
  const double ax = std::abs(dir.x), ay = std::abs(dir.y), az = std::abs(dir.z);
  Vec3 axis;
  if (ax <= ay && ax <= az) {
    axis = {1, 0, 0};
  } else if (ay <= az) {
    axis = {0, 1, 0};
  } else {
    axis = {0, 0, 1};
  }
  const Vec3 u = normalized(cross(axis, dir));
  return {u, cross(dir, u)};
}

Vec3 apply_kick(const Vec3& dir, double theta_u, double theta_v) {
  const double theta = std::hypot(theta_u, theta_v);
  if (theta == 0.0) return dir;
  const auto [u, v] = transverse_basis(dir);
  const Vec3 t = u * (theta_u / theta) + v * (theta_v / theta);
  return normalized(dir * std::cos(theta) + t * std::sin(theta));
}

Propagation propagate(const Scene& scene, const DetectorPair& det, const Ray& seed, double p,
                      const TransportConfig& cfg, Rng& rng, double orientation,
                      std::vector<TransportStep>* trace) {
  if (!(p > 0.0)) throw InvalidArgument("propagate: momentum must be > 0");
  if (seed.origin.z < det.top_z) throw InvalidArgument("propagate: seed must start above the top plane");
  Vec3 pos = seed.origin;
  Vec3 dir = seed.direction;
  if (!(dir.z < 0.0)) return {std::nullopt, Rejection::upward};

  const double mass = cfg.muon_mass;
  double energy = std::hypot(p, mass);
  double beta = p / energy;
  const double rc = std::cos(-orientation);
  const double rs = std::sin(-orientation);
  auto to_drum = [&](const Vec3& v) { return Vec3{v.x, rc * v.y - rs * v.z, rs * v.y + rc * v.z}; };
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::optional<TrackPoint> top;
  for (;;) {
    const double to_bottom = (pos.z - det.bottom_z) / -dir.z;
    const PathSegment seg = scene.first_segment(Ray{to_drum(pos), to_drum(dir)}, to_bottom + 1.0);
    const Material& mat = scene.material(seg.material);
    const double sub = seg.material == 0 ? cfg.substep_background : cfg.substep_dense;
    const double step = std::min(sub, seg.exit);
    const Vec3 next = pos + dir * step;

    if (!top && next.z <= det.top_z) {
      const double t = (det.top_z - pos.z) / dir.z;
      Vec3 hit = pos + dir * t;
      hit.z = det.top_z;
      if (!inside_active(hit, det)) return {std::nullopt, Rejection::missed_top};
      top = TrackPoint{hit, dir};
    }
    if (top && next.z <= det.bottom_z) {
      const double t = (det.bottom_z - pos.z) / dir.z;
      Vec3 hit = pos + dir * t;
      hit.z = det.bottom_z;
      if (!inside_active(hit, det)) return {std::nullopt, Rejection::missed_bottom};
      return {MuonEvent{0.0, *top, TrackPoint{hit, dir}}, Rejection::none};
    }
    pos = next;

    if (step > 0.0) {
      const double sigma = highland_sigma(p, beta, step, mat.radiation_length);
      double tu = 0.0, tv = 0.0;
      if (sigma > 0.0) {
        tu = sigma * gauss(rng);
        tv = sigma * gauss(rng);
        dir = apply_kick(dir, tu, tv);
      }
      if (trace) trace->push_back({seg.material, step, sigma, tu, tv});
      if (cfg.energy_loss) {
        energy -= cfg.stopping_power * mat.density * step;
        if (energy <= mass) return {std::nullopt, Rejection::stopped};
        p = std::sqrt(energy * energy - mass * mass);
        beta = p / energy;
      }
    }
    if (!(dir.z < 0.0)) return {std::nullopt, Rejection::upward};
    if (std::abs(pos.x) > kEscapeExtent || std::abs(pos.y) > kEscapeExtent)
      return {std::nullopt, Rejection::escaped};
  }
}

std::uint64_t orientation_key(double orientation) {
  return static_cast<std::uint64_t>(std::llround(wrap_orientation(orientation) * 1e6));
}

void run_campaign_streaming(const Scene& scene, const DetectorPair& detectors, const FluxModel& flux,
                            const SourcePlane& plane, const std::vector<double>& orientations,
                            std::size_t events_per_orientation, const TransportConfig& cfg,
                            std::uint64_t seed, unsigned workers,
                            const std::function<void(EventDataset&&, const OrientationStats&)>& sink) {
  if (orientations.empty()) throw InvalidArgument("run_campaign: orientation list is empty");
  if (events_per_orientation == 0) throw InvalidArgument("run_campaign: events_per_orientation must be > 0");
  validate(detectors);
  validate(flux);
  validate(cfg);
  if (!(plane.z >= detectors.top_z)) throw InvalidArgument("source plane must lie above the top detector");

  const std::size_t n_chunks = (events_per_orientation + kCampaignChunk - 1) / kCampaignChunk;
  for (double raw : orientations) {
    const double phi = wrap_orientation(raw);
    const std::uint64_t key = orientation_key(phi);
    std::vector<ChunkResult> chunks(n_chunks);
    parallel_for(n_chunks, workers, [&](std::size_t c, unsigned) {
      const std::size_t quota = std::min(kCampaignChunk, events_per_orientation - c * kCampaignChunk);
      chunks[c] = simulate_chunk(scene, detectors, flux, plane, phi, quota, cfg, make_stream(seed, key, c));
    });

    EventDataset ds;
    ds.orientation = phi;
    ds.events.reserve(events_per_orientation);
    std::ostringstream prov;
    prov << "seed=" << seed << " generator=mutomo-mc/1";
    ds.provenance = prov.str();
    OrientationStats stats{phi, 0, 0};
    double offset = 0.0;
    for (auto& ch : chunks) {
      stats.generated += ch.generated;
      for (auto& e : ch.events) {
        e.timestamp += offset;
        ds.events.push_back(e);
      }
      if (!ch.events.empty()) offset = ds.events.back().timestamp;
      ch = ChunkResult{};
    }
    stats.accepted = ds.events.size();
    sink(std::move(ds), stats);
  }
}

CampaignResult run_campaign(const Scene& scene, const DetectorPair& detectors, const FluxModel& flux,
                            const SourcePlane& plane, const std::vector<double>& orientations,
                            std::size_t events_per_orientation, const TransportConfig& cfg,
                            std::uint64_t seed, unsigned workers) {
  CampaignResult out;
  run_campaign_streaming(scene, detectors, flux, plane, orientations, events_per_orientation, cfg, seed,
                         workers, [&](EventDataset&& ds, const OrientationStats& st) {
                           out.datasets.push_back(std::move(ds));
                           out.generated.push_back(st.generated);
                         });
  return out;
}

}  // namespace mutomo
