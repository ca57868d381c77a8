#pragma once

#include <cstdint>
#include <random>

#include "mutomo/geometry.hpp"

namespace mutomo {

using Rng = std::mt19937_64;

/// Independent random stream keyed by (seed, a, b) via SplitMix64 mixing.
Rng make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

inline constexpr double kMuonMass = 105.658;  // MeV/c^2

/// Sea-level cosmic muon flux.
///
/// Zenith intensity goes as cos^n; the momentum spectrum is the Gaisser form
///   dN/dE ~ E'^-2.7 [1/(1 + 1.1 E cos/115 GeV) + 0.054/(1 + 1.1 E cos/850 GeV)]
/// with E' = E + shift / cos^1.29 flattening the spectrum below a few GeV, and
/// cos replaced by an effective cosine that accounts for Earth curvature.
struct FluxModel {
  double zenith_exponent = 2.0;
  double p_min = 200.0;             // MeV/c
  double p_max = 1.0e6;             // MeV/c
  double event_rate = 33.0;         // recorded events / s
  double low_energy_shift = 2.5;    // GeV; 0 gives the plain Gaisser form
  bool curvature_correction = true;
};

void validate(const FluxModel& flux);

struct SourcePlane {
  double z = 31.0;  // cm, above the top detector plane
  double half_x = 60.0;
  double half_y = 60.0;
  double center_x = 0.0;
  double center_y = 0.0;
};

/// Downward unit vector with zenith density ~ cos^(n+1) sin.
Vec3 sample_direction(Rng& rng, const FluxModel& flux);

/// Effective cosine used by the spectrum at large zenith.
double effective_cosine(const FluxModel& flux, double cos_zenith);

/// Unnormalized differential flux in momentum, dN/dp, at `p` MeV/c.
double momentum_density(const FluxModel& flux, double p, double zenith);

/// Momentum in [p_min, p_max] MeV/c, sampled by rejection from a shifted
/// power-law envelope.
double sample_momentum(Rng& rng, const FluxModel& flux, double zenith);

struct EventSeed {
  Ray ray;
  double timestamp = 0.0;  // s
};

/// Uniform origin on the plane, sampled direction, and an exponential
/// inter-arrival time after `prev_time`.
EventSeed sample_event_seed(Rng& rng, const FluxModel& flux, const SourcePlane& plane, double prev_time);

}  // namespace mutomo
