#include "mutomo/source.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mutomo/error.hpp"

namespace mutomo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

constexpr double kSpectralIndex = 2.7;
constexpr double kBracketMax = 1.054;

double gaisser_bracket(double energy_gev, double cos_eff) {
  return 1.0 / (1.0 + 1.1 * energy_gev * cos_eff / 115.0) +
         0.054 / (1.0 + 1.1 * energy_gev * cos_eff / 850.0);
}

double shift_at(const FluxModel& flux, double cos_eff) {
  return flux.low_energy_shift / std::pow(cos_eff, 1.29);
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t k0 = splitmix64(seed);
  const std::uint64_t k1 = splitmix64(k0 ^ a);
  const std::uint64_t k2 = splitmix64(k1 ^ (b * 0xd1b54a32d192ed03ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(k2), static_cast<std::uint32_t>(k2 >> 32),
                    static_cast<std::uint32_t>(k1), static_cast<std::uint32_t>(k1 >> 32)};
  return Rng(seq);
}

void validate(const FluxModel& flux) {
  if (!(flux.p_min >= 100.0)) throw InvalidArgument("flux.p_min must be >= 100 MeV/c");
  if (!(flux.p_max > flux.p_min)) throw InvalidArgument("flux.p_max must exceed p_min");
  if (!(flux.event_rate > 0.0)) throw InvalidArgument("flux.event_rate must be > 0");
  if (!(flux.zenith_exponent >= 0.0)) throw InvalidArgument("flux.zenith_exponent must be >= 0");
  if (!(flux.low_energy_shift >= 0.0)) throw InvalidArgument("flux.low_energy_shift must be >= 0");
}

Vec3 sample_direction(Rng& rng, const FluxModel& flux) {
  // CDF in cos: 1 - cos^(n+2); 1 - u lies in (0, 1] so cos > 0.
  const double u = uniform01(rng);
  const double c = std::pow(1.0 - u, 1.0 / (flux.zenith_exponent + 2.0));
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double phi = 2.0 * std::numbers::pi * uniform01(rng);
  return {s * std::cos(phi), s * std::sin(phi), -c};
}

double effective_cosine(const FluxModel& flux, double c) {
  if (!flux.curvature_correction) return c;
  constexpr double p1 = 0.102573, p2 = -0.068287, p3 = 0.958633, p4 = 0.0407253, p5 = 0.817285;
  const double num = c * c + p1 * p1 + p2 * std::pow(c, p3) + p4 * std::pow(c, p5);
  return std::sqrt(num / (1.0 + p1 * p1 + p2 + p4));
}

double momentum_density(const FluxModel& flux, double p, double zenith) {
  if (p < flux.p_min || p > flux.p_max) return 0.0;
  const double cs = effective_cosine(flux, std::cos(zenith));
  const double e_gev = std::sqrt(p * p + kMuonMass * kMuonMass) / 1000.0;
  const double dn_de = std::pow(e_gev + shift_at(flux, cs), -kSpectralIndex) * gaisser_bracket(e_gev, cs);
  return dn_de * (p / 1000.0) / e_gev;
}

double sample_momentum(Rng& rng, const FluxModel& flux, double zenith) {
  const double cs = effective_cosine(flux, std::cos(zenith));
  const double shift = shift_at(flux, cs);
  const double m = kMuonMass / 1000.0;
  const double e_lo = std::sqrt(flux.p_min * flux.p_min / 1e6 + m * m);
  const double e_hi = std::sqrt(flux.p_max * flux.p_max / 1e6 + m * m);
  constexpr double k = kSpectralIndex - 1.0;
  const double a = std::pow(e_lo + shift, -k);
  const double b = std::pow(e_hi + shift, -k);
  for (;;) {
    // Inverse CDF of the (E + shift)^-2.7 envelope, then thin by the bracket.
    // Sampling in E and converting to p carries the dE/dp Jacobian.
    const double y = a - uniform01(rng) * (a - b);
    const double e = std::clamp(std::pow(y, -1.0 / k) - shift, e_lo, e_hi);
    if (uniform01(rng) * kBracketMax <= gaisser_bracket(e, cs)) {
      const double p = 1000.0 * std::sqrt(std::max(0.0, e * e - m * m));
      return std::clamp(p, flux.p_min, flux.p_max);
    }
  }
}

EventSeed sample_event_seed(Rng& rng, const FluxModel& flux, const SourcePlane& plane, double prev_time) {
  const double x = plane.center_x + plane.half_x * (2.0 * uniform01(rng) - 1.0);
  const double y = plane.center_y + plane.half_y * (2.0 * uniform01(rng) - 1.0);
  const Vec3 dir = sample_direction(rng, flux);
  std::exponential_distribution<double> gap(flux.event_rate);
  double dt = gap(rng);
  while (!(dt > 0.0)) dt = gap(rng);
  return {Ray{{x, y, plane.z}, dir}, prev_time + dt};
}

}  // namespace mutomo
