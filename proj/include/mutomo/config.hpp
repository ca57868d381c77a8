#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mutomo/grid.hpp"
#include "mutomo/phantom.hpp"
#include "mutomo/sinogram.hpp"
#include "mutomo/source.hpp"
#include "mutomo/transport.hpp"

namespace mutomo {

/// Parsed `key = value` lines. `#` starts a comment; blank lines are ignored.
/// Duplicate keys and malformed lines raise ConfigError with the line number.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text, const std::string& origin = "<config>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::optional<std::string> text(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  std::optional<std::int64_t> integer(const std::string& key) const;
  std::optional<std::uint64_t> unsigned_integer(const std::string& key) const;
  std::optional<bool> flag(const std::string& key) const;
  std::optional<std::vector<std::string>> list(const std::string& key) const;
  std::optional<std::vector<double>> number_list(const std::string& key) const;

  /// Keys never read through an accessor.
  std::vector<std::string> unused() const;

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// `k` orientations equally spaced over a full turn, starting at 0.
std::vector<double> equally_spaced_orientations(int k);

struct RegionSpec {
  std::string material;
  int erosion = 0;
};

struct RegionPair {
  std::string fg;
  std::string bg;
};

struct EdgeSpec {
  std::string fg = "tungsten";
  std::string bg = "concrete";
  double y = -5.5;         // cm, profile line at (metric slab, y)
  double z_from = -17.5;   // cm, low-reference end
  double z_to = -5.0;      // cm, high-reference end
};

struct MetricsSpec {
  double slab_x = 11.0;                // cm; regions are restricted to the slab holding this x
  std::vector<RegionSpec> regions{{"tungsten", 0}, {"brass", 0}, {"concrete", 2}, {"air", 0}};
  double air_inner_radius = 19.0;      // cm; background region is an annulus about the drum axis
  double air_outer_radius = 24.0;
  std::vector<RegionPair> pairs{{"tungsten", "concrete"}, {"brass", "concrete"}, {"concrete", "air"}};
  EdgeSpec edge;
  double threshold = 0.0475;           // rad
};

struct SliceSpec {
  int axis = 0;            // 0 = x, 1 = y, 2 = z
  double coordinate = 11.0;
};

struct SweepSpec {
  std::vector<int> views{24, 2};
  std::vector<std::uint64_t> muons{2400000, 1000000};
  std::vector<RegionPair> pairs{{"tungsten", "concrete"}};
};

struct PipelineConfig {
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = "mutomo-out";
  unsigned workers = 1;  // never affects results

  DrumSpec drum = default_drum_spec();
  FluxModel flux;
  SourcePlane source;
  DetectorPair detectors;
  TransportConfig transport;
  std::vector<double> orientations = equally_spaced_orientations(24);  // rad
  std::uint64_t events_per_view = 2400000;
  bool csv_events = false;

  GridSpec grid;
  SinogramSpec sinogram;
  MetricsSpec metrics;
  std::vector<SliceSpec> slices{{0, 11.0}};
  SweepSpec sweep;
};

/// Builds a configuration from parsed keys on top of the defaults. Unknown
/// keys and invalid values raise ConfigError. The seed may still be absent;
/// see validate().
PipelineConfig make_config(const KeyValueFile& kv);
PipelineConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError when the seed is missing or any part is inconsistent.
void validate(const PipelineConfig& config);

/// Canonical text form covering every setting that affects outputs (not
/// workers or the output directory). Parsing it reproduces the same config.
std::string to_text(const PipelineConfig& config);

}  // namespace mutomo
