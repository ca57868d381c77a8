#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mutomo/config.hpp"
#include "mutomo/dof.hpp"
#include "mutomo/error.hpp"
#include "mutomo/fbp.hpp"
#include "mutomo/metrics.hpp"

namespace mutomo {

/// Failure inside a named pipeline stage.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& detail)
      : Error(stage + ": " + detail), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Output directory layout.
namespace layout {
inline constexpr const char* kManifest = "manifest.txt";
inline constexpr const char* kConfig = "config.cfg";
inline constexpr const char* kCampaign = "campaign.csv";
inline constexpr const char* kDofVolume = "dof_volume.muvox";
inline constexpr const char* kDofRaw = "dof_raw.muvox";
inline constexpr const char* kFbpVolume = "fbp_volume.muvox";
inline constexpr const char* kFbpNormalization = "fbp_normalization.txt";
inline constexpr const char* kSinogram = "sinogram.musin";
inline constexpr const char* kMetrics = "metrics.csv";
inline constexpr const char* kEdgeRise = "edge_rise.csv";
inline constexpr const char* kRegions = "regions.csv";
inline constexpr const char* kComponents = "components.csv";
inline constexpr const char* kSweep = "sweep.csv";
std::filesystem::path event_file(const std::filesystem::path& dir, std::size_t view);
std::filesystem::path event_csv_file(const std::filesystem::path& dir, std::size_t view);
}  // namespace layout

/// One row of a metrics report.
struct MetricsRow {
  std::string method;  // "dof" or "fbp"
  std::size_t views = 0;
  std::uint64_t muons_per_view = 0;
  std::string region_fg;
  std::string region_bg;
  double mu_fg = 0.0;
  double mu_bg = 0.0;
  double sigma_bg = 0.0;
  std::optional<double> cnr;  // empty when sigma_bg is zero
};

struct EdgeRow {
  std::string method;
  std::size_t views = 0;
  std::uint64_t muons_per_view = 0;
  std::string region_fg;
  std::string region_bg;
  double low_ref = 0.0;
  double high_ref = 0.0;
  std::optional<EdgeRise> rise;
  std::string error;  // set when no rise could be measured
};

std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string edge_csv(const std::vector<EdgeRow>& rows);

/// Scene built from the configured drum.
Scene make_scene(const PipelineConfig& config);

/// Named metric regions restricted to the metric slab. The background
/// material's region is further limited to the configured annulus.
std::map<std::string, VoxelMask> metric_regions(const PipelineConfig& config, const Scene& scene);

/// CNR rows for every configured pair, for one reconstruction.
std::vector<MetricsRow> measure(const ImageVolume& volume, const std::map<std::string, VoxelMask>& regions,
                                const std::vector<RegionPair>& pairs, const std::string& method,
                                std::size_t views, std::uint64_t muons_per_view);

/// Edge-rise along z through (metric slab, edge.y), referenced to the
/// region means of edge.bg (low) and edge.fg (high).
EdgeRow measure_edge(const ImageVolume& volume, const PipelineConfig& config,
                     const std::map<std::string, VoxelMask>& regions, const std::string& method, std::size_t views,
                     std::uint64_t muons_per_view);

/// Simulates the campaign, writing one event file per orientation plus
/// campaign statistics and the canonical configuration.
void simulate(const PipelineConfig& config);

struct Reconstructions {
  std::optional<DofTally> dof;
  std::optional<FbpReconstruction> fbp;
};

/// Reads the first `muons_per_view` events of each listed view's file and
/// reconstructs with the requested methods.
Reconstructions reconstruct_views(const PipelineConfig& config, const std::vector<std::size_t>& views,
                                  std::uint64_t muons_per_view, bool dof, bool fbp);

/// Full-data reconstructions written as voxel and sinogram files.
void recon_dof(const PipelineConfig& config);
void recon_fbp(const PipelineConfig& config);
void recon_both(const PipelineConfig& config);

/// Reads reconstructions back and writes metrics, edge-rise, region and
/// threshold-component reports.
void metrics(const PipelineConfig& config);

/// Indices into `orientations` of `k` maximally spread views: k targets
/// spaced pi/k apart from 0 when the half turn [0, pi) holds at least k
/// orientations, otherwise 2pi/k apart, each mapped to the nearest unused
/// orientation.
std::vector<std::size_t> select_views(const std::vector<double>& orientations, std::size_t k);

/// Metrics for every (views, muons) cell, both methods, reusing event-file
/// prefixes. Rows are also written to sweep.csv.
std::vector<MetricsRow> sweep(const PipelineConfig& config);

/// 8-bit grayscale image, row 0 at the top.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Slice at `index` along `axis`. x slices are n_y wide and n_z high, y
/// slices n_x by n_z, z slices n_x by n_y; the top row is the largest value
/// of the vertical coordinate. Min-max windowed over valid pixels, no-data
/// pixels 0, and a degenerate window renders valid pixels as 128.
GrayImage export_slice_image(const ImageVolume& volume, int axis, int index);
std::string to_pgm(const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Writes PGM slices of both reconstructions for every configured slice.
void export_slices(const PipelineConfig& config);

/// Every stage in order. On failure the manifest is marked incomplete and a
/// PipelineError names the stage.
void run_pipeline(const PipelineConfig& config);

/// Writes manifest.txt listing every file under the output directory as
/// `relative-path  sha256-hex  bytes`, sorted by path, after a status comment.
void write_manifest(const std::filesystem::path& dir, const std::string& status);

/// Runs `body` as stage `stage`: wraps failures in PipelineError and records
/// the outcome in the manifest.
void run_stage(const PipelineConfig& config, const std::string& stage, const std::function<void()>& body);

}  // namespace mutomo
