#include "mutomo/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mutomo/digest.hpp"
#include "mutomo/phantom.hpp"
#include "mutomo/transport.hpp"
#include "mutomo/volume.hpp"

namespace mutomo {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

const char* axis_name(int a) { return a == 0 ? "x" : a == 1 ? "y" : "z"; }

double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

int metric_slab(const PipelineConfig& c) {
  const int ix = c.grid.cell_of(0, c.metrics.slab_x);
  if (ix < 0) throw InvalidArgument("metrics.slab_x lies outside the grid");
  return ix;
}

ImageVolume load_dof(const fs::path& dir) { return from_voxel_file(read_voxel_file(dir / layout::kDofRaw)); }

ImageVolume load_fbp(const fs::path& dir) { return from_voxel_file(read_voxel_file(dir / layout::kFbpVolume)); }

ImageVolume normalized(const ImageVolume& v) { return normalize_volume(v, value_range(v)); }

}  // namespace

namespace layout {

fs::path event_file(const fs::path& dir, std::size_t view) {
  char name[32];
  std::snprintf(name, sizeof name, "view_%03zu.mtev", view);
  return dir / "events" / name;
}

fs::path event_csv_file(const fs::path& dir, std::size_t view) {
  char name[32];
  std::snprintf(name, sizeof name, "view_%03zu.csv", view);
  return dir / "events" / name;
}

}  // namespace layout

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream o;
  o << "method,views,muons_per_view,region_fg,region_bg,mu_fg,mu_bg,sigma_bg,cnr\n";
  for (const auto& r : rows) {
    o << r.method << ',' << r.views << ',' << r.muons_per_view << ',' << r.region_fg << ',' << r.region_bg << ','
      << fmt(r.mu_fg) << ',' << fmt(r.mu_bg) << ',' << fmt(r.sigma_bg) << ',' << (r.cnr ? fmt(*r.cnr) : "undefined")
      << '\n';
  }
  return o.str();
}

std::string edge_csv(const std::vector<EdgeRow>& rows) {
  std::ostringstream o;
  o << "method,views,muons_per_view,region_fg,region_bg,low_ref,high_ref,low_crossing,high_crossing,edge_rise_px,"
       "error\n";
  for (const auto& r : rows) {
    o << r.method << ',' << r.views << ',' << r.muons_per_view << ',' << r.region_fg << ',' << r.region_bg << ','
      << fmt(r.low_ref) << ',' << fmt(r.high_ref) << ',';
    if (r.rise) {
      o << fmt(r.rise->low_crossing) << ',' << fmt(r.rise->high_crossing) << ',' << fmt(r.rise->distance) << ",\n";
    } else {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      o << ",,," << err << '\n';
    }
  }
  return o.str();
}

Scene make_scene(const PipelineConfig& c) { return build_scene(c.drum); }

std::map<std::string, VoxelMask> metric_regions(const PipelineConfig& c, const Scene& scene) {
  const int ix = metric_slab(c);
  const GridSpec& g = c.grid;
  std::map<std::string, VoxelMask> out;
  for (const auto& r : c.metrics.regions) {
    VoxelMask m = region_mask(scene, g, r.material, r.erosion);
    const bool background = r.material == c.drum.background;
    for (std::size_t i = 0; i < m.on.size(); ++i) {
      if (!m.on[i]) continue;
      const auto cell = g.coords(i);
      bool keep = cell[0] == ix;
      if (keep && background) {
        const Vec3 p = g.center(cell[0], cell[1], cell[2]);
        const double rho = std::hypot(p.y, p.z);
        keep = rho >= c.metrics.air_inner_radius && rho <= c.metrics.air_outer_radius;
      }
      m.on[i] = keep ? 1 : 0;
    }
    if (m.empty()) {
      throw EmptyRegionError("region '" + r.material + "' has no voxels in the metric slab");
    }
    out[r.material] = std::move(m);
  }
  return out;
}

// Region voxels the reconstruction never reached are left out of the statistics.
static VoxelMask with_data(const ImageVolume& volume, const VoxelMask& mask) {
  VoxelMask m = mask;
  for (std::size_t i = 0; i < m.on.size(); ++i) m.on[i] = m.on[i] && volume.is_valid(i) ? 1 : 0;
  return m;
}

std::vector<MetricsRow> measure(const ImageVolume& volume, const std::map<std::string, VoxelMask>& regions,
                                const std::vector<RegionPair>& pairs, const std::string& method, std::size_t views,
                                std::uint64_t muons_per_view) {
  std::vector<MetricsRow> rows;
  for (const auto& p : pairs) {
    const auto fg = region_stats(volume, with_data(volume, regions.at(p.fg)));
    const auto bg = region_stats(volume, with_data(volume, regions.at(p.bg)));
    MetricsRow row{method, views, muons_per_view, p.fg, p.bg, fg.mean, bg.mean, bg.stddev, std::nullopt};
    if (bg.stddev > 0.0) row.cnr = cnr(fg, bg);
    rows.push_back(row);
  }
  return rows;
}

EdgeRow measure_edge(const ImageVolume& volume, const PipelineConfig& c,
                     const std::map<std::string, VoxelMask>& regions, const std::string& method, std::size_t views,
                     std::uint64_t muons_per_view) {
  const auto& e = c.metrics.edge;
  EdgeRow row;
  row.method = method;
  row.views = views;
  row.muons_per_view = muons_per_view;
  row.region_fg = e.fg;
  row.region_bg = e.bg;
  row.low_ref = region_stats(volume, with_data(volume, regions.at(e.bg))).mean;
  row.high_ref = region_stats(volume, with_data(volume, regions.at(e.fg))).mean;
  const int ix = metric_slab(c);
  const int iy = c.grid.cell_of(1, e.y);
  const int z0 = c.grid.cell_of(2, e.z_from);
  const int z1 = c.grid.cell_of(2, e.z_to);
  try {
    if (iy < 0 || z0 < 0 || z1 < 0) throw InvalidArgument("edge profile lies outside the grid");
    row.rise = edge_rise(extract_profile(volume, 2, {ix, iy, z0}, z1), row.low_ref, row.high_ref);
  } catch (const Error& err) {
    row.error = err.what();
  }
  return row;
}

void simulate(const PipelineConfig& c) {
  const fs::path& dir = c.output_dir;
  fs::create_directories(dir / "events");
  for (const auto& entry : fs::directory_iterator(dir / "events")) {
    if (entry.is_regular_file()) fs::remove(entry.path());
  }
  write_text(dir / layout::kConfig, to_text(c));

  const Scene scene = make_scene(c);
  std::ostringstream campaign;
  campaign << "view,orientation_rad,orientation_deg,generated,accepted,acceptance\n";
  std::size_t view = 0;
  run_campaign_streaming(
      scene, c.detectors, c.flux, c.source, c.orientations, c.events_per_view, c.transport, *c.seed, c.workers,
      [&](EventDataset&& ds, const OrientationStats& st) {
        write_events(layout::event_file(dir, view), ds);
        if (c.csv_events) {
          std::ofstream out(layout::event_csv_file(dir, view), std::ios::binary | std::ios::trunc);
          write_events_csv(out, ds);
        }
        campaign << view << ',' << fmt(st.orientation) << ',' << fmt(degrees(st.orientation)) << ','
                 << st.generated << ',' << st.accepted << ','
                 << fmt(static_cast<double>(st.accepted) / static_cast<double>(st.generated)) << '\n';
        ++view;
      });
  write_text(dir / layout::kCampaign, campaign.str());
}

Reconstructions reconstruct_views(const PipelineConfig& c, const std::vector<std::size_t>& views,
                                  std::uint64_t muons_per_view, bool dof, bool fbp) {
  if (views.empty()) throw InvalidArgument("reconstruct_views: no views");
  Reconstructions out;
  if (dof) out.dof.emplace(c.grid);
  std::optional<SinogramStack> stack;
  if (fbp) stack.emplace(c.grid, c.sinogram);
  for (std::size_t v : views) {
    if (v >= c.orientations.size()) throw InvalidArgument("view index out of range");
    const fs::path path = layout::event_file(c.output_dir, v);
    EventDataset ds = read_events(path);
    const double expected = wrap_orientation(c.orientations[v]);
    if (std::abs(ds.orientation - expected) > 1e-12) {
      throw InvalidArgument(path.string() + " holds orientation " + fmt(degrees(ds.orientation)) +
                            " deg, configuration expects " + fmt(degrees(expected)) + " deg");
    }
    if (ds.events.size() < muons_per_view) {
      throw InvalidArgument("orientation " + fmt(degrees(ds.orientation)) + " deg (view " + std::to_string(v) +
                            ") holds " + std::to_string(ds.events.size()) + " events; " +
                            std::to_string(muons_per_view) + " requested");
    }
    ds.events.resize(muons_per_view);
    if (out.dof) out.dof->tally_dataset(ds, c.workers);
    if (stack) stack->add_dataset(ds, c.workers);
  }
  if (stack) {
    FbpResult image = reconstruct_fbp(*stack, c.workers);
    out.fbp.emplace(FbpReconstruction{std::move(*stack), std::move(image)});
  }
  return out;
}

namespace {

std::vector<std::size_t> all_views(const PipelineConfig& c) {
  std::vector<std::size_t> v(c.orientations.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

void write_dof(const PipelineConfig& c, const DofTally& tally) {
  write_voxel_file(c.output_dir / layout::kDofVolume, to_voxel_file(tally.finalize()));
  write_voxel_file(c.output_dir / layout::kDofRaw, tally.raw_file());
}

void write_fbp(const PipelineConfig& c, const FbpReconstruction& r) {
  write_sinogram_file(c.output_dir / layout::kSinogram, to_sinogram_file(r.sinogram));
  const VoxelFile file = to_voxel_file(r.image.volume);
  write_voxel_file(c.output_dir / layout::kFbpVolume, file);
  const ValueRange range = value_range(from_voxel_file(file));
  std::ostringstream o;
  o << "min = " << fmt(range.min) << "\nmax = " << fmt(range.max) << "\nempty_slabs = ";
  for (std::size_t i = 0; i < r.image.empty_slabs.size(); ++i) {
    o << (i ? ", " : "") << r.image.empty_slabs[i];
  }
  const auto& d = r.sinogram.drops();
  o << "\ndropped_parallel = " << d.parallel_to_axis << "\ndropped_radial = " << d.radial_range
    << "\ndropped_slab = " << d.slab_range << '\n';
  write_text(c.output_dir / layout::kFbpNormalization, o.str());
}

}  // namespace

void recon_dof(const PipelineConfig& c) {
  auto r = reconstruct_views(c, all_views(c), c.events_per_view, true, false);
  write_dof(c, *r.dof);
}

void recon_fbp(const PipelineConfig& c) {
  auto r = reconstruct_views(c, all_views(c), c.events_per_view, false, true);
  write_fbp(c, *r.fbp);
}

void recon_both(const PipelineConfig& c) {
  auto r = reconstruct_views(c, all_views(c), c.events_per_view, true, true);
  write_dof(c, *r.dof);
  write_fbp(c, *r.fbp);
}

void metrics(const PipelineConfig& c) {
  const fs::path& dir = c.output_dir;
  const Scene scene = make_scene(c);
  const auto regions = metric_regions(c, scene);
  const ImageVolume dof = load_dof(dir);
  const ImageVolume fbp = normalized(load_fbp(dir));
  const std::size_t views = c.orientations.size();
  const std::uint64_t n = c.events_per_view;

  auto rows = measure(dof, regions, c.metrics.pairs, "dof", views, n);
  auto more = measure(fbp, regions, c.metrics.pairs, "fbp", views, n);
  rows.insert(rows.end(), more.begin(), more.end());
  write_text(dir / layout::kMetrics, metrics_csv(rows));

  write_text(dir / layout::kEdgeRise, edge_csv({measure_edge(dof, c, regions, "dof", views, n),
                                                measure_edge(fbp, c, regions, "fbp", views, n)}));

  std::ostringstream reg;
  reg << "method,region,voxels,mean,stddev\n";
  for (const auto& [method, vol] : {std::pair<const char*, const ImageVolume*>{"dof", &dof}, {"fbp", &fbp}}) {
    for (const auto& r : c.metrics.regions) {
      const auto s = region_stats(*vol, with_data(*vol, regions.at(r.material)));
      reg << method << ',' << r.material << ',' << s.count << ',' << fmt(s.mean) << ',' << fmt(s.stddev) << '\n';
    }
  }
  write_text(dir / layout::kRegions, reg.str());

  // Thresholded depth-of-field components against the full wedge geometry.
  std::vector<std::pair<std::string, VoxelMask>> wedges;
  for (const auto& w : c.drum.wedges) wedges.emplace_back(w.name, region_mask(scene, c.grid, w.material, 0));
  std::ostringstream comp;
  comp << "threshold_rad,rank,voxels,best_wedge,overlap\n";
  const auto comps = connected_components(threshold_voxels(dof, c.metrics.threshold));
  for (std::size_t k = 0; k < comps.size() && k < 5; ++k) {
    std::string best = "none";
    double best_f = 0.0;
    for (const auto& [name, mask] : wedges) {
      const double f = overlap_fraction(comps[k], mask);
      if (f > best_f) {
        best_f = f;
        best = name;
      }
    }
    comp << fmt(c.metrics.threshold) << ',' << k + 1 << ',' << comps[k].size() << ',' << best << ',' << fmt(best_f)
         << '\n';
  }
  write_text(dir / layout::kComponents, comp.str());
}

std::vector<std::size_t> select_views(const std::vector<double>& orientations, std::size_t k) {
  if (k == 0 || k > orientations.size()) {
    throw InvalidArgument("cannot select " + std::to_string(k) + " views from " +
                          std::to_string(orientations.size()) + " orientations");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::size_t half = 0;
  for (double o : orientations) half += wrap_orientation(o) < std::numbers::pi ? 1 : 0;
  const double spacing = half >= k ? std::numbers::pi / static_cast<double>(k) : two_pi / static_cast<double>(k);
  std::vector<std::size_t> out;
  std::vector<std::uint8_t> used(orientations.size(), 0);
  for (std::size_t j = 0; j < k; ++j) {
    const double target = spacing * static_cast<double>(j);
    std::size_t best = orientations.size();
    double best_d = 0.0;
    for (std::size_t i = 0; i < orientations.size(); ++i) {
      if (used[i]) continue;
      double d = std::abs(wrap_orientation(orientations[i]) - target);
      d = std::min(d, two_pi - d);
      if (best == orientations.size() || d < best_d) {
        best = i;
        best_d = d;
      }
    }
    used[best] = 1;
    out.push_back(best);
  }
  return out;
}

std::vector<MetricsRow> sweep(const PipelineConfig& c) {
  const Scene scene = make_scene(c);
  const auto regions = metric_regions(c, scene);
  std::vector<MetricsRow> rows;
  for (int k : c.sweep.views) {
    const auto views = select_views(c.orientations, static_cast<std::size_t>(k));
    for (auto m : c.sweep.muons) {
      auto r = reconstruct_views(c, views, m, true, true);
      auto dof = measure(r.dof->finalize(), regions, c.sweep.pairs, "dof", views.size(), m);
      auto fbp =
          measure(normalized(from_voxel_file(to_voxel_file(r.fbp->image.volume))), regions, c.sweep.pairs, "fbp",
                  views.size(), m);
      rows.insert(rows.end(), dof.begin(), dof.end());
      rows.insert(rows.end(), fbp.begin(), fbp.end());
    }
  }
  write_text(c.output_dir / layout::kSweep, metrics_csv(rows));
  return rows;
}

GrayImage export_slice_image(const ImageVolume& volume, int axis, int index) {
  const GridSpec& g = volume.grid;
  if (axis < 0 || axis > 2) throw InvalidArgument("slice axis must be 0, 1 or 2");
  if (index < 0 || index >= g.dims[axis]) {
    throw InvalidArgument(std::string("slice index ") + std::to_string(index) + " out of range for axis " +
                          axis_name(axis));
  }
  const int ha = axis == 0 ? 1 : 0;  // horizontal axis
  const int va = axis == 2 ? 1 : 2;  // vertical axis
  GrayImage img;
  img.width = g.dims[ha];
  img.height = g.dims[va];
  img.pixels.assign(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height), 0);

  auto voxel = [&](int h, int v) {
    std::array<int, 3> c{};
    c[axis] = index;
    c[ha] = h;
    c[va] = v;
    return g.index(c[0], c[1], c[2]);
  };
  bool any = false;
  double lo = 0.0, hi = 0.0;
  for (int h = 0; h < img.width; ++h) {
    for (int v = 0; v < img.height; ++v) {
      const std::size_t i = voxel(h, v);
      if (!volume.is_valid(i)) continue;
      const double x = volume.values[i];
      if (!any) {
        lo = hi = x;
        any = true;
      }
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  for (int row = 0; row < img.height; ++row) {
    const int v = img.height - 1 - row;
    for (int h = 0; h < img.width; ++h) {
      const std::size_t i = voxel(h, v);
      if (!volume.is_valid(i)) continue;
      std::uint8_t p = 128;
      if (hi > lo) p = static_cast<std::uint8_t>(std::lround(255.0 * (volume.values[i] - lo) / (hi - lo)));
      img.pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(h)] = p;
    }
  }
  return img;
}

std::string to_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

void write_pgm(const fs::path& path, const GrayImage& img) { write_text(path, to_pgm(img)); }

void export_slices(const PipelineConfig& c) {
  const fs::path& dir = c.output_dir;
  fs::create_directories(dir / "slices");
  const ImageVolume dof = load_dof(dir);
  const ImageVolume fbp = load_fbp(dir);
  for (const auto& s : c.slices) {
    const int index = c.grid.cell_of(s.axis, s.coordinate);
    if (index < 0) {
      throw InvalidArgument(std::string("slice ") + axis_name(s.axis) + " = " + fmt(s.coordinate) +
                            " lies outside the grid");
    }
    char name[32];
    std::snprintf(name, sizeof name, "%s%03d.pgm", axis_name(s.axis), index);
    write_pgm(dir / "slices" / (std::string("dof_") + name), export_slice_image(dof, s.axis, index));
    write_pgm(dir / "slices" / (std::string("fbp_") + name), export_slice_image(fbp, s.axis, index));
  }
}

void write_manifest(const fs::path& dir, const std::string& status) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), dir);
    if (rel == layout::kManifest) continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
  std::ostringstream o;
  o << "# status: " << status << '\n';
  for (const auto& rel : files) {
    o << rel.generic_string() << "  " << sha256_file(dir / rel) << "  " << fs::file_size(dir / rel) << '\n';
  }
  write_text(dir / layout::kManifest, o.str());
}

void run_stage(const PipelineConfig& c, const std::string& stage, const std::function<void()>& body) {
  try {
    body();
  } catch (const PipelineError& e) {
    throw;
  } catch (const std::exception& e) {
    PipelineError err(stage, e.what());
    try {
      fs::create_directories(c.output_dir);
      write_manifest(c.output_dir, std::string("incomplete; stage ") + err.what());
    } catch (const std::exception&) {
    }
    throw err;
  }
}

void run_pipeline(const PipelineConfig& c) {
  validate(c);
  run_stage(c, "simulate", [&] { simulate(c); });
  run_stage(c, "reconstruct", [&] { recon_both(c); });
  run_stage(c, "metrics", [&] { metrics(c); });
  run_stage(c, "slice", [&] { export_slices(c); });
  run_stage(c, "sweep", [&] { sweep(c); });
  write_manifest(c.output_dir, "complete");
}

}  // namespace mutomo
