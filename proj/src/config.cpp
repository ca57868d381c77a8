#include "mutomo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mutomo/error.hpp"

namespace mutomo {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a finite number, got '" + s + "'");
  }
  return v;
}

template <typename T>
T parse_int(const std::string& key, const std::string& s) {
  T v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError(key + ": expected an integer, got '" + s + "'");
  }
  return v;
}

template <typename T>
void set(const KeyValueFile& kv, const std::string& key, T& field) {
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = kv.number(key)) field = *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (auto v = kv.flag(key)) field = *v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = kv.text(key)) field = *v;
  } else if constexpr (std::is_same_v<T, int>) {
    if (auto v = kv.integer(key)) {
      if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) {
        throw ConfigError(key + ": out of range");
      }
      field = static_cast<int>(*v);
    }
  } else {
    if (auto v = kv.unsigned_integer(key)) field = *v;
  }
}

std::vector<RegionPair> parse_pairs(const std::string& key, const std::vector<std::string>& items) {
  std::vector<RegionPair> out;
  for (const auto& item : items) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(key + ": expected fg:bg, got '" + item + "'");
    out.push_back({trim(item.substr(0, colon)), trim(item.substr(colon + 1))});
  }
  return out;
}

int axis_index(const std::string& key, const std::string& a) {
  if (a == "x") return 0;
  if (a == "y") return 1;
  if (a == "z") return 2;
  throw ConfigError(key + ": axis must be x, y or z, got '" + a + "'");
}

const char* axis_name(int a) { return a == 0 ? "x" : a == 1 ? "y" : "z"; }

bool has_material(const DrumSpec& drum, const std::string& name) {
  return std::any_of(drum.materials.begin(), drum.materials.end(), [&](const auto& m) { return m.name == name; });
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!kv.values_.emplace(key, value).second) throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::optional<std::string> KeyValueFile::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

std::optional<double> KeyValueFile::number(const std::string& key) const {
  auto t = text(key);
  if (!t) return std::nullopt;
  return parse_double(key, *t);
}

std::optional<std::int64_t> KeyValueFile::integer(const std::string& key) const {
  auto t = text(key);
  if (!t) return std::nullopt;
  return parse_int<std::int64_t>(key, *t);
}

std::optional<std::uint64_t> KeyValueFile::unsigned_integer(const std::string& key) const {
  auto t = text(key);
  if (!t) return std::nullopt;
  return parse_int<std::uint64_t>(key, *t);
}

std::optional<bool> KeyValueFile::flag(const std::string& key) const {
  auto t = text(key);
  if (!t) return std::nullopt;
  if (*t == "true" || *t == "1" || *t == "yes" || *t == "on") return true;
  if (*t == "false" || *t == "0" || *t == "no" || *t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + *t + "'");
}

std::optional<std::vector<std::string>> KeyValueFile::list(const std::string& key) const {
  auto t = text(key);
  if (!t) return std::nullopt;
  return split(*t, ',');
}

std::optional<std::vector<double>> KeyValueFile::number_list(const std::string& key) const {
  auto items = list(key);
  if (!items) return std::nullopt;
  std::vector<double> out;
  for (const auto& s : *items) out.push_back(parse_double(key, s));
  return out;
}

std::vector<std::string> KeyValueFile::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

std::vector<double> equally_spaced_orientations(int k) {
  if (k <= 0) throw InvalidArgument("orientation count must be > 0");
  std::vector<double> out;
  for (int i = 0; i < k; ++i) out.push_back(2.0 * std::numbers::pi * i / k);
  return out;
}

PipelineConfig make_config(const KeyValueFile& kv) {
  PipelineConfig c;
  if (auto v = kv.unsigned_integer("seed")) c.seed = *v;
  if (auto v = kv.text("output.dir")) c.output_dir = *v;
  set(kv, "output.csv_events", c.csv_events);

  if (auto v = kv.integer("campaign.views")) c.orientations = equally_spaced_orientations(static_cast<int>(*v));
  if (auto v = kv.number_list("campaign.orientations_deg")) {
    c.orientations.clear();
    for (double d : *v) c.orientations.push_back(wrap_orientation(d * std::numbers::pi / 180.0));
  }
  if (auto v = kv.number_list("campaign.orientations")) c.orientations = *v;
  set(kv, "campaign.events_per_view", c.events_per_view);

  set(kv, "flux.zenith_exponent", c.flux.zenith_exponent);
  set(kv, "flux.p_min", c.flux.p_min);
  set(kv, "flux.p_max", c.flux.p_max);
  set(kv, "flux.event_rate", c.flux.event_rate);
  set(kv, "flux.low_energy_shift", c.flux.low_energy_shift);
  set(kv, "flux.curvature_correction", c.flux.curvature_correction);

  set(kv, "source.z", c.source.z);
  set(kv, "source.half_x", c.source.half_x);
  set(kv, "source.half_y", c.source.half_y);
  set(kv, "source.center_x", c.source.center_x);
  set(kv, "source.center_y", c.source.center_y);

  set(kv, "detector.top_z", c.detectors.top_z);
  set(kv, "detector.bottom_z", c.detectors.bottom_z);
  set(kv, "detector.half_x", c.detectors.half_x);
  set(kv, "detector.half_y", c.detectors.half_y);

  set(kv, "transport.substep_dense", c.transport.substep_dense);
  set(kv, "transport.substep_background", c.transport.substep_background);
  set(kv, "transport.energy_loss", c.transport.energy_loss);
  set(kv, "transport.stopping_power", c.transport.stopping_power);
  set(kv, "transport.muon_mass", c.transport.muon_mass);

  // Materials: material.<name>.<field> overrides or defines.
  for (const auto& [key, value] : kv.values()) {
    if (key.rfind("material.", 0) != 0) continue;
    const auto dot = key.find('.', 9);
    if (dot == std::string::npos) throw ConfigError("unknown key '" + key + "'");
    const std::string name = key.substr(9, dot - 9);
    if (!has_material(c.drum, name)) c.drum.materials.push_back({name, 0.0, 0.0, 0.0});
  }
  for (auto& m : c.drum.materials) {
    const std::string p = "material." + m.name + ".";
    set(kv, p + "z_eff", m.z_eff);
    set(kv, p + "density", m.density);
    set(kv, p + "radiation_length", m.radiation_length);
    if (!(m.density > 0.0) || !(m.radiation_length > 0.0)) {
      throw ConfigError("material " + m.name + ": density and radiation_length must be > 0");
    }
  }

  set(kv, "drum.radius", c.drum.radius);
  set(kv, "drum.length", c.drum.length);
  set(kv, "drum.wall", c.drum.wall);
  set(kv, "drum.fill", c.drum.fill);
  set(kv, "drum.wall_material", c.drum.wall_material);
  set(kv, "drum.background", c.drum.background);

  // Wedges: drum.wedges selects and orders; wedge.<name>.<field> overrides or defines.
  std::vector<WedgeSpec> known = c.drum.wedges;
  for (const auto& [key, value] : kv.values()) {
    if (key.rfind("wedge.", 0) != 0) continue;
    const auto dot = key.find('.', 6);
    if (dot == std::string::npos) throw ConfigError("unknown key '" + key + "'");
    const std::string name = key.substr(6, dot - 6);
    if (std::none_of(known.begin(), known.end(), [&](const auto& w) { return w.name == name; })) {
      known.push_back({name, "", 0.0, 0.0, 0.0, {}, 0.0});
    }
  }
  for (auto& w : known) {
    const std::string p = "wedge." + w.name + ".";
    set(kv, p + "material", w.material);
    set(kv, p + "base", w.base);
    set(kv, p + "height", w.height);
    set(kv, p + "thickness", w.thickness);
    set(kv, p + "x", w.center.x);
    set(kv, p + "y", w.center.y);
    set(kv, p + "z", w.center.z);
    set(kv, p + "rotation", w.rotation);
  }
  if (auto names = kv.list("drum.wedges")) {
    c.drum.wedges.clear();
    for (const auto& n : *names) {
      if (n == "none") continue;
      auto it = std::find_if(known.begin(), known.end(), [&](const auto& w) { return w.name == n; });
      if (it == known.end()) throw ConfigError("drum.wedges: wedge '" + n + "' is not defined");
      c.drum.wedges.push_back(*it);
    }
  } else {
    c.drum.wedges = known;
  }

  set(kv, "grid.nx", c.grid.dims[0]);
  set(kv, "grid.ny", c.grid.dims[1]);
  set(kv, "grid.nz", c.grid.dims[2]);
  set(kv, "grid.origin_x", c.grid.origin.x);
  set(kv, "grid.origin_y", c.grid.origin.y);
  set(kv, "grid.origin_z", c.grid.origin.z);
  set(kv, "grid.voxel", c.grid.voxel);

  set(kv, "sinogram.n_r", c.sinogram.n_r);
  set(kv, "sinogram.r_min", c.sinogram.r_min);
  set(kv, "sinogram.dr", c.sinogram.dr);
  set(kv, "sinogram.n_theta", c.sinogram.n_theta);
  set(kv, "sinogram.inpaint", c.sinogram.inpaint);
  if (auto v = kv.text("sinogram.slabs")) {
    if (*v == "closest") {
      c.sinogram.slabs = SlabAssignment::closest_approach;
    } else if (*v == "all") {
      c.sinogram.slabs = SlabAssignment::all_crossed;
    } else {
      throw ConfigError("sinogram.slabs: expected closest or all, got '" + *v + "'");
    }
  }

  auto& m = c.metrics;
  set(kv, "metrics.slab_x", m.slab_x);
  if (auto items = kv.list("metrics.regions")) {
    m.regions.clear();
    for (const auto& item : *items) {
      const auto colon = item.find(':');
      RegionSpec r;
      r.material = trim(item.substr(0, colon));
      if (colon != std::string::npos) r.erosion = parse_int<int>("metrics.regions", trim(item.substr(colon + 1)));
      m.regions.push_back(r);
    }
  }
  set(kv, "metrics.air_inner_radius", m.air_inner_radius);
  set(kv, "metrics.air_outer_radius", m.air_outer_radius);
  if (auto items = kv.list("metrics.pairs")) m.pairs = parse_pairs("metrics.pairs", *items);
  set(kv, "metrics.edge.fg", m.edge.fg);
  set(kv, "metrics.edge.bg", m.edge.bg);
  set(kv, "metrics.edge.y", m.edge.y);
  set(kv, "metrics.edge.z_from", m.edge.z_from);
  set(kv, "metrics.edge.z_to", m.edge.z_to);
  set(kv, "metrics.threshold", m.threshold);

  if (auto items = kv.list("export.slices")) {
    c.slices.clear();
    for (const auto& item : *items) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError("export.slices: expected axis:coordinate, got '" + item + "'");
      c.slices.push_back({axis_index("export.slices", trim(item.substr(0, colon))),
                          parse_double("export.slices", trim(item.substr(colon + 1)))});
    }
  }

  if (auto items = kv.list("sweep.views")) {
    c.sweep.views.clear();
    for (const auto& s : *items) c.sweep.views.push_back(parse_int<int>("sweep.views", s));
  }
  if (auto items = kv.list("sweep.muons")) {
    c.sweep.muons.clear();
    for (const auto& s : *items) c.sweep.muons.push_back(parse_int<std::uint64_t>("sweep.muons", s));
  }
  if (auto items = kv.list("sweep.pairs")) c.sweep.pairs = parse_pairs("sweep.pairs", *items);

  const auto unused = kv.unused();
  if (!unused.empty()) throw ConfigError("unknown configuration key '" + unused.front() + "'");
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) { return make_config(KeyValueFile::load(path)); }

void validate(const PipelineConfig& c) {
  if (!c.seed) throw ConfigError("seed is required (set 'seed' in the config or pass --seed)");
  if (c.orientations.empty()) throw ConfigError("campaign: orientation list is empty");
  for (double o : c.orientations) {
    if (!(o >= 0.0 && o < 2.0 * std::numbers::pi)) throw ConfigError("campaign: orientations must lie in [0, 2pi)");
  }
  if (c.events_per_view == 0) throw ConfigError("campaign.events_per_view must be > 0");
  try {
    validate(c.flux);
    validate(c.detectors);
    validate(c.transport);
    validate(c.sinogram);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (!(c.source.z > c.detectors.top_z)) throw ConfigError("source.z must lie above detector.top_z");
  if (!(c.source.half_x > 0.0) || !(c.source.half_y > 0.0)) throw ConfigError("source extents must be > 0");
  if (c.grid.dims[0] <= 0 || c.grid.dims[1] <= 0 || c.grid.dims[2] <= 0 || !(c.grid.voxel > 0.0)) {
    throw ConfigError("grid dimensions and voxel size must be > 0");
  }
  if (!(c.drum.radius > 0.0) || !(c.drum.length > 0.0) || !(c.drum.wall > 0.0)) {
    throw ConfigError("drum extents must be > 0");
  }

  auto need = [&](const std::string& what, const std::string& name) {
    if (!has_material(c.drum, name)) throw ConfigError(what + ": material '" + name + "' is not defined");
  };
  need("drum.fill", c.drum.fill);
  need("drum.wall_material", c.drum.wall_material);
  need("drum.background", c.drum.background);
  for (const auto& w : c.drum.wedges) {
    need("wedge." + w.name, w.material);
    if (!(w.base > 0.0) || !(w.height > 0.0) || !(w.thickness > 0.0)) {
      throw ConfigError("wedge." + w.name + ": base, height and thickness must be > 0");
    }
  }
  for (const auto& r : c.metrics.regions) {
    need("metrics.regions", r.material);
    if (r.erosion < 0) throw ConfigError("metrics.regions: erosion must be >= 0");
  }
  auto region_defined = [&](const std::string& what, const std::string& name) {
    if (std::none_of(c.metrics.regions.begin(), c.metrics.regions.end(),
                     [&](const auto& r) { return r.material == name; })) {
      throw ConfigError(what + ": region '" + name + "' is not listed in metrics.regions");
    }
  };
  for (const auto& p : c.metrics.pairs) {
    region_defined("metrics.pairs", p.fg);
    region_defined("metrics.pairs", p.bg);
  }
  for (const auto& p : c.sweep.pairs) {
    region_defined("sweep.pairs", p.fg);
    region_defined("sweep.pairs", p.bg);
  }
  region_defined("metrics.edge.fg", c.metrics.edge.fg);
  region_defined("metrics.edge.bg", c.metrics.edge.bg);
  if (!(c.metrics.air_inner_radius < c.metrics.air_outer_radius)) {
    throw ConfigError("metrics: air_inner_radius must be < air_outer_radius");
  }
  if (c.sweep.views.empty() || c.sweep.muons.empty()) throw ConfigError("sweep matrix must be non-empty");
  for (int k : c.sweep.views) {
    if (k <= 0) throw ConfigError("sweep.views entries must be > 0");
  }
  for (auto n : c.sweep.muons) {
    if (n == 0) throw ConfigError("sweep.muons entries must be > 0");
  }
}

std::string to_text(const PipelineConfig& c) {
  std::ostringstream o;
  auto line = [&](const std::string& k, const std::string& v) { o << k << " = " << v << '\n'; };
  auto num = [&](const std::string& k, double v) { line(k, fmt(v)); };
  auto flag = [&](const std::string& k, bool v) { line(k, v ? "true" : "false"); };
  auto join = [](const auto& items, auto f) {
    std::string s;
    for (const auto& x : items) {
      if (!s.empty()) s += ", ";
      s += f(x);
    }
    return s;
  };

  if (c.seed) line("seed", std::to_string(*c.seed));
  flag("output.csv_events", c.csv_events);
  line("campaign.orientations", join(c.orientations, [](double v) { return fmt(v); }));
  line("campaign.events_per_view", std::to_string(c.events_per_view));

  num("flux.zenith_exponent", c.flux.zenith_exponent);
  num("flux.p_min", c.flux.p_min);
  num("flux.p_max", c.flux.p_max);
  num("flux.event_rate", c.flux.event_rate);
  num("flux.low_energy_shift", c.flux.low_energy_shift);
  flag("flux.curvature_correction", c.flux.curvature_correction);

  num("source.z", c.source.z);
  num("source.half_x", c.source.half_x);
  num("source.half_y", c.source.half_y);
  num("source.center_x", c.source.center_x);
  num("source.center_y", c.source.center_y);

  num("detector.top_z", c.detectors.top_z);
  num("detector.bottom_z", c.detectors.bottom_z);
  num("detector.half_x", c.detectors.half_x);
  num("detector.half_y", c.detectors.half_y);

  num("transport.substep_dense", c.transport.substep_dense);
  num("transport.substep_background", c.transport.substep_background);
  flag("transport.energy_loss", c.transport.energy_loss);
  num("transport.stopping_power", c.transport.stopping_power);
  num("transport.muon_mass", c.transport.muon_mass);

  for (const auto& m : c.drum.materials) {
    num("material." + m.name + ".z_eff", m.z_eff);
    num("material." + m.name + ".density", m.density);
    num("material." + m.name + ".radiation_length", m.radiation_length);
  }
  num("drum.radius", c.drum.radius);
  num("drum.length", c.drum.length);
  num("drum.wall", c.drum.wall);
  line("drum.fill", c.drum.fill);
  line("drum.wall_material", c.drum.wall_material);
  line("drum.background", c.drum.background);
  line("drum.wedges", c.drum.wedges.empty() ? "none" : join(c.drum.wedges, [](const auto& w) { return w.name; }));
  for (const auto& w : c.drum.wedges) {
    const std::string p = "wedge." + w.name + ".";
    line(p + "material", w.material);
    num(p + "base", w.base);
    num(p + "height", w.height);
    num(p + "thickness", w.thickness);
    num(p + "x", w.center.x);
    num(p + "y", w.center.y);
    num(p + "z", w.center.z);
    num(p + "rotation", w.rotation);
  }

  line("grid.nx", std::to_string(c.grid.dims[0]));
  line("grid.ny", std::to_string(c.grid.dims[1]));
  line("grid.nz", std::to_string(c.grid.dims[2]));
  num("grid.origin_x", c.grid.origin.x);
  num("grid.origin_y", c.grid.origin.y);
  num("grid.origin_z", c.grid.origin.z);
  num("grid.voxel", c.grid.voxel);

  line("sinogram.n_r", std::to_string(c.sinogram.n_r));
  num("sinogram.r_min", c.sinogram.r_min);
  num("sinogram.dr", c.sinogram.dr);
  line("sinogram.n_theta", std::to_string(c.sinogram.n_theta));
  line("sinogram.slabs", c.sinogram.slabs == SlabAssignment::closest_approach ? "closest" : "all");
  flag("sinogram.inpaint", c.sinogram.inpaint);

  const auto& m = c.metrics;
  num("metrics.slab_x", m.slab_x);
  line("metrics.regions",
       join(m.regions, [](const auto& r) { return r.material + ":" + std::to_string(r.erosion); }));
  num("metrics.air_inner_radius", m.air_inner_radius);
  num("metrics.air_outer_radius", m.air_outer_radius);
  line("metrics.pairs", join(m.pairs, [](const auto& p) { return p.fg + ":" + p.bg; }));
  line("metrics.edge.fg", m.edge.fg);
  line("metrics.edge.bg", m.edge.bg);
  num("metrics.edge.y", m.edge.y);
  num("metrics.edge.z_from", m.edge.z_from);
  num("metrics.edge.z_to", m.edge.z_to);
  num("metrics.threshold", m.threshold);

  line("export.slices",
       join(c.slices, [](const auto& s) { return std::string(axis_name(s.axis)) + ":" + fmt(s.coordinate); }));

  line("sweep.views", join(c.sweep.views, [](int v) { return std::to_string(v); }));
  line("sweep.muons", join(c.sweep.muons, [](std::uint64_t v) { return std::to_string(v); }));
  line("sweep.pairs", join(c.sweep.pairs, [](const auto& p) { return p.fg + ":" + p.bg; }));
  return o.str();
}

}  // namespace mutomo
