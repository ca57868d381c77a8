#include "mutomo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mutomo/error.hpp"

namespace mutomo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Parameter range where ray.x lies within [lo, hi]. Returns false if empty.
bool clip_axis(double o, double d, double lo, double hi, double& t0, double& t1) {
  if (d == 0.0) {
    if (o < lo || o > hi) return false;
    return true;
  }
  double a = (lo - o) / d;
  double b = (hi - o) / d;
  if (a > b) std::swap(a, b);
  t0 = std::max(t0, a);
  t1 = std::min(t1, b);
  return t0 <= t1;
}

// Parameter range where the (y, z) projection lies within a disc of radius r.
bool clip_disc(const Ray& ray, double cy, double cz, double r, double& t0, double& t1) {
  const double oy = ray.origin.y - cy;
  const double oz = ray.origin.z - cz;
  const double dy = ray.direction.y;
  const double dz = ray.direction.z;
  const double a = dy * dy + dz * dz;
  const double c = oy * oy + oz * oz - r * r;
  if (a == 0.0) return c <= 0.0;
  const double b = oy * dy + oz * dz;  // half of the linear coefficient
  const double disc = b * b - a * c;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  // Numerically stable roots.
  const double q = (b >= 0.0) ? -(b + sq) : -(b - sq);
  double r0 = q / a;
  double r1 = (q != 0.0) ? c / q : -r0;
  if (r0 > r1) std::swap(r0, r1);
  t0 = std::max(t0, r0);
  t1 = std::min(t1, r1);
  return t0 <= t1;
}

struct Aabb {
  Vec3 lo;
  Vec3 hi;
};

Aabb bounds_of(const Shape& shape) {
  return std::visit(
      Overloaded{
          [](const Cylinder& c) {
            return Aabb{{c.center.x - c.length / 2, c.center.y - c.radius, c.center.z - c.radius},
                        {c.center.x + c.length / 2, c.center.y + c.radius, c.center.z + c.radius}};
          },
          [](const CylindricalShell& s) {
            return Aabb{{s.center.x - s.length / 2, s.center.y - s.outer_radius,
                         s.center.z - s.outer_radius},
                        {s.center.x + s.length / 2, s.center.y + s.outer_radius,
                         s.center.z + s.outer_radius}};
          },
          [](const TriangularPrism& p) {
            const auto v = prism_vertices(p);
            Aabb b{{p.center.x - p.thickness / 2, kInf, kInf},
                   {p.center.x + p.thickness / 2, -kInf, -kInf}};
            for (const auto& q : v) {
              b.lo.y = std::min(b.lo.y, q[0]);
              b.hi.y = std::max(b.hi.y, q[0]);
              b.lo.z = std::min(b.lo.z, q[1]);
              b.hi.z = std::max(b.hi.z, q[1]);
            }
            return b;
          },
      },
      shape);
}

// Signed area test: >= 0 when (py, pz) is left of the directed edge a->b.
double edge_side(const std::array<double, 2>& a, const std::array<double, 2>& b, double py,
                 double pz) {
  return (b[0] - a[0]) * (pz - a[1]) - (b[1] - a[1]) * (py - a[0]);
}

}  // namespace

Material make_material(std::string name, double z_eff, double density, double radiation_length) {
  if (!(density > 0.0)) throw InvalidArgument("material " + name + ": density must be > 0");
  if (!(radiation_length > 0.0))
    throw InvalidArgument("material " + name + ": radiation length must be > 0");
  return Material{std::move(name), z_eff, density, radiation_length};
}

std::vector<Material> default_materials() {
  return {
      make_material("air", 7.3, 0.96e-3, 30390.0),
      make_material("tungsten", 74.0, 19.3, 0.3504),
      make_material("lead", 82.0, 11.3, 0.5612),
      make_material("brass", 29.5, 8.5, 1.53),
      make_material("steel", 26.0, 7.87, 1.76),
      make_material("concrete", 11.0, 2.3, 11.55),
  };
}

Ray make_ray(const Vec3& origin, const Vec3& direction) {
  const double n = norm(direction);
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("ray direction must be non-zero");
  return Ray{origin, direction / n};
}

std::array<std::array<double, 2>, 3> prism_vertices(const TriangularPrism& p) {
  const double c = std::cos(p.rotation);
  const double s = std::sin(p.rotation);
  const std::array<std::array<double, 2>, 3> local{{
      {-p.base / 2, -p.height / 3},
      {p.base / 2, -p.height / 3},
      {0.0, 2 * p.height / 3},
  }};
  std::array<std::array<double, 2>, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = {p.center.y + c * local[i][0] - s * local[i][1],
              p.center.z + s * local[i][0] + c * local[i][1]};
  }
  return out;
}

void validate_shape(const Shape& shape) {
  std::visit(Overloaded{
                 [](const Cylinder& c) {
                   if (!(c.radius > 0 && c.length > 0))
                     throw InvalidArgument("cylinder extents must be > 0");
                 },
                 [](const CylindricalShell& s) {
                   if (!(s.inner_radius > 0 && s.outer_radius > s.inner_radius && s.length > 0))
                     throw InvalidArgument("shell needs 0 < inner < outer radius and length > 0");
                 },
                 [](const TriangularPrism& p) {
                   if (!(p.base > 0 && p.height > 0 && p.thickness > 0))
                     throw InvalidArgument("prism extents must be > 0");
                 },
             },
             shape);
}

bool contains(const Shape& shape, const Vec3& p) {
  return std::visit(
      Overloaded{
          [&](const Cylinder& c) {
            const double dy = p.y - c.center.y;
            const double dz = p.z - c.center.z;
            return std::abs(p.x - c.center.x) <= c.length / 2 &&
                   dy * dy + dz * dz <= c.radius * c.radius;
          },
          [&](const CylindricalShell& s) {
            const double dy = p.y - s.center.y;
            const double dz = p.z - s.center.z;
            const double rho2 = dy * dy + dz * dz;
            return std::abs(p.x - s.center.x) <= s.length / 2 &&
                   rho2 <= s.outer_radius * s.outer_radius &&
                   rho2 >= s.inner_radius * s.inner_radius;
          },
          [&](const TriangularPrism& t) {
            if (std::abs(p.x - t.center.x) > t.thickness / 2) return false;
            const auto v = prism_vertices(t);
            for (std::size_t i = 0; i < 3; ++i) {
              if (edge_side(v[i], v[(i + 1) % 3], p.y, p.z) < 0.0) return false;
            }
            return true;
          },
      },
      shape);
}

void intersect(const Shape& shape, const Ray& ray, std::vector<Interval>& out) {
  std::visit(
      Overloaded{
          [&](const Cylinder& c) {
            double t0 = -kInf, t1 = kInf;
            if (!clip_axis(ray.origin.x, ray.direction.x, c.center.x - c.length / 2,
                           c.center.x + c.length / 2, t0, t1))
              return;
            if (!clip_disc(ray, c.center.y, c.center.z, c.radius, t0, t1)) return;
            out.push_back({t0, t1});
          },
          [&](const CylindricalShell& s) {
            double t0 = -kInf, t1 = kInf;
            if (!clip_axis(ray.origin.x, ray.direction.x, s.center.x - s.length / 2,
                           s.center.x + s.length / 2, t0, t1))
              return;
            if (!clip_disc(ray, s.center.y, s.center.z, s.outer_radius, t0, t1)) return;
            double h0 = -kInf, h1 = kInf;
            if (!clip_disc(ray, s.center.y, s.center.z, s.inner_radius, h0, h1) || h1 <= t0 ||
                h0 >= t1) {
              out.push_back({t0, t1});
              return;
            }
            if (h0 > t0) out.push_back({t0, h0});
            if (h1 < t1) out.push_back({h1, t1});
          },
          [&](const TriangularPrism& p) {
            double t0 = -kInf, t1 = kInf;
            if (!clip_axis(ray.origin.x, ray.direction.x, p.center.x - p.thickness / 2,
                           p.center.x + p.thickness / 2, t0, t1))
              return;
            const auto v = prism_vertices(p);
            for (std::size_t i = 0; i < 3; ++i) {
              const auto& a = v[i];
              const auto& b = v[(i + 1) % 3];
              // f(t) = f0 + t * df must stay >= 0
              const double f0 = edge_side(a, b, ray.origin.y, ray.origin.z);
              const double df = (b[0] - a[0]) * ray.direction.z - (b[1] - a[1]) * ray.direction.y;
              if (df == 0.0) {
                if (f0 < 0.0) return;
                continue;
              }
              const double t = -f0 / df;
              if (df > 0.0) {
                t0 = std::max(t0, t);
              } else {
                t1 = std::min(t1, t);
              }
              if (t0 > t1) return;
            }
            out.push_back({t0, t1});
          },
      },
      shape);
}

Scene::Scene(Material background) {
  if (!(background.density > 0.0) || !(background.radiation_length > 0.0))
    throw InvalidArgument("background material must have density and radiation length > 0");
  materials_.push_back(std::move(background));
  bounds_lo_ = {kInf, kInf, kInf};
  bounds_hi_ = {-kInf, -kInf, -kInf};
}

int Scene::add_material(const Material& material) {
  if (const int i = find_material(material.name); i >= 0) return i;
  if (!(material.density > 0.0) || !(material.radiation_length > 0.0))
    throw InvalidArgument("material " + material.name + " must have density and radiation length > 0");
  materials_.push_back(material);
  return static_cast<int>(materials_.size() - 1);
}

int Scene::find_material(const std::string& name) const {
  for (std::size_t i = 0; i < materials_.size(); ++i) {
    if (materials_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

void Scene::add_shape(const Shape& shape, const std::string& material_name) {
  validate_shape(shape);
  const int m = find_material(material_name);
  if (m < 0) throw InvalidArgument("unknown material: " + material_name);
  entries_.push_back({shape, m});
  const Aabb b = bounds_of(shape);
  bounds_lo_ = {std::min(bounds_lo_.x, b.lo.x), std::min(bounds_lo_.y, b.lo.y),
                std::min(bounds_lo_.z, b.lo.z)};
  bounds_hi_ = {std::max(bounds_hi_.x, b.hi.x), std::max(bounds_hi_.y, b.hi.y),
                std::max(bounds_hi_.z, b.hi.z)};
}

int Scene::material_index_at(const Vec3& p) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (contains(it->shape, p)) return it->material;
  }
  return 0;
}

bool Scene::ray_hits_bounds(const Ray& ray, double t_min, double t_max) const {
  if (entries_.empty()) return false;
  double t0 = t_min, t1 = t_max;
  return clip_axis(ray.origin.x, ray.direction.x, bounds_lo_.x, bounds_hi_.x, t0, t1) &&
         clip_axis(ray.origin.y, ray.direction.y, bounds_lo_.y, bounds_hi_.y, t0, t1) &&
         clip_axis(ray.origin.z, ray.direction.z, bounds_lo_.z, bounds_hi_.z, t0, t1);
}

std::vector<PathSegment> Scene::segment_path(const Ray& ray, double t_min, double t_max) const {
  if (!(t_min < t_max)) throw InvalidArgument("segment_path requires t_min < t_max");
  std::vector<PathSegment> out;
  if (!ray_hits_bounds(ray, t_min, t_max)) {
    out.push_back({0, t_min, t_max});
    return out;
  }
  std::vector<Interval> intervals;
  for (const auto& e : entries_) intersect(e.shape, ray, intervals);

  std::vector<double> cuts;
  cuts.reserve(intervals.size() * 2 + 2);
  for (const auto& iv : intervals) {
    for (double t : {iv.enter, iv.exit}) {
      if (t > t_min + kBoundaryMerge && t < t_max - kBoundaryMerge) cuts.push_back(t);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> ts{t_min};
  for (double t : cuts) {
    if (t - ts.back() > kBoundaryMerge) ts.push_back(t);
  }
  ts.push_back(t_max);

  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const int m = material_index_at(ray.at(0.5 * (ts[i] + ts[i + 1])));
    if (!out.empty() && out.back().material == m) {
      out.back().exit = ts[i + 1];
    } else {
      out.push_back({m, ts[i], ts[i + 1]});
    }
  }
  return out;
}

PathSegment Scene::first_segment(const Ray& ray, double t_max) const {
  if (!ray_hits_bounds(ray, 0.0, t_max)) return {0, 0.0, t_max};
  thread_local std::vector<Interval> intervals;
  intervals.clear();
  for (const auto& e : entries_) intersect(e.shape, ray, intervals);
  double next = t_max;
  for (const auto& iv : intervals) {
    if (iv.enter > kBoundaryMerge && iv.enter < next) next = iv.enter;
    if (iv.exit > kBoundaryMerge && iv.exit < next) next = iv.exit;
  }
  return {material_index_at(ray.at(0.5 * next)), 0.0, next};
}

Scene Scene::with_radiation_length(const std::string& name, double radiation_length) const {
  Scene copy = *this;
  for (auto& m : copy.materials_) {
    if (m.name == name) m.radiation_length = radiation_length;
  }
  return copy;
}

VoxelMask erode(const VoxelMask& mask, int iterations) {
  if (iterations < 0) throw InvalidArgument("erosion must be >= 0");
  VoxelMask cur = mask;
  const auto& g = mask.grid;
  for (int it = 0; it < iterations; ++it) {
    VoxelMask next(g);
    for (int ix = 0; ix < g.dims[0]; ++ix) {
      for (int iy = 0; iy < g.dims[1]; ++iy) {
        for (int iz = 0; iz < g.dims[2]; ++iz) {
          if (!cur.test(g.index(ix, iy, iz))) continue;
          bool keep = true;
          constexpr int nb[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
          for (const auto& d : nb) {
            const int jx = ix + d[0], jy = iy + d[1], jz = iz + d[2];
            if (!g.contains(jx, jy, jz) || !cur.test(g.index(jx, jy, jz))) {
              keep = false;
              break;
            }
          }
          next.on[g.index(ix, iy, iz)] = keep ? 1 : 0;
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

bool is_subset(const VoxelMask& inner, const VoxelMask& outer) {
  if (!(inner.grid == outer.grid)) return false;
  for (std::size_t i = 0; i < inner.on.size(); ++i) {
    if (inner.on[i] && !outer.on[i]) return false;
  }
  return true;
}

VoxelMask mask_and(const VoxelMask& a, const VoxelMask& b) {
  if (!(a.grid == b.grid)) throw InvalidArgument("mask grids differ");
  VoxelMask out(a.grid);
  for (std::size_t i = 0; i < out.on.size(); ++i) out.on[i] = (a.on[i] && b.on[i]) ? 1 : 0;
  return out;
}

VoxelMask region_mask(const Scene& scene, const GridSpec& grid, const std::string& material_name,
                      int erosion_voxels) {
  if (erosion_voxels < 0) throw InvalidArgument("erosion_voxels must be >= 0");
  const int m = scene.find_material(material_name);
  if (m < 0) throw InvalidArgument("unknown material: " + material_name);
  VoxelMask mask(grid);
  for (int ix = 0; ix < grid.dims[0]; ++ix) {
    for (int iy = 0; iy < grid.dims[1]; ++iy) {
      for (int iz = 0; iz < grid.dims[2]; ++iz) {
        if (scene.material_index_at(grid.center(ix, iy, iz)) == m) mask.on[grid.index(ix, iy, iz)] = 1;
      }
    }
  }
  mask = erode(mask, erosion_voxels);
  if (mask.empty())
    throw EmptyRegionError("region '" + material_name + "' is empty after erosion " +
                           std::to_string(erosion_voxels));
  return mask;
}

}  // namespace mutomo
