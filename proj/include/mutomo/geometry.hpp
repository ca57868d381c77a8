#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "mutomo/grid.hpp"
#include "mutomo/vec3.hpp"

namespace mutomo {

struct Material {
  std::string name;
  double z_eff = 0.0;             // descriptive only
  double density = 0.0;           // g/cm^3
  double radiation_length = 0.0;  // cm; +inf means no scattering

  bool operator==(const Material&) const = default;
};

/// Validates density and radiation length and returns the material.
Material make_material(std::string name, double z_eff, double density, double radiation_length);

/// Built-in material table (tungsten, lead, brass, steel, concrete, air).
std::vector<Material> default_materials();

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length

  Vec3 at(double t) const { return origin + direction * t; }
};

/// Builds a ray, normalizing `direction`; throws on a zero direction.
Ray make_ray(const Vec3& origin, const Vec3& direction);

/// Solid cylinder with its axis along x.
struct Cylinder {
  Vec3 center;
  double radius = 0.0;
  double length = 0.0;
};

/// Open tube with its axis along x.
struct CylindricalShell {
  Vec3 center;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  double length = 0.0;
};

/// Right prism whose triangular face lies in the (y, z) plane and whose
/// thickness runs along x. The triangle has its base on local -v, its apex on
/// local +v, and `center` at its centroid; `rotation` turns it in-plane.
struct TriangularPrism {
  double base = 0.0;
  double height = 0.0;
  double thickness = 0.0;
  Vec3 center;
  double rotation = 0.0;  // rad, counter-clockwise from +y toward +z
};

using Shape = std::variant<Cylinder, CylindricalShell, TriangularPrism>;

void validate_shape(const Shape& shape);
bool contains(const Shape& shape, const Vec3& p);

/// Parameter intervals [t_in, t_out] where the infinite line `ray` is inside `shape`.
struct Interval {
  double enter;
  double exit;
};
void intersect(const Shape& shape, const Ray& ray, std::vector<Interval>& out);

/// Triangle vertices of a prism in (y, z) lab coordinates.
std::array<std::array<double, 2>, 3> prism_vertices(const TriangularPrism& prism);

struct PathSegment {
  int material;  // index into Scene::materials()
  double enter;
  double exit;
};

/// Constructive scene: later shapes override earlier ones where they overlap.
/// Immutable after construction, all queries are const and thread-safe.
class Scene {
 public:
  explicit Scene(Material background);

  /// Adds `material` to the table if no material with that name exists yet.
  int add_material(const Material& material);
  void add_shape(const Shape& shape, const std::string& material_name);

  const Material& background() const { return materials_[0]; }
  const Material& material(int index) const { return materials_.at(static_cast<std::size_t>(index)); }
  const std::vector<Material>& materials() const { return materials_; }
  /// Index of the named material, or -1.
  int find_material(const std::string& name) const;

  struct Entry {
    Shape shape;
    int material;
  };
  const std::vector<Entry>& entries() const { return entries_; }

  int material_index_at(const Vec3& p) const;
  const Material& material_at(const Vec3& p) const { return material(material_index_at(p)); }

  /// Ordered material segments tiling [t_min, t_max] along `ray`.
  std::vector<PathSegment> segment_path(const Ray& ray, double t_min, double t_max) const;

  /// The segment starting at t = 0: its material and the distance to the next
  /// boundary (capped at t_max).
  PathSegment first_segment(const Ray& ray, double t_max) const;

  /// Copy of this scene with every material's radiation length replaced by
  /// `radiation_length` where the material name matches.
  Scene with_radiation_length(const std::string& name, double radiation_length) const;

 private:
  bool ray_hits_bounds(const Ray& ray, double t_min, double t_max) const;

  std::vector<Material> materials_;
  std::vector<Entry> entries_;
  Vec3 bounds_lo_{};
  Vec3 bounds_hi_{};
};

/// Tolerance under which boundary parameters are merged.
inline constexpr double kBoundaryMerge = 1e-9;

/// Voxels whose centers lie in `material_name`, eroded `erosion_voxels` times.
/// Throws EmptyRegionError when nothing survives.
VoxelMask region_mask(const Scene& scene, const GridSpec& grid, const std::string& material_name,
                      int erosion_voxels);

}  // namespace mutomo
