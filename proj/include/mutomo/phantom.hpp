#pragma once

#include <string>
#include <vector>

#include "mutomo/geometry.hpp"

namespace mutomo {

struct WedgeSpec {
  std::string name;
  std::string material;
  double base = 0.0;       // triangle base, cm
  double height = 0.0;     // triangle height, cm
  double thickness = 0.0;  // extent along the drum axis, cm
  Vec3 center;             // centroid, drum frame
  double rotation = 0.0;   // in-plane, rad
};

/// Concrete-filled steel drum with its axis along x, centered at the origin.
struct DrumSpec {
  double radius = 17.0;  // fill radius, cm
  double length = 42.0;  // fill length, cm
  double wall = 0.09;    // wall and end-cap thickness, cm
  std::string fill = "concrete";
  std::string wall_material = "steel";
  std::string background = "air";
  std::vector<WedgeSpec> wedges;
  std::vector<Material> materials;
};

/// Drum with tungsten and brass wedges coplanar at x = +11 cm (32 cm from the
/// -x end) and a lead wedge at x = -1 cm (20 cm from the -x end).
DrumSpec default_drum_spec();

/// Concrete drum without wedges.
DrumSpec plain_drum_spec();

/// Wall, then fill, then wedges in declaration order.
Scene build_scene(const DrumSpec& spec);

/// Scene holding nothing but `background`.
Scene empty_scene(const Material& background);

}  // namespace mutomo
