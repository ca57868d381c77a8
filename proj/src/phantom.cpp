#include "mutomo/phantom.hpp"

#include "mutomo/error.hpp"

namespace mutomo {

DrumSpec plain_drum_spec() {
  DrumSpec spec;
  spec.materials = default_materials();
  return spec;
}

DrumSpec default_drum_spec() {
  DrumSpec spec = plain_drum_spec();
  spec.wedges = {
      {"tungsten_wedge", "tungsten", 15.0, 10.0, 4.0, {11.0, -5.5, -5.0}, 0.0},
      {"brass_wedge", "brass", 9.0, 7.0, 5.0, {11.0, 6.5, 5.0}, 0.0},
      {"lead_wedge", "lead", 6.0, 7.0, 3.0, {-1.0, 0.0, 8.0}, 0.0},
  };
  return spec;
}

Scene build_scene(const DrumSpec& spec) {
  const Material* background = nullptr;
  for (const auto& m : spec.materials) {
    if (m.name == spec.background) background = &m;
  }
  if (!background) throw InvalidArgument("background material not defined: " + spec.background);
  Scene scene(*background);
  for (const auto& m : spec.materials) scene.add_material(m);

  scene.add_shape(Cylinder{{0, 0, 0}, spec.radius + spec.wall, spec.length + 2 * spec.wall},
                  spec.wall_material);
  scene.add_shape(Cylinder{{0, 0, 0}, spec.radius, spec.length}, spec.fill);
  for (const auto& w : spec.wedges) {
    scene.add_shape(TriangularPrism{w.base, w.height, w.thickness, w.center, w.rotation}, w.material);
  }
  return scene;
}

Scene empty_scene(const Material& background) { return Scene(background); }

}  // namespace mutomo
