#pragma once

#include <cstdint>

#include "fepic/constants.hpp"
#include "fepic/vec3.hpp"

namespace fepic {

struct Particle {
  Vec3 r;
  Vec3 v;
  int cell = -1;
  // 0 while inside the domain; otherwise the BoundaryTag value of the exit face.
  int exit_tag = 0;
  std::uint64_t id = 0;
};

// A superparticle species: per-real-particle charge and mass, and the number
// of real particles each superparticle stands for.
struct Species {
  double charge = -constants::elementary_charge;
  double mass = constants::electron_mass;
  double weight = 1.0;

  double charge_to_mass() const { return charge / mass; }
};

inline Species electrons(double weight) { return Species{-constants::elementary_charge, constants::electron_mass, weight}; }

}  // namespace fepic
