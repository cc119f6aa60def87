#pragma once

namespace fepic {

enum class OverBarrierPolicy {
  // Above barrier collapse, continue as J(F_c) * (F / F_c)^2 from the
  // collapse field F_c; keeps J continuous and increasing.
  Saturate,
  Throw,
};

struct EmitterMaterial {
  double work_function_ev = 4.5;
  OverBarrierPolicy over_barrier = OverBarrierPolicy::Saturate;
};

struct EmissionResult {
  double current_density = 0.0;  // A/m^2
  double nottingham = 0.0;       // W/m^2, positive heats the surface
  double mean_energy_deficit = 0.0;  // J, Fermi level minus mean total energy of emitted electrons
  bool over_barrier = false;
};

// Forbes approximations of the image-charge barrier functions of the scaled
// barrier field f.
double barrier_v(double f);
double barrier_t(double f);
// f = (e^3 / 4 pi eps0) F / phi^2
double scaled_barrier_field(double field, double work_function_ev);
// Field at which the barrier top reaches the Fermi level (f = 1).
double barrier_collapse_field(double work_function_ev);
// Decay width d of the tunnelling probability near the Fermi level, J.
double decay_width(double field, double work_function_ev);

// Murphy-Good field emission with the thermal factor pi kT/d / sin(pi kT/d)
// and the Nottingham flux J * deficit / e, deficit = pi kT cot(pi kT/d).
// `field` is the surface field pulling electrons out (V/m); <= 0 emits nothing.
// kT/d is capped at kMaxThermalRatio, where the cold-field expansion ends.
EmissionResult emit(double field, double temperature, const EmitterMaterial& mat);

double current_density(double field, double temperature, const EmitterMaterial& mat);
double nottingham_flux(double field, double temperature, const EmitterMaterial& mat);

inline constexpr double kMaxThermalRatio = 0.75;

}  // namespace fepic
