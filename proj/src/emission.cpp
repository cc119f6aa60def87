#include "fepic/emission.hpp"

#include <algorithm>
#include <cmath>

#include "fepic/constants.hpp"
#include "fepic/error.hpp"

namespace fepic {

namespace {

using namespace constants;

constexpr double kFnA = elementary_charge * elementary_charge * elementary_charge / (8.0 * pi * planck);
const double kFnB = 8.0 * pi * std::sqrt(2.0 * electron_mass) / (3.0 * elementary_charge * planck);
constexpr double kSchottky = elementary_charge * elementary_charge * elementary_charge / (4.0 * pi * vacuum_permittivity);

// x / sin(x) and x * cot(x), with series near zero.
double x_over_sin(double x) { return x < 1e-4 ? 1.0 + x * x / 6.0 : x / std::sin(x); }
double x_cot(double x) { return x < 1e-4 ? 1.0 - x * x / 3.0 : x / std::tan(x); }

struct Cold {
  double j;  // zero-temperature current density
  double d;  // decay width, J
};

Cold cold_emission(double field, double phi_j) {
  const double f = kSchottky * field / (phi_j * phi_j);
  const double v = barrier_v(f);
  const double t = barrier_t(f);
  const double j = kFnA * field * field / (phi_j * t * t) * std::exp(-v * kFnB * std::pow(phi_j, 1.5) / field);
  const double d = hbar * elementary_charge * field / (2.0 * std::sqrt(2.0 * electron_mass * phi_j) * t);
  return {j, d};
}

}  // namespace

double barrier_v(double f) {
  if (f <= 0.0) return 1.0;
  return 1.0 - f + f * std::log(f) / 6.0;
}

double barrier_t(double f) {
  if (f <= 0.0) return 1.0;
  return 1.0 + f / 9.0 - f * std::log(f) / 18.0;
}

double scaled_barrier_field(double field, double work_function_ev) {
  const double phi = work_function_ev * elementary_charge;
  return kSchottky * field / (phi * phi);
}

double barrier_collapse_field(double work_function_ev) {
  const double phi = work_function_ev * elementary_charge;
  return phi * phi / kSchottky;
}

double decay_width(double field, double work_function_ev) {
  const double phi = work_function_ev * elementary_charge;
  return cold_emission(field, phi).d;
}

EmissionResult emit(double field, double temperature, const EmitterMaterial& mat) {
  if (!(mat.work_function_ev > 0.0)) throw Error(ErrorKind::InvalidConfig, "work function must be positive");
  if (!std::isfinite(field)) throw Error(ErrorKind::InvalidEmission, "non-finite surface field");
  EmissionResult out;
  if (field <= 0.0) return out;

  const double phi = mat.work_function_ev * elementary_charge;
  const double f_collapse = barrier_collapse_field(mat.work_function_ev);
  double eval_field = field;
  if (field >= f_collapse) {
    out.over_barrier = true;
    if (mat.over_barrier == OverBarrierPolicy::Throw) {
      throw Error(ErrorKind::OverBarrier, "surface field " + std::to_string(field) + " V/m collapses the barrier");
    }
    eval_field = f_collapse;
  }

  const Cold cold = cold_emission(eval_field, phi);
  const double kt = boltzmann * std::max(temperature, 0.0);
  const double x = pi * std::min(kt / cold.d, kMaxThermalRatio);
  double j = cold.j * x_over_sin(x);
  if (out.over_barrier) j *= (field / eval_field) * (field / eval_field);

  out.current_density = j;
  out.mean_energy_deficit = cold.d * x_cot(x);
  out.nottingham = j * out.mean_energy_deficit / elementary_charge;
  return out;
}

double current_density(double field, double temperature, const EmitterMaterial& mat) {
  return emit(field, temperature, mat).current_density;
}

double nottingham_flux(double field, double temperature, const EmitterMaterial& mat) {
  return emit(field, temperature, mat).nottingham;
}

}  // namespace fepic
