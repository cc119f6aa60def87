#pragma once

#include <functional>
#include <vector>

#include "fepic/emission.hpp"

namespace fepic::oracle {

struct DiodeSpec {
  double gap = 18.2e-9;       // m
  double voltage = 0.0;       // V
  double work_function_ev = 4.5;
  double area = 135e-18;      // m^2
  double temperature = 300.0; // K
};

// Space-charge-limited current density of a planar vacuum diode, A/m^2.
double child_langmuir(double voltage, double gap);

struct IntegrationOptions {
  // Gauss-Legendre panels of the first pass; refinement doubles the panel
  // count until successive results agree to `rel_tol`.
  int initial_panels = 16;
  int max_panels = 1 << 16;
  double rel_tol = 1e-13;
  // When > 0, use exactly this many panels and skip refinement.
  int fixed_panels = 0;
};

// Distance over which the potential rises from 0 to `voltage` for electrons
// starting at rest with cathode field `cathode_field` and current density j:
//   d = integral_0^V dphi / sqrt(E_c^2 + k sqrt(phi)),  k = 4 (j/eps0) sqrt(m/2e).
double gap_for(double cathode_field, double current_density, double voltage, const IntegrationOptions& opts = {});

// Cathode field consistent with (j, V, d); 0 when j exceeds the Child-Langmuir limit.
double cathode_field_for(double current_density, double voltage, double gap, const IntegrationOptions& opts = {});

struct IvPoint {
  double voltage = 0.0;
  double current_density = 0.0;  // self-consistent J, A/m^2
  double cathode_field = 0.0;    // V/m
  double child_langmuir = 0.0;   // A/m^2
  int iterations = 0;
};

struct IterationOptions {
  double damping = 0.5;
  double rel_tol = 1e-8;
  int max_iter = 500;
  IntegrationOptions integration{};
};

// Emitted current density (A/m^2) as a function of the cathode field (V/m);
// must be non-decreasing.
using EmissionLaw = std::function<double(double)>;

// Damped fixed-point iteration J <- J + damping (J_FN(E_c(J)) - J), kept
// inside a bracket of the root; steps that would leave the bracket fall back
// to bisection. Throws NoConvergence after max_iter.
IvPoint semianalytic_iv(const DiodeSpec& spec, const EmissionLaw& emission, const IterationOptions& opts = {});
// Murphy-Good emission of `mat` at spec.temperature and spec.work_function_ev.
IvPoint semianalytic_iv(const DiodeSpec& spec, const EmitterMaterial& mat, const IterationOptions& opts = {});

std::vector<IvPoint> sweep(const DiodeSpec& base, const std::vector<double>& voltages, const EmitterMaterial& mat,
                           const IterationOptions& opts = {});

}  // namespace fepic::oracle
