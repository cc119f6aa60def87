#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fepic/fem.hpp"
#include "fepic/mesh.hpp"

namespace fepic {

// Piecewise-linear table y(T) with constant extension past the ends.
struct Table1D {
  std::vector<std::pair<double, double>> points;  // sorted by T

  static Table1D constant(double y) { return Table1D{{{0.0, y}}}; }
  // Throws InvalidConfig on empty, unsorted or non-positive tables.
  void validate(const char* what) const;
  // Sets *clamped when T lies outside the table range.
  double at(double t, bool* clamped = nullptr) const;
};

struct MaterialModel {
  Table1D sigma_bulk = Table1D::constant(5.96e7);  // S/m
  Table1D size_factor = Table1D::constant(1.0);    // nu(T, d) for the run's d
  double lorenz = 2.0e-8;           // W Ohm / K^2
  double heat_capacity = 3.45e6;    // J / (K m^3)
  double ambient = 300.0;           // K
  // When > 0, replaces L T sigma as the thermal conductivity (W/(m K)).
  double fixed_kappa = 0.0;

  void validate() const;
};

struct Conductivity {
  double sigma = 0.0;  // S/m
  double kappa = 0.0;  // W/(m K)
  bool clamped = false;
};

// sigma = nu(T) sigma_bulk(T); kappa = L T sigma.
Conductivity conductivity(double temperature, const MaterialModel& mat);

// Per-cell conductivities of the metal cells at the cell-mean temperature
// (zero elsewhere). Returns the number of cells whose T was clamped.
int cell_conductivities(const Mesh& mesh, const ScalarField& temperature, const MaterialModel& mat,
                        std::vector<double>& sigma, std::vector<double>& kappa);

struct ContinuityResult {
  ScalarField potential;   // metal potential, V
  SparseSymSystem system;  // unconstrained matrix and rhs, for flux checks
  CgResult info;
};

// div(sigma grad phi) = 0 in the metal; sigma d(phi)/dn = J on Surface
// (one value per mesh.faces_with_tag(Surface)), zero flux on MetalSide,
// phi = 0 on MetalBottom.
ContinuityResult solve_continuity(const Mesh& mesh, std::span<const double> cell_sigma,
                                  std::span<const double> surface_j, double tol = kDefaultCgTolerance);

// P_J = sigma |grad phi|^2 per metal cell, W/m^3.
std::vector<double> joule_power(const Mesh& mesh, const ScalarField& potential, std::span<const double> cell_sigma);

struct HeatState {
  ScalarField temperature;
  ScalarField potential;  // metal potential from the last continuity solve
  double time = 0.0;
  std::vector<double> source;  // assembled load vector of the last step (per dof)
};

HeatState initial_heat_state(const Mesh& mesh, const MaterialModel& mat);

struct HeatOptions {
  double theta = 1.0;
  bool lumped_mass = true;
  // Fixed temperatures; MetalBottom at ambient when empty.
  std::vector<std::pair<BoundaryTag, double>> dirichlet;
  double tol = kDefaultCgTolerance;
  int max_iter = 20000;
};

// Load vector f_i = integral N_i P_J + integral over Surface of N_i P_N.
std::vector<double> heat_load(const Mesh& mesh, const DofMap& dofs, std::span<const double> cell_pj,
                              std::span<const double> surface_pn);

// One step of (C/dt + theta K) T1 = (C/dt - (1-theta) K) T0 + theta f1 + (1-theta) f0
// with K built from kappa at the current temperature.
HeatState step_heat(const Mesh& mesh, const HeatState& state, double dt, std::span<const double> cell_pj,
                    std::span<const double> surface_pn, const MaterialModel& mat, const HeatOptions& opts = {},
                    CgResult* info = nullptr);

struct SteadyHeat {
  ScalarField temperature;
  SparseSymSystem system;  // K and f before constraints
};

// K T = f with conductivities at `guess`.
SteadyHeat steady_heat(const Mesh& mesh, const ScalarField& guess, std::span<const double> cell_pj,
                       std::span<const double> surface_pn, const MaterialModel& mat, const HeatOptions& opts = {});

double max_value(const Mesh& mesh, const ScalarField& f);

}  // namespace fepic
