#pragma once

#include <array>
#include <deque>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fepic/config.hpp"
#include "fepic/fem.hpp"
#include "fepic/oracle.hpp"
#include "fepic/pic.hpp"
#include "fepic/thermal.hpp"

namespace fepic {

struct StepDiagnostics {
  std::uint64_t step = 0;
  double time = 0.0;              // s
  double emitted_current = 0.0;   // A, sum of J A over the surface faces
  double injected_current = 0.0;  // A, injected superparticle charge per step
  double anode_current = 0.0;     // A, charge absorbed at Top per step
  long injected = 0;              // cumulative superparticles
  long absorbed_top = 0;
  long absorbed_surface = 0;
  long absorbed_other = 0;
  long live = 0;
  long ledger = 0;                // injected - absorbed - live
  double max_surface_field = 0.0; // V/m
  double mean_surface_field = 0.0;
  double max_temperature = 0.0;   // K
  int poisson_iterations = 0;
  int heat_iterations = 0;
  long collided_pairs = 0;
};

// Wall-clock seconds per phase of one step.
struct StepTimings {
  double emission = 0.0;
  double injection = 0.0;
  double push = 0.0;
  double boundaries = 0.0;
  double collisions = 0.0;
  double poisson = 0.0;
  double heat = 0.0;
};

// Column header and row of the diagnostics CSV (fixed order).
std::string diagnostics_header();
std::string diagnostics_row(const StepDiagnostics& d);

// Emission state of the Surface faces, ordered as mesh.faces_with_tag(Surface).
struct SurfaceEmission {
  std::vector<double> field;              // normal field pulling electrons out, V/m
  std::vector<std::array<double, 3>> j;   // per sub-quad current density
  std::vector<double> face_j;             // area mean over the face
  std::vector<double> nottingham;         // W/m^2
};

// Declares the current steady once the relative change of its moving average
// over one window stays below the tolerance for `hold`.
class SteadyDetector {
 public:
  SteadyDetector(double dt, double window, double hold, double tolerance);
  // Returns true once steady.
  bool add(double current);
  bool steady() const { return steady_; }
  double moving_average() const;

 private:
  std::size_t window_steps_;
  std::size_t hold_steps_;
  double tolerance_;
  std::deque<double> recent_;
  std::deque<double> averages_;
  double sum_ = 0.0;
  std::size_t calm_ = 0;
  bool steady_ = false;
};

class Simulation {
 public:
  Simulation(SimConfig cfg, std::shared_ptr<const Mesh> mesh);

  const SimConfig& config() const { return cfg_; }
  const Mesh& mesh() const { return *mesh_; }
  const std::vector<Particle>& particles() const { return particles_; }
  std::vector<Particle>& particles() { return particles_; }
  const ScalarField& potential() const { return phi_; }
  const CellVectorField& field() const { return field_; }
  const HeatState& heat() const { return heat_; }
  bool has_metal() const { return has_metal_; }
  const SurfaceEmission& emission() const { return emission_; }
  const StepDiagnostics& last() const { return diag_; }
  const StepTimings& timings() const { return timings_; }
  std::uint64_t step_index() const { return step_; }
  double time() const { return time_; }
  double surface_area() const { return surface_area_; }

  // One PIC cycle; every ceil(dt_heat / dt_pic) cycles also a heat step.
  const StepDiagnostics& step();

  // Solve Poisson for the current particles and refresh the cell field.
  void solve_field();

 private:
  void compute_emission();
  void heat_update();
  void record(int poisson_iterations, int heat_iterations, long pairs);

  SimConfig cfg_;
  std::shared_ptr<const Mesh> mesh_;
  Species species_;
  LateralPeriod period_;
  LinearProblem poisson_;
  std::vector<double> base_rhs_;
  ScalarField phi_;
  CellVectorField field_;
  std::vector<Particle> particles_;
  std::uint64_t next_id_ = 0;
  std::uint64_t step_ = 0;
  double time_ = 0.0;
  BoundaryTally tally_;
  long injected_ = 0;
  long anode_before_ = 0;

  bool has_metal_ = false;
  HeatState heat_;
  int heat_interval_ = 1;
  std::vector<double> j_accum_;
  std::vector<double> pn_accum_;
  int accum_steps_ = 0;
  int last_heat_iterations_ = 0;

  double surface_area_ = 0.0;
  SurfaceEmission emission_;
  StepDiagnostics diag_;
  StepTimings timings_;
  int last_poisson_iterations_ = 0;
};

std::shared_ptr<const Mesh> build_mesh(const SimConfig& cfg);

struct RunSummary {
  std::uint64_t steps = 0;
  double final_time = 0.0;
  double mean_current = 0.0;  // A, emitted current over the last average window
  bool steady = false;
  double steady_time = -1.0;  // s, when the detector fired
};

// Runs to cfg.duration and writes config.txt, diagnostics.csv, timings.csv,
// particle snapshots and final fields into cfg.output_dir.
RunSummary run_simulation(const SimConfig& cfg);

struct SweepPoint {
  double voltage = 0.0;
  double j_pic = 0.0;       // A/m^2, mean emitted current density
  double j_pic_sem = 0.0;   // standard error of the mean from block averages
  double j_anode = 0.0;     // A/m^2, mean current collected at the anode
  double j_oracle = 0.0;
  double j_child_langmuir = 0.0;
  double e_cathode_oracle = 0.0;
  double rel_error = 0.0;   // (j_pic - j_oracle) / j_oracle
  bool steady = false;
  double time = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double rms_rel_error = 0.0;
};

// PIC at each cfg.sweep_voltages entry (voltage mode, box mesh) against the
// 1D oracle. When `diagnostics_dir` is non-empty each run writes its
// diagnostics there.
SweepResult run_diode_sweep(const SimConfig& cfg, const std::string& diagnostics_dir = "");
void write_sweep_csv(std::ostream& out, const SweepResult& r);

void write_particle_snapshot(std::ostream& out, std::span<const Particle> ps);
void write_nodal_fields(std::ostream& out, const Mesh& mesh, const ScalarField& phi, const HeatState* heat);

}  // namespace fepic
