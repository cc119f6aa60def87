#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fepic/emission.hpp"
#include "fepic/mesh.hpp"
#include "fepic/thermal.hpp"

namespace fepic {

enum class MeshSource { Box, File };
enum class AnodeMode {
  Field,    // Neumann: d(phi)/dn = E0 on Top
  Voltage,  // Dirichlet: phi = V on Top
};

// Everything in SI except the work function (eV).
struct SimConfig {
  MeshSource mesh_source = MeshSource::Box;
  std::string mesh_path;
  BoxSpec box;

  AnodeMode anode = AnodeMode::Field;
  double applied_field = 0.0;  // V/m
  double voltage = 0.0;        // V
  double cg_tolerance = 1e-10;

  double dt_pic = 0.0;     // s
  double dt_heat = 40e-15; // s
  double duration = 0.0;   // s

  double weight = 0.01;
  bool collisions = true;
  double coulomb_log = 13.0;
  std::uint64_t seed = 1;

  EmitterMaterial emitter;
  double surface_temperature = 300.0;  // K, used when the mesh has no metal

  MaterialModel material;
  double theta = 1.0;
  bool lumped_mass = true;
  double feature_size = 0.0;  // m, the d of nu(T, d); informational

  std::string output_dir = "fepic-out";
  int diagnostics_every = 1;
  int snapshot_every = 0;
  bool write_fields = true;

  double steady_window = 5e-15;
  double steady_hold = 5e-15;
  double steady_tolerance = 0.03;
  double average_window = 10e-15;

  std::vector<double> sweep_voltages;  // V
  double sweep_duration = 40e-15;      // s, per voltage

  bool deterministic = true;
  int threads = 0;

  // Throws InvalidConfig naming the offending key.
  void validate() const;
};

// INI-style text: "[section]" headers, "key = value [unit]" lines, '#'
// comments. Numbers take an optional unit; without one the documented
// default unit of the key applies (lengths nm, times fs, fields GV/m,
// energies eV). Unknown sections or keys are errors.
SimConfig parse_config(std::istream& in, const std::string& source_name = "<config>");
SimConfig load_config(const std::string& path);

// Canonical form: every key in fixed order, numbers in SI with explicit units.
std::string dump_config(const SimConfig& cfg);

// Documented keys with their default units, one per line.
std::string config_reference();

}  // namespace fepic
