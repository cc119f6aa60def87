#include <charconv>
#include <ostream>

#include "fepic/simulation.hpp"

namespace fepic {

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string diagnostics_header() {
  return "step,time_s,emitted_current_A,injected_current_A,anode_current_A,injected,absorbed_top,"
         "absorbed_surface,absorbed_other,live,ledger,max_surface_field_V_per_m,mean_surface_field_V_per_m,"
         "max_temperature_K,poisson_iterations,heat_iterations,collided_pairs";
}

std::string diagnostics_row(const StepDiagnostics& d) {
  std::string s;
  s += std::to_string(d.step) + ',' + num(d.time) + ',' + num(d.emitted_current) + ',' + num(d.injected_current) +
       ',' + num(d.anode_current) + ',' + std::to_string(d.injected) + ',' + std::to_string(d.absorbed_top) + ',' +
       std::to_string(d.absorbed_surface) + ',' + std::to_string(d.absorbed_other) + ',' + std::to_string(d.live) +
       ',' + std::to_string(d.ledger) + ',' + num(d.max_surface_field) + ',' + num(d.mean_surface_field) + ',' +
       num(d.max_temperature) + ',' + std::to_string(d.poisson_iterations) + ',' +
       std::to_string(d.heat_iterations) + ',' + std::to_string(d.collided_pairs);
  return s;
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "voltage_V,j_pic_A_per_m2,j_pic_sem_A_per_m2,j_anode_A_per_m2,j_oracle_A_per_m2,"
         "j_child_langmuir_A_per_m2,e_cathode_oracle_V_per_m,rel_error,steady,time_s\n";
  for (const auto& p : r.points) {
    out << num(p.voltage) << ',' << num(p.j_pic) << ',' << num(p.j_pic_sem) << ',' << num(p.j_anode) << ','
        << num(p.j_oracle) << ',' << num(p.j_child_langmuir) << ',' << num(p.e_cathode_oracle) << ','
        << num(p.rel_error) << ',' << (p.steady ? 1 : 0) << ',' << num(p.time) << '\n';
  }
  out << "# rms_rel_error," << num(r.rms_rel_error) << '\n';
}

void write_particle_snapshot(std::ostream& out, std::span<const Particle> ps) {
  out << "# id x_m y_m z_m vx_m_per_s vy_m_per_s vz_m_per_s\n";
  for (const auto& p : ps) {
    out << p.id << ' ' << num(p.r.x) << ' ' << num(p.r.y) << ' ' << num(p.r.z) << ' ' << num(p.v.x) << ' '
        << num(p.v.y) << ' ' << num(p.v.z) << '\n';
  }
}

void write_nodal_fields(std::ostream& out, const Mesh& mesh, const ScalarField& phi, const HeatState* heat) {
  out << "# node x_m y_m z_m potential_V temperature_K metal_potential_V\n";
  for (int n = 0; n < static_cast<int>(mesh.num_nodes()); ++n) {
    const auto& p = mesh.node(n);
    out << n << ' ' << num(p.x) << ' ' << num(p.y) << ' ' << num(p.z) << ' ' << num(phi.values[n]) << ' '
        << num(heat ? heat->temperature.values[n] : 0.0) << ' ' << num(heat ? heat->potential.values[n] : 0.0)
        << '\n';
  }
}

}  // namespace fepic
