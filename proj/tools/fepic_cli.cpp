// fepic command-line driver.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "fepic/config.hpp"
#include "fepic/kernels.hpp"
#include "fepic/oracle.hpp"
#include "fepic/simulation.hpp"

using namespace fepic;

namespace {

struct Common {
  bool deterministic = false;
  bool nondeterministic = false;
  int threads = 0;
};

void apply_common(SimConfig& cfg, const Common& c) {
  if (const char* env = std::getenv("FEPIC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) cfg.threads = n;
  }
  if (c.threads > 0) cfg.threads = c.threads;
  if (c.deterministic) cfg.deterministic = true;
  if (c.nondeterministic) cfg.deterministic = false;
  set_deterministic(cfg.deterministic);
  if (cfg.threads > 0) set_num_threads(cfg.threads);
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_flag("--deterministic", c.deterministic, "Bit-reproducible reductions (default from config)");
  cmd->add_flag("--fast", c.nondeterministic, "Allow thread-order dependent reductions");
  cmd->add_option("--threads", c.threads, "Worker threads (overrides FEPIC_THREADS)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fepic: field-emission PIC coupled with P1 finite elements"};
  app.require_subcommand(1);
  Common common;

  std::string config_path;
  std::string output_dir;
  auto* run = app.add_subcommand("run", "Run a simulation to its configured duration");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output_dir, "Output directory (overrides output.dir)");
  add_common(run, common);

  std::string csv_path;
  auto* sweep = app.add_subcommand("diode-sweep", "PIC I-V sweep of the planar diode against the 1D oracle");
  sweep->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--csv", csv_path, "Write the joined CSV here instead of stdout");
  sweep->add_option("-o,--output", output_dir, "Directory for per-voltage diagnostics");
  add_common(sweep, common);

  auto* orc = app.add_subcommand("oracle", "Semianalytic diode I-V and Child-Langmuir current as CSV");
  orc->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  std::string mesh_path;
  auto* check = app.add_subcommand("check-mesh", "Validate a mesh file and print its summary");
  check->add_option("mesh", mesh_path, "Mesh file")->required()->check(CLI::ExistingFile);

  std::string export_path;
  auto* exp = app.add_subcommand("export-mesh", "Write the mesh described by a config in the text format");
  exp->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  exp->add_option("mesh", export_path, "Output mesh file")->required();

  PostSpec post;
  std::string post_path;
  auto* mkpost = app.add_subcommand("make-post", "Write a metal post emitter mesh (lengths in nm)");
  mkpost->add_option("mesh", post_path, "Output mesh file")->required();
  mkpost->add_option("--width", post.width, "Lateral domain size");
  mkpost->add_option("--post-width", post.post_width, "Post width");
  mkpost->add_option("--post-height", post.post_height, "Post height");
  mkpost->add_option("--base", post.base_thickness, "Base thickness");
  mkpost->add_option("--gap", post.gap, "Vacuum above the post top");
  mkpost->add_option("--n-side", post.n_side, "Cells beside the post");
  mkpost->add_option("--n-post", post.n_post, "Cells across the post");
  mkpost->add_option("--nz-base", post.nz_base, "Cells through the base");
  mkpost->add_option("--nz-post", post.nz_post, "Cells along the post");
  mkpost->add_option("--nz-gap", post.nz_gap, "Cells through the gap");
  mkpost->add_option("--grading", post.grading, "Spacing ratio away from the post");

  auto* keys = app.add_subcommand("config-keys", "List the accepted configuration keys");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      SimConfig cfg = load_config(config_path);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      apply_common(cfg, common);
      const auto s = run_simulation(cfg);
      std::cout << "steps " << s.steps << "\n"
                << "time_s " << s.final_time << "\n"
                << "mean_emitted_current_A " << s.mean_current << "\n"
                << "steady " << (s.steady ? "yes" : "no") << "\n";
      if (s.steady) std::cout << "steady_time_s " << s.steady_time << "\n";
      std::cout << "output " << cfg.output_dir << "\n";
    } else if (*sweep) {
      SimConfig cfg = load_config(config_path);
      apply_common(cfg, common);
      const auto r = run_diode_sweep(cfg, output_dir);
      if (csv_path.empty()) {
        write_sweep_csv(std::cout, r);
      } else {
        std::ofstream out(csv_path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + csv_path);
        write_sweep_csv(out, r);
        std::cout << "rms_rel_error " << r.rms_rel_error << "\n";
      }
    } else if (*orc) {
      const SimConfig cfg = load_config(config_path);
      if (cfg.sweep_voltages.empty()) throw Error(ErrorKind::InvalidConfig, "sweep.voltages: no voltages given");
      oracle::DiodeSpec spec;
      spec.gap = cfg.box.gap;
      spec.work_function_ev = cfg.emitter.work_function_ev;
      spec.area = cfg.box.width * cfg.box.depth;
      spec.temperature = cfg.surface_temperature;
      const auto pts = oracle::sweep(spec, cfg.sweep_voltages, cfg.emitter);
      std::cout.precision(10);
      std::cout << "voltage_V,j_oracle_A_per_m2,j_child_langmuir_A_per_m2,e_cathode_V_per_m,iterations\n";
      for (const auto& p : pts) {
        std::cout << p.voltage << ',' << p.current_density << ',' << p.child_langmuir << ',' << p.cathode_field
                  << ',' << p.iterations << '\n';
      }
    } else if (*check) {
      const Mesh mesh = read_mesh_file(mesh_path);
      const auto r = mesh.check_invariants();
      std::cout << "nodes " << r.nodes << "\n"
                << "tets " << r.tets << "\n"
                << "edges " << r.edges << "\n"
                << "boundary_faces " << r.faces << "\n"
                << "euler_characteristic " << r.euler_characteristic << "\n"
                << "volume_m3 " << r.volume << "\n";
      for (int t = 0; t < kBoundaryTagCount; ++t) {
        std::cout << "tag " << t + 1 << ' ' << to_string(static_cast<BoundaryTag>(t + 1)) << " faces "
                  << r.tag_faces[t] << " area_m2 " << r.tag_area[t] << "\n";
      }
      std::cout << "ok\n";
    } else if (*exp) {
      const SimConfig cfg = load_config(config_path);
      write_mesh_file(export_path, *build_mesh(cfg));
    } else if (*mkpost) {
      PostSpec si = post;
      for (double* v : {&si.width, &si.post_width, &si.post_height, &si.base_thickness, &si.gap}) *v *= 1e-9;
      const Mesh mesh = build_post_mesh(si);
      write_mesh_file(post_path, mesh);
      const auto r = mesh.check_invariants();
      std::cout << "nodes " << r.nodes << " tets " << r.tets << "\n";
    } else if (*keys) {
      std::cout << config_reference();
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
