#include "fepic/simulation.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "fepic/emission.hpp"
#include "fepic/kernels.hpp"

namespace fepic {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t steps_for(double span, double dt) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(span / dt)));
}

}  // namespace

SteadyDetector::SteadyDetector(double dt, double window, double hold, double tolerance)
    : window_steps_(steps_for(window, dt)), hold_steps_(steps_for(hold, dt)), tolerance_(tolerance) {}

bool SteadyDetector::add(double current) {
  recent_.push_back(current);
  sum_ += current;
  if (recent_.size() > window_steps_) {
    sum_ -= recent_.front();
    recent_.pop_front();
  }
  if (recent_.size() < window_steps_) return steady_;
  const double avg = sum_ / static_cast<double>(window_steps_);
  averages_.push_back(avg);
  if (averages_.size() > window_steps_ + 1) averages_.pop_front();
  if (averages_.size() == window_steps_ + 1) {
    const double prev = averages_.front();
    const double change = std::abs(avg - prev) / std::max(std::abs(avg), 1e-300);
    calm_ = change < tolerance_ ? calm_ + 1 : 0;
    if (calm_ >= hold_steps_) steady_ = true;
  }
  return steady_;
}

double SteadyDetector::moving_average() const {
  return recent_.empty() ? 0.0 : sum_ / static_cast<double>(recent_.size());
}

std::shared_ptr<const Mesh> build_mesh(const SimConfig& cfg) {
  if (cfg.mesh_source == MeshSource::File) return std::make_shared<const Mesh>(read_mesh_file(cfg.mesh_path));
  return std::make_shared<const Mesh>(build_box_mesh(cfg.box));
}

Simulation::Simulation(SimConfig cfg, std::shared_ptr<const Mesh> mesh)
    : cfg_(std::move(cfg)), mesh_(std::move(mesh)) {
  cfg_.validate();
  set_deterministic(cfg_.deterministic);
  if (cfg_.threads > 0) set_num_threads(cfg_.threads);
  const Mesh& m = *mesh_;
  species_ = electrons(cfg_.weight);
  period_ = LateralPeriod::from_mesh(m);

  SparseSymSystem sys = assemble_laplace(m, Region::Vacuum, 1.0);
  if (cfg_.anode == AnodeMode::Field) {
    add_neumann_flux(sys, m, BoundaryTag::Top, cfg_.applied_field);
  } else {
    add_dirichlet(sys, m, BoundaryTag::Top, cfg_.voltage);
  }
  add_dirichlet(sys, m, BoundaryTag::Surface, 0.0);
  base_rhs_ = sys.rhs;
  poisson_ = LinearProblem(std::move(sys));

  has_metal_ = m.has_region(Region::Metal);
  if (has_metal_) heat_ = initial_heat_state(m, cfg_.material);
  heat_interval_ = static_cast<int>(std::ceil(cfg_.dt_heat / cfg_.dt_pic * (1.0 - 1e-12)));

  const auto faces = m.faces_with_tag(BoundaryTag::Surface);
  for (int f : faces) surface_area_ += m.face(f).area;
  j_accum_.assign(faces.size(), 0.0);
  pn_accum_.assign(faces.size(), 0.0);

  solve_field();
  compute_emission();
  record(last_poisson_iterations_, 0, 0);
}

void Simulation::solve_field() {
  std::vector<double> rhs = base_rhs_;
  std::vector<double> nodal(mesh_->num_nodes(), 0.0);
  const double scale = species_.charge * species_.weight / constants::vacuum_permittivity;
  kernels::omp::deposit(*mesh_, particles_, scale, nodal);
  const auto& dofs = poisson_.dofs();
  for (int d = 0; d < dofs.size(); ++d) rhs[d] += nodal[dofs.dof_to_node[d]];
  CgResult info;
  phi_ = poisson_.solve(rhs, phi_.values.empty() ? nullptr : &phi_, cfg_.cg_tolerance, 20000, &info);
  last_poisson_iterations_ = info.iterations;
  field_ = eval_field(*mesh_, phi_);
}

void Simulation::compute_emission() {
  const Mesh& m = *mesh_;
  const auto faces = m.faces_with_tag(BoundaryTag::Surface);
  const long n = static_cast<long>(faces.size());
  emission_.field.assign(n, 0.0);
  emission_.j.assign(n, {0.0, 0.0, 0.0});
  emission_.face_j.assign(n, 0.0);
  emission_.nottingham.assign(n, 0.0);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto& face = m.face(faces[i]);
    const double f = dot(field_[face.tet], face.normal);
    emission_.field[i] = f;
    double pn = 0.0;
    for (int c = 0; c < 3; ++c) {
      double t = cfg_.surface_temperature;
      if (has_metal_) {
        const SubQuad sq = m.subquad(faces[i], c);
        const auto w = m.face_barycentric(faces[i], sq.centroid());
        t = 0.0;
        for (int k = 0; k < 3; ++k) t += w[k] * heat_.temperature.values[face.nodes[k]];
      }
      const auto e = emit(f, t, cfg_.emitter);
      emission_.j[i][c] = e.current_density;
      pn += e.nottingham / 3.0;
    }
    emission_.face_j[i] = (emission_.j[i][0] + emission_.j[i][1] + emission_.j[i][2]) / 3.0;
    emission_.nottingham[i] = pn;
  }
}

const StepDiagnostics& Simulation::step() {
  const Mesh& m = *mesh_;
  const double dt = cfg_.dt_pic;
  const double q_half = species_.charge_to_mass() * 0.5 * dt;
  const auto faces = m.faces_with_tag(BoundaryTag::Surface);
  timings_ = {};

  // (a) complete v_k with the field of the last solve
  auto t0 = Clock::now();
  kernels::omp::kick(particles_, field_, q_half);
  timings_.push = seconds_since(t0);

  // (b) emission from the same field; (c) injection
  t0 = Clock::now();
  std::vector<InjectionSource> sources;
  sources.reserve(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    if (emission_.face_j[i] <= 0.0) continue;
    InjectionSource s;
    s.face = faces[i];
    s.area = m.face(faces[i]).area;
    s.field = field_[m.face(faces[i]).tet];
    s.subquad_j = emission_.j[i];
    sources.push_back(s);
  }
  for (std::size_t i = 0; i < faces.size(); ++i) {
    j_accum_[i] += emission_.face_j[i];
    pn_accum_[i] += emission_.nottingham[i];
  }
  ++accum_steps_;
  timings_.emission = seconds_since(t0);

  t0 = Clock::now();
  auto fresh = inject_from_faces(m, sources, dt, species_, cfg_.seed, step_, next_id_);
  timings_.injection = seconds_since(t0);

  // (d) half kick and drift of the particles already present
  t0 = Clock::now();
  kernels::omp::kick(particles_, field_, q_half);
  kernels::omp::drift(particles_, dt);
  timings_.push += seconds_since(t0);

  // (e) boundaries
  t0 = Clock::now();
  apply_boundaries(particles_, m, period_, tally_);
  injected_ += static_cast<long>(fresh.particles.size());
  particles_.insert(particles_.end(), fresh.particles.begin(), fresh.particles.end());
  timings_.boundaries = seconds_since(t0);

  // (f) collisions
  long pairs = 0;
  t0 = Clock::now();
  if (cfg_.collisions && cfg_.coulomb_log > 0.0) {
    pairs = collide_all(particles_, m, species_, CollisionParams{dt, cfg_.coulomb_log}, cfg_.seed, step_);
  }
  timings_.collisions = seconds_since(t0);

  // (g) charge deposition and field solve
  t0 = Clock::now();
  solve_field();
  timings_.poisson = seconds_since(t0);

  ++step_;
  time_ = static_cast<double>(step_) * dt;

  int heat_iterations = 0;
  if (has_metal_ && step_ % static_cast<std::uint64_t>(heat_interval_) == 0) {
    t0 = Clock::now();
    heat_update();
    heat_iterations = last_heat_iterations_;
    timings_.heat = seconds_since(t0);
  }

  t0 = Clock::now();
  compute_emission();
  timings_.emission += seconds_since(t0);
  record(last_poisson_iterations_, heat_iterations, pairs);
  return diag_;
}

void Simulation::heat_update() {
  const Mesh& m = *mesh_;
  const double inv = accum_steps_ > 0 ? 1.0 / accum_steps_ : 0.0;
  std::vector<double> j(j_accum_.size()), pn(pn_accum_.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    j[i] = j_accum_[i] * inv;
    pn[i] = pn_accum_[i] * inv;
  }
  std::fill(j_accum_.begin(), j_accum_.end(), 0.0);
  std::fill(pn_accum_.begin(), pn_accum_.end(), 0.0);
  accum_steps_ = 0;

  std::vector<double> sigma, kappa;
  cell_conductivities(m, heat_.temperature, cfg_.material, sigma, kappa);
  auto cont = solve_continuity(m, sigma, j, cfg_.cg_tolerance);
  const auto pj = joule_power(m, cont.potential, sigma);
  HeatOptions opts;
  opts.theta = cfg_.theta;
  opts.lumped_mass = cfg_.lumped_mass;
  opts.tol = cfg_.cg_tolerance;
  CgResult info;
  heat_ = step_heat(m, heat_, heat_interval_ * cfg_.dt_pic, pj, pn, cfg_.material, opts, &info);
  heat_.potential = std::move(cont.potential);
  last_heat_iterations_ = info.iterations;
}

void Simulation::record(int poisson_iterations, int heat_iterations, long pairs) {
  const double e = constants::elementary_charge;
  const Mesh& m = *mesh_;
  const auto faces = m.faces_with_tag(BoundaryTag::Surface);
  StepDiagnostics d;
  d.step = step_;
  d.time = time_;
  double f_sum = 0.0;
  double f_max = faces.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const double a = m.face(faces[i]).area;
    d.emitted_current += emission_.face_j[i] * a;
    f_sum += emission_.field[i] * a;
    f_max = std::max(f_max, emission_.field[i]);
  }
  d.mean_surface_field = surface_area_ > 0.0 ? f_sum / surface_area_ : 0.0;
  d.max_surface_field = f_max;
  const long top = tally_.absorbed[static_cast<int>(BoundaryTag::Top) - 1];
  const long surf = tally_.absorbed[static_cast<int>(BoundaryTag::Surface) - 1];
  d.injected = injected_;
  d.absorbed_top = top;
  d.absorbed_surface = surf;
  d.absorbed_other = tally_.total_absorbed() - top - surf;
  d.live = static_cast<long>(particles_.size());
  d.ledger = d.injected - tally_.total_absorbed() - d.live;
  if (step_ > 0) {
    d.injected_current = static_cast<double>(injected_ - diag_.injected) * cfg_.weight * e / cfg_.dt_pic;
    d.anode_current = static_cast<double>(top - anode_before_) * cfg_.weight * e / cfg_.dt_pic;
  }
  anode_before_ = top;
  d.max_temperature = has_metal_ ? max_value(m, heat_.temperature) : cfg_.surface_temperature;
  d.poisson_iterations = poisson_iterations;
  d.heat_iterations = heat_iterations;
  d.collided_pairs = pairs;
  diag_ = d;
}

RunSummary run_simulation(const SimConfig& cfg) {
  namespace fs = std::filesystem;
  cfg.validate();
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  {
    std::ofstream c(dir / "config.txt");
    c << dump_config(cfg);
  }

  Simulation sim(cfg, build_mesh(cfg));
  std::ofstream diag(dir / "diagnostics.csv");
  std::ofstream timing(dir / "timings.csv");
  if (!diag || !timing) throw Error(ErrorKind::Io, "cannot write into " + cfg.output_dir);
  diag << diagnostics_header() << '\n' << diagnostics_row(sim.last()) << '\n';
  timing << "step,emission_s,injection_s,push_s,boundaries_s,collisions_s,poisson_s,heat_s\n";

  const std::uint64_t n_steps = static_cast<std::uint64_t>(std::llround(cfg.duration / cfg.dt_pic));
  SteadyDetector detector(cfg.dt_pic, cfg.steady_window, cfg.steady_hold, cfg.steady_tolerance);
  const std::size_t avg_steps = steps_for(cfg.average_window, cfg.dt_pic);
  std::deque<double> tail;
  RunSummary summary;

  auto snapshot = [&](std::uint64_t step) {
    char name[64];
    std::snprintf(name, sizeof name, "particles_%08llu.txt", static_cast<unsigned long long>(step));
    std::ofstream out(dir / name);
    write_particle_snapshot(out, sim.particles());
  };

  for (std::uint64_t k = 0; k < n_steps; ++k) {
    const auto& d = sim.step();
    if (d.ledger != 0) throw Error(ErrorKind::InvalidConfig, "charge ledger does not close at step " + std::to_string(d.step));
    if (d.step % static_cast<std::uint64_t>(cfg.diagnostics_every) == 0 || k + 1 == n_steps) {
      diag << diagnostics_row(d) << '\n';
    }
    const auto& t = sim.timings();
    timing << d.step << ',' << t.emission << ',' << t.injection << ',' << t.push << ',' << t.boundaries << ','
           << t.collisions << ',' << t.poisson << ',' << t.heat << '\n';
    if (cfg.snapshot_every > 0 && d.step % static_cast<std::uint64_t>(cfg.snapshot_every) == 0) snapshot(d.step);
    const bool was_steady = detector.steady();
    if (detector.add(d.emitted_current) && !was_steady) summary.steady_time = d.time;
    tail.push_back(d.emitted_current);
    if (tail.size() > avg_steps) tail.pop_front();
  }

  if (cfg.write_fields) {
    std::ofstream out(dir / "fields.txt");
    write_nodal_fields(out, sim.mesh(), sim.potential(), sim.has_metal() ? &sim.heat() : nullptr);
  }
  summary.steps = sim.step_index();
  summary.final_time = sim.time();
  summary.steady = detector.steady();
  summary.mean_current = tail.empty() ? sim.last().emitted_current
                                      : std::accumulate(tail.begin(), tail.end(), 0.0) / tail.size();
  return summary;
}

SweepResult run_diode_sweep(const SimConfig& base, const std::string& diagnostics_dir) {
  if (base.sweep_voltages.empty()) throw Error(ErrorKind::InvalidConfig, "sweep.voltages: no voltages given");
  if (base.mesh_source != MeshSource::Box) {
    throw Error(ErrorKind::InvalidConfig, "mesh.source: a diode sweep needs the built-in box mesh");
  }
  auto mesh = build_mesh(base);
  SweepResult result;
  double sq_sum = 0.0;
  for (double v : base.sweep_voltages) {
    SimConfig cfg = base;
    cfg.anode = AnodeMode::Voltage;
    cfg.voltage = v;
    Simulation sim(cfg, mesh);
    SteadyDetector detector(cfg.dt_pic, cfg.steady_window, cfg.steady_hold, cfg.steady_tolerance);
    const std::size_t avg_steps = steps_for(cfg.average_window, cfg.dt_pic);
    const std::uint64_t max_steps = static_cast<std::uint64_t>(std::llround(cfg.sweep_duration / cfg.dt_pic));

    std::unique_ptr<std::ofstream> diag;
    if (!diagnostics_dir.empty()) {
      std::filesystem::create_directories(diagnostics_dir);
      char name[64];
      std::snprintf(name, sizeof name, "diagnostics_%gV.csv", v);
      diag = std::make_unique<std::ofstream>(std::filesystem::path(diagnostics_dir) / name);
      *diag << diagnostics_header() << '\n';
    }

    std::vector<double> emitted, anode;
    std::uint64_t stop_at = max_steps;
    for (std::uint64_t k = 0; k < stop_at; ++k) {
      const auto& d = sim.step();
      if (diag) *diag << diagnostics_row(d) << '\n';
      emitted.push_back(d.emitted_current);
      anode.push_back(d.anode_current);
      if (!detector.steady() && detector.add(d.emitted_current)) {
        stop_at = std::min<std::uint64_t>(max_steps, k + 1 + avg_steps);
      }
    }

    const std::size_t n_avg = std::min(avg_steps, emitted.size());
    const std::size_t first = emitted.size() - n_avg;
    const double area = sim.surface_area();
    double mean = 0.0, mean_anode = 0.0;
    for (std::size_t i = first; i < emitted.size(); ++i) {
      mean += emitted[i];
      mean_anode += anode[i];
    }
    mean /= static_cast<double>(n_avg);
    mean_anode /= static_cast<double>(n_avg);
    // standard error from five block means
    constexpr int kBlocks = 5;
    double sem = 0.0;
    if (n_avg >= kBlocks) {
      const std::size_t bl = n_avg / kBlocks;
      double s2 = 0.0;
      for (int b = 0; b < kBlocks; ++b) {
        double bm = 0.0;
        for (std::size_t i = 0; i < bl; ++i) bm += emitted[first + b * bl + i];
        bm /= static_cast<double>(bl);
        s2 += (bm - mean) * (bm - mean);
      }
      sem = std::sqrt(s2 / (kBlocks * (kBlocks - 1)));
    }

    oracle::DiodeSpec spec;
    spec.gap = cfg.box.gap;
    spec.voltage = v;
    spec.work_function_ev = cfg.emitter.work_function_ev;
    spec.area = area;
    spec.temperature = cfg.surface_temperature;
    const auto ref = oracle::semianalytic_iv(spec, cfg.emitter);

    SweepPoint p;
    p.voltage = v;
    p.j_pic = mean / area;
    p.j_pic_sem = sem / area;
    p.j_anode = mean_anode / area;
    p.j_oracle = ref.current_density;
    p.j_child_langmuir = ref.child_langmuir;
    p.e_cathode_oracle = ref.cathode_field;
    p.rel_error = (p.j_pic - p.j_oracle) / p.j_oracle;
    p.steady = detector.steady();
    p.time = sim.time();
    sq_sum += p.rel_error * p.rel_error;
    result.points.push_back(p);
  }
  result.rms_rel_error = std::sqrt(sq_sum / static_cast<double>(result.points.size()));
  return result;
}

}  // namespace fepic
