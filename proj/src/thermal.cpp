#include "fepic/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fepic {

void Table1D::validate(const char* what) const {
  if (points.empty()) throw Error(ErrorKind::InvalidConfig, std::string(what) + ": empty table");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].second > 0.0)) {
      throw Error(ErrorKind::InvalidConfig, std::string(what) + ": table values must be positive");
    }
    if (i > 0 && !(points[i].first > points[i - 1].first)) {
      throw Error(ErrorKind::InvalidConfig, std::string(what) + ": temperatures must increase");
    }
  }
}

double Table1D::at(double t, bool* clamped) const {
  if (points.size() == 1) return points.front().second;
  if (t <= points.front().first || t >= points.back().first) {
    if (clamped != nullptr && (t < points.front().first || t > points.back().first)) *clamped = true;
    return t <= points.front().first ? points.front().second : points.back().second;
  }
  const auto it = std::upper_bound(points.begin(), points.end(), t,
                                   [](double v, const auto& p) { return v < p.first; });
  const auto& [t1, y1] = *it;
  const auto& [t0, y0] = *(it - 1);
  return y0 + (y1 - y0) * (t - t0) / (t1 - t0);
}

void MaterialModel::validate() const {
  sigma_bulk.validate("sigma table");
  size_factor.validate("size factor table");
  if (!(lorenz > 0.0)) throw Error(ErrorKind::InvalidConfig, "Lorenz number must be positive");
  if (!(heat_capacity > 0.0)) throw Error(ErrorKind::InvalidConfig, "heat capacity must be positive");
  if (!(ambient > 0.0)) throw Error(ErrorKind::InvalidConfig, "ambient temperature must be positive");
  if (fixed_kappa < 0.0) throw Error(ErrorKind::InvalidConfig, "fixed kappa must not be negative");
}

Conductivity conductivity(double temperature, const MaterialModel& mat) {
  if (!(temperature > 0.0)) throw Error(ErrorKind::InvalidConfig, "temperature must be positive");
  Conductivity c;
  c.sigma = mat.size_factor.at(temperature, &c.clamped) * mat.sigma_bulk.at(temperature, &c.clamped);
  c.kappa = mat.fixed_kappa > 0.0 ? mat.fixed_kappa : mat.lorenz * temperature * c.sigma;
  return c;
}

int cell_conductivities(const Mesh& mesh, const ScalarField& temperature, const MaterialModel& mat,
                        std::vector<double>& sigma, std::vector<double>& kappa) {
  const int n = static_cast<int>(mesh.num_cells());
  sigma.assign(n, 0.0);
  kappa.assign(n, 0.0);
  int clamped = 0;
#pragma omp parallel for schedule(static) reduction(+ : clamped)
  for (int c = 0; c < n; ++c) {
    if (mesh.region(c) != Region::Metal) continue;
    double t = 0.0;
    for (int v : mesh.cell(c)) t += 0.25 * temperature.values[v];
    const auto k = conductivity(t, mat);
    sigma[c] = k.sigma;
    kappa[c] = k.kappa;
    clamped += k.clamped ? 1 : 0;
  }
  return clamped;
}

ContinuityResult solve_continuity(const Mesh& mesh, std::span<const double> cell_sigma,
                                  std::span<const double> surface_j, double tol) {
  ContinuityResult out;
  out.system = assemble_laplace(mesh, Region::Metal, cell_sigma);
  add_neumann_flux(out.system, mesh, BoundaryTag::Surface, surface_j);
  add_dirichlet(out.system, mesh, BoundaryTag::MetalBottom, 0.0);
  out.potential = solve_cg(out.system, tol, 20000, &out.info);
  return out;
}

std::vector<double> joule_power(const Mesh& mesh, const ScalarField& potential, std::span<const double> cell_sigma) {
  const int n = static_cast<int>(mesh.num_cells());
  std::vector<double> p(n, 0.0);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < n; ++c) {
    if (mesh.region(c) != Region::Metal) continue;
    p[c] = cell_sigma[c] * norm2(eval_field(mesh, potential, c));
  }
  return p;
}

HeatState initial_heat_state(const Mesh& mesh, const MaterialModel& mat) {
  HeatState s;
  const auto dofs = DofMap::for_region(mesh, Region::Metal);
  s.temperature.region = Region::Metal;
  s.temperature.values.assign(mesh.num_nodes(), 0.0);
  for (int n : dofs.dof_to_node) s.temperature.values[n] = mat.ambient;
  s.potential.region = Region::Metal;
  s.potential.values.assign(mesh.num_nodes(), 0.0);
  return s;
}

std::vector<double> heat_load(const Mesh& mesh, const DofMap& dofs, std::span<const double> cell_pj,
                              std::span<const double> surface_pn) {
  std::vector<double> f(dofs.size(), 0.0);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    if (mesh.region(c) != Region::Metal || cell_pj[c] == 0.0) continue;
    const double share = 0.25 * cell_pj[c] * mesh.volume(c);
    for (int v : mesh.cell(c)) f[dofs.node_to_dof[v]] += share;
  }
  const auto faces = mesh.faces_with_tag(BoundaryTag::Surface);
  if (!surface_pn.empty()) {
    if (surface_pn.size() != faces.size()) throw Error(ErrorKind::InvalidConfig, "surface flux count mismatch");
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const auto& face = mesh.face(faces[i]);
      const double share = surface_pn[i] * face.area / 3.0;
      for (int v : face.nodes) {
        const int d = dofs.node_to_dof[v];
        if (d >= 0) f[d] += share;
      }
    }
  }
  return f;
}

namespace {

void apply_heat_dirichlet(SparseSymSystem& sys, const Mesh& mesh, const MaterialModel& mat, const HeatOptions& opts) {
  if (opts.dirichlet.empty()) {
    add_dirichlet(sys, mesh, BoundaryTag::MetalBottom, mat.ambient);
  } else {
    for (const auto& [tag, value] : opts.dirichlet) add_dirichlet(sys, mesh, tag, value);
  }
}

CsrMatrix heat_mass(const Mesh& mesh, const DofMap& dofs, const MaterialModel& mat, bool lumped) {
  const std::vector<double> cv(mesh.num_cells(), mat.heat_capacity);
  CsrMatrix m = assemble_matrix(mesh, dofs, cv, ElementKind::Mass);
  if (lumped) {
    for (int i = 0; i < m.rows; ++i) {
      double s = 0.0;
      for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) s += m.val[k];
      for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) m.val[k] = (m.col[k] == i) ? s : 0.0;
    }
  }
  return m;
}

}  // namespace

HeatState step_heat(const Mesh& mesh, const HeatState& state, double dt, std::span<const double> cell_pj,
                    std::span<const double> surface_pn, const MaterialModel& mat, const HeatOptions& opts,
                    CgResult* info) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidConfig, "heat time step must be positive");
  if (opts.theta < 0.0 || opts.theta > 1.0) throw Error(ErrorKind::InvalidConfig, "theta must lie in [0, 1]");

  std::vector<double> sigma, kappa;
  cell_conductivities(mesh, state.temperature, mat, sigma, kappa);
  SparseSymSystem sys;
  sys.dofs = DofMap::for_region(mesh, Region::Metal);
  const auto& dofs = sys.dofs;
  const CsrMatrix k = assemble_matrix(mesh, dofs, kappa, ElementKind::Stiffness);
  const CsrMatrix c = heat_mass(mesh, dofs, mat, opts.lumped_mass);

  const auto f1 = heat_load(mesh, dofs, cell_pj, surface_pn);
  const auto& f0 = state.source.size() == f1.size() ? state.source : f1;

  const int n = dofs.size();
  std::vector<double> t0(n);
  for (int d = 0; d < n; ++d) t0[d] = state.temperature.values[dofs.dof_to_node[d]];

  // Both matrices share the pattern of make_pattern.
  sys.matrix = k;
  for (std::size_t e = 0; e < sys.matrix.val.size(); ++e) sys.matrix.val[e] = c.val[e] / dt + opts.theta * k.val[e];
  sys.rhs.assign(n, 0.0);
  std::vector<double> ct(n), kt(n);
  kernels::omp::spmv(c, t0, ct);
  kernels::omp::spmv(k, t0, kt);
  for (int d = 0; d < n; ++d) {
    sys.rhs[d] = ct[d] / dt - (1.0 - opts.theta) * kt[d] + opts.theta * f1[d] + (1.0 - opts.theta) * f0[d];
  }
  apply_heat_dirichlet(sys, mesh, mat, opts);

  LinearProblem problem(sys);
  HeatState next;
  next.temperature = problem.solve(sys.rhs, &state.temperature, opts.tol, opts.max_iter, info);
  next.potential = state.potential;
  next.time = state.time + dt;
  next.source = f1;
  return next;
}

SteadyHeat steady_heat(const Mesh& mesh, const ScalarField& guess, std::span<const double> cell_pj,
                       std::span<const double> surface_pn, const MaterialModel& mat, const HeatOptions& opts) {
  std::vector<double> sigma, kappa;
  cell_conductivities(mesh, guess, mat, sigma, kappa);
  SteadyHeat out;
  out.system = assemble_laplace(mesh, Region::Metal, kappa);
  out.system.rhs = heat_load(mesh, out.system.dofs, cell_pj, surface_pn);
  apply_heat_dirichlet(out.system, mesh, mat, opts);
  LinearProblem problem(out.system);
  out.temperature = problem.solve(out.system.rhs, &guess, opts.tol, opts.max_iter);
  return out;
}

double max_value(const Mesh& mesh, const ScalarField& f) {
  const auto dofs = DofMap::for_region(mesh, f.region);
  double m = -std::numeric_limits<double>::infinity();
  for (int n : dofs.dof_to_node) m = std::max(m, f.values[n]);
  return m;
}

}  // namespace fepic
