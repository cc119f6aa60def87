#include "fepic/fem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace fepic {

DofMap DofMap::for_region(const Mesh& mesh, Region region) {
  DofMap d;
  d.region = region;
  d.node_to_dof.assign(mesh.num_nodes(), -1);
  std::vector<char> used(mesh.num_nodes(), 0);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    if (mesh.region(c) != region) continue;
    for (int v : mesh.cell(c)) used[v] = 1;
  }
  for (int n = 0; n < static_cast<int>(mesh.num_nodes()); ++n) {
    if (!used[n]) continue;
    d.node_to_dof[n] = static_cast<int>(d.dof_to_node.size());
    d.dof_to_node.push_back(n);
  }
  if (d.dof_to_node.empty()) throw Error(ErrorKind::InvalidConfig, "mesh has no cells in the requested region");
  return d;
}

double ScalarField::interpolate(const Mesh& mesh, int cell, const Vec3& p) const {
  const auto l = mesh.barycentric(p, cell);
  const auto& t = mesh.cell(cell);
  return l[0] * values[t[0]] + l[1] * values[t[1]] + l[2] * values[t[2]] + l[3] * values[t[3]];
}

CsrMatrix make_pattern(const Mesh& mesh, const DofMap& dofs) {
  CsrMatrix m;
  m.rows = dofs.size();
  m.row_ptr.assign(m.rows + 1, 0);
  std::vector<std::vector<int>> cols(m.rows);
  for (int row = 0; row < m.rows; ++row) {
    auto& cr = cols[row];
    for (int packed : mesh.node_cells(dofs.dof_to_node[row])) {
      const int c = packed / 4;
      if (mesh.region(c) != dofs.region) continue;
      for (int v : mesh.cell(c)) cr.push_back(dofs.node_to_dof[v]);
    }
    std::sort(cr.begin(), cr.end());
    cr.erase(std::unique(cr.begin(), cr.end()), cr.end());
    m.row_ptr[row + 1] = m.row_ptr[row] + static_cast<int>(cr.size());
  }
  m.col.reserve(m.row_ptr.back());
  for (const auto& cr : cols) m.col.insert(m.col.end(), cr.begin(), cr.end());
  m.val.assign(m.col.size(), 0.0);
  return m;
}

CsrMatrix assemble_matrix(const Mesh& mesh, const DofMap& dofs, std::span<const double> cell_coeff,
                          ElementKind kind) {
  if (cell_coeff.size() != mesh.num_cells()) {
    throw Error(ErrorKind::InvalidConfig, "cell coefficient array does not match cell count");
  }
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    if (mesh.region(c) == dofs.region && !(cell_coeff[c] > 0.0)) {
      throw Error(ErrorKind::InvalidConfig, "coefficient must be positive on cell " + std::to_string(c));
    }
  }
  CsrMatrix m = make_pattern(mesh, dofs);
  kernels::omp::assemble(mesh, dofs.region, dofs.node_to_dof, cell_coeff, kind, m);
  return m;
}

SparseSymSystem assemble_laplace(const Mesh& mesh, Region region, std::span<const double> cell_coeff) {
  SparseSymSystem sys;
  sys.dofs = DofMap::for_region(mesh, region);
  sys.matrix = assemble_matrix(mesh, sys.dofs, cell_coeff, ElementKind::Stiffness);
  sys.rhs.assign(sys.dofs.size(), 0.0);
  return sys;
}

SparseSymSystem assemble_laplace(const Mesh& mesh, Region region, double coeff) {
  const std::vector<double> c(mesh.num_cells(), coeff);
  return assemble_laplace(mesh, region, c);
}

void add_neumann_flux(SparseSymSystem& sys, const Mesh& mesh, BoundaryTag tag, std::span<const double> face_flux) {
  const auto faces = mesh.faces_with_tag(tag);
  if (faces.empty()) {
    throw Error(ErrorKind::InvalidConfig, std::string("no boundary faces tagged ") + to_string(tag));
  }
  if (face_flux.size() != faces.size()) throw Error(ErrorKind::InvalidConfig, "face flux count mismatch");
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const auto& f = mesh.face(faces[i]);
    const double share = face_flux[i] * f.area / 3.0;
    for (int v : f.nodes) {
      const int dof = sys.dofs.node_to_dof[v];
      if (dof < 0) throw Error(ErrorKind::InvalidConfig, "flux face lies outside the system region");
      sys.rhs[dof] += share;
    }
  }
}

void add_neumann_flux(SparseSymSystem& sys, const Mesh& mesh, BoundaryTag tag, double flux) {
  const std::vector<double> f(mesh.faces_with_tag(tag).size(), flux);
  if (f.empty()) throw Error(ErrorKind::InvalidConfig, std::string("no boundary faces tagged ") + to_string(tag));
  add_neumann_flux(sys, mesh, tag, f);
}

void add_dirichlet(SparseSymSystem& sys, const Mesh& mesh, BoundaryTag tag, double value) {
  const auto faces = mesh.faces_with_tag(tag);
  if (faces.empty()) {
    throw Error(ErrorKind::InvalidConfig, std::string("no boundary faces tagged ") + to_string(tag));
  }
  std::vector<int> dofs;
  for (int fi : faces) {
    for (int v : mesh.face(fi).nodes) {
      const int dof = sys.dofs.node_to_dof[v];
      if (dof < 0) throw Error(ErrorKind::InvalidConfig, "Dirichlet face lies outside the system region");
      dofs.push_back(dof);
    }
  }
  std::sort(dofs.begin(), dofs.end());
  dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
  for (int d : dofs) {
    auto it = std::find_if(sys.dirichlet.begin(), sys.dirichlet.end(), [d](const auto& e) { return e.first == d; });
    if (it != sys.dirichlet.end()) {
      it->second = value;
    } else {
      sys.dirichlet.emplace_back(d, value);
    }
  }
}

void deposit_particles(SparseSymSystem& sys, const Mesh& mesh, std::span<const Particle> particles,
                       const Species& species, double permittivity) {
  std::vector<double> nodal(mesh.num_nodes(), 0.0);
  kernels::omp::deposit(mesh, particles, species.charge * species.weight / permittivity, nodal);
  for (int dof = 0; dof < sys.dofs.size(); ++dof) sys.rhs[dof] += nodal[sys.dofs.dof_to_node[dof]];
}

LinearProblem::LinearProblem(SparseSymSystem system) : system_(std::move(system)) {
  if (system_.dirichlet.empty()) {
    throw Error(ErrorKind::InvalidConfig, "system needs at least one Dirichlet dof");
  }
  constrained_ = ConstrainedSystem(system_.matrix, system_.dirichlet);
}

ScalarField LinearProblem::solve(std::span<const double> rhs, const ScalarField* guess, double tol_rel,
                                 int max_iter, CgResult* info) const {
  const auto& dofs = system_.dofs;
  const auto b = constrained_.reduce_rhs(rhs);
  std::vector<double> x(dofs.size(), 0.0);
  if (guess != nullptr) {
    for (int d = 0; d < dofs.size(); ++d) x[d] = guess->values[dofs.dof_to_node[d]];
  }
  for (const auto& [dof, value] : system_.dirichlet) x[dof] = value;
  const CgResult res = pcg_jacobi(constrained_.matrix(), b, x, tol_rel, max_iter);
  if (info != nullptr) *info = res;
  if (!res.converged) {
    throw NoConvergence("CG did not reach tolerance, relative residual " + std::to_string(res.residual),
                        res.residual, res.iterations);
  }
  ScalarField field;
  field.region = dofs.region;
  field.values.assign(dofs.node_to_dof.size(), 0.0);
  for (int d = 0; d < dofs.size(); ++d) field.values[dofs.dof_to_node[d]] = x[d];
  return field;
}

ScalarField solve_cg(const SparseSymSystem& sys, double tol_rel, int max_iter, CgResult* info) {
  LinearProblem problem(sys);
  return problem.solve(sys.rhs, nullptr, tol_rel, max_iter, info);
}

Vec3 eval_field(const Mesh& mesh, const ScalarField& phi, int cell) {
  const auto& g = mesh.gradients(cell);
  const auto& t = mesh.cell(cell);
  Vec3 grad;
  for (int k = 0; k < 4; ++k) grad += phi.values[t[k]] * g[k];
  return -grad;
}

CellVectorField eval_field(const Mesh& mesh, const ScalarField& phi) {
  const int n = static_cast<int>(mesh.num_cells());
  CellVectorField e(n);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < n; ++c) {
    if (mesh.region(c) == phi.region) e[c] = eval_field(mesh, phi, c);
  }
  return e;
}

double boundary_reaction(const SparseSymSystem& sys, const Mesh& mesh, const ScalarField& u, BoundaryTag tag) {
  std::vector<int> dofs;
  for (int fi : mesh.faces_with_tag(tag)) {
    for (int v : mesh.face(fi).nodes) dofs.push_back(sys.dofs.node_to_dof[v]);
  }
  std::sort(dofs.begin(), dofs.end());
  dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
  const auto& m = sys.matrix;
  double total = 0.0;
  for (int i : dofs) {
    if (i < 0) continue;
    double s = -sys.rhs[i];
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) s += m.val[k] * u.values[sys.dofs.dof_to_node[m.col[k]]];
    total += s;
  }
  return total;
}

void write_triplets(std::ostream& out, const SparseSymSystem& sys) {
  const auto prec = out.precision(17);
  const auto& m = sys.matrix;
  out << "matrix " << m.rows << ' ' << m.nnz() << '\n';
  for (int i = 0; i < m.rows; ++i) {
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) out << i << ' ' << m.col[k] << ' ' << m.val[k] << '\n';
  }
  out << "rhs " << sys.rhs.size() << '\n';
  for (std::size_t i = 0; i < sys.rhs.size(); ++i) out << i << ' ' << sys.rhs[i] << '\n';
  out.precision(prec);
}

}  // namespace fepic
