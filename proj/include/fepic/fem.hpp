#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "fepic/kernels.hpp"
#include "fepic/mesh.hpp"
#include "fepic/particle.hpp"
#include "fepic/sparse.hpp"

namespace fepic {

// Nodes of one region numbered as degrees of freedom.
struct DofMap {
  Region region = Region::Vacuum;
  std::vector<int> node_to_dof;  // -1 for nodes outside the region
  std::vector<int> dof_to_node;

  int size() const { return static_cast<int>(dof_to_node.size()); }
  static DofMap for_region(const Mesh& mesh, Region region);
};

// Nodal values of a P1 field over one region (potential in V or temperature
// in K). Nodes outside the region hold zero.
struct ScalarField {
  Region region = Region::Vacuum;
  std::vector<double> values;

  double at_node(int n) const { return values[n]; }
  // Linear interpolation inside `cell`.
  double interpolate(const Mesh& mesh, int cell, const Vec3& p) const;
};

// One constant vector per cell (the P1 gradient field); zero outside the region.
using CellVectorField = std::vector<Vec3>;

struct SparseSymSystem {
  DofMap dofs;
  CsrMatrix matrix;
  std::vector<double> rhs;
  std::vector<std::pair<int, double>> dirichlet;  // (dof, value)
};

// Sparsity pattern of P1 couplings between the dofs of a region.
CsrMatrix make_pattern(const Mesh& mesh, const DofMap& dofs);

// Sum of per-cell element matrices. `cell_coeff` is indexed by global cell.
CsrMatrix assemble_matrix(const Mesh& mesh, const DofMap& dofs, std::span<const double> cell_coeff,
                          ElementKind kind);

// M_ij = sum over cells of coeff * integral(grad N_i . grad N_j); rhs zeroed.
SparseSymSystem assemble_laplace(const Mesh& mesh, Region region, std::span<const double> cell_coeff);
SparseSymSystem assemble_laplace(const Mesh& mesh, Region region, double coeff);

// f_i += flux * area / 3 for each node of each face with `tag`. The per-face
// overload takes one value per entry of mesh.faces_with_tag(tag).
void add_neumann_flux(SparseSymSystem& sys, const Mesh& mesh, BoundaryTag tag, double flux);
void add_neumann_flux(SparseSymSystem& sys, const Mesh& mesh, BoundaryTag tag, std::span<const double> face_flux);

void add_dirichlet(SparseSymSystem& sys, const Mesh& mesh, BoundaryTag tag, double value);

// f_i += (q * w / eps) * N_i(r) over the four nodes of each particle's cell.
void deposit_particles(SparseSymSystem& sys, const Mesh& mesh, std::span<const Particle> particles,
                       const Species& species, double permittivity);

// Repeated solves of one constrained matrix with changing right-hand sides.
class LinearProblem {
 public:
  LinearProblem() = default;
  explicit LinearProblem(SparseSymSystem system);

  const SparseSymSystem& system() const { return system_; }
  const DofMap& dofs() const { return system_.dofs; }

  // Throws NoConvergence when the tolerance is not met within max_iter.
  ScalarField solve(std::span<const double> rhs, const ScalarField* guess, double tol_rel, int max_iter,
                    CgResult* info = nullptr) const;

 private:
  SparseSymSystem system_;
  ConstrainedSystem constrained_;
};

inline constexpr double kDefaultCgTolerance = 1e-10;

// Preconditioned CG on the Dirichlet-eliminated system. Requires at least one
// Dirichlet dof.
ScalarField solve_cg(const SparseSymSystem& sys, double tol_rel = kDefaultCgTolerance, int max_iter = 20000,
                     CgResult* info = nullptr);

// E = -grad(phi), constant on a P1 cell.
Vec3 eval_field(const Mesh& mesh, const ScalarField& phi, int cell);
CellVectorField eval_field(const Mesh& mesh, const ScalarField& phi);

// Reaction sum over the nodes of `tag`: sum_i (M u - f)_i with the
// unconstrained matrix. For a Dirichlet boundary this is the discrete flux
// leaving the domain through it.
double boundary_reaction(const SparseSymSystem& unconstrained, const Mesh& mesh, const ScalarField& u,
                         BoundaryTag tag);

// Debug dump: "i j value" lines for the matrix, then "i value" for the rhs.
void write_triplets(std::ostream& out, const SparseSymSystem& sys);

}  // namespace fepic
