#pragma once

#include <span>
#include <utility>
#include <vector>

namespace fepic {

// Compressed sparse row matrix with sorted column indices per row.
struct CsrMatrix {
  int rows = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nnz() const { return col.size(); }
  // Index of entry (i, j) in `val`, or -1 if outside the pattern.
  int find(int i, int j) const;
  double at(int i, int j) const;
  void add(int i, int j, double v);
  std::vector<double> diagonal() const;
  bool is_symmetric(double rel_tol) const;
};

struct CgResult {
  int iterations = 0;
  double residual = 0.0;  // ||b - A x|| / ||b||
  bool converged = false;
};

// Jacobi-preconditioned conjugate gradients. `x` is the initial guess on
// entry and the solution on return.
CgResult pcg_jacobi(const CsrMatrix& a, std::span<const double> b, std::span<double> x, double tol_rel,
                    int max_iter);

// Symmetric elimination of Dirichlet rows and columns. The eliminated matrix is
// kept so repeated solves with new right-hand sides only pay for the lift.
class ConstrainedSystem {
 public:
  ConstrainedSystem() = default;
  ConstrainedSystem(const CsrMatrix& matrix, std::vector<std::pair<int, double>> dirichlet);

  const CsrMatrix& matrix() const { return reduced_; }
  const std::vector<std::pair<int, double>>& dirichlet() const { return dirichlet_; }
  void set_values(std::span<const double> values);

  // f_eff = f - M[:, c] g_c on free rows, m_cc g_c on constrained rows (each
  // constrained row keeps its original diagonal so residual norms stay balanced).
  std::vector<double> reduce_rhs(std::span<const double> f) const;

 private:
  CsrMatrix reduced_;
  std::vector<std::pair<int, double>> dirichlet_;
  std::vector<char> constrained_;
  std::vector<double> scale_;  // per Dirichlet slot
  struct Coupling {
    int row;
    int slot;  // index into dirichlet_
    double value;
  };
  std::vector<Coupling> couplings_;
};

}  // namespace fepic
