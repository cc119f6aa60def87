#include "fepic/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "fepic/error.hpp"
#include "fepic/kernels.hpp"

namespace fepic {

int CsrMatrix::find(int i, int j) const {
  const auto first = col.begin() + row_ptr[i];
  const auto last = col.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? static_cast<int>(it - col.begin()) : -1;
}

double CsrMatrix::at(int i, int j) const {
  const int k = find(i, j);
  return k < 0 ? 0.0 : val[k];
}

void CsrMatrix::add(int i, int j, double v) {
  const int k = find(i, j);
  if (k < 0) throw Error(ErrorKind::InvalidConfig, "matrix entry outside sparsity pattern");
  val[k] += v;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(rows, 0.0);
  for (int i = 0; i < rows; ++i) d[i] = at(i, i);
  return d;
}

bool CsrMatrix::is_symmetric(double rel_tol) const {
  double scale = 0.0;
  for (double v : val) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < rows; ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (std::abs(val[k] - at(col[k], i)) > rel_tol * scale) return false;
    }
  }
  return true;
}

CgResult pcg_jacobi(const CsrMatrix& a, std::span<const double> b, std::span<double> x, double tol_rel,
                    int max_iter) {
  namespace k = kernels::omp;
  const int n = a.rows;
  CgResult res;
  const double b_norm = std::sqrt(k::dot(b, b));
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw Error(ErrorKind::InvalidConfig, "matrix diagonal is not positive");
    d = 1.0 / d;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  k::spmv(a, x, r);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    r[i] = b[i] - r[i];
    z[i] = inv_diag[i] * r[i];
    p[i] = z[i];
  }
  double rz = k::dot(r, z);
  double r_norm = std::sqrt(k::dot(r, r));
  res.residual = r_norm / b_norm;
  if (res.residual <= tol_rel) {
    res.converged = true;
    return res;
  }

  for (int it = 1; it <= max_iter; ++it) {
    k::spmv(a, p, q);
    const double alpha = rz / k::dot(p, q);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      z[i] = inv_diag[i] * r[i];
    }
    const double rz_new = k::dot(r, z);
    r_norm = std::sqrt(k::dot(r, r));
    res.iterations = it;
    res.residual = r_norm / b_norm;
    if (res.residual <= tol_rel) {
      res.converged = true;
      return res;
    }
    const double beta = rz_new / rz;
    rz = rz_new;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return res;
}

ConstrainedSystem::ConstrainedSystem(const CsrMatrix& matrix, std::vector<std::pair<int, double>> dirichlet)
    : reduced_(matrix), dirichlet_(std::move(dirichlet)), constrained_(matrix.rows, 0) {
  std::vector<int> slot_of(matrix.rows, -1);
  scale_.assign(dirichlet_.size(), 1.0);
  for (int s = 0; s < static_cast<int>(dirichlet_.size()); ++s) {
    const int d = dirichlet_[s].first;
    if (d < 0 || d >= matrix.rows) throw Error(ErrorKind::InvalidConfig, "Dirichlet dof out of range");
    constrained_[d] = 1;
    slot_of[d] = s;
    const double diag = matrix.at(d, d);
    if (diag > 0.0) scale_[s] = diag;
  }
  for (int i = 0; i < reduced_.rows; ++i) {
    for (int k = reduced_.row_ptr[i]; k < reduced_.row_ptr[i + 1]; ++k) {
      const int j = reduced_.col[k];
      if (constrained_[i]) {
        reduced_.val[k] = (i == j) ? scale_[slot_of[i]] : 0.0;
      } else if (constrained_[j]) {
        couplings_.push_back({i, slot_of[j], reduced_.val[k]});
        reduced_.val[k] = 0.0;
      }
    }
  }
}

void ConstrainedSystem::set_values(std::span<const double> values) {
  if (values.size() != dirichlet_.size()) throw Error(ErrorKind::InvalidConfig, "Dirichlet value count mismatch");
  for (std::size_t s = 0; s < values.size(); ++s) dirichlet_[s].second = values[s];
}

std::vector<double> ConstrainedSystem::reduce_rhs(std::span<const double> f) const {
  std::vector<double> out(f.begin(), f.end());
  for (const auto& c : couplings_) out[c.row] -= c.value * dirichlet_[c.slot].second;
  for (std::size_t s = 0; s < dirichlet_.size(); ++s) out[dirichlet_[s].first] = scale_[s] * dirichlet_[s].second;
  return out;
}

}  // namespace fepic
