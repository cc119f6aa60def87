#include "fepic/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <vector>

namespace fepic {

namespace {

std::atomic<bool> g_deterministic{true};

inline double element_entry(const Mesh& mesh, int c, int a, int b, double coeff, ElementKind kind) {
  const double vol = mesh.volume(c);
  if (kind == ElementKind::Stiffness) {
    const auto& g = mesh.gradients(c);
    return coeff * vol * dot(g[a], g[b]);
  }
  return coeff * vol * (a == b ? 2.0 : 1.0) / 20.0;
}

[[noreturn]] void throw_stale() {
  throw Error(ErrorKind::StaleCellIndex, "particle position is not inside its recorded cell");
}

}  // namespace

void set_deterministic(bool on) { g_deterministic = on; }
bool deterministic() { return g_deterministic; }

int set_num_threads(int n) {
  const int prev = omp_get_max_threads();
  if (n > 0) omp_set_num_threads(n);
  return prev;
}

int max_threads() { return omp_get_max_threads(); }

namespace kernels {

// ---------------------------------------------------------------- serial

namespace serial {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  for (int i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
    y[i] = s;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void kick(std::span<Particle> ps, std::span<const Vec3> cell_field, double q_half) {
  for (auto& p : ps) p.v += q_half * cell_field[p.cell];
}

void drift(std::span<Particle> ps, double dt) {
  for (auto& p : ps) p.r += dt * p.v;
}

void relocate(std::span<Particle> ps, const Mesh& mesh) {
  for (auto& p : ps) {
    if (p.exit_tag != 0) continue;
    const auto res = mesh.locate_cell(p.r, p.cell);
    p.cell = res.cell;
    if (!res.inside) p.exit_tag = static_cast<int>(res.exit_tag);
  }
}

void deposit(const Mesh& mesh, std::span<const Particle> ps, double scale, std::span<double> node_out) {
  for (const auto& p : ps) {
    const auto l = mesh.barycentric(p.r, p.cell);
    if (*std::min_element(l.begin(), l.end()) < -kTolInside) throw_stale();
    const auto& t = mesh.cell(p.cell);
    for (int k = 0; k < 4; ++k) node_out[t[k]] += scale * l[k];
  }
}

void assemble(const Mesh& mesh, Region region, std::span<const int> node_to_dof,
              std::span<const double> cell_coeff, ElementKind kind, CsrMatrix& m) {
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    if (mesh.region(c) != region) continue;
    const auto& t = mesh.cell(c);
    for (int a = 0; a < 4; ++a) {
      const int row = node_to_dof[t[a]];
      for (int b = 0; b < 4; ++b) {
        m.val[m.find(row, node_to_dof[t[b]])] += element_entry(mesh, c, a, b, cell_coeff[c], kind);
      }
    }
  }
}

}  // namespace serial

// ---------------------------------------------------------------- omp

namespace omp {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
    y[i] = s;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  const long n = static_cast<long>(a.size());
  if (!deterministic()) {
    double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (long i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  const long block = static_cast<long>(kReduceBlock);
  const long n_blocks = (n + block - 1) / block;
  std::vector<double> partial(n_blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (long blk = 0; blk < n_blocks; ++blk) {
    const long end = std::min(n, (blk + 1) * block);
    double s = 0.0;
    for (long i = blk * block; i < end; ++i) s += a[i] * b[i];
    partial[blk] = s;
  }
  double s = 0.0;
  for (double v : partial) s += v;
  return s;
}

void kick(std::span<Particle> ps, std::span<const Vec3> cell_field, double q_half) {
  const long n = static_cast<long>(ps.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) ps[i].v += q_half * cell_field[ps[i].cell];
}

void drift(std::span<Particle> ps, double dt) {
  const long n = static_cast<long>(ps.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) ps[i].r += dt * ps[i].v;
}

void relocate(std::span<Particle> ps, const Mesh& mesh) {
  const long n = static_cast<long>(ps.size());
  std::atomic<bool> cycle{false};
#pragma omp parallel for schedule(dynamic, 256)
  for (long i = 0; i < n; ++i) {
    auto& p = ps[i];
    if (p.exit_tag != 0) continue;
    try {
      const auto res = mesh.locate_cell(p.r, p.cell);
      p.cell = res.cell;
      if (!res.inside) p.exit_tag = static_cast<int>(res.exit_tag);
    } catch (const Error&) {
      cycle = true;
    }
  }
  if (cycle) throw Error(ErrorKind::LocateCycle, "point walk exceeded cell count; adjacency is broken");
}

void deposit(const Mesh& mesh, std::span<const Particle> ps, double scale, std::span<double> node_out) {
  const long n = static_cast<long>(ps.size());
  std::atomic<bool> stale{false};

  if (!deterministic()) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
      const auto l = mesh.barycentric(ps[i].r, ps[i].cell);
      if (*std::min_element(l.begin(), l.end()) < -kTolInside) stale = true;
      const auto& t = mesh.cell(ps[i].cell);
      for (int k = 0; k < 4; ++k) {
#pragma omp atomic
        node_out[t[k]] += scale * l[k];
      }
    }
    if (stale) throw_stale();
    return;
  }

  // Group particles by cell (stable), sum barycentrics per cell, then gather
  // per node. Every sum runs in a fixed order.
  const int n_cells = static_cast<int>(mesh.num_cells());
  std::vector<int> offsets(n_cells + 1, 0);
  for (const auto& p : ps) ++offsets[p.cell + 1];
  for (int c = 0; c < n_cells; ++c) offsets[c + 1] += offsets[c];
  std::vector<int> order(ps.size());
  {
    std::vector<int> fill(offsets.begin(), offsets.end() - 1);
    for (long i = 0; i < n; ++i) order[fill[ps[i].cell]++] = static_cast<int>(i);
  }

  std::vector<double> cell_sums(static_cast<std::size_t>(n_cells) * 4, 0.0);
#pragma omp parallel for schedule(dynamic, 64)
  for (int c = 0; c < n_cells; ++c) {
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    for (int k = offsets[c]; k < offsets[c + 1]; ++k) {
      const auto l = mesh.barycentric(ps[order[k]].r, c);
      if (*std::min_element(l.begin(), l.end()) < -kTolInside) stale = true;
      for (int j = 0; j < 4; ++j) s[j] += l[j];
    }
    for (int j = 0; j < 4; ++j) cell_sums[c * 4 + j] = s[j];
  }
  if (stale) throw_stale();

  const int n_nodes = static_cast<int>(mesh.num_nodes());
#pragma omp parallel for schedule(static)
  for (int node = 0; node < n_nodes; ++node) {
    double s = 0.0;
    for (int packed : mesh.node_cells(node)) s += cell_sums[packed];
    if (s != 0.0) node_out[node] += scale * s;
  }
}

void assemble(const Mesh& mesh, Region region, std::span<const int> node_to_dof,
              std::span<const double> cell_coeff, ElementKind kind, CsrMatrix& m) {
  const int n_nodes = static_cast<int>(mesh.num_nodes());
#pragma omp parallel for schedule(dynamic, 64)
  for (int node = 0; node < n_nodes; ++node) {
    const int row = node_to_dof[node];
    if (row < 0) continue;
    for (int packed : mesh.node_cells(node)) {
      const int c = packed / 4;
      const int a = packed % 4;
      if (mesh.region(c) != region) continue;
      const auto& t = mesh.cell(c);
      for (int b = 0; b < 4; ++b) {
        m.val[m.find(row, node_to_dof[t[b]])] += element_entry(mesh, c, a, b, cell_coeff[c], kind);
      }
    }
  }
}

}  // namespace omp

}  // namespace kernels

}  // namespace fepic
