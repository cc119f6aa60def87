// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <memory>

#include "fepic/fem.hpp"
#include "fepic/kernels.hpp"
#include "fepic/mesh.hpp"
#include "fepic/rng.hpp"

using namespace fepic;

namespace {

const Mesh& bench_mesh() {
  static const Mesh mesh = build_box_mesh(1.0, 1.0, 1.0, 24);
  return mesh;
}

std::vector<Particle> random_particles(const Mesh& mesh, std::size_t n) {
  std::vector<Particle> ps(n);
  RngStream rng(7, StreamPurpose::Test, 0, 0);
  for (auto& p : ps) {
    p.cell = static_cast<int>(rng.below(mesh.num_cells()));
    const auto& t = mesh.cell(p.cell);
    double w[4];
    double s = 0.0;
    for (double& x : w) s += (x = rng.uniform() + 1e-3);
    for (int k = 0; k < 4; ++k) p.r += (w[k] / s) * mesh.node(t[k]);
    p.v = {rng.normal() * 1e-3, rng.normal() * 1e-3, rng.normal() * 1e-3};
  }
  return ps;
}

const CsrMatrix& bench_matrix() {
  static const CsrMatrix m = assemble_laplace(bench_mesh(), Region::Vacuum, 1.0).matrix;
  return m;
}

template <bool Parallel>
void BM_Spmv(benchmark::State& state) {
  const auto& a = bench_matrix();
  std::vector<double> x(a.rows, 1.0), y(a.rows);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::omp::spmv(a, x, y); else kernels::serial::spmv(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * a.nnz());
}

template <bool Parallel>
void BM_Dot(benchmark::State& state) {
  std::vector<double> a(state.range(0), 1.25), b(state.range(0), 0.5);
  for (auto _ : state) {
    double s = Parallel ? kernels::omp::dot(a, b) : kernels::serial::dot(a, b);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Deposit(benchmark::State& state) {
  const auto& mesh = bench_mesh();
  const auto ps = random_particles(mesh, state.range(0));
  std::vector<double> out(mesh.num_nodes());
  for (auto _ : state) {
    std::fill(out.begin(), out.end(), 0.0);
    if constexpr (Parallel) kernels::omp::deposit(mesh, ps, 1.0, out); else kernels::serial::deposit(mesh, ps, 1.0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_PushRelocate(benchmark::State& state) {
  const auto& mesh = bench_mesh();
  auto ps = random_particles(mesh, state.range(0));
  const std::vector<Vec3> field(mesh.num_cells(), Vec3{0.0, 0.0, 0.0});
  double sign = 1.0;
  for (auto _ : state) {
    // drift forth and back so particles stay inside
    if constexpr (Parallel) {
      kernels::omp::kick(ps, field, 1.0);
      kernels::omp::drift(ps, sign);
      kernels::omp::relocate(ps, mesh);
    } else {
      kernels::serial::kick(ps, field, 1.0);
      kernels::serial::drift(ps, sign);
      kernels::serial::relocate(ps, mesh);
    }
    sign = -sign;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Assemble(benchmark::State& state) {
  const auto& mesh = bench_mesh();
  const auto dofs = DofMap::for_region(mesh, Region::Vacuum);
  const std::vector<double> coeff(mesh.num_cells(), 1.0);
  CsrMatrix m = make_pattern(mesh, dofs);
  for (auto _ : state) {
    std::fill(m.val.begin(), m.val.end(), 0.0);
    if constexpr (Parallel) {
      kernels::omp::assemble(mesh, Region::Vacuum, dofs.node_to_dof, coeff, ElementKind::Stiffness, m);
    } else {
      kernels::serial::assemble(mesh, Region::Vacuum, dofs.node_to_dof, coeff, ElementKind::Stiffness, m);
    }
    benchmark::DoNotOptimize(m.val.data());
  }
  state.SetItemsProcessed(state.iterations() * mesh.num_cells());
}

}  // namespace

BENCHMARK(BM_Spmv<false>)->Name("spmv/serial");
BENCHMARK(BM_Spmv<true>)->Name("spmv/omp");
BENCHMARK(BM_Dot<false>)->Name("dot/serial")->Arg(1 << 20);
BENCHMARK(BM_Dot<true>)->Name("dot/omp")->Arg(1 << 20);
BENCHMARK(BM_Deposit<false>)->Name("deposit/serial")->Arg(1 << 16);
BENCHMARK(BM_Deposit<true>)->Name("deposit/omp")->Arg(1 << 16);
BENCHMARK(BM_PushRelocate<false>)->Name("push_relocate/serial")->Arg(1 << 16);
BENCHMARK(BM_PushRelocate<true>)->Name("push_relocate/omp")->Arg(1 << 16);
BENCHMARK(BM_Assemble<false>)->Name("assemble/serial");
BENCHMARK(BM_Assemble<true>)->Name("assemble/omp");

BENCHMARK_MAIN();
