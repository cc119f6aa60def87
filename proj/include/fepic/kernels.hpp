#pragma once

#include <span>

#include "fepic/mesh.hpp"
#include "fepic/particle.hpp"
#include "fepic/sparse.hpp"

namespace fepic {

// Process-wide reproducibility switch. When on, every parallel reduction uses
// a partition that does not depend on the thread count, so results are
// bit-identical between 1 and N threads.
void set_deterministic(bool on);
bool deterministic();

// Returns the previous setting.
int set_num_threads(int n);
int max_threads();

enum class ElementKind { Stiffness, Mass };

// Hot loops in two flavours: `serial` is the plain reference implementation
// kept for testing and benchmarking; `omp` is what the solver uses.
namespace kernels {

inline constexpr std::size_t kReduceBlock = 4096;

namespace serial {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
void kick(std::span<Particle> ps, std::span<const Vec3> cell_field, double q_half);
void drift(std::span<Particle> ps, double dt);
void relocate(std::span<Particle> ps, const Mesh& mesh);
void deposit(const Mesh& mesh, std::span<const Particle> ps, double scale, std::span<double> node_out);
// Scatter of element matrices over `region` into the (pre-patterned) matrix.
void assemble(const Mesh& mesh, Region region, std::span<const int> node_to_dof,
              std::span<const double> cell_coeff, ElementKind kind, CsrMatrix& m);

}  // namespace serial

namespace omp {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
void kick(std::span<Particle> ps, std::span<const Vec3> cell_field, double q_half);
void drift(std::span<Particle> ps, double dt);
void relocate(std::span<Particle> ps, const Mesh& mesh);
void deposit(const Mesh& mesh, std::span<const Particle> ps, double scale, std::span<double> node_out);
// Row-wise gather: each matrix row sums the element contributions of its
// incident cells, so no two threads write the same entry.
void assemble(const Mesh& mesh, Region region, std::span<const int> node_to_dof,
              std::span<const double> cell_coeff, ElementKind kind, CsrMatrix& m);

}  // namespace omp

}  // namespace kernels

}  // namespace fepic
