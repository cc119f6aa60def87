#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fepic/constants.hpp"
#include "fepic/fem.hpp"
#include "fepic/mesh.hpp"
#include "fepic/particle.hpp"
#include "fepic/rng.hpp"

namespace fepic {

// ---- mover ----

// One synchronized leapfrog step with an arbitrary field callback
// `field(const Particle&) -> Vec3`:
//   v += Q E(r_k);  r += dt v;  v += Q E(r_k+1),   Q = (q/m) dt / 2.
// Cells are not updated; the solver path uses the kernels directly.
template <class FieldAt>
void push_leapfrog(std::span<Particle> ps, FieldAt&& field, double dt, const Species& sp) {
  const double q_half = sp.charge_to_mass() * 0.5 * dt;
  for (auto& p : ps) {
    p.v += q_half * field(p);
    p.r += dt * p.v;
    p.v += q_half * field(p);
  }
}

// ---- injection ----

// Expected superparticles from one emitting area per step: J A dt / (e w).
double expected_superparticles(double current_density, double area, double dt, double weight);

// floor(n) plus one more with probability frac(n).
int stochastic_count(double n, double uniform);

struct InjectionSource {
  int face = -1;            // surface face index
  double area = 0.0;        // face area
  Vec3 field;               // field in the owning cell (V/m)
  std::array<double, 3> subquad_j{};  // emitted current density per sub-quad (A/m^2)
};

struct InjectionResult {
  std::vector<Particle> particles;
  double expected = 0.0;    // sum of n_sp over sub-quads
};

// New superparticles from each source's three sub-quads. Positions are uniform
// on the sub-quad, velocity v0 = (q/m) E dt (1/2 + R) and position offset
// v0 dt R' with fresh uniforms per particle. Draws for (step, sub-quad) come
// from their own stream. Particles leaving the domain during the offset are
// dropped and counted in `lost`. Ids are assigned in source order starting
// at `next_id`.
InjectionResult inject_from_faces(const Mesh& mesh, std::span<const InjectionSource> sources, double dt,
                                  const Species& sp, std::uint64_t seed, std::uint64_t step,
                                  std::uint64_t& next_id, long* lost = nullptr);

// ---- boundaries ----

struct LateralPeriod {
  Vec3 lo;
  Vec3 hi;
  static LateralPeriod from_mesh(const Mesh& mesh);
  // Map a point back into [lo, hi) in x and y.
  Vec3 wrap(const Vec3& p) const;
};

struct BoundaryTally {
  // Superparticles absorbed per boundary tag (index = tag - 1).
  std::array<long, kBoundaryTagCount> absorbed{};
  long wrapped = 0;
  long total_absorbed() const;
};

// After a drift: re-locate every particle from its previous cell. Exits through
// Lateral faces are wrapped and re-located; every other exit removes the
// particle and adds it to `tally`. Survivor order is preserved.
void apply_boundaries(std::vector<Particle>& ps, const Mesh& mesh, const LateralPeriod& period,
                      BoundaryTally& tally);

// ---- collisions ----

inline constexpr double kDefaultCoulombLog = 13.0;

struct CollisionParams {
  double dt = 0.0;
  double coulomb_log = kDefaultCoulombLog;
};

// Record of one collided pair (indices into the particle array).
struct PairRecord {
  int a = -1;
  int b = -1;
  double variance = 0.0;
  double delta = 0.0;
};

// <delta^2> = q^4 n Lambda dt / (2 pi eps0^2 m^2 g^3 V_cell) with n the number of
// real particles (superparticles times weight) in the cell.
double scattering_variance(const Species& sp, double n_real, double rel_speed, double cell_volume,
                           const CollisionParams& params);

// Rotate the relative velocity u1 - u2 by the angle with tan(theta/2) = delta
// and azimuth phi; v1 = u1 + dg/2, v2 = u2 - dg/2.
void scatter_pair(Vec3& u1, Vec3& u2, double delta, double phi);

// Random pairing and scattering of the superparticles `members` sharing one
// cell. With an odd count the first three members form the pairs (0,1),
// (1,2), (2,0) at half variance. `log`, when given, receives every pair.
template <class Rng>
void collide_cell(std::span<Particle> ps, std::span<int> members, const Species& sp, double cell_volume,
                  const CollisionParams& params, Rng& rng, std::vector<PairRecord>* log = nullptr);

// collide_cell over every cell, in parallel, with one stream per (step, cell).
// Returns the number of collided pairs.
long collide_all(std::span<Particle> ps, const Mesh& mesh, const Species& sp, const CollisionParams& params,
                 std::uint64_t seed, std::uint64_t step);

// ---- template implementation ----

namespace detail {
template <class Rng>
void collide_one(std::span<Particle> ps, int a, int b, const Species& sp, double n_real, double cell_volume,
                 const CollisionParams& params, double scale, Rng& rng, std::vector<PairRecord>* log) {
  const Vec3 g = ps[a].v - ps[b].v;
  const double speed = norm(g);
  const double phi = 2.0 * constants::pi * rng.uniform();
  const double gauss = rng.normal();
  if (speed == 0.0) return;
  const double var = scale * scattering_variance(sp, n_real, speed, cell_volume, params);
  const double delta = std::sqrt(var) * gauss;
  scatter_pair(ps[a].v, ps[b].v, delta, phi);
  if (log != nullptr) log->push_back({a, b, var, delta});
}
}  // namespace detail

template <class Rng>
void collide_cell(std::span<Particle> ps, std::span<int> members, const Species& sp, double cell_volume,
                  const CollisionParams& params, Rng& rng, std::vector<PairRecord>* log) {
  const std::size_t n = members.size();
  if (n < 2 || params.coulomb_log == 0.0) return;
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(members[i], members[j]);
  }
  const double n_real = static_cast<double>(n) * sp.weight;
  std::size_t start = 0;
  if (n % 2 == 1) {
    detail::collide_one(ps, members[0], members[1], sp, n_real, cell_volume, params, 0.5, rng, log);
    detail::collide_one(ps, members[1], members[2], sp, n_real, cell_volume, params, 0.5, rng, log);
    detail::collide_one(ps, members[2], members[0], sp, n_real, cell_volume, params, 0.5, rng, log);
    start = 3;
  }
  for (std::size_t i = start; i + 1 < n; i += 2) {
    detail::collide_one(ps, members[i], members[i + 1], sp, n_real, cell_volume, params, 1.0, rng, log);
  }
}

}  // namespace fepic
