#include "fepic/pic.hpp"

#include <atomic>
#include <cmath>

#include "fepic/kernels.hpp"

namespace fepic {

double expected_superparticles(double current_density, double area, double dt, double weight) {
  if (current_density < 0.0 || !std::isfinite(current_density)) {
    throw Error(ErrorKind::InvalidEmission, "emitted current density must be finite and non-negative");
  }
  return current_density * area * dt / (constants::elementary_charge * weight);
}

int stochastic_count(double n, double uniform) {
  const double base = std::floor(n);
  return static_cast<int>(base) + ((uniform < n - base) ? 1 : 0);
}

InjectionResult inject_from_faces(const Mesh& mesh, std::span<const InjectionSource> sources, double dt,
                                  const Species& sp, std::uint64_t seed, std::uint64_t step,
                                  std::uint64_t& next_id, long* lost) {
  const long n_src = static_cast<long>(sources.size());
  std::vector<std::vector<Particle>> per_source(n_src);
  std::vector<double> expected(n_src, 0.0);
  std::vector<long> dropped(n_src, 0);
  std::atomic<bool> bad{false};
  const double qm = sp.charge_to_mass();

#pragma omp parallel for schedule(dynamic, 16)
  for (long s = 0; s < n_src; ++s) {
    const auto& src = sources[s];
    const int owner = mesh.face(src.face).tet;
    for (int c = 0; c < 3; ++c) {
      const double j = src.subquad_j[c];
      if (j < 0.0 || !std::isfinite(j)) {
        bad = true;
        continue;
      }
      if (j == 0.0) continue;
      const SubQuad sq = mesh.subquad(src.face, c);
      const double n = j * sq.area() * dt / (constants::elementary_charge * sp.weight);
      expected[s] += n;
      RngStream rng(seed, StreamPurpose::Injection, step, static_cast<std::uint32_t>(src.face * 3 + c));
      const int count = stochastic_count(n, rng.uniform());
      for (int k = 0; k < count; ++k) {
        Particle p;
        p.r = sample_point_in_subquad(sq, rng);
        p.v = (qm * dt * (0.5 + rng.uniform())) * src.field;
        p.r += (dt * rng.uniform()) * p.v;
        const auto loc = mesh.locate_cell(p.r, owner);
        if (!loc.inside) {
          ++dropped[s];
          continue;
        }
        p.cell = loc.cell;
        per_source[s].push_back(p);
      }
    }
  }
  if (bad) throw Error(ErrorKind::InvalidEmission, "emitted current density must be finite and non-negative");

  InjectionResult out;
  std::size_t total = 0;
  for (const auto& v : per_source) total += v.size();
  out.particles.reserve(total);
  long n_lost = 0;
  for (long s = 0; s < n_src; ++s) {
    out.expected += expected[s];
    n_lost += dropped[s];
    for (auto& p : per_source[s]) {
      p.id = next_id++;
      out.particles.push_back(p);
    }
  }
  if (lost != nullptr) *lost = n_lost;
  return out;
}

LateralPeriod LateralPeriod::from_mesh(const Mesh& mesh) { return {mesh.bounds().lo, mesh.bounds().hi}; }

Vec3 LateralPeriod::wrap(const Vec3& p) const {
  auto w = [](double x, double lo, double hi) {
    const double len = hi - lo;
    double r = x - len * std::floor((x - lo) / len);
    if (r >= hi) r -= len;
    return r;
  };
  return {w(p.x, lo.x, hi.x), w(p.y, lo.y, hi.y), p.z};
}

long BoundaryTally::total_absorbed() const {
  long s = 0;
  for (long a : absorbed) s += a;
  return s;
}

void apply_boundaries(std::vector<Particle>& ps, const Mesh& mesh, const LateralPeriod& period,
                      BoundaryTally& tally) {
  kernels::omp::relocate(ps, mesh);
  constexpr int kLateral = static_cast<int>(BoundaryTag::Lateral);
  std::size_t keep = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Particle p = ps[i];
    for (int attempt = 0; p.exit_tag == kLateral; ++attempt) {
      ++tally.wrapped;
      p.r = period.wrap(p.r);
      auto res = attempt < 2 ? mesh.locate_cell(p.r, p.cell) : mesh.locate_exhaustive(p.r);
      if (attempt >= 2 && !res.inside) {
        // Exhaustive search failed: the wrapped point lies outside the mesh.
        p.exit_tag = static_cast<int>(BoundaryTag::Top);
        break;
      }
      p.cell = res.cell;
      p.exit_tag = res.inside ? 0 : static_cast<int>(res.exit_tag);
    }
    if (p.exit_tag != 0) {
      ++tally.absorbed[p.exit_tag - 1];
      continue;
    }
    ps[keep++] = p;
  }
  ps.resize(keep);
}

double scattering_variance(const Species& sp, double n_real, double rel_speed, double cell_volume,
                           const CollisionParams& params) {
  using namespace constants;
  const double q2 = sp.charge * sp.charge;
  const double eps2 = vacuum_permittivity * vacuum_permittivity;
  return q2 * q2 * n_real * params.coulomb_log * params.dt /
         (2.0 * pi * eps2 * sp.mass * sp.mass * rel_speed * rel_speed * rel_speed * cell_volume);
}

void scatter_pair(Vec3& u1, Vec3& u2, double delta, double phi) {
  const Vec3 g = u1 - u2;
  const double speed = norm(g);
  if (speed == 0.0) return;
  const double d2 = delta * delta;
  const double sin_t = 2.0 * delta / (1.0 + d2);
  const double omc = 2.0 * d2 / (1.0 + d2);
  const double cos_p = std::cos(phi);
  const double sin_p = std::sin(phi);
  const double perp = std::sqrt(g.x * g.x + g.y * g.y);
  Vec3 dg;
  if (perp > 1e-12 * speed) {
    dg.x = (g.x / perp) * g.z * sin_t * cos_p - (g.y / perp) * speed * sin_t * sin_p - g.x * omc;
    dg.y = (g.y / perp) * g.z * sin_t * cos_p + (g.x / perp) * speed * sin_t * sin_p - g.y * omc;
    dg.z = -perp * sin_t * cos_p - g.z * omc;
  } else {
    // g along z: the frame (x, y, z) already has g as its polar axis
    dg.x = speed * sin_t * cos_p;
    dg.y = speed * sin_t * sin_p;
    dg.z = -g.z * omc;
  }
  u1 += 0.5 * dg;
  u2 -= 0.5 * dg;
}

long collide_all(std::span<Particle> ps, const Mesh& mesh, const Species& sp, const CollisionParams& params,
                 std::uint64_t seed, std::uint64_t step) {
  const int n_cells = static_cast<int>(mesh.num_cells());
  std::vector<int> offsets(n_cells + 1, 0);
  for (const auto& p : ps) ++offsets[p.cell + 1];
  for (int c = 0; c < n_cells; ++c) offsets[c + 1] += offsets[c];
  std::vector<int> order(ps.size());
  {
    std::vector<int> fill(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < ps.size(); ++i) order[fill[ps[i].cell]++] = static_cast<int>(i);
  }
  long pairs = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : pairs)
  for (int c = 0; c < n_cells; ++c) {
    const int n = offsets[c + 1] - offsets[c];
    if (n < 2) continue;
    RngStream rng(seed, StreamPurpose::Collision, step, static_cast<std::uint32_t>(c));
    std::span<int> members(order.data() + offsets[c], n);
    collide_cell(ps, members, sp, mesh.volume(c), params, rng);
    pairs += (n % 2 == 1) ? (n - 3) / 2 + 3 : n / 2;
  }
  return pairs;
}

}  // namespace fepic
