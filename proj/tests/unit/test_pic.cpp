#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "doctest.h"
#include "fepic/constants.hpp"
#include "fepic/pic.hpp"

using namespace fepic;

namespace {

// Final x of the leapfrog for E_x = k x (restoring for electrons).
double leapfrog_linear(double k, double x0, double v0, double t_end, int steps, const Species& sp) {
  Particle p;
  p.r = {x0, 0, 0};
  p.v = {v0, 0, 0};
  const double dt = t_end / steps;
  for (int i = 0; i < steps; ++i) {
    push_leapfrog(std::span(&p, 1), [k](const Particle& q) { return Vec3{k * q.r.x, 0, 0}; }, dt, sp);
  }
  return p.r.x;
}

double rk_linear(double k, double x0, double v0, double t_end, const Species& sp) {
  using State = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;
  // Dimensionless: x / x0, v / v0 and tau = t / t_end.
  State s = {1.0, 1.0};
  const double a = v0 * t_end / x0;
  const double b = sp.charge_to_mass() * k * x0 * t_end / v0;
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-14, 1e-14),
                          [a, b](const State& y, State& dy, double) {
                            dy[0] = a * y[1];
                            dy[1] = b * y[0];
                          },
                          s, 0.0, 1.0, 1e-3);
  return s[0] * x0;
}

}  // namespace

TEST_CASE("free drift is exact") {
  Particle p;
  p.r = {1e-9, 2e-9, 3e-9};
  p.v = {1e5, -2e5, 3e5};
  const Vec3 r0 = p.r;
  push_leapfrog(std::span(&p, 1), [](const Particle&) { return Vec3{}; }, 1e-16, electrons(1));
  CHECK(p.r == r0 + 1e-16 * Vec3{1e5, -2e5, 3e5});
  CHECK(p.v == Vec3{1e5, -2e5, 3e5});
}

TEST_CASE("constant field trajectory is the analytic parabola") {
  const Species sp = electrons(0.01);
  const Vec3 e{2e8, -1e9, 5e8};
  const Vec3 r0{1e-9, -3e-9, 2e-9}, v0{1e5, 2e5, -3e5};
  Particle p;
  p.r = r0;
  p.v = v0;
  const double dt = 5e-18;
  const int n = 1000;
  for (int i = 0; i < n; ++i) push_leapfrog(std::span(&p, 1), [e](const Particle&) { return e; }, dt, sp);
  const double t = n * dt;
  const Vec3 a = sp.charge_to_mass() * e;
  const Vec3 r = r0 + t * v0 + 0.5 * t * t * a;
  const Vec3 v = v0 + t * a;
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(p.r[k] - r[k]) < 1e-12 * norm(r));
    CHECK(std::abs(p.v[k] - v[k]) < 1e-12 * norm(v));
  }
}

TEST_CASE("linear field converges at second order") {
  const Species sp = electrons(1);
  const double k = 1e19;  // V/m^2
  const double omega = std::sqrt(-sp.charge_to_mass() * k);
  const double t_end = 3.0 / omega;
  const double x0 = 1e-9, v0 = 2e4;
  const double ref = rk_linear(k, x0, v0, t_end, sp);
  const double exact = x0 * std::cos(omega * t_end) + v0 / omega * std::sin(omega * t_end);
  CHECK(std::abs(ref / exact - 1.0) < 1e-11);

  std::array<double, 4> x{}, err{};
  for (int i = 0; i < 4; ++i) {
    x[i] = leapfrog_linear(k, x0, v0, t_end, 50 << i, sp);
    err[i] = std::abs(x[i] - ref);
  }
  for (int i = 0; i + 1 < 4; ++i) CHECK(std::log2(err[i] / err[i + 1]) >= 1.95);
  const double richardson = std::log2((x[1] - x[0]) / (x[2] - x[1]));
  CHECK(richardson >= 1.95);
}

TEST_CASE("stochastic count") {
  for (double u : {0.0, 0.3, 0.999999}) CHECK(stochastic_count(2.0, u) == 2);
  CHECK(stochastic_count(0.25, 0.2) == 1);
  CHECK(stochastic_count(0.25, 0.3) == 0);

  RngStream rng(17, StreamPurpose::Test, 0, 0);
  for (double n : {0.25, 1.5, 3.7}) {
    const int trials = 100000;
    double sum = 0;
    for (int i = 0; i < trials; ++i) sum += stochastic_count(n, rng.uniform());
    const double frac = n - std::floor(n);
    const double sigma = std::sqrt(frac * (1 - frac) / trials);
    CHECK(std::abs(sum / trials - n) < 3 * sigma);
  }
}

TEST_CASE("expected superparticles") {
  const double n = expected_superparticles(1e12, 1e-18, 1e-16, 0.01);
  CHECK(n == doctest::Approx(1e12 * 1e-18 * 1e-16 / (constants::elementary_charge * 0.01)));
  CHECK(expected_superparticles(0.0, 1e-18, 1e-16, 0.01) == 0.0);
  CHECK_THROWS_AS(expected_superparticles(-1.0, 1e-18, 1e-16, 0.01), Error);
  CHECK_THROWS_AS(expected_superparticles(NAN, 1e-18, 1e-16, 0.01), Error);
}

TEST_CASE("injection from surface faces") {
  BoxSpec s;
  s.width = s.depth = 4e-9;
  s.gap = 10e-9;
  s.nx = s.ny = 2;
  s.nz = 5;
  const Mesh m = build_box_mesh(s);
  const Species sp = electrons(0.01);
  const double dt = 2e-17;
  const auto faces = m.faces_with_tag(BoundaryTag::Surface);

  std::vector<InjectionSource> none;
  for (int f : faces) none.push_back({f, m.face(f).area, {0, 0, -5e9}, {0, 0, 0}});
  std::uint64_t id = 0;
  CHECK(inject_from_faces(m, none, dt, sp, 1, 0, id).particles.empty());

  // Target 0.37 superparticles per sub-quad per step.
  std::vector<InjectionSource> src;
  for (int f : faces) {
    const double a = m.face(f).area / 3.0;
    const double j = 0.37 * constants::elementary_charge * sp.weight / (a * dt);
    src.push_back({f, m.face(f).area, {0, 0, -5e9}, {j, j, j}});
  }
  const int steps = 2000;
  long total = 0, lost_total = 0;
  double expected = 0;
  for (int st = 0; st < steps; ++st) {
    long lost = 0;
    const auto r = inject_from_faces(m, src, dt, sp, 3, st, id, &lost);
    expected += r.expected;
    total += static_cast<long>(r.particles.size()) + lost;
    lost_total += lost;
    for (const auto& p : r.particles) {
      REQUIRE(m.contains(p.r, p.cell));
      REQUIRE(p.v.z > 0.0);
      REQUIRE(p.v.x == 0.0);
    }
  }
  CHECK(lost_total == 0);
  const double sigma = std::sqrt(faces.size() * 3.0 * steps * 0.37 * 0.63);
  CHECK(std::abs(total - expected) < 3 * sigma);
  CHECK(id == static_cast<std::uint64_t>(total));

  // Same keys, same particles.
  std::uint64_t a = 0, b = 0;
  const auto r1 = inject_from_faces(m, src, dt, sp, 3, 7, a);
  const auto r2 = inject_from_faces(m, src, dt, sp, 3, 7, b);
  REQUIRE(r1.particles.size() == r2.particles.size());
  for (std::size_t i = 0; i < r1.particles.size(); ++i) CHECK(r1.particles[i].r == r2.particles[i].r);

  src[0].subquad_j[1] = -1.0;
  CHECK_THROWS_AS(inject_from_faces(m, src, dt, sp, 3, 0, a), Error);
}

TEST_CASE("boundary handling") {
  BoxSpec s;
  s.width = 2.0;
  s.depth = 3.0;
  s.gap = 4.0;
  s.nx = s.ny = s.nz = 3;
  const Mesh m = build_box_mesh(s);
  const auto period = LateralPeriod::from_mesh(m);
  CHECK(period.wrap({2.25, -0.5, 1.0}) == Vec3{0.25, 2.5, 1.0});

  auto particle_at = [&](const Vec3& r) {
    Particle p;
    p.r = r;
    p.cell = m.locate_exhaustive(r).cell;
    return p;
  };
  std::vector<Particle> ps = {particle_at({1.9, 1.5, 2.0}), particle_at({1.0, 1.0, 3.9}),
                              particle_at({0.5, 0.5, 0.1}), particle_at({1.0, 1.5, 2.0})};
  ps[0].r.x += 0.35;  // out through +x
  ps[1].r.z += 0.3;   // out through Top
  ps[2].r.z -= 0.2;   // back into the cathode
  ps[3].id = 99;
  BoundaryTally tally;
  apply_boundaries(ps, m, period, tally);
  REQUIRE(ps.size() == 2);
  CHECK(ps[0].r.x == doctest::Approx(0.25));
  CHECK(ps[0].r.z == 2.0);
  CHECK(m.contains(ps[0].r, ps[0].cell));
  CHECK(ps[1].id == 99);
  CHECK(tally.wrapped == 1);
  CHECK(tally.absorbed[static_cast<int>(BoundaryTag::Top) - 1] == 1);
  CHECK(tally.absorbed[static_cast<int>(BoundaryTag::Surface) - 1] == 1);
  CHECK(tally.total_absorbed() == 2);

  // Lateral motion only: nothing is ever lost.
  RngStream rng(8, StreamPurpose::Test, 0, 0);
  std::vector<Particle> cloud;
  for (int i = 0; i < 500; ++i) {
    auto p = particle_at({2.0 * rng.uniform(), 3.0 * rng.uniform(), 0.1 + 3.8 * rng.uniform()});
    p.v = {rng.normal(), rng.normal(), 0.0};
    cloud.push_back(p);
  }
  BoundaryTally t2;
  for (int step = 0; step < 1000; ++step) {
    kernels::omp::drift(cloud, 0.05);
    apply_boundaries(cloud, m, period, t2);
  }
  CHECK(cloud.size() == 500);
  CHECK(t2.total_absorbed() == 0);
  CHECK(t2.wrapped > 0);
}
