#include <cmath>

#include "doctest.h"
#include "fepic/error.hpp"
#include "fepic/thermal.hpp"

using namespace fepic;

namespace {

// Metal bar of length `len` under a one-cell vacuum layer; Surface at z = 0.
Mesh metal_bar(double len, int nz, double side = 2e-9) {
  BoxSpec s;
  s.width = s.depth = side;
  s.gap = 1e-9;
  s.nx = s.ny = 1;
  s.nz = 1;
  s.metal_thickness = len;
  s.nz_metal = nz;
  return build_box_mesh(s);
}

double metal_volume_integral(const Mesh& m, const std::vector<double>& cell_values) {
  double s = 0;
  for (int c = 0; c < static_cast<int>(m.num_cells()); ++c)
    if (m.region(c) == Region::Metal) s += cell_values[c] * m.volume(c);
  return s;
}

}  // namespace

TEST_CASE("tables and conductivity") {
  Table1D t{{{300, 1.0}, {600, 3.0}, {900, 4.0}}};
  t.validate("t");
  bool clamped = false;
  CHECK(t.at(450, &clamped) == doctest::Approx(2.0));
  CHECK_FALSE(clamped);
  CHECK(t.at(300) == 1.0);
  CHECK(t.at(900) == 4.0);
  CHECK(t.at(1200, &clamped) == 4.0);
  CHECK(clamped);
  CHECK(t.at(100) == 1.0);
  const Table1D unsorted{{{600, 1.0}, {300, 2.0}}};
  const Table1D negative{{{300, -1.0}}};
  CHECK_THROWS_AS(unsorted.validate("bad"), Error);
  CHECK_THROWS_AS(Table1D{}.validate("empty"), Error);
  CHECK_THROWS_AS(negative.validate("negative"), Error);

  MaterialModel mat;
  const auto k = conductivity(300, mat);
  CHECK(k.sigma == 5.96e7);
  CHECK(k.kappa == doctest::Approx(mat.lorenz * 300 * 5.96e7).epsilon(1e-15));
  mat.size_factor = Table1D::constant(0.5);
  const auto h = conductivity(300, mat);
  CHECK(h.sigma == doctest::Approx(0.5 * k.sigma));
  CHECK(h.kappa == doctest::Approx(0.5 * k.kappa));
  mat.fixed_kappa = 123.0;
  CHECK(conductivity(700, mat).kappa == 123.0);
}

TEST_CASE("continuity in a uniform bar") {
  const double len = 6e-9, side = 2e-9, sigma = 2e7, j = 3e12;
  const Mesh m = metal_bar(len, 6, side);
  std::vector<double> cs(m.num_cells(), 0.0);
  for (int c = 0; c < static_cast<int>(m.num_cells()); ++c)
    if (m.region(c) == Region::Metal) cs[c] = sigma;
  const auto nf = m.faces_with_tag(BoundaryTag::Surface).size();

  SUBCASE("no current, no potential") {
    const auto r = solve_continuity(m, cs, std::vector<double>(nf, 0.0));
    for (double v : r.potential.values) CHECK(v == 0.0);
    for (double p : joule_power(m, r.potential, cs)) CHECK(p == 0.0);
  }

  SUBCASE("Ohm's law") {
    const auto r = solve_continuity(m, cs, std::vector<double>(nf, j), 1e-14);
    const auto dofs = DofMap::for_region(m, Region::Metal);
    for (int n : dofs.dof_to_node) {
      const double z = m.node(n).z;
      CHECK(std::abs(std::abs(r.potential.values[n]) - j / sigma * (z + len)) < 1e-8 * j / sigma * len);
    }
    const double in = j * side * side;
    const double out = boundary_reaction(r.system, m, r.potential, BoundaryTag::MetalBottom);
    CHECK(std::abs(std::abs(out) - in) < 1e-10 * in);

    const auto pj = joule_power(m, r.potential, cs);
    for (int c = 0; c < static_cast<int>(m.num_cells()); ++c) CHECK(pj[c] >= 0.0);
    const double resistance = len / (sigma * side * side);
    CHECK(metal_volume_integral(m, pj) == doctest::Approx(in * in * resistance).epsilon(1e-8));
  }
}

TEST_CASE("heat equation") {
  MaterialModel mat;
  mat.fixed_kappa = 400.0;
  const double len = 20e-9;
  const Mesh m = metal_bar(len, 40, 1e-9);
  const std::vector<double> zero_pj(m.num_cells(), 0.0);
  const std::vector<double> zero_pn(m.faces_with_tag(BoundaryTag::Surface).size(), 0.0);
  const auto dofs = DofMap::for_region(m, Region::Metal);

  SUBCASE("ambient is a fixed point") {
    auto st = initial_heat_state(m, mat);
    for (int i = 0; i < 5; ++i) st = step_heat(m, st, 1e-13, zero_pj, zero_pn, mat);
    for (int n : dofs.dof_to_node) CHECK(st.temperature.values[n] == doctest::Approx(mat.ambient).epsilon(1e-12));
  }

  SUBCASE("rod with fixed ends relaxes to a line") {
    HeatOptions opts;
    opts.dirichlet = {{BoundaryTag::Surface, 500.0}, {BoundaryTag::MetalBottom, 300.0}};
    auto st = initial_heat_state(m, mat);
    const double tau = mat.heat_capacity * len * len / mat.fixed_kappa;
    for (int i = 0; i < 400; ++i) st = step_heat(m, st, tau / 10, zero_pj, zero_pn, mat, opts);
    for (int n : dofs.dof_to_node) {
      const double exact = 300.0 + 200.0 * (m.node(n).z + len) / len;
      CHECK(std::abs(st.temperature.values[n] / exact - 1.0) < 1e-6);
    }
  }

  SUBCASE("sine mode decay rate") {
    HeatOptions opts;
    opts.dirichlet = {{BoundaryTag::Surface, mat.ambient}, {BoundaryTag::MetalBottom, mat.ambient}};
    opts.theta = 0.5;
    opts.tol = 1e-13;
    auto st = initial_heat_state(m, mat);
    int probe = -1;
    for (int n : dofs.dof_to_node) {
      const double z = m.node(n).z;
      st.temperature.values[n] = mat.ambient + 50.0 * std::sin(constants::pi * (z + len) / len);
      if (std::abs(z + len / 2) < 1e-15 && probe < 0) probe = n;
    }
    REQUIRE(probe >= 0);
    const double rate = mat.fixed_kappa * constants::pi * constants::pi / (mat.heat_capacity * len * len);
    const double t_end = 1.0 / rate;
    const int steps = 400;
    for (int i = 0; i < steps; ++i) st = step_heat(m, st, t_end / steps, zero_pj, zero_pn, mat, opts);
    const double measured = -std::log((st.temperature.values[probe] - mat.ambient) / 50.0) / t_end;
    CHECK(std::abs(measured / rate - 1.0) < 0.02);
  }

  SUBCASE("steady energy balance") {
    MaterialModel wf;  // kappa from Wiedemann-Franz
    wf.sigma_bulk = Table1D{{{300, 5.96e7}, {1300, 1.0e7}}};
    std::vector<double> sigma, kappa;
    auto st = initial_heat_state(m, wf);
    cell_conductivities(m, st.temperature, wf, sigma, kappa);
    const auto nf = m.faces_with_tag(BoundaryTag::Surface).size();
    const auto cont = solve_continuity(m, sigma, std::vector<double>(nf, 5e12), 1e-14);
    const auto pj = joule_power(m, cont.potential, sigma);
    const std::vector<double> pn(nf, 2e8);
    HeatOptions opts;
    opts.tol = 1e-14;
    const auto sh = steady_heat(m, st.temperature, pj, pn, wf, opts);
    double in = metal_volume_integral(m, pj);
    for (int f : m.faces_with_tag(BoundaryTag::Surface)) in += 2e8 * m.face(f).area;
    const double out = -boundary_reaction(sh.system, m, sh.temperature, BoundaryTag::MetalBottom);
    CHECK(std::abs(out / in - 1.0) < 1e-6);
    CHECK(max_value(m, sh.temperature) > wf.ambient);

    const auto f = heat_load(m, dofs, pj, pn);
    double total = 0;
    for (double v : f) total += v;
    CHECK(total == doctest::Approx(in).epsilon(1e-12));
  }
}
