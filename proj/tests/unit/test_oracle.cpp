#include <cmath>

#include "doctest.h"
#include "fepic/constants.hpp"
#include "fepic/error.hpp"
#include "fepic/oracle.hpp"

using namespace fepic;
namespace c = fepic::constants;

TEST_CASE("Child-Langmuir law") {
  CHECK(oracle::child_langmuir(0.0, 1e-3) == 0.0);
  CHECK(oracle::child_langmuir(400.0, 18.2e-9) / oracle::child_langmuir(100.0, 18.2e-9) ==
        doctest::Approx(8.0).epsilon(1e-14));

  const double v = 1000.0, d = 1e-3;
  const double direct = 4.0 * c::vacuum_permittivity / 9.0 *
                        std::sqrt(2.0 * c::elementary_charge / c::electron_mass) * std::pow(v, 1.5) / (d * d);
  CHECK(oracle::child_langmuir(v, d) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(direct == doctest::Approx(7.38e4).epsilon(0.01));

  // At the space-charge limit the integrated gap with zero cathode field is d.
  CHECK(oracle::gap_for(0.0, direct, v) == doctest::Approx(d).epsilon(0.01));
  CHECK(oracle::cathode_field_for(direct * 0.999999, v, d) < 1e-3 * v / d);
}

TEST_CASE("vacuum limit") {
  const double v = 300.0, d = 18.2e-9;
  CHECK(oracle::gap_for(v / d, 0.0, v) == doctest::Approx(d).epsilon(1e-12));
  CHECK(oracle::cathode_field_for(1e-6, v, d) == doctest::Approx(v / d).epsilon(1e-9));
  CHECK(oracle::cathode_field_for(0.0, v, d) == doctest::Approx(v / d).epsilon(1e-12));
}

TEST_CASE("Murphy-Good diode sweep invariants") {
  oracle::DiodeSpec spec;
  const EmitterMaterial mat;
  const std::vector<double> volts = {100, 150, 200, 300, 400, 600, 800, 1000};
  const auto pts = oracle::sweep(spec, volts, mat);
  REQUIRE(pts.size() == volts.size());
  double prev_j = 0, prev_ratio = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    CHECK(p.voltage == volts[i]);
    CHECK(p.current_density > prev_j);
    CHECK(p.cathode_field <= p.voltage / spec.gap);
    CHECK(p.current_density < p.child_langmuir);
    const double ratio = p.current_density / p.child_langmuir;
    CHECK(ratio > prev_ratio);
    prev_j = p.current_density;
    prev_ratio = ratio;
    // The cathode field reproduces the emitted current.
    spec.voltage = p.voltage;
    CHECK(current_density(p.cathode_field, spec.temperature, mat) ==
          doctest::Approx(p.current_density).epsilon(1e-6));
    CHECK(oracle::gap_for(p.cathode_field, p.current_density, p.voltage) == doctest::Approx(spec.gap).epsilon(1e-9));
    const auto single = oracle::semianalytic_iv(spec, mat);
    CHECK(single.current_density == p.current_density);
  }
}

TEST_CASE("integration step halving") {
  oracle::DiodeSpec spec;
  spec.voltage = 400;
  const EmitterMaterial mat;
  oracle::IterationOptions coarse, fine;
  coarse.integration.fixed_panels = 8;
  fine.integration.fixed_panels = 16;
  const double jc = oracle::semianalytic_iv(spec, mat, coarse).current_density;
  const double jf = oracle::semianalytic_iv(spec, mat, fine).current_density;
  CHECK(std::abs(jc / jf - 1.0) < 1e-3);
  const double ja = oracle::semianalytic_iv(spec, mat).current_density;
  CHECK(std::abs(jf / ja - 1.0) < 1e-3);
}

TEST_CASE("steep emission law reaches the Child-Langmuir asymptote") {
  oracle::DiodeSpec spec;
  const oracle::EmissionLaw steep = [](double e) { return e > 0 ? 1e16 * std::pow(e / 1e9, 2) : 0.0; };
  double prev_gap = 1.0;
  for (double v : {50.0, 200.0, 1000.0}) {
    spec.voltage = v;
    const auto p = oracle::semianalytic_iv(spec, steep);
    const double gap = 1.0 - p.current_density / p.child_langmuir;
    CHECK(gap > 0.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 0.02);
}

TEST_CASE("iteration limit") {
  oracle::DiodeSpec spec;
  spec.voltage = 400;
  oracle::IterationOptions opts;
  opts.max_iter = 1;
  CHECK_THROWS_AS(oracle::semianalytic_iv(spec, EmitterMaterial{}, opts), NoConvergence);
}
