#include <cmath>
#include <set>

#include "doctest.h"
#include "fepic/rng.hpp"

using namespace fepic;

TEST_CASE("philox4x32-10 known answers") {
  // Published Random123 test vectors.
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of their keys") {
  RngStream a(7, StreamPurpose::Injection, 3, 11);
  RngStream b(7, StreamPurpose::Injection, 3, 11);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

  std::set<double> firsts;
  firsts.insert(RngStream(7, StreamPurpose::Injection, 3, 11).uniform());
  firsts.insert(RngStream(8, StreamPurpose::Injection, 3, 11).uniform());
  firsts.insert(RngStream(7, StreamPurpose::Collision, 3, 11).uniform());
  firsts.insert(RngStream(7, StreamPurpose::Injection, 4, 11).uniform());
  firsts.insert(RngStream(7, StreamPurpose::Injection, 3, 12).uniform());
  CHECK(firsts.size() == 5);
}

TEST_CASE("uniform, normal and below moments") {
  RngStream r(1, StreamPurpose::Test, 0, 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
  }
  CHECK(std::abs(s / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(s2 / n - 1.0 / 3.0) < 0.003);

  double g = 0, g2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    g += x;
    g2 += x * x;
  }
  CHECK(std::abs(g / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(g2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));

  int counts[7] = {};
  for (int i = 0; i < 70000; ++i) {
    const auto k = r.below(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  double chi2 = 0;
  for (int c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
  CHECK(chi2 < 22.46);  // p = 0.001 at 6 dof
}
