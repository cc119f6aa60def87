#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fepic/mesh.hpp"
#include "fepic/rng.hpp"

using namespace fepic;

namespace {

Mesh unit_tet() {
  std::vector<Vec3> nodes = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<FaceSpec> faces = {
      {{1, 2, 3}, BoundaryTag::Top},
      {{0, 2, 3}, BoundaryTag::Lateral},
      {{0, 1, 3}, BoundaryTag::Lateral},
      {{0, 1, 2}, BoundaryTag::Surface},
  };
  return Mesh(nodes, {{0, 1, 2, 3}}, {Region::Vacuum}, faces);
}

double tri_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * norm(cross(b - a, c - a)); }

bool in_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const double whole = tri_area(a, b, c);
  return tri_area(p, b, c) + tri_area(a, p, c) + tri_area(a, b, p) <= whole * (1.0 + 1e-9);
}

}  // namespace

TEST_CASE("barycentric coordinates") {
  const Mesh m = unit_tet();
  for (int k = 0; k < 4; ++k) {
    const auto l = m.barycentric(m.node(m.cell(0)[k]), 0);
    for (int j = 0; j < 4; ++j) CHECK(l[j] == doctest::Approx(j == k ? 1.0 : 0.0));
  }
  const auto c = m.barycentric(m.centroid(0), 0);
  for (double v : c) CHECK(v == doctest::Approx(0.25));

  const Vec3 p = 0.3 * m.node(m.cell(0)[0]) + 0.7 * m.node(m.cell(0)[2]);
  const auto l = m.barycentric(p, 0);
  CHECK(l[0] == doctest::Approx(0.3));
  CHECK(l[1] == doctest::Approx(0.0));
  CHECK(l[2] == doctest::Approx(0.7));
  CHECK(l[3] == doctest::Approx(0.0));
}

TEST_CASE("box construction") {
  const Mesh one = build_box_mesh(1.0, 1.0, 1.0, 1);
  CHECK(one.num_cells() == 6);
  double vol = 0;
  for (int c = 0; c < 6; ++c) vol += one.volume(c);
  CHECK(vol == doctest::Approx(1.0).epsilon(1e-14));

  BoxSpec s;
  s.width = s.depth = std::sqrt(135e-18);
  s.gap = 18.2e-9;
  s.nx = s.ny = 3;
  s.nz = 12;
  s.z_grading = 1.1;
  const Mesh box = build_box_mesh(s);
  const auto rep = box.check_invariants();
  CHECK(rep.euler_characteristic == 1);
  CHECK(rep.tag_area[0] == doctest::Approx(135e-18).epsilon(1e-12));
  CHECK(rep.tag_area[2] == doctest::Approx(135e-18).epsilon(1e-12));
  CHECK(rep.volume == doctest::Approx(135e-18 * 18.2e-9).epsilon(1e-12));

  s.metal_thickness = 5e-9;
  s.nz_metal = 3;
  const Mesh slab = build_box_mesh(s);
  const auto r2 = slab.check_invariants();
  CHECK(r2.euler_characteristic == 1);
  CHECK(r2.tag_area[2] == doctest::Approx(135e-18).epsilon(1e-12));
  CHECK(r2.tag_area[4] == doctest::Approx(135e-18).epsilon(1e-12));
  for (int f : slab.faces_with_tag(BoundaryTag::Surface)) {
    const auto& face = slab.face(f);
    CHECK(slab.region(face.tet) == Region::Vacuum);
    CHECK(face.twin >= 0);
    CHECK(slab.region(face.twin) == Region::Metal);
    CHECK(face.normal.z == doctest::Approx(-1.0));
  }
}

TEST_CASE("point location") {
  const Mesh m = build_box_mesh(1.0, 2.0, 3.0, 4);
  for (int c = 0; c < static_cast<int>(m.num_cells()); c += 17) {
    const auto r = m.locate_cell(m.centroid(c), c);
    CHECK(r.inside);
    CHECK(r.cell == c);
  }
  const auto out = m.locate_cell({0.5, 1.0, 3.5}, 0);
  CHECK_FALSE(out.inside);
  CHECK(out.exit_tag == BoundaryTag::Top);

  RngStream rng(3, StreamPurpose::Test, 0, 0);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p{rng.uniform(), 2.0 * rng.uniform(), 3.0 * rng.uniform()};
    const int hint = static_cast<int>(rng.below(m.num_cells()));
    const auto walk = m.locate_cell(p, hint);
    const auto scan = m.locate_exhaustive(p);
    REQUIRE(walk.inside);
    REQUIRE(scan.inside);
    if (walk.cell != scan.cell && !m.contains(p, scan.cell)) ++mismatches;
    if (walk.cell != scan.cell && !m.contains(p, walk.cell)) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("sub-quad sampling") {
  const Mesh m = unit_tet();
  const int face = m.faces_with_tag(BoundaryTag::Top)[0];
  const SubQuad sq = m.subquad(face, 1);
  const auto& q = sq.corners;
  CHECK(sq.area() == doctest::Approx(m.face(face).area / 3.0));

  // Four bins: split ADO and AOF through the midpoints of DO and OF.
  const Vec3 m1 = 0.5 * (q[1] + q[2]);
  const Vec3 m2 = 0.5 * (q[2] + q[3]);
  const std::array<std::array<Vec3, 3>, 4> bins = {{{q[0], q[1], m1}, {q[0], m1, q[2]}, {q[0], q[2], m2}, {q[0], m2, q[3]}}};
  std::array<double, 4> expected{};
  for (int b = 0; b < 4; ++b) expected[b] = tri_area(bins[b][0], bins[b][1], bins[b][2]) / sq.area();

  RngStream rng(5, StreamPurpose::Test, 0, 0);
  const int n = 100000;
  Vec3 sum, sum2;
  std::array<int, 4> counts{};
  for (int i = 0; i < n; ++i) {
    const Vec3 p = sample_point_in_subquad(sq, rng);
    REQUIRE(in_subquad_region(sq, p));
    const auto l = m.face_barycentric(face, p);
    REQUIRE(l[1] >= l[0] - 1e-12);
    REQUIRE(l[1] >= l[2] - 1e-12);
    sum += p;
    sum2 += Vec3{p.x * p.x, p.y * p.y, p.z * p.z};
    for (int b = 0; b < 4; ++b) {
      if (in_triangle(p, bins[b][0], bins[b][1], bins[b][2])) {
        ++counts[b];
        break;
      }
    }
  }
  const Vec3 mean = sum / n;
  const Vec3 c = sq.centroid();
  for (int k = 0; k < 3; ++k) {
    const double sigma = std::sqrt((sum2[k] / n - mean[k] * mean[k]) / n);
    CHECK(std::abs(mean[k] - c[k]) < 3.0 * sigma);
  }
  double chi2 = 0;
  for (int b = 0; b < 4; ++b) chi2 += std::pow(counts[b] - n * expected[b], 2) / (n * expected[b]);
  CHECK(chi2 < 11.345);  // p = 0.01 at 3 dof
}

TEST_CASE("mesh text round trip") {
  BoxSpec s;
  s.nx = 2;
  s.ny = 1;
  s.nz = 2;
  s.metal_thickness = 0.5;
  s.nz_metal = 1;
  const Mesh a = build_box_mesh(s);
  std::stringstream ss;
  write_mesh(ss, a);
  const Mesh b = read_mesh(ss);
  REQUIRE(b.num_cells() == a.num_cells());
  REQUIRE(b.num_faces() == a.num_faces());
  for (int c = 0; c < static_cast<int>(a.num_cells()); ++c) {
    CHECK(b.cell(c) == a.cell(c));
    CHECK(b.region(c) == a.region(c));
  }
  std::istringstream bad("fepic-mesh 1\nnodes 1\n0 0\n");
  CHECK_THROWS_AS(read_mesh(bad), Error);
}
