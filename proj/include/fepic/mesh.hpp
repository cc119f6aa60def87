#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fepic/error.hpp"
#include "fepic/vec3.hpp"

namespace fepic {

enum class Region : std::uint8_t { Vacuum = 1, Metal = 2 };

// Boundary regions of the simulation domain:
//   Top         far-field / anode plane above the vacuum
//   Lateral     vacuum side walls (periodic for particles)
//   Surface     metal-vacuum interface, the emitting cathode surface
//   MetalSide   metal side walls
//   MetalBottom bottom of the metal, held at ambient temperature and zero potential
enum class BoundaryTag : std::uint8_t {
  Top = 1,
  Lateral = 2,
  Surface = 3,
  MetalSide = 4,
  MetalBottom = 5,
};
inline constexpr int kBoundaryTagCount = 5;

const char* to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_int(int value);

inline constexpr int kNoNeighbor = -1;
// Barycentric tolerance for "inside" tests.
inline constexpr double kTolInside = 1e-10;
// Degenerate-volume threshold relative to (characteristic length)^3.
inline constexpr double kVolumeEpsRel = 1e-18;

using Tet = std::array<int, 4>;
using Barycentric = std::array<double, 4>;
using TriBarycentric = std::array<double, 3>;

struct FaceSpec {
  std::array<int, 3> nodes;
  BoundaryTag tag;
};

struct BoundaryFace {
  // Ordered so that (n1 - n0) x (n2 - n0) points out of `tet`.
  std::array<int, 3> nodes;
  int tet = -1;    // owner; the vacuum-side tet for interface faces
  int local = -1;  // local index of the face in the owner (the opposite vertex)
  int twin = -1;   // metal-side tet of an interface face
  BoundaryTag tag = BoundaryTag::Top;
  Vec3 normal;     // unit, outward from the owner
  Vec3 centroid;
  double area = 0.0;
};

struct LocateResult {
  bool inside = false;
  int cell = -1;       // containing cell, or the last cell visited before leaving
  int exit_face = -1;  // boundary face crossed when outside
  BoundaryTag exit_tag = BoundaryTag::Top;
  int steps = 0;
};

// One of the three quadrangles a surface triangle splits into: triangle
// vertex A, midpoint D of edge AB, centroid O, midpoint F of edge AC.
struct SubQuad {
  int face = -1;
  int corner = 0;
  std::array<Vec3, 4> corners;  // A, D, O, F
  std::array<Vec3, 3> triangle; // the owning triangle, rotated so A comes first

  double area() const;
  Vec3 centroid() const;
};

struct Bounds {
  Vec3 lo;
  Vec3 hi;
  Vec3 extent() const { return hi - lo; }
};

struct MeshReport {
  std::size_t nodes = 0;
  std::size_t tets = 0;
  std::size_t edges = 0;
  std::size_t faces = 0;
  long euler_characteristic = 0;
  double volume = 0.0;
  std::array<double, kBoundaryTagCount> tag_area{};
  std::array<std::size_t, kBoundaryTagCount> tag_faces{};
};

// Immutable tetrahedral mesh. Cells are positively oriented on construction;
// adjacency is kept per region so a walk never crosses the metal-vacuum
// interface.
class Mesh {
 public:
  Mesh(std::vector<Vec3> nodes, std::vector<Tet> tets, std::vector<Region> regions,
       const std::vector<FaceSpec>& faces);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_cells() const { return tets_.size(); }
  std::size_t num_faces() const { return faces_.size(); }

  const Vec3& node(int i) const { return nodes_[i]; }
  std::span<const Vec3> nodes() const { return nodes_; }
  const Tet& cell(int c) const { return tets_[c]; }
  std::span<const Tet> cells() const { return tets_; }
  Region region(int c) const { return regions_[c]; }
  double volume(int c) const { return volumes_[c]; }
  Vec3 centroid(int c) const;
  // Gradients of the four barycentric coordinates (P1 shape functions).
  const std::array<Vec3, 4>& gradients(int c) const { return gradients_[c]; }
  int neighbor(int c, int local) const { return neighbors_[c][local]; }
  int boundary_face(int c, int local) const { return face_of_[c][local]; }

  const BoundaryFace& face(int f) const { return faces_[f]; }
  std::span<const BoundaryFace> faces() const { return faces_; }
  std::span<const int> faces_with_tag(BoundaryTag tag) const {
    return faces_by_tag_[static_cast<int>(tag) - 1];
  }
  bool has_region(Region r) const;

  // Incident (cell, local vertex) pairs of a node, packed as cell * 4 + local.
  std::span<const int> node_cells(int n) const {
    return {node_cell_list_.data() + node_cell_offsets_[n],
            node_cell_list_.data() + node_cell_offsets_[n + 1]};
  }

  const Bounds& bounds() const { return bounds_; }
  double characteristic_length() const { return char_length_; }

  Barycentric barycentric(const Vec3& p, int c) const;
  bool contains(const Vec3& p, int c, double tol = kTolInside) const;

  // Walk from `hint` through the face with the most negative barycentric
  // coordinate until the point is inside or a boundary face is crossed.
  LocateResult locate_cell(const Vec3& p, int hint) const;
  LocateResult locate_exhaustive(const Vec3& p) const;

  SubQuad subquad(int face, int corner) const;
  TriBarycentric face_barycentric(int face, const Vec3& p) const;

  // Throws Error(InvalidConfig) on a violated invariant.
  MeshReport check_invariants() const;

 private:
  std::vector<Vec3> nodes_;
  std::vector<Tet> tets_;
  std::vector<Region> regions_;
  std::vector<double> volumes_;
  std::vector<std::array<Vec3, 4>> gradients_;
  std::vector<std::array<int, 4>> neighbors_;
  std::vector<std::array<int, 4>> face_of_;
  std::vector<BoundaryFace> faces_;
  std::array<std::vector<int>, kBoundaryTagCount> faces_by_tag_;
  std::vector<int> node_cell_offsets_;
  std::vector<int> node_cell_list_;
  Bounds bounds_;
  double char_length_ = 0.0;
};

// Vertex indices of local face `f` (opposite vertex f), ordered so the normal
// of a positively oriented tet points outward.
const std::array<int, 3>& local_face_vertices(int f);

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

// Faces that bound a region: unmatched faces plus faces between cells of
// different regions (reported once, oriented out of the vacuum cell).
struct ExposedFace {
  std::array<int, 3> nodes;
  int tet;
  int other;  // cell across, or kNoNeighbor
};
std::vector<ExposedFace> exposed_faces(std::span<const Tet> tets, std::span<const Region> regions);

// Uniform point on a sub-quadrangle: draw in parallelogram A + r1 AD + r2 AF
// and reject until the point falls in ADOF (lambda_A >= lambda_B and
// lambda_A >= lambda_C on the owning triangle).
template <class Rng>
Vec3 sample_point_in_subquad(const SubQuad& sq, Rng& rng);

bool in_subquad_region(const SubQuad& sq, const Vec3& p);

// Tensor-product grid split into six tets per hexahedron. `region_of(i, j, k)`
// assigns each hexahedron to vacuum or metal. Boundary tags follow position:
// z_max faces are Top (vacuum) or Surface (metal); z_min faces are Surface
// (vacuum) or MetalBottom (metal); side faces are Lateral or MetalSide; faces
// between regions are Surface.
Mesh build_structured_mesh(std::span<const double> xs, std::span<const double> ys,
                           std::span<const double> zs,
                           const std::function<Region(int, int, int)>& region_of);

struct BoxSpec {
  double width = 1.0;
  double depth = 1.0;
  double gap = 1.0;
  int nx = 1;
  int ny = 1;
  int nz = 1;
  // Ratio between successive z spacings in the vacuum; > 1 refines near the cathode.
  double z_grading = 1.0;
  // Optional metal slab under the cathode plane.
  double metal_thickness = 0.0;
  int nz_metal = 0;
};

// Box spanning [0,width] x [0,depth] x [0,gap]; the cathode plane is z = 0.
Mesh build_box_mesh(const BoxSpec& spec);
Mesh build_box_mesh(double width, double depth, double gap, int divisions);

// Square metal post standing on a metal base, with vacuum above and around it.
// The domain spans [0, width]^2 laterally, the base [-base_thickness, 0], the
// post [0, post_height] and the vacuum up to post_height + gap.
struct PostSpec {
  double width = 20.0;
  double post_width = 4.0;
  double post_height = 10.0;
  double base_thickness = 4.0;
  double gap = 20.0;
  int n_side = 4;     // cells on each side of the post, graded toward it
  int n_post = 4;     // cells across the post
  int nz_base = 2;
  int nz_post = 8;
  int nz_gap = 10;    // graded toward the post top
  double grading = 1.25;
};

Mesh build_post_mesh(const PostSpec& spec);

// Graded node coordinates from 0 to `length`, first spacing smallest when ratio > 1.
std::vector<double> graded_coordinates(double length, int divisions, double ratio);

// Plain-text mesh format:
//   fepic-mesh 1
//   length_unit <metres per file unit>     (optional, default 1)
//   nodes <N>      then N lines "x y z"
//   tets <M>       then M lines "a b c d [region]"  (region 1 vacuum, 2 metal)
//   faces <K>      then K lines "a b c tag"         (tag 1..5)
// '#' starts a comment.
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh_file(const std::string& path, const Mesh& mesh);

// ---- template implementation ----

template <class Rng>
Vec3 sample_point_in_subquad(const SubQuad& sq, Rng& rng) {
  const Vec3& a = sq.corners[0];
  const Vec3 ad = sq.corners[1] - a;
  const Vec3 af = sq.corners[3] - a;
  while (true) {
    const double r1 = rng.uniform();
    const double r2 = rng.uniform();
    const Vec3 p = a + r1 * ad + r2 * af;
    if (in_subquad_region(sq, p)) return p;
  }
}

}  // namespace fepic
