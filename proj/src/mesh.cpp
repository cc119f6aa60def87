#include "fepic/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace fepic {

namespace {

constexpr std::array<std::array<int, 3>, 4> kLocalFaces = {{
    {1, 2, 3},
    {0, 3, 2},
    {0, 1, 3},
    {0, 2, 1},
}};

std::array<int, 3> sorted(std::array<int, 3> a) {
  std::sort(a.begin(), a.end());
  return a;
}

struct FaceKey {
  std::array<int, 3> key;
  int cell;
  int local;
  bool operator<(const FaceKey& o) const {
    return key != o.key ? key < o.key : (cell != o.cell ? cell < o.cell : local < o.local);
  }
};

std::vector<FaceKey> collect_face_keys(std::span<const Tet> tets) {
  std::vector<FaceKey> keys;
  keys.reserve(tets.size() * 4);
  for (int c = 0; c < static_cast<int>(tets.size()); ++c) {
    for (int f = 0; f < 4; ++f) {
      const auto& lv = kLocalFaces[f];
      keys.push_back({sorted({tets[c][lv[0]], tets[c][lv[1]], tets[c][lv[2]]}), c, f});
    }
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::array<int, 3> oriented_face(const Tet& t, int local) {
  const auto& lv = kLocalFaces[local];
  return {t[lv[0]], t[lv[1]], t[lv[2]]};
}

}  // namespace

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Top: return "top";
    case BoundaryTag::Lateral: return "lateral";
    case BoundaryTag::Surface: return "surface";
    case BoundaryTag::MetalSide: return "metal_side";
    case BoundaryTag::MetalBottom: return "metal_bottom";
  }
  return "unknown";
}

BoundaryTag boundary_tag_from_int(int value) {
  if (value < 1 || value > kBoundaryTagCount) {
    throw Error(ErrorKind::InvalidConfig, "boundary tag out of range: " + std::to_string(value));
  }
  return static_cast<BoundaryTag>(value);
}

const std::array<int, 3>& local_face_vertices(int f) { return kLocalFaces[f]; }

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return dot(b - a, cross(c - a, d - a)) / 6.0;
}

std::vector<ExposedFace> exposed_faces(std::span<const Tet> tets, std::span<const Region> regions) {
  const auto keys = collect_face_keys(tets);
  std::vector<ExposedFace> out;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i + 1;
    while (j < keys.size() && keys[j].key == keys[i].key) ++j;
    if (j - i == 1) {
      out.push_back({oriented_face(tets[keys[i].cell], keys[i].local), keys[i].cell, kNoNeighbor});
    } else if (j - i == 2) {
      const auto& a = keys[i];
      const auto& b = keys[i + 1];
      if (regions[a.cell] != regions[b.cell]) {
        const auto& vac = regions[a.cell] == Region::Vacuum ? a : b;
        const auto& met = regions[a.cell] == Region::Vacuum ? b : a;
        out.push_back({oriented_face(tets[vac.cell], vac.local), vac.cell, met.cell});
      }
    } else {
      throw Error(ErrorKind::InvalidConfig, "face shared by more than two tets");
    }
    i = j;
  }
  return out;
}

Mesh::Mesh(std::vector<Vec3> nodes, std::vector<Tet> tets, std::vector<Region> regions,
           const std::vector<FaceSpec>& faces)
    : nodes_(std::move(nodes)), tets_(std::move(tets)), regions_(std::move(regions)) {
  if (nodes_.empty() || tets_.empty()) throw Error(ErrorKind::InvalidConfig, "empty mesh");
  if (regions_.empty()) regions_.assign(tets_.size(), Region::Vacuum);
  if (regions_.size() != tets_.size()) {
    throw Error(ErrorKind::InvalidConfig, "region count does not match tet count");
  }

  bounds_.lo = bounds_.hi = nodes_[0];
  for (const auto& p : nodes_) {
    for (int k = 0; k < 3; ++k) {
      bounds_.lo[k] = std::min(bounds_.lo[k], p[k]);
      bounds_.hi[k] = std::max(bounds_.hi[k], p[k]);
    }
  }
  char_length_ = norm(bounds_.extent());
  const double vol_eps = kVolumeEpsRel * char_length_ * char_length_ * char_length_;

  const int n_nodes = static_cast<int>(nodes_.size());
  const int n_cells = static_cast<int>(tets_.size());
  volumes_.resize(n_cells);
  gradients_.resize(n_cells);
  for (int c = 0; c < n_cells; ++c) {
    auto& t = tets_[c];
    for (int v : t) {
      if (v < 0 || v >= n_nodes) {
        throw Error(ErrorKind::InvalidConfig, "tet " + std::to_string(c) + " references missing node");
      }
    }
    double vol = signed_volume(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]], nodes_[t[3]]);
    if (std::abs(vol) < vol_eps) {
      throw Error(ErrorKind::DegenerateCell, "tet " + std::to_string(c) + " has volume " + std::to_string(vol));
    }
    if (vol < 0) {
      std::swap(t[2], t[3]);
      vol = -vol;
    }
    volumes_[c] = vol;

    // Rows of the inverse Jacobian are the gradients of lambda_1..3.
    const Vec3 e1 = nodes_[t[1]] - nodes_[t[0]];
    const Vec3 e2 = nodes_[t[2]] - nodes_[t[0]];
    const Vec3 e3 = nodes_[t[3]] - nodes_[t[0]];
    const double det = dot(e1, cross(e2, e3));
    auto& g = gradients_[c];
    g[1] = cross(e2, e3) / det;
    g[2] = cross(e3, e1) / det;
    g[3] = cross(e1, e2) / det;
    g[0] = -(g[1] + g[2] + g[3]);
  }

  // adjacency within a region
  neighbors_.assign(n_cells, {kNoNeighbor, kNoNeighbor, kNoNeighbor, kNoNeighbor});
  face_of_.assign(n_cells, {-1, -1, -1, -1});
  const auto keys = collect_face_keys(tets_);
  std::map<std::array<int, 3>, std::pair<int, int>> exposed;  // key -> (owner cell, local)
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i + 1;
    while (j < keys.size() && keys[j].key == keys[i].key) ++j;
    if (j - i > 2) throw Error(ErrorKind::InvalidConfig, "face shared by more than two tets");
    if (j - i == 2 && regions_[keys[i].cell] == regions_[keys[i + 1].cell]) {
      neighbors_[keys[i].cell][keys[i].local] = keys[i + 1].cell;
      neighbors_[keys[i + 1].cell][keys[i + 1].local] = keys[i].cell;
    }
    i = j;
  }

  // boundary faces: every exposed face must be listed exactly once
  std::map<std::array<int, 3>, BoundaryTag> tag_of;
  for (const auto& fs : faces) {
    for (int v : fs.nodes) {
      if (v < 0 || v >= n_nodes) throw Error(ErrorKind::InvalidConfig, "boundary face references missing node");
    }
    if (!tag_of.emplace(sorted(fs.nodes), fs.tag).second) {
      throw Error(ErrorKind::InvalidConfig, "boundary face listed twice");
    }
  }
  const auto exposed_list = exposed_faces(tets_, regions_);
  if (exposed_list.size() != tag_of.size()) {
    throw Error(ErrorKind::InvalidConfig,
                "boundary has " + std::to_string(exposed_list.size()) + " faces but " +
                    std::to_string(tag_of.size()) + " are tagged");
  }
  faces_.reserve(exposed_list.size());
  for (const auto& ef : exposed_list) {
    auto it = tag_of.find(sorted(ef.nodes));
    if (it == tag_of.end()) throw Error(ErrorKind::InvalidConfig, "untagged boundary face");
    BoundaryFace bf;
    bf.nodes = ef.nodes;
    bf.tet = ef.tet;
    bf.twin = ef.other;
    bf.tag = it->second;
    for (int f = 0; f < 4; ++f) {
      if (sorted(oriented_face(tets_[ef.tet], f)) == it->first) bf.local = f;
    }
    bf.nodes = oriented_face(tets_[ef.tet], bf.local);
    const Vec3& a = nodes_[bf.nodes[0]];
    const Vec3& b = nodes_[bf.nodes[1]];
    const Vec3& c = nodes_[bf.nodes[2]];
    const Vec3 n = cross(b - a, c - a);
    bf.area = 0.5 * norm(n);
    bf.normal = n / norm(n);
    bf.centroid = (a + b + c) / 3.0;
    const int index = static_cast<int>(faces_.size());
    face_of_[bf.tet][bf.local] = index;
    if (bf.twin != kNoNeighbor) {
      for (int f = 0; f < 4; ++f) {
        if (sorted(oriented_face(tets_[bf.twin], f)) == it->first) face_of_[bf.twin][f] = index;
      }
    }
    faces_by_tag_[static_cast<int>(bf.tag) - 1].push_back(index);
    faces_.push_back(bf);
  }

  // node -> incident cells
  node_cell_offsets_.assign(n_nodes + 1, 0);
  for (const auto& t : tets_) {
    for (int v : t) ++node_cell_offsets_[v + 1];
  }
  for (int n = 0; n < n_nodes; ++n) node_cell_offsets_[n + 1] += node_cell_offsets_[n];
  node_cell_list_.resize(node_cell_offsets_.back());
  std::vector<int> fill(node_cell_offsets_.begin(), node_cell_offsets_.end() - 1);
  for (int c = 0; c < n_cells; ++c) {
    for (int k = 0; k < 4; ++k) node_cell_list_[fill[tets_[c][k]]++] = c * 4 + k;
  }
}

Vec3 Mesh::centroid(int c) const {
  const auto& t = tets_[c];
  return (nodes_[t[0]] + nodes_[t[1]] + nodes_[t[2]] + nodes_[t[3]]) * 0.25;
}

bool Mesh::has_region(Region r) const {
  return std::find(regions_.begin(), regions_.end(), r) != regions_.end();
}

Barycentric Mesh::barycentric(const Vec3& p, int c) const {
  const auto& g = gradients_[c];
  const Vec3 d = p - nodes_[tets_[c][0]];
  const double l1 = dot(g[1], d);
  const double l2 = dot(g[2], d);
  const double l3 = dot(g[3], d);
  return {1.0 - l1 - l2 - l3, l1, l2, l3};
}

bool Mesh::contains(const Vec3& p, int c, double tol) const {
  const auto l = barycentric(p, c);
  return *std::min_element(l.begin(), l.end()) >= -tol;
}

LocateResult Mesh::locate_cell(const Vec3& p, int hint) const {
  const int n_cells = static_cast<int>(tets_.size());
  int c = (hint >= 0 && hint < n_cells) ? hint : 0;
  LocateResult res;
  for (int step = 0; step <= n_cells; ++step) {
    const auto l = barycentric(p, c);
    const int f = static_cast<int>(std::min_element(l.begin(), l.end()) - l.begin());
    res.steps = step;
    if (l[f] >= -kTolInside) {
      res.inside = true;
      res.cell = c;
      return res;
    }
    const int next = neighbors_[c][f];
    if (next == kNoNeighbor) {
      res.cell = c;
      res.exit_face = face_of_[c][f];
      res.exit_tag = faces_[res.exit_face].tag;
      return res;
    }
    c = next;
  }
#ifndef NDEBUG
  return locate_exhaustive(p);
#else
  throw Error(ErrorKind::LocateCycle, "point walk exceeded cell count; adjacency is broken");
#endif
}

LocateResult Mesh::locate_exhaustive(const Vec3& p) const {
  LocateResult res;
  for (int c = 0; c < static_cast<int>(tets_.size()); ++c) {
    if (contains(p, c)) {
      res.inside = true;
      res.cell = c;
      return res;
    }
  }
  return res;
}

SubQuad Mesh::subquad(int face, int corner) const {
  const auto& f = faces_[face];
  const Vec3& a = nodes_[f.nodes[corner]];
  const Vec3& b = nodes_[f.nodes[(corner + 1) % 3]];
  const Vec3& c = nodes_[f.nodes[(corner + 2) % 3]];
  SubQuad sq;
  sq.face = face;
  sq.corner = corner;
  sq.triangle = {a, b, c};
  sq.corners = {a, (a + b) * 0.5, (a + b + c) / 3.0, (a + c) * 0.5};
  return sq;
}

namespace {

TriBarycentric triangle_barycentric(const std::array<Vec3, 3>& tri, const Vec3& p) {
  const Vec3 v0 = tri[1] - tri[0];
  const Vec3 v1 = tri[2] - tri[0];
  const Vec3 v2 = p - tri[0];
  const double d00 = dot(v0, v0);
  const double d01 = dot(v0, v1);
  const double d11 = dot(v1, v1);
  const double d20 = dot(v2, v0);
  const double d21 = dot(v2, v1);
  const double denom = d00 * d11 - d01 * d01;
  const double lb = (d11 * d20 - d01 * d21) / denom;
  const double lc = (d00 * d21 - d01 * d20) / denom;
  return {1.0 - lb - lc, lb, lc};
}

}  // namespace

TriBarycentric Mesh::face_barycentric(int face, const Vec3& p) const {
  const auto& f = faces_[face];
  return triangle_barycentric({nodes_[f.nodes[0]], nodes_[f.nodes[1]], nodes_[f.nodes[2]]}, p);
}

double SubQuad::area() const {
  const Vec3& a = corners[0];
  return 0.5 * norm(cross(corners[1] - a, corners[2] - a)) + 0.5 * norm(cross(corners[2] - a, corners[3] - a));
}

Vec3 SubQuad::centroid() const {
  // area-weighted centroids of triangles ADO and AOF
  const Vec3& a = corners[0];
  const double s1 = 0.5 * norm(cross(corners[1] - a, corners[2] - a));
  const double s2 = 0.5 * norm(cross(corners[2] - a, corners[3] - a));
  const Vec3 c1 = (a + corners[1] + corners[2]) / 3.0;
  const Vec3 c2 = (a + corners[2] + corners[3]) / 3.0;
  return (c1 * s1 + c2 * s2) / (s1 + s2);
}

bool in_subquad_region(const SubQuad& sq, const Vec3& p) {
  const auto l = triangle_barycentric(sq.triangle, p);
  return l[0] >= l[1] && l[0] >= l[2];
}

MeshReport Mesh::check_invariants() const {
  MeshReport rep;
  rep.nodes = nodes_.size();
  rep.tets = tets_.size();
  const int n_cells = static_cast<int>(tets_.size());
  std::set<std::pair<int, int>> edges;
  std::set<std::array<int, 3>> all_faces;
  for (int c = 0; c < n_cells; ++c) {
    const auto& t = tets_[c];
    if (signed_volume(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]], nodes_[t[3]]) <= 0.0) {
      throw Error(ErrorKind::InvalidConfig, "tet " + std::to_string(c) + " is not positively oriented");
    }
    rep.volume += volumes_[c];
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) edges.insert({std::min(t[a], t[b]), std::max(t[a], t[b])});
    }
    for (int f = 0; f < 4; ++f) {
      all_faces.insert(sorted(oriented_face(t, f)));
      const int nb = neighbors_[c][f];
      if (nb != kNoNeighbor) {
        const auto& back = neighbors_[nb];
        if (std::find(back.begin(), back.end(), c) == back.end()) {
          throw Error(ErrorKind::InvalidConfig, "adjacency not symmetric at tet " + std::to_string(c));
        }
        if (regions_[nb] != regions_[c]) throw Error(ErrorKind::InvalidConfig, "adjacency crosses regions");
      } else if (face_of_[c][f] < 0) {
        throw Error(ErrorKind::InvalidConfig, "untagged boundary face on tet " + std::to_string(c));
      }
    }
  }
  for (int i = 0; i < static_cast<int>(faces_.size()); ++i) {
    const auto& f = faces_[i];
    if (face_of_[f.tet][f.local] != i) throw Error(ErrorKind::InvalidConfig, "face owner mismatch");
    const int t = static_cast<int>(f.tag) - 1;
    rep.tag_area[t] += f.area;
    ++rep.tag_faces[t];
    // outward: the opposite vertex lies behind the face plane
    const Vec3 opp = nodes_[tets_[f.tet][f.local]];
    if (dot(opp - f.centroid, f.normal) >= 0.0) throw Error(ErrorKind::InvalidConfig, "face normal points inward");
  }
  rep.edges = edges.size();
  rep.faces = all_faces.size();
  rep.euler_characteristic = static_cast<long>(rep.nodes) - static_cast<long>(rep.edges) +
                             static_cast<long>(rep.faces) - static_cast<long>(rep.tets);
  return rep;
}

// ---- structured meshes ----

std::vector<double> graded_coordinates(double length, int divisions, double ratio) {
  if (divisions <= 0) throw Error(ErrorKind::InvalidConfig, "divisions must be positive");
  if (!(length > 0.0)) throw Error(ErrorKind::InvalidConfig, "length must be positive");
  if (!(ratio > 0.0)) throw Error(ErrorKind::InvalidConfig, "grading ratio must be positive");
  std::vector<double> h(divisions);
  double total = 0.0;
  double s = 1.0;
  for (int i = 0; i < divisions; ++i) {
    h[i] = s;
    total += s;
    s *= ratio;
  }
  std::vector<double> xs(divisions + 1, 0.0);
  for (int i = 0; i < divisions; ++i) xs[i + 1] = xs[i] + h[i] * (length / total);
  xs[divisions] = length;
  return xs;
}

Mesh build_structured_mesh(std::span<const double> xs, std::span<const double> ys, std::span<const double> zs,
                           const std::function<Region(int, int, int)>& region_of) {
  const int nx = static_cast<int>(xs.size()) - 1;
  const int ny = static_cast<int>(ys.size()) - 1;
  const int nz = static_cast<int>(zs.size()) - 1;
  if (nx < 1 || ny < 1 || nz < 1) throw Error(ErrorKind::InvalidConfig, "zero divisions");
  auto node_id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };

  std::vector<Vec3> nodes;
  nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) nodes.emplace_back(xs[i], ys[j], zs[k]);

  // Six tets around the (0,0,0)-(1,1,1) diagonal; conforming across hexes.
  static constexpr std::array<std::array<int, 3>, 6> perms = {{
      {1, 2, 4}, {1, 4, 2}, {2, 1, 4}, {2, 4, 1}, {4, 1, 2}, {4, 2, 1},
  }};
  std::vector<Tet> tets;
  std::vector<Region> regions;
  tets.reserve(static_cast<std::size_t>(nx) * ny * nz * 6);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const Region r = region_of(i, j, k);
        auto corner = [&](int bits) { return node_id(i + (bits & 1), j + ((bits >> 1) & 1), k + ((bits >> 2) & 1)); };
        for (const auto& p : perms) {
          Tet t = {corner(0), corner(p[0]), corner(p[0] | p[1]), corner(7)};
          if (signed_volume(nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]) < 0) std::swap(t[2], t[3]);
          tets.push_back(t);
          regions.push_back(r);
        }
      }
    }
  }

  const double tol = 1e-9 * std::max({xs.back() - xs.front(), ys.back() - ys.front(), zs.back() - zs.front()});
  std::vector<FaceSpec> faces;
  for (const auto& ef : exposed_faces(tets, regions)) {
    const Vec3 c = (nodes[ef.nodes[0]] + nodes[ef.nodes[1]] + nodes[ef.nodes[2]]) / 3.0;
    const bool metal = regions[ef.tet] == Region::Metal;
    BoundaryTag tag;
    if (ef.other != kNoNeighbor) {
      tag = BoundaryTag::Surface;
    } else if (std::abs(c.z - zs.back()) < tol) {
      tag = metal ? BoundaryTag::Surface : BoundaryTag::Top;
    } else if (std::abs(c.z - zs.front()) < tol) {
      tag = metal ? BoundaryTag::MetalBottom : BoundaryTag::Surface;
    } else {
      tag = metal ? BoundaryTag::MetalSide : BoundaryTag::Lateral;
    }
    faces.push_back({ef.nodes, tag});
  }
  return Mesh(std::move(nodes), std::move(tets), std::move(regions), faces);
}

Mesh build_box_mesh(const BoxSpec& spec) {
  if (spec.nx <= 0 || spec.ny <= 0 || spec.nz <= 0) throw Error(ErrorKind::InvalidConfig, "zero divisions");
  if (!(spec.width > 0 && spec.depth > 0 && spec.gap > 0)) {
    throw Error(ErrorKind::InvalidConfig, "box dimensions must be positive");
  }
  const auto xs = graded_coordinates(spec.width, spec.nx, 1.0);
  const auto ys = graded_coordinates(spec.depth, spec.ny, 1.0);
  std::vector<double> zs;
  int k_metal = 0;
  if (spec.metal_thickness > 0.0) {
    if (spec.nz_metal <= 0) throw Error(ErrorKind::InvalidConfig, "metal slab needs nz_metal > 0");
    const auto zm = graded_coordinates(spec.metal_thickness, spec.nz_metal, 1.0);
    for (int k = spec.nz_metal; k > 0; --k) zs.push_back(-zm[k]);
    k_metal = spec.nz_metal;
  }
  const auto zv = graded_coordinates(spec.gap, spec.nz, spec.z_grading);
  zs.insert(zs.end(), zv.begin(), zv.end());
  return build_structured_mesh(xs, ys, zs, [k_metal](int, int, int k) {
    return k < k_metal ? Region::Metal : Region::Vacuum;
  });
}

Mesh build_post_mesh(const PostSpec& s) {
  if (!(s.width > s.post_width && s.post_width > 0 && s.post_height > 0 && s.base_thickness > 0 && s.gap > 0)) {
    throw Error(ErrorKind::InvalidConfig, "post dimensions must be positive and the post narrower than the domain");
  }
  const double side = 0.5 * (s.width - s.post_width);
  const auto outer = graded_coordinates(side, s.n_side, s.grading);
  const auto across = graded_coordinates(s.post_width, s.n_post, 1.0);
  std::vector<double> xs;
  for (int i = s.n_side; i >= 0; --i) xs.push_back(side - outer[i]);
  for (int i = 1; i <= s.n_post; ++i) xs.push_back(side + across[i]);
  for (int i = 1; i <= s.n_side; ++i) xs.push_back(side + s.post_width + outer[i]);

  std::vector<double> zs;
  const auto zb = graded_coordinates(s.base_thickness, s.nz_base, 1.0);
  for (int k = s.nz_base; k > 0; --k) zs.push_back(-zb[k]);
  const auto zp = graded_coordinates(s.post_height, s.nz_post, 1.0);
  zs.insert(zs.end(), zp.begin(), zp.end());
  const auto zg = graded_coordinates(s.gap, s.nz_gap, s.grading);
  for (int k = 1; k <= s.nz_gap; ++k) zs.push_back(s.post_height + zg[k]);

  const int lo = s.n_side, hi = s.n_side + s.n_post;
  const int k_base = s.nz_base, k_top = s.nz_base + s.nz_post;
  return build_structured_mesh(xs, xs, zs, [=](int i, int j, int k) {
    const bool in_post = i >= lo && i < hi && j >= lo && j < hi && k < k_top;
    return (k < k_base || in_post) ? Region::Metal : Region::Vacuum;
  });
}

Mesh build_box_mesh(double width, double depth, double gap, int divisions) {
  BoxSpec spec;
  spec.width = width;
  spec.depth = depth;
  spec.gap = gap;
  spec.nx = spec.ny = spec.nz = divisions;
  return build_box_mesh(spec);
}

}  // namespace fepic
