#include "fepic/surface.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "fepic/constants.hpp"

namespace fepic {

std::vector<double> face_charges(const Mesh& mesh, const CellVectorField& field) {
  const auto faces = mesh.faces_with_tag(BoundaryTag::Surface);
  std::vector<double> q(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const auto& f = mesh.face(faces[i]);
    q[i] = -constants::vacuum_permittivity * dot(field[f.tet], f.normal) * f.area;
  }
  return q;
}

std::vector<double> distribute_charges(std::span<const Vec3> centres, std::span<const double> charges,
                                       std::span<const Vec3> points, const DistributionParams& params) {
  if (!(params.cutoff_length > 0.0)) throw Error(ErrorKind::InvalidConfig, "cutoff length must be positive");
  if (centres.size() != charges.size()) throw Error(ErrorKind::InvalidConfig, "face centre/charge count mismatch");
  const double reach = params.cutoff_factor * params.cutoff_length;
  const long n_faces = static_cast<long>(centres.size());

  std::vector<std::vector<std::pair<int, double>>> shares(n_faces);
  std::vector<char> orphan(n_faces, 0);
#pragma omp parallel for schedule(dynamic, 32)
  for (long i = 0; i < n_faces; ++i) {
    auto& list = shares[i];
    double r_min = std::numeric_limits<double>::infinity();
    for (int j = 0; j < static_cast<int>(points.size()); ++j) {
      const double r = norm(points[j] - centres[i]);
      if (r <= reach) {
        list.emplace_back(j, r);
        r_min = std::min(r_min, r);
      }
    }
    if (list.empty()) {
      orphan[i] = 1;
      continue;
    }
    // shifting by the nearest distance cancels in the normalisation
    double sum = 0.0;
    for (auto& [j, w] : list) {
      w = std::exp(-(w - r_min) / params.cutoff_length);
      sum += w;
    }
    for (auto& e : list) e.second *= charges[i] / sum;
  }
  for (long i = 0; i < n_faces; ++i) {
    if (orphan[i]) throw Error(ErrorKind::OrphanFace, "surface face " + std::to_string(i) + " has no point in reach");
  }

  std::vector<double> q(points.size(), 0.0);
  for (const auto& list : shares) {
    for (const auto& [j, s] : list) q[j] += s;
  }
  return q;
}

std::vector<Vec3> point_forces(std::span<const Vec3> points, std::span<const double> charges,
                               std::span<const Vec3> field, const ForceParams& params) {
  if (points.size() != charges.size() || points.size() != field.size()) {
    throw Error(ErrorKind::InvalidConfig, "point, charge and field counts differ");
  }
  if (params.distance_power != 1 && params.distance_power != 2) {
    throw Error(ErrorKind::InvalidConfig, "distance power must be 1 or 2");
  }
  const double k = 1.0 / (4.0 * constants::pi * constants::vacuum_permittivity);
  const double r_cut = params.screening > 0.0 ? -std::log(params.cutoff_weight) / params.screening
                                              : std::numeric_limits<double>::infinity();
  const long n = static_cast<long>(points.size());
  std::vector<Vec3> f(n);
  bool coincident = false;
#pragma omp parallel for schedule(dynamic, 16) reduction(|| : coincident)
  for (long j = 0; j < n; ++j) {
    Vec3 sum = (0.5 * charges[j]) * field[j];
    for (long m = 0; m < n; ++m) {
      if (m == j) continue;
      const Vec3 d = points[j] - points[m];
      const double r = norm(d);
      if (r < params.min_separation) {
        coincident = true;
        continue;
      }
      if (r > r_cut) continue;
      const double rp = params.distance_power == 2 ? r * r : r;
      sum += (k * charges[j] * charges[m] * std::exp(-params.screening * r) / (rp * r)) * d;
    }
    f[j] = sum;
  }
  if (coincident) throw Error(ErrorKind::CoincidentPoints, "two surface points closer than the minimum separation");
  return f;
}

std::vector<Vec3> surface_field_at(const Mesh& mesh, const CellVectorField& field, std::span<const Vec3> points) {
  const auto faces = mesh.faces_with_tag(BoundaryTag::Surface);
  if (faces.empty()) throw Error(ErrorKind::InvalidConfig, "mesh has no Surface faces");
  std::vector<Vec3> out(points.size());
  const long n = static_cast<long>(points.size());
#pragma omp parallel for schedule(static)
  for (long j = 0; j < n; ++j) {
    int best = faces[0];
    double best_d = std::numeric_limits<double>::infinity();
    for (int fi : faces) {
      const double d = norm2(mesh.face(fi).centroid - points[j]);
      if (d < best_d) {
        best_d = d;
        best = fi;
      }
    }
    out[j] = field[mesh.face(best).tet];
  }
  return out;
}

std::vector<SurfacePoint> read_points(std::istream& in) {
  std::vector<SurfacePoint> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    SurfacePoint p;
    if (!(ls >> p.id >> p.r.x >> p.r.y >> p.r.z)) {
      throw Error(ErrorKind::Parse, "points line " + std::to_string(line_no) + ": expected 'id x y z'");
    }
    pts.push_back(p);
  }
  return pts;
}

std::vector<SurfacePoint> read_points_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open point file " + path);
  return read_points(in);
}

void write_points(std::ostream& out, std::span<const SurfacePoint> points) {
  const auto prec = out.precision(17);
  out << "# id x y z charge fx fy fz (SI)\n";
  for (const auto& p : points) {
    out << p.id << ' ' << p.r.x << ' ' << p.r.y << ' ' << p.r.z << ' ' << p.charge << ' ' << p.force.x << ' '
        << p.force.y << ' ' << p.force.z << '\n';
  }
  out.precision(prec);
}

}  // namespace fepic
