#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fepic/fem.hpp"
#include "fepic/mesh.hpp"

namespace fepic {

struct SurfacePoint {
  std::uint64_t id = 0;
  Vec3 r;
  double charge = 0.0;  // C
  Vec3 force;           // N
};

// Q_i = eps0 (E . n) A_i for every Surface face, with n the conductor normal
// (pointing into the vacuum) and E the field of the vacuum-side cell.
// Ordered as mesh.faces_with_tag(Surface).
std::vector<double> face_charges(const Mesh& mesh, const CellVectorField& field);

struct DistributionParams {
  double cutoff_length = 1e-10;  // r_c, m
  // Points farther than cutoff_factor * r_c from a face centroid get no weight.
  double cutoff_factor = 30.0;
};

// q_j = sum_i w_ij Q_i with w_ij = exp(-r_ij / r_c) / sum_j exp(-r_ij / r_c).
// `centres` and `charges` describe the faces. Returns the per-point charges;
// throws OrphanFace when a face has no point within reach.
std::vector<double> distribute_charges(std::span<const Vec3> centres, std::span<const double> charges,
                                       std::span<const Vec3> points, const DistributionParams& params = {});

inline constexpr double kScreeningCu = 0.6809e10;  // 1/m
inline constexpr double kMinSeparation = 0.1e-10;  // m

struct ForceParams {
  double screening = kScreeningCu;  // xi, 1/m
  // Power of r in the screened Coulomb denominator; 2 is Coulomb's law at
  // xi -> 0, 1 reproduces the literal single-power form.
  int distance_power = 2;
  // Pairs with exp(-xi r) below this are skipped.
  double cutoff_weight = 1e-8;
  double min_separation = kMinSeparation;
};

// F_j = q_j E_j / 2 + 1/(4 pi eps0) sum_k q_j q_k exp(-xi r_jk) / r_jk^p r_hat_jk,
// with r_hat_jk pointing from k to j. `field` holds E at each point.
std::vector<Vec3> point_forces(std::span<const Vec3> points, std::span<const double> charges,
                               std::span<const Vec3> field, const ForceParams& params = {});

// Field of the vacuum cell behind the Surface face nearest to each point.
std::vector<Vec3> surface_field_at(const Mesh& mesh, const CellVectorField& field, std::span<const Vec3> points);

// Plain-text point records "id x y z" (metres) in; "id x y z q fx fy fz" out.
std::vector<SurfacePoint> read_points(std::istream& in);
std::vector<SurfacePoint> read_points_file(const std::string& path);
void write_points(std::ostream& out, std::span<const SurfacePoint> points);

}  // namespace fepic
