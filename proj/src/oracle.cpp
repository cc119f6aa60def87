#include "fepic/oracle.hpp"

#include <array>
#include <cmath>

#include "fepic/constants.hpp"
#include "fepic/error.hpp"

namespace fepic::oracle {

namespace {

using namespace constants;

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                            0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};

template <class F>
double composite_gauss(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += kGlWeights[i] * f(mid + 0.5 * h * kGlNodes[i]);
    sum += 0.5 * h * s;
  }
  return sum;
}

double space_charge_coefficient(double j) {
  return 4.0 * (j / vacuum_permittivity) * std::sqrt(electron_mass / (2.0 * elementary_charge));
}

}  // namespace

double child_langmuir(double voltage, double gap) {
  if (!(gap > 0.0)) throw Error(ErrorKind::InvalidConfig, "gap must be positive");
  if (voltage <= 0.0) return 0.0;
  return (4.0 * vacuum_permittivity / 9.0) * std::sqrt(2.0 * elementary_charge / electron_mass) *
         std::pow(voltage, 1.5) / (gap * gap);
}

double gap_for(double cathode_field, double current_density, double voltage, const IntegrationOptions& opts) {
  if (voltage <= 0.0) return 0.0;
  const double k = space_charge_coefficient(current_density);
  const double e2 = cathode_field * cathode_field;
  // phi = u^4 removes the square-root behaviour at the cathode:
  // dphi / E = 4 u^3 du / sqrt(E_c^2 + k u^2)
  auto integrand = [&](double u) {
    const double den = std::sqrt(e2 + k * u * u);
    return den > 0.0 ? 4.0 * u * u * u / den : 0.0;
  };
  const double upper = std::pow(voltage, 0.25);
  if (opts.fixed_panels > 0) return composite_gauss(integrand, 0.0, upper, opts.fixed_panels);
  int panels = opts.initial_panels;
  double prev = composite_gauss(integrand, 0.0, upper, panels);
  while (panels < opts.max_panels) {
    panels *= 2;
    const double next = composite_gauss(integrand, 0.0, upper, panels);
    if (std::abs(next - prev) <= opts.rel_tol * std::abs(next)) return next;
    prev = next;
  }
  return prev;
}

double cathode_field_for(double current_density, double voltage, double gap, const IntegrationOptions& opts) {
  const double vacuum_field = voltage / gap;
  if (current_density <= 0.0) return vacuum_field;
  if (gap_for(0.0, current_density, voltage, opts) <= gap) return 0.0;
  // gap_for decreases monotonically in the cathode field
  double lo = 0.0;
  double hi = vacuum_field;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * vacuum_field; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gap_for(mid, current_density, voltage, opts) > gap) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

IvPoint semianalytic_iv(const DiodeSpec& spec, const EmitterMaterial& mat, const IterationOptions& opts) {
  EmitterMaterial m = mat;
  m.work_function_ev = spec.work_function_ev;
  const double temperature = spec.temperature;
  return semianalytic_iv(spec, [m, temperature](double f) { return current_density(f, temperature, m); }, opts);
}

IvPoint semianalytic_iv(const DiodeSpec& spec, const EmissionLaw& emission, const IterationOptions& opts) {
  if (!(spec.gap > 0.0)) throw Error(ErrorKind::InvalidConfig, "gap must be positive");
  if (spec.voltage < 0.0) throw Error(ErrorKind::InvalidConfig, "voltage must be non-negative");

  IvPoint pt;
  pt.voltage = spec.voltage;
  pt.child_langmuir = child_langmuir(spec.voltage, spec.gap);
  pt.cathode_field = spec.voltage / spec.gap;
  if (spec.voltage == 0.0) return pt;

  auto emitted = [&](double j) {
    return emission(cathode_field_for(j, spec.voltage, spec.gap, opts.integration));
  };

  // h(J) = J_FN(E_c(J)) - J decreases in J; the root lies in [0, min(J_FN(V/d), J_CL)].
  double lo = 0.0;
  double hi = std::min(emission(pt.cathode_field), pt.child_langmuir);
  double j = hi;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const double g = emitted(j);
    if (g > j) {
      lo = j;
    } else {
      hi = j;
    }
    double next = j + opts.damping * (g - j);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double change = std::abs(next - j);
    j = next;
    pt.iterations = it;
    if (change <= opts.rel_tol * j || hi - lo <= opts.rel_tol * j) {
      pt.current_density = j;
      pt.cathode_field = cathode_field_for(j, spec.voltage, spec.gap, opts.integration);
      return pt;
    }
  }
  throw NoConvergence("diode fixed point did not converge at V = " + std::to_string(spec.voltage) +
                          ", last J = " + std::to_string(j),
                      0.0, opts.max_iter);
}

std::vector<IvPoint> sweep(const DiodeSpec& base, const std::vector<double>& voltages, const EmitterMaterial& mat,
                           const IterationOptions& opts) {
  std::vector<IvPoint> out(voltages.size());
  const long n = static_cast<long>(voltages.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    DiodeSpec s = base;
    s.voltage = voltages[i];
    out[i] = semianalytic_iv(s, mat, opts);
  }
  return out;
}

}  // namespace fepic::oracle
