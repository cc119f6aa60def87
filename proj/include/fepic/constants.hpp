#pragma once

// CODATA 2018 values, SI units.
namespace fepic::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double electron_mass = 9.1093837015e-31;      // kg
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double planck = 6.62607015e-34;                // J s
inline constexpr double hbar = planck / (2.0 * pi);             // J s
inline constexpr double boltzmann = 1.380649e-23;               // J/K

}  // namespace fepic::constants
