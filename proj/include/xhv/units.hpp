#pragma once

// Physical constants and unit conversions. Internal units are SI
// (Pa, m, kg, s); boundary IO uses the vacuum-engineering units
// mbar, l/s and mbar l s^-1 cm^-2.

namespace xhv {

inline constexpr double k_boltzmann = 1.380649e-23;     // J/K
inline constexpr double k_boltzmann_ev = 8.617333262e-5;  // eV/K
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double epsilon0 = 8.8541878128e-12;    // F/m
inline constexpr double amu = 1.66053906660e-27;        // kg
inline constexpr double ev_to_joule = 1.602176634e-19;

inline constexpr double mbar_to_pa = 100.0;
inline constexpr double pa_to_mbar = 1.0 / mbar_to_pa;

// 1 mbar l = 0.1 Pa m^3
inline constexpr double mbar_l_to_pa_m3 = 0.1;

// Specific outgassing: 1 mbar l s^-1 cm^-2 = 0.1 Pa m^3/s per 1e-4 m^2
inline constexpr double q_mbar_l_cm2_to_si = mbar_l_to_pa_m3 / 1.0e-4;  // Pa m/s
inline constexpr double q_si_to_mbar_l_cm2 = 1.0 / q_mbar_l_cm2_to_si;

// Pumping speed: 1 l/s = 1e-3 m^3/s
inline constexpr double ls_to_m3s = 1.0e-3;
inline constexpr double m3s_to_ls = 1.0e3;

inline constexpr double inch = 0.0254;  // m

// Mean thermal speed sqrt(8 kT / (pi m)) in m/s.
double mean_speed(double mass_kg, double temperature_k);

}  // namespace xhv
