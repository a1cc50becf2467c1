#pragma once

#include <cmath>
#include <numbers>

namespace jpa {

/// SI constants used throughout. Values are stored exactly as written;
/// everything downstream derives from these three numbers.
struct PhysicalConstants {
  /// Single flux quantum, Wb.
  static constexpr double flux_quantum = 2.067833848e-15;
  /// Reduced flux quantum phi0 = Phi0 / 2*pi, Wb.
  static constexpr double reduced_flux_quantum = flux_quantum / (2.0 * std::numbers::pi);
  /// Reduced Planck constant, J*s.
  static constexpr double reduced_planck = 1.054571817e-34;
};

inline constexpr double kFluxQuantum = PhysicalConstants::flux_quantum;
inline constexpr double kReducedFluxQuantum = PhysicalConstants::reduced_flux_quantum;
inline constexpr double kReducedPlanck = PhysicalConstants::reduced_planck;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// dBm <-> watts. dBm appears only at CLI-facing boundaries; everything
/// internal is SI.
inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

/// GHz/MHz/kHz helpers for config ingestion (angular frequency in rad/s internally).
inline double ghz_to_rads(double f_ghz) { return kTwoPi * f_ghz * 1e9; }
inline double rads_to_ghz(double w) { return w / (kTwoPi * 1e9); }

}  // namespace jpa
