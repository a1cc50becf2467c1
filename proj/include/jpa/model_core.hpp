#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "jpa/constants.hpp"

namespace jpa {

/// Lumped-element description of the device: a single Josephson junction
/// shunted by C, coupled through C_co to a matched line of impedance Zc.
struct CircuitParams {
  double junction_critical_current = 0.0;  // Ic, A
  double shunt_capacitance = 0.0;          // C, F
  double coupling_capacitance = 0.0;       // C_co, F
  double line_impedance = 0.0;             // Zc, ohm

  void validate() const {
    if (!(junction_critical_current > 0.0) || !(shunt_capacitance > 0.0) ||
        !(coupling_capacitance > 0.0) || !(line_impedance > 0.0)) {
      throw std::domain_error("CircuitParams: all fields must be strictly positive");
    }
  }
};

/// Input-output-theory description of the same device. All rates are
/// angular (rad/s); gamma1/gamma2 are HWHM linewidths.
struct QuantumParams {
  double resonance_omega0 = 0.0;      // omega0
  double kerr_K = 0.0;                // per-photon shift, sign-carrying (negative here)
  double gamma1 = 0.0;                // coupling linewidth
  double gamma2 = 0.0;                // internal-loss linewidth
  double shifted_omega0_tilde = 0.0;  // omega0 + K

  QuantumParams() = default;
  QuantumParams(double omega0, double kerr, double g1, double g2)
      : resonance_omega0(omega0),
        kerr_K(kerr),
        gamma1(g1),
        gamma2(g2),
        shifted_omega0_tilde(omega0 + kerr) {
    if (!(gamma1 > 0.0)) throw std::domain_error("QuantumParams: gamma1 must be > 0");
    if (gamma2 < 0.0) throw std::domain_error("QuantumParams: gamma2 must be >= 0");
    if (!(resonance_omega0 > 0.0)) throw std::domain_error("QuantumParams: omega0 must be > 0");
  }
};

inline double fold_phase(double phase) {
  // fold into [-pi, pi)
  double p = std::remainder(phase, kTwoPi);
  if (p >= std::numbers::pi) p -= kTwoPi;
  if (p < -std::numbers::pi) p += kTwoPi;
  return p;
}

/// One drive tone. Unit contract: in the quantum engine `amplitude` is
/// sqrt(photon flux) [1/sqrt(s)]; in the circuit engine it is a source
/// current amplitude [A], i(t) = amplitude * sin(omega t + phase).
/// Conversions between the two go through map_power_to_flux /
/// map_current_to_power only.
struct DriveTone {
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;

  DriveTone() = default;
  DriveTone(double amp, double omega_, double phase_ = 0.0)
      : amplitude(amp), omega(omega_), phase(fold_phase(phase_)) {
    if (amplitude < 0.0) throw std::domain_error("DriveTone: amplitude must be >= 0");
    if (!(omega > 0.0)) throw std::domain_error("DriveTone: omega must be > 0");
  }
};

struct JunctionParams {
  double inductance = 0.0;  // L_J = phi0/Ic, H
  double energy = 0.0;      // E_J = phi0*Ic, J
};

struct LinearResonator {
  double omega0 = 0.0;   // 1/sqrt(L_J C), rad/s
  double z0 = 0.0;       // sqrt(L_J/C), ohm
  double phi_zpf = 0.0;  // sqrt(hbar Z0 / 2), Wb
};

/// Small-amplitude junction parameters from the critical current.
inline JunctionParams derive_junction(double critical_current) {
  if (!(critical_current > 0.0)) {
    throw std::domain_error("derive_junction: Ic must be > 0");
  }
  JunctionParams j;
  j.inductance = kReducedFluxQuantum / critical_current;
  j.energy = kReducedFluxQuantum * critical_current;
  return j;
}

/// Bare LC mode of the junction inductance against a capacitance.
inline LinearResonator derive_linear_resonator(double capacitance, double inductance) {
  if (!(capacitance > 0.0) || !(inductance > 0.0)) {
    throw std::domain_error("derive_linear_resonator: C and L_J must be > 0");
  }
  LinearResonator r;
  r.omega0 = 1.0 / std::sqrt(inductance * capacitance);
  r.z0 = std::sqrt(inductance / capacitance);
  r.phi_zpf = std::sqrt(kReducedPlanck * r.z0 / 2.0);
  return r;
}

/// Per-photon Kerr shift from normal-ordering the quartic term of the
/// cosine expansion: K = -(E_J / 2 hbar) * (2 pi Phi_zpf / Phi0)^4.
/// Always negative (softening nonlinearity of a single junction).
inline double kerr_coefficient(double junction_energy, double phi_zpf) {
  if (!(junction_energy > 0.0) || !(phi_zpf > 0.0)) {
    throw std::domain_error("kerr_coefficient: inputs must be > 0");
  }
  const double participation = phi_zpf / kReducedFluxQuantum;  // = 2*pi*Phi_zpf/Phi0
  const double p2 = participation * participation;
  return -(junction_energy / (2.0 * kReducedPlanck)) * p2 * p2;
}

/// Photon flux (photons/s) carried by power P at carrier omega.
/// The drive amplitude used by the quantum engine is sqrt of this.
inline double map_power_to_flux(double watts, double omega) {
  if (watts < 0.0) throw std::domain_error("map_power_to_flux: P must be >= 0");
  if (!(omega > 0.0)) throw std::domain_error("map_power_to_flux: omega must be > 0");
  return watts / (kReducedPlanck * omega);
}

inline double map_flux_to_power(double flux, double omega) {
  if (flux < 0.0) throw std::domain_error("map_flux_to_power: flux must be >= 0");
  if (!(omega > 0.0)) throw std::domain_error("map_flux_to_power: omega must be > 0");
  return flux * kReducedPlanck * omega;
}

/// Power available from a Norton source of amplitude A (peak) behind Zc:
/// P = Zc A^2 / 8. This is the incident-wave power on the matched line.
inline double map_current_to_power(double current_amp, double zc) {
  if (current_amp < 0.0 || !(zc > 0.0)) {
    throw std::domain_error("map_current_to_power: need A >= 0, Zc > 0");
  }
  return zc * current_amp * current_amp / 8.0;
}

inline double map_power_to_current(double watts, double zc) {
  if (watts < 0.0 || !(zc > 0.0)) {
    throw std::domain_error("map_power_to_current: need P >= 0, Zc > 0");
  }
  return std::sqrt(8.0 * watts / zc);
}

/// Fitted linear-response characterization (from experiments::extract_resonance).
struct FittedResonance {
  double omega0 = 0.0;  // rad/s
  double gamma = 0.0;   // HWHM, rad/s
};

/// Circuit -> input-output-theory mapping. When a fitted {omega0, gamma}
/// is supplied it is passed through bit-exactly (preferred); otherwise the
/// analytic estimates are used: omega0 ~ 1/sqrt(L_J (C + C_co)) and
/// gamma1 ~ omega0^2 C_co^2 Zc / (2 (C + C_co)). gamma2 = 0: the only
/// dissipation in this circuit is the matched line, which is the coupling
/// port. The Kerr coefficient always comes from the effective capacitance.
inline QuantumParams map_circuit_to_quantum(const CircuitParams& cp,
                                            std::optional<FittedResonance> fitted = {}) {
  cp.validate();
  const JunctionParams j = derive_junction(cp.junction_critical_current);
  const double c_eff = cp.shunt_capacitance + cp.coupling_capacitance;
  const LinearResonator res = derive_linear_resonator(c_eff, j.inductance);
  const double kerr = kerr_coefficient(j.energy, res.phi_zpf);

  double omega0 = res.omega0;
  double gamma1 = omega0 * omega0 * cp.coupling_capacitance * cp.coupling_capacitance *
                  cp.line_impedance / (2.0 * c_eff);
  if (fitted) {
    omega0 = fitted->omega0;
    gamma1 = fitted->gamma;
  }
  return QuantumParams(omega0, kerr, gamma1, /*gamma2=*/0.0);
}

}  // namespace jpa
