#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "jpa/cubic.hpp"
#include "jpa/errors.hpp"
#include "jpa/model_core.hpp"

namespace jpa {

/// Solved pump steady state. N solves
///   K^2 N^3 + 2 (w0-wp) K N^2 + [(w0-wp)^2 + (g1+g2)^2] N = 2 g1 p_in^2
/// and psi_B is the phase of the intracavity pump field.
struct PumpOperatingPoint {
  double photon_number = 0.0;      // N, photons
  double intracavity_phase = 0.0;  // psi_B, rad
  bool stable = true;
  int branch_index = 0;  // 0 = low, 1 = middle (always unstable), 2 = high
  bool degenerate = false;  // reported once for a double root at a fold
};

struct CriticalPoint {
  double p_crit = 0.0;        // sqrt(photons/s)
  double delta_crit = 0.0;    // w0 - wp at the cusp, rad/s
  double photon_number = 0.0; // N at the cusp
};

struct BranchPoint {
  double delta = 0.0;          // w0 - wp, rad/s
  double photon_number = 0.0;  // N
};

struct ContinuationBranch {
  std::vector<BranchPoint> points;
  double pump_flux_amplitude = 0.0;  // p_in
  long arclength_steps = 0;
};

/// Thrown by trace_branch when the corrector cannot recover even at the
/// step floor; carries everything traced so far.
class ContinuationError : public std::runtime_error {
 public:
  ContinuationError(const std::string& what, ContinuationBranch partial)
      : std::runtime_error(what), partial_branch(std::move(partial)) {}
  ContinuationBranch partial_branch;
};

namespace detail {

// Scaled variables: nu = N |K| / gamma, d = sign(K) (w0-wp) / gamma,
// rhs = 2 g1 p^2 |K| / gamma^3. The steady-state cubic becomes
//   nu^3 + 2 d nu^2 + (d^2 + 1) nu = rhs
// with O(1) coefficients for any physical device.
struct ScaledPump {
  double sign_k = 1.0;
  double gamma = 0.0;   // g1 + g2
  double n_scale = 0.0; // gamma / |K|
  double rhs = 0.0;

  ScaledPump(const QuantumParams& qp, double p_in) {
    gamma = qp.gamma1 + qp.gamma2;
    const double abs_k = std::abs(qp.kerr_K);
    sign_k = qp.kerr_K >= 0.0 ? 1.0 : -1.0;
    n_scale = gamma / abs_k;
    rhs = 2.0 * qp.gamma1 * p_in * p_in * abs_k / (gamma * gamma * gamma);
  }

  double d_of_delta(double delta) const { return sign_k * delta / gamma; }
  double delta_of_d(double d) const { return sign_k * d * gamma; }

  static double residual(double nu, double d, double rhs) {
    return ((nu + 2.0 * d) * nu + d * d + 1.0) * nu - rhs;
  }
  static double dres_dnu(double nu, double d) {
    return (3.0 * nu + 4.0 * d) * nu + d * d + 1.0;
  }
  static double dres_dd(double nu, double d) { return 2.0 * nu * (nu + d); }
};

inline double pump_cubic_residual(const QuantumParams& qp, double omega_p, double p_in,
                                  double n) {
  const double delta = qp.resonance_omega0 - omega_p;
  const double gamma = qp.gamma1 + qp.gamma2;
  const double k = qp.kerr_K;
  return ((k * k * n + 2.0 * delta * k) * n + delta * delta + gamma * gamma) * n -
         2.0 * qp.gamma1 * p_in * p_in;
}

inline double pump_cubic_slope(const QuantumParams& qp, double omega_p, double n) {
  const double delta = qp.resonance_omega0 - omega_p;
  const double gamma = qp.gamma1 + qp.gamma2;
  const double k = qp.kerr_K;
  return (3.0 * k * k * n + 4.0 * delta * k) * n + delta * delta + gamma * gamma;
}

inline double intracavity_phase(const QuantumParams& qp, double omega_p, double p_in,
                                double n, double pump_phase) {
  if (p_in == 0.0) return 0.0;
  const double delta = qp.resonance_omega0 - omega_p;
  const double gamma = qp.gamma1 + qp.gamma2;
  const std::complex<double> p =
      std::sqrt(2.0 * qp.gamma1) * p_in *
      std::exp(std::complex<double>(0.0, -pump_phase)) /
      std::complex<double>(gamma, delta + qp.kerr_K * n);
  return std::arg(p);
}

}  // namespace detail

/// All real steady-state photon numbers for a pump at omega_p with flux
/// amplitude p_in, sorted ascending, with linear-stability classification
/// (stable iff d(cubic)/dN > 0, i.e. not on the middle branch).
inline std::vector<PumpOperatingPoint> solve_pump_cubic(const QuantumParams& qp,
                                                        double omega_p, double p_in,
                                                        double pump_phase = 0.0) {
  if (p_in < 0.0) throw std::domain_error("solve_pump_cubic: p_in must be >= 0");
  std::vector<PumpOperatingPoint> out;

  const double delta = qp.resonance_omega0 - omega_p;
  const double gamma = qp.gamma1 + qp.gamma2;

  if (qp.kerr_K == 0.0) {
    PumpOperatingPoint op;
    op.photon_number = 2.0 * qp.gamma1 * p_in * p_in / (delta * delta + gamma * gamma);
    op.intracavity_phase = detail::intracavity_phase(qp, omega_p, p_in, 0.0, pump_phase);
    op.stable = true;
    op.branch_index = 0;
    out.push_back(op);
    return out;
  }

  const detail::ScaledPump sp(qp, p_in);
  const double d = sp.d_of_delta(delta);
  const CubicRoots roots =
      cubic_real_roots(1.0, 2.0 * d, d * d + 1.0, -sp.rhs);

  for (int i = 0; i < roots.count; ++i) {
    const double nu = std::max(0.0, roots.values[size_t(i)]);
    PumpOperatingPoint op;
    op.photon_number = nu * sp.n_scale;
    op.degenerate = roots.multiplicity[size_t(i)] > 1;
    const double slope = detail::ScaledPump::dres_dnu(nu, d);
    op.stable = slope > 0.0 && !op.degenerate;
    op.intracavity_phase =
        detail::intracavity_phase(qp, omega_p, p_in, op.photon_number, pump_phase);
    out.push_back(op);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.photon_number < b.photon_number;
  });
  if (out.size() == 3) {
    out[0].branch_index = 0;
    out[1].branch_index = 1;
    out[2].branch_index = 2;
  } else if (out.size() == 2) {
    out[0].branch_index = 0;
    out[1].branch_index = 2;  // fold: middle and outer branch have merged
  } else if (!out.empty()) {
    out[0].branch_index = 0;
  }
  return out;
}

/// Cusp of the bistability region: smallest pump flux for which the cubic
/// acquires a double root. Solves {f = 0, df/dN = 0, d2f/dN2 = 0} with a
/// safeguarded Newton iteration in scaled coordinates. Requires K != 0.
inline CriticalPoint critical_power(const QuantumParams& qp) {
  if (qp.kerr_K == 0.0) {
    throw std::domain_error("critical_power: K = 0 has no bifurcation");
  }
  const double gamma = qp.gamma1 + qp.gamma2;
  const double abs_k = std::abs(qp.kerr_K);
  const double sign_k = qp.kerr_K >= 0.0 ? 1.0 : -1.0;

  // Unknowns (nu, d); the two conditions f' = f'' = 0 do not involve the
  // drive, the cubic itself then fixes p.
  double nu = 1.0, d = -1.2;
  auto g1f = [](double nu_, double d_) {
    return (3.0 * nu_ + 4.0 * d_) * nu_ + d_ * d_ + 1.0;
  };
  auto g2f = [](double nu_, double d_) { return 6.0 * nu_ + 4.0 * d_; };

  double r1 = g1f(nu, d), r2 = g2f(nu, d);
  double norm = std::hypot(r1, r2);
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    if (norm < 1e-14) {
      converged = true;
      break;
    }
    const double j11 = 6.0 * nu + 4.0 * d;  // d g1 / d nu
    const double j12 = 4.0 * nu + 2.0 * d;  // d g1 / d d
    const double j21 = 6.0;
    const double j22 = 4.0;
    const double det = j11 * j22 - j12 * j21;
    if (det == 0.0) break;
    const double dnu = (-r1 * j22 + r2 * j12) / det;
    const double dd = (-j11 * r2 + j21 * r1) / det;
    double t = 1.0;
    for (int bt = 0; bt < 40; ++bt) {  // backtrack until the residual shrinks
      const double nu_t = nu + t * dnu;
      const double d_t = d + t * dd;
      const double n1 = g1f(nu_t, d_t), n2 = g2f(nu_t, d_t);
      const double norm_t = std::hypot(n1, n2);
      if (norm_t < norm || t < 1e-8) {
        nu = nu_t;
        d = d_t;
        r1 = n1;
        r2 = n2;
        norm = norm_t;
        break;
      }
      t *= 0.5;
    }
  }
  if (!converged && norm > 1e-10) {
    throw ConvergenceError("critical_power: Newton iteration stalled");
  }

  const double rhs_c = detail::ScaledPump::residual(nu, d, 0.0);  // nu((nu+2d)nu+d^2+1)
  CriticalPoint cp;
  cp.photon_number = nu * gamma / abs_k;
  cp.delta_crit = sign_k * d * gamma;
  cp.p_crit = std::sqrt(rhs_c * gamma * gamma * gamma / (2.0 * qp.gamma1 * abs_k));
  return cp;
}

struct ContinuationOptions {
  double initial_step = 1e-2;  // in scaled (d, nu) coordinates
  double min_step = 1e-6;
  double max_step = 0.25;
  double grow = 2.0;    // applied when the corrector converges in < 3 steps
  double shrink = 0.5;  // applied on corrector failure
  long max_points = 2000000;
};

/// Pseudo-arclength continuation of the steady-state cubic over a pump
/// detuning window at fixed drive. Traces the full S-curve, including the
/// unstable middle branch above p_crit; endpoints are exact solves at the
/// window boundaries.
inline ContinuationBranch trace_branch(const QuantumParams& qp, double p_in,
                                       std::pair<double, double> delta_range,
                                       const ContinuationOptions& opt = {}) {
  if (p_in < 0.0) throw std::domain_error("trace_branch: p_in must be >= 0");
  if (!(delta_range.first < delta_range.second)) {
    throw std::domain_error("trace_branch: delta_range must be ordered");
  }
  const double gamma = qp.gamma1 + qp.gamma2;

  ContinuationBranch br;
  br.pump_flux_amplitude = p_in;

  if (qp.kerr_K == 0.0 || p_in == 0.0) {
    // linear response is single-valued; emit a closed-form grid
    const int n = 513;
    for (int i = 0; i < n; ++i) {
      const double delta =
          delta_range.first +
          (delta_range.second - delta_range.first) * double(i) / double(n - 1);
      const double nn =
          2.0 * qp.gamma1 * p_in * p_in / (delta * delta + gamma * gamma);
      br.points.push_back({delta, nn});
    }
    return br;
  }

  const detail::ScaledPump sp(qp, p_in);
  // Work in x = delta/gamma (window order preserved), nu = N/ n_scale.
  // The cubic residual needs d = sign(K) * x.
  auto res = [&](double x, double nu) {
    const double dd = sp.sign_k * x;
    return detail::ScaledPump::residual(nu, dd, sp.rhs);
  };
  auto res_dnu = [&](double x, double nu) {
    return detail::ScaledPump::dres_dnu(nu, sp.sign_k * x);
  };
  auto res_dx = [&](double x, double nu) {
    const double dd = sp.sign_k * x;
    return sp.sign_k * (2.0 * nu * nu + 2.0 * dd * nu);
  };

  const double xa = delta_range.first / gamma;
  const double xb = delta_range.second / gamma;

  auto newton_nu = [&](double x, double nu0) {
    double nu_ = nu0;
    for (int it = 0; it < 100; ++it) {
      const double r = res(x, nu_);
      const double dr = res_dnu(x, nu_);
      if (dr == 0.0) break;
      const double step = r / dr;
      nu_ -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(nu_))) break;
    }
    return nu_;
  };

  // start from the lowest root at the left edge
  const auto start_roots = solve_pump_cubic(qp, qp.resonance_omega0 - delta_range.first, p_in);
  double x = xa;
  double nu = start_roots.front().photon_number / sp.n_scale;
  br.points.push_back({delta_range.first, start_roots.front().photon_number});

  // initial tangent: null vector of [dr/dx, dr/dnu], oriented toward xb
  double tx, tn;
  {
    const double rx = res_dx(x, nu), rn = res_dnu(x, nu);
    const double nrm = std::hypot(rx, rn);
    tx = rn / nrm;
    tn = -rx / nrm;
    if (tx < 0.0) {
      tx = -tx;
      tn = -tn;
    }
  }

  double h = opt.initial_step;
  long guard = 0;
  while (guard++ < opt.max_points) {
    const double xp = x + h * tx;
    const double np = nu + h * tn;
    // corrector: Newton on {res = 0, tangent . (z - z_prev) = h}
    double xc = xp, nc = np;
    bool ok = false;
    int iters = 0;
    for (; iters < 12; ++iters) {
      const double r1 = res(xc, nc);
      const double r2 = tx * (xc - x) + tn * (nc - nu) - h;
      const double scale = std::max({1.0, sp.rhs, std::abs(nc * nc * nc)});
      if (std::abs(r1) < 1e-13 * scale && std::abs(r2) < 1e-13) {
        ok = true;
        break;
      }
      const double j11 = res_dx(xc, nc), j12 = res_dnu(xc, nc);
      const double j21 = tx, j22 = tn;
      const double det = j11 * j22 - j12 * j21;
      if (det == 0.0 || !std::isfinite(det)) break;
      xc -= (r1 * j22 - r2 * j12) / det;
      nc -= (j11 * r2 - j21 * r1) / det;
    }
    if (!ok) {
      if (h * opt.shrink >= opt.min_step) {
        h *= opt.shrink;
        continue;
      }
      throw ContinuationError("trace_branch: corrector failed at the step floor",
                              std::move(br));
    }

    // new tangent, kept oriented along the path
    {
      const double rx = res_dx(xc, nc), rn = res_dnu(xc, nc);
      const double nrm = std::hypot(rx, rn);
      double ntx = rn / nrm, ntn = -rx / nrm;
      if (ntx * tx + ntn * tn < 0.0) {
        ntx = -ntx;
        ntn = -ntn;
      }
      tx = ntx;
      tn = ntn;
    }

    x = xc;
    nu = nc;
    ++br.arclength_steps;

    if (x >= xb || x <= xa - 1e-9) {
      // clip to the boundary with a plain Newton solve in nu
      const double x_end = (x >= xb) ? xb : xa;
      const double nu_end = newton_nu(x_end, nu);
      br.points.push_back({x_end * gamma, std::max(0.0, nu_end) * sp.n_scale});
      break;
    }
    br.points.push_back({x * gamma, std::max(0.0, nu) * sp.n_scale});

    if (iters < 3 && h * opt.grow <= opt.max_step) h *= opt.grow;
  }
  if (guard >= opt.max_points) {
    throw ContinuationError("trace_branch: point budget exhausted", std::move(br));
  }
  return br;
}

/// Signal/image scattering coefficients of the linearized response (pump
/// frame, omega measured from the pump).
struct SignalGain {
  std::complex<double> g;  // signal coefficient, G_s = |g|^2
  std::complex<double> m;  // image coefficient, G_i = |m|^2
};

/// Evaluates
///   W = i(w0-wp) + (g1+g2) + 2iKN,  V = iKN exp(-2i psi_B),
///   lambda_pm = (g1+g2) +- sqrt(K^2 N^2 - (w0-wp+2KN)^2),
///   g(w) = 1 - 2 g1 (W* - iw) / ((iw-l-)(iw-l+)),
///   m(w) = 2 g1 V / ((iw-l-)(iw-l+)).
/// Requires a stable operating point; throws PoleError when omega lands on
/// a response pole within 1e-12 relative.
inline SignalGain linearized_gain(const QuantumParams& qp, const PumpOperatingPoint& op,
                                  double omega, double omega_p) {
  if (!op.stable) {
    throw std::domain_error("linearized_gain: operating point is not stable");
  }
  using cplx = std::complex<double>;
  const double gamma = qp.gamma1 + qp.gamma2;
  const double delta = qp.resonance_omega0 - omega_p;
  const double kn = qp.kerr_K * op.photon_number;

  const cplx w_coeff(gamma, delta + 2.0 * kn);  // W
  const cplx v = cplx(0.0, kn) * std::exp(cplx(0.0, -2.0 * op.intracavity_phase));
  const cplx root = std::sqrt(cplx(kn * kn - (delta + 2.0 * kn) * (delta + 2.0 * kn), 0.0));
  const cplx lam_minus = gamma - root;
  const cplx lam_plus = gamma + root;

  const cplx iw(0.0, omega);
  const cplx f_minus = iw - lam_minus;
  const cplx f_plus = iw - lam_plus;
  const double scale = std::max({std::abs(omega), std::abs(lam_minus), std::abs(lam_plus)});
  if (std::abs(f_minus) <= 1e-12 * scale || std::abs(f_plus) <= 1e-12 * scale) {
    throw PoleError("linearized_gain: omega sits on a pole of the response");
  }
  const cplx den = f_minus * f_plus;

  SignalGain sg;
  sg.g = 1.0 - 2.0 * qp.gamma1 * (std::conj(w_coeff) - iw) / den;
  sg.m = 2.0 * qp.gamma1 * v / den;
  return sg;
}

enum class BranchSelect { lowest_stable, highest_stable };

struct GainSpectrum {
  DriveTone pump;  // quantum units: amplitude = p_in
  PumpOperatingPoint operating_point;
  struct Entry {
    double omega = 0.0;  // signal detuning from the pump, rad/s
    double signal_power_gain = 0.0;  // G_s = |g|^2
    double image_power_gain = 0.0;   // G_i = |m|^2
    std::complex<double> g;
    std::complex<double> m;
  };
  std::vector<Entry> entries;
};

inline PumpOperatingPoint select_branch(const std::vector<PumpOperatingPoint>& roots,
                                        BranchSelect which) {
  const PumpOperatingPoint* chosen = nullptr;
  for (const auto& r : roots) {
    if (!r.stable) continue;
    if (chosen == nullptr) {
      chosen = &r;
    } else if (which == BranchSelect::highest_stable &&
               r.photon_number > chosen->photon_number) {
      chosen = &r;
    } else if (which == BranchSelect::lowest_stable &&
               r.photon_number < chosen->photon_number) {
      chosen = &r;
    }
  }
  if (chosen == nullptr) {
    throw std::domain_error("select_branch: no stable operating point");
  }
  return *chosen;
}

/// Per-frequency gain on the selected stable branch (lowest-N by default,
/// the branch reached when ramping the pump up from zero).
inline GainSpectrum gain_spectrum(const QuantumParams& qp, double omega_p, double p_in,
                                  std::span<const double> omega_grid,
                                  BranchSelect branch = BranchSelect::lowest_stable) {
  GainSpectrum spec;
  spec.pump = DriveTone(p_in, omega_p, 0.0);
  spec.operating_point = select_branch(solve_pump_cubic(qp, omega_p, p_in), branch);
  spec.entries.reserve(omega_grid.size());
  for (double w : omega_grid) {
    const SignalGain sg = linearized_gain(qp, spec.operating_point, w, omega_p);
    GainSpectrum::Entry e;
    e.omega = w;
    e.g = sg.g;
    e.m = sg.m;
    e.signal_power_gain = std::norm(sg.g);
    e.image_power_gain = std::norm(sg.m);
    spec.entries.push_back(e);
  }
  return spec;
}

/// Degenerate-point (omega -> 0) gains, including the phase-sensitive
/// extremes (|g| +- |m|)^2 that apply when signal and pump are phase
/// locked at exactly the same frequency.
struct DegenerateGain {
  double signal_power_gain = 0.0;
  double image_power_gain = 0.0;
  double phase_max_power_gain = 0.0;
  double phase_min_power_gain = 0.0;
};

inline DegenerateGain degenerate_gain(const QuantumParams& qp, const PumpOperatingPoint& op,
                                      double omega_p) {
  const SignalGain sg = linearized_gain(qp, op, 0.0, omega_p);
  DegenerateGain dg;
  dg.signal_power_gain = std::norm(sg.g);
  dg.image_power_gain = std::norm(sg.m);
  const double gm = std::abs(sg.g), mm = std::abs(sg.m);
  dg.phase_max_power_gain = (gm + mm) * (gm + mm);
  dg.phase_min_power_gain = (gm - mm) * (gm - mm);
  return dg;
}

struct OptimalPump {
  double omega_p_star = 0.0;
  double peak_gain_db = 0.0;
};

/// Maximizes the degenerate signal gain G_s(omega -> 0) over the pump
/// frequency for a fixed drive below p_crit: coarse scan over the
/// bistable-side detuning range, two zooms, then golden-section
/// refinement on the continuous axis.
inline OptimalPump optimal_pump_detuning(const QuantumParams& qp, double p_in) {
  const double gamma = qp.gamma1 + qp.gamma2;
  if (qp.kerr_K == 0.0) {
    // linear cavity: reflection gain is flat at 0 dB, optimum is on resonance
    return {qp.resonance_omega0, 0.0};
  }
  const CriticalPoint cp = critical_power(qp);
  if (!(p_in < cp.p_crit)) {
    throw std::domain_error("optimal_pump_detuning: p_in must be below p_crit");
  }

  // gain as a function of scaled detuning d = sign(K) (w0-wp)/gamma < 0 side
  auto gain_at = [&](double d) -> double {
    const double delta = (qp.kerr_K >= 0.0 ? 1.0 : -1.0) * d * gamma;
    const double omega_p = qp.resonance_omega0 - delta;
    const auto roots = solve_pump_cubic(qp, omega_p, p_in);
    const PumpOperatingPoint op = select_branch(roots, BranchSelect::lowest_stable);
    const SignalGain sg = linearized_gain(qp, op, 0.0, omega_p);
    return std::norm(sg.g);
  };

  double lo = -6.0, hi = 1.0;
  double best_d = -1.0, best_g = -1.0;
  for (int zoom = 0; zoom < 3; ++zoom) {
    const int n = zoom == 0 ? 701 : 201;
    double zbest_d = lo, zbest_g = -1.0;
    for (int i = 0; i < n; ++i) {
      const double d = lo + (hi - lo) * double(i) / double(n - 1);
      const double g = gain_at(d);
      if (g > zbest_g) {
        zbest_g = g;
        zbest_d = d;
      }
    }
    best_d = zbest_d;
    best_g = zbest_g;
    const double cell = (hi - lo) / double(n - 1);
    lo = zbest_d - 2.0 * cell;
    hi = zbest_d + 2.0 * cell;
  }

  // golden-section refinement
  {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d2 = a + inv_phi * (b - a);
    double fc = gain_at(c), fd = gain_at(d2);
    for (int it = 0; it < 90; ++it) {
      if (fc > fd) {
        b = d2;
        d2 = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = gain_at(c);
      } else {
        a = c;
        c = d2;
        fc = fd;
        d2 = a + inv_phi * (b - a);
        fd = gain_at(d2);
      }
    }
    const double dm = 0.5 * (a + b);
    const double gm = gain_at(dm);
    if (gm > best_g) {
      best_g = gm;
      best_d = dm;
    }
  }

  OptimalPump res;
  const double delta_star = (qp.kerr_K >= 0.0 ? 1.0 : -1.0) * best_d * gamma;
  res.omega_p_star = qp.resonance_omega0 - delta_star;
  res.peak_gain_db = 10.0 * std::log10(best_g);
  return res;
}

}  // namespace jpa
