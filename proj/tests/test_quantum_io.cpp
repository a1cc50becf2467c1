#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "jpa/quantum_io.hpp"
#include "support/oracles.hpp"

using namespace jpa;
using Catch::Approx;

namespace {

QuantumParams random_device() {
  const double omega0 = jpa::kTwoPi * oracle::log_uniform(2e9, 8e9);
  const double q = oracle::log_uniform(10.0, 2000.0);
  const double gamma1 = omega0 / (2.0 * q);
  const double kerr = -gamma1 * oracle::log_uniform(1e-3, 3.0);
  return QuantumParams(omega0, kerr, gamma1, 0.0);
}

QuantumParams paper_like_device() {
  // Ic = 1 uA, C = 6.5 pF, C_co = 0.5 pF, Zc = 50 ohm
  CircuitParams cp;
  cp.junction_critical_current = 1e-6;
  cp.shunt_capacitance = 6.5e-12;
  cp.coupling_capacitance = 0.5e-12;
  cp.line_impedance = 50.0;
  return map_circuit_to_quantum(cp);
}

}  // namespace

TEST_CASE("solve_pump_cubic trivial limits", "[quantum_io]") {
  const QuantumParams qp = paper_like_device();

  SECTION("unpumped cavity") {
    const auto roots = solve_pump_cubic(qp, qp.resonance_omega0, 0.0);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0].photon_number == 0.0);
    CHECK(roots[0].stable);
    CHECK(roots[0].branch_index == 0);
  }

  SECTION("K = 0 gives the Lorentzian closed form") {
    const QuantumParams lin(qp.resonance_omega0, 0.0, qp.gamma1, 0.0);
    const double p_in = 1e4;
    const double omega_p = qp.resonance_omega0 - 2.0 * qp.gamma1;
    const auto roots = solve_pump_cubic(lin, omega_p, p_in);
    REQUIRE(roots.size() == 1);
    const double delta = lin.resonance_omega0 - omega_p;
    const double expect =
        2.0 * lin.gamma1 * p_in * p_in / (delta * delta + lin.gamma1 * lin.gamma1);
    CHECK(roots[0].photon_number == Approx(expect).epsilon(1e-12));
  }

  SECTION("negative drive rejected") {
    CHECK_THROWS_AS(solve_pump_cubic(qp, qp.resonance_omega0, -1.0), std::domain_error);
  }
}

TEST_CASE("solve_pump_cubic matches companion-matrix oracle", "[quantum_io]") {
  int three_root_cases = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    const QuantumParams qp = random_device();
    const double gamma = qp.gamma1 + qp.gamma2;
    const double delta = oracle::uniform(-8.0, 8.0) * gamma;
    const double p_crit = critical_power(qp).p_crit;
    const double p_in = p_crit * oracle::log_uniform(0.05, 3.0);

    const auto mine = solve_pump_cubic(qp, qp.resonance_omega0 - delta, p_in);

    const double k = qp.kerr_K;
    const auto ref = oracle::companion_cubic_roots(
        k * k, 2.0 * delta * k, delta * delta + gamma * gamma,
        -2.0 * qp.gamma1 * p_in * p_in);

    int n_mine = 0;
    for (const auto& r : mine) n_mine += r.degenerate ? 2 : 1;
    REQUIRE((n_mine == int(ref.size()) || int(mine.size()) == int(ref.size())));

    // every returned root appears in the oracle set at 1e-10 relative
    for (const auto& r : mine) {
      double best = 1e300;
      for (double rr : ref) best = std::min(best, std::abs(rr - r.photon_number));
      REQUIRE(best <= 1e-10 * std::max(1.0, r.photon_number));
    }
    if (mine.size() == 3) ++three_root_cases;

    // residual bound from the operating-point invariant
    for (const auto& r : mine) {
      const double res = detail::pump_cubic_residual(qp, qp.resonance_omega0 - delta,
                                                     p_in, r.photon_number);
      CHECK(std::abs(res) <
            1e-8 * std::max(1.0, 2.0 * qp.gamma1 * p_in * p_in));
    }

    // middle branch must be unstable
    if (mine.size() == 3) CHECK_FALSE(mine[1].stable);
  }
  CHECK(three_root_cases > 50);  // the draw actually exercises bistability
}

TEST_CASE("critical_power", "[quantum_io]") {
  const QuantumParams qp = paper_like_device();
  const auto cp = critical_power(qp);

  SECTION("cusp conditions vanish") {
    const double omega_p = qp.resonance_omega0 - cp.delta_crit;
    const double f = detail::pump_cubic_residual(qp, omega_p, cp.p_crit, cp.photon_number);
    const double fp = detail::pump_cubic_slope(qp, omega_p, cp.photon_number);
    const double gamma = qp.gamma1 + qp.gamma2;
    const double fpp = 6.0 * qp.kerr_K * qp.kerr_K * cp.photon_number +
                       4.0 * cp.delta_crit * qp.kerr_K;
    const double scale = std::max(1.0, 2.0 * qp.gamma1 * cp.p_crit * cp.p_crit);
    CHECK(std::abs(f) < 1e-8 * scale);
    CHECK(std::abs(fp) < 1e-8 * gamma * gamma);
    CHECK(std::abs(fpp) < 1e-8 * gamma * std::abs(qp.kerr_K));
  }

  SECTION("K scaling: |K| x4 scales p_crit^2 by 1/4") {
    const QuantumParams qp4(qp.resonance_omega0, 4.0 * qp.kerr_K, qp.gamma1, qp.gamma2);
    const auto cp4 = critical_power(qp4);
    CHECK(cp4.p_crit * cp4.p_crit ==
          Approx(0.25 * cp.p_crit * cp.p_crit).epsilon(1e-9));
  }

  SECTION("grid-scan oracle brackets p_crit") {
    auto roots_at = [&](double delta, double p) {
      return int(solve_pump_cubic(qp, qp.resonance_omega0 - delta, p).size());
    };
    const double gamma = qp.gamma1 + qp.gamma2;
    const double p_scan = oracle::first_multivalued_p(
        roots_at, 0.90 * cp.p_crit, 1.10 * cp.p_crit, 200, 0.0, 4.0 * gamma, 400);
    CHECK(p_scan == Approx(cp.p_crit).epsilon(0.02));
  }

  SECTION("below the bifurcation every detuning is single-valued") {
    const double gamma = qp.gamma1 + qp.gamma2;
    for (int i = 0; i <= 200; ++i) {
      const double delta = -6.0 * gamma + 12.0 * gamma * double(i) / 200.0;
      CHECK(solve_pump_cubic(qp, qp.resonance_omega0 - delta, 0.5 * cp.p_crit).size() == 1);
    }
  }

  SECTION("K = 0 has no bifurcation") {
    const QuantumParams lin(qp.resonance_omega0, 0.0, qp.gamma1, 0.0);
    CHECK_THROWS_AS(critical_power(lin), std::domain_error);
  }
}

TEST_CASE("trace_branch", "[quantum_io]") {
  const QuantumParams qp = paper_like_device();
  const auto cp = critical_power(qp);
  const double gamma = qp.gamma1 + qp.gamma2;
  const std::pair<double, double> window{-2.0 * gamma, 6.0 * gamma};

  SECTION("below p_crit the branch is single-valued in delta") {
    const auto br = trace_branch(qp, 0.7 * cp.p_crit, window);
    REQUIRE(br.points.size() > 10);
    for (size_t i = 1; i < br.points.size(); ++i) {
      CHECK(br.points[i].delta > br.points[i - 1].delta);
    }
  }

  SECTION("above p_crit the fold appears with exactly two turning points") {
    const double p_in = 1.5 * cp.p_crit;
    const auto br = trace_branch(qp, p_in, window);
    REQUIRE(br.points.size() > 20);

    int folds = 0;
    for (size_t i = 2; i < br.points.size(); ++i) {
      const double d1 = br.points[i - 1].delta - br.points[i - 2].delta;
      const double d2 = br.points[i].delta - br.points[i - 1].delta;
      if (d1 * d2 < 0.0) ++folds;
    }
    CHECK(folds == 2);

    // residual bound everywhere
    for (const auto& pt : br.points) {
      const double res = detail::pump_cubic_residual(qp, qp.resonance_omega0 - pt.delta,
                                                     p_in, pt.photon_number);
      REQUIRE(std::abs(res) < 1e-8 * std::max(1.0, 2.0 * qp.gamma1 * p_in * p_in));
    }

    // inside the fold the traced N values match the direct cubic solve
    double fold_lo = 1e300, fold_hi = -1e300;
    for (size_t i = 1; i + 1 < br.points.size(); ++i) {
      const double d1 = br.points[i].delta - br.points[i - 1].delta;
      const double d2 = br.points[i + 1].delta - br.points[i].delta;
      if (d1 * d2 < 0.0) {
        fold_lo = std::min(fold_lo, br.points[i].delta);
        fold_hi = std::max(fold_hi, br.points[i].delta);
      }
    }
    REQUIRE(fold_lo < fold_hi);
    const double delta_mid = 0.5 * (fold_lo + fold_hi);
    const auto roots = solve_pump_cubic(qp, qp.resonance_omega0 - delta_mid, p_in);
    REQUIRE(roots.size() == 3);
    // collect branch crossings near delta_mid (one per S-curve segment)
    std::vector<double> crossings;
    for (size_t i = 1; i < br.points.size(); ++i) {
      const double a = br.points[i - 1].delta, b = br.points[i].delta;
      if ((a - delta_mid) * (b - delta_mid) <= 0.0 && a != b) {
        const double t = (delta_mid - a) / (b - a);
        crossings.push_back(br.points[i - 1].photon_number +
                            t * (br.points[i].photon_number -
                                 br.points[i - 1].photon_number));
      }
    }
    REQUIRE(crossings.size() == 3);
    std::sort(crossings.begin(), crossings.end());
    for (int k = 0; k < 3; ++k) {
      CHECK(crossings[size_t(k)] ==
            Approx(roots[size_t(k)].photon_number).epsilon(1e-3));
    }

    // endpoints agree with the direct solve at the window edges
    const auto left = solve_pump_cubic(qp, qp.resonance_omega0 - window.first, p_in);
    CHECK(br.points.front().photon_number ==
          Approx(left.front().photon_number).epsilon(1e-8));
    const auto right = solve_pump_cubic(qp, qp.resonance_omega0 - window.second, p_in);
    bool matches_some = false;
    for (const auto& r : right) {
      if (std::abs(r.photon_number - br.points.back().photon_number) <=
          1e-8 * std::max(1.0, r.photon_number)) {
        matches_some = true;
      }
    }
    CHECK(matches_some);
  }

  SECTION("bad window rejected") {
    CHECK_THROWS_AS(trace_branch(qp, 1.0, {1.0, -1.0}), std::domain_error);
  }
}

TEST_CASE("linearized_gain limits and invariants", "[quantum_io]") {
  const QuantumParams qp = paper_like_device();

  SECTION("passive lossless cavity reflects with unit magnitude") {
    PumpOperatingPoint op;  // N = 0
    for (double w : {-3.0, -1.0, -0.1, 0.0, 0.1, 1.0, 3.0}) {
      const auto sg = linearized_gain(qp, op, w * qp.gamma1, qp.resonance_omega0);
      CHECK(std::abs(sg.m) == 0.0);
      CHECK(std::abs(sg.g) == Approx(1.0).epsilon(1e-12));
    }
  }

  SECTION("unstable operating point rejected") {
    PumpOperatingPoint op;
    op.stable = false;
    CHECK_THROWS_AS(linearized_gain(qp, op, 0.0, qp.resonance_omega0), std::domain_error);
  }

  SECTION("photon-flux conservation over random stable points") {
    for (int trial = 0; trial < 300; ++trial) {
      const QuantumParams dev = random_device();
      const double gamma = dev.gamma1;
      const double p_crit = critical_power(dev).p_crit;
      const double p_in = p_crit * oracle::uniform(0.05, 0.98);
      const double delta = oracle::uniform(-4.0, 4.0) * gamma;
      const auto roots = solve_pump_cubic(dev, dev.resonance_omega0 - delta, p_in);
      const auto op = select_branch(roots, BranchSelect::lowest_stable);
      for (int i = 0; i < 8; ++i) {
        const double w = oracle::uniform(-6.0, 6.0) * gamma;
        const auto sg = linearized_gain(dev, op, w, dev.resonance_omega0 - delta);
        const double gs = std::norm(sg.g), gi = std::norm(sg.m);
        REQUIRE(std::abs(gs - gi - 1.0) < 1e-6);
        // image spectrum is symmetric in |.| under omega -> -omega
        const auto sg2 = linearized_gain(dev, op, -w, dev.resonance_omega0 - delta);
        REQUIRE(std::abs(sg.m) == Approx(std::abs(sg2.m)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("gain_spectrum", "[quantum_io]") {
  const QuantumParams qp = paper_like_device();
  const double gamma = qp.gamma1;
  std::vector<double> grid;
  for (int i = 0; i <= 64; ++i) grid.push_back((-4.0 + 8.0 * i / 64.0) * gamma);

  SECTION("vanishing pump is flat at 0 dB") {
    const auto spec = gain_spectrum(qp, qp.resonance_omega0 - 1.7 * gamma, 0.0, grid);
    for (const auto& e : spec.entries) {
      CHECK(e.signal_power_gain == Approx(1.0).epsilon(1e-12));
      CHECK(e.image_power_gain == Approx(0.0).margin(1e-15));
    }
  }

  SECTION("G_s = G_i + 1 pointwise for gamma2 = 0") {
    const auto cpnt = critical_power(qp);
    const auto spec =
        gain_spectrum(qp, qp.resonance_omega0 - 1.7 * gamma, 0.8 * cpnt.p_crit, grid);
    for (const auto& e : spec.entries) {
      CHECK(e.signal_power_gain - e.image_power_gain == Approx(1.0).margin(1e-6));
    }
  }

  SECTION("peak gain grows toward p_crit and exceeds 30 dB at 0.99 p_crit") {
    const auto cpnt = critical_power(qp);
    double last_peak = -1.0;
    for (double frac : {0.5, 0.8, 0.9, 0.95, 0.99}) {
      const auto opt = optimal_pump_detuning(qp, frac * cpnt.p_crit);
      CHECK(opt.peak_gain_db > last_peak);
      last_peak = opt.peak_gain_db;
    }
    CHECK(last_peak >= 30.0);
  }
}

TEST_CASE("optimal_pump_detuning", "[quantum_io]") {
  const QuantumParams qp = paper_like_device();
  const auto cpnt = critical_power(qp);

  SECTION("negative Kerr pulls the optimum below resonance") {
    const auto opt = optimal_pump_detuning(qp, 0.9 * cpnt.p_crit);
    CHECK(opt.omega_p_star < qp.resonance_omega0);
    // coarse-scan oracle confirms the sign of the optimum
    double best_gain = -1.0, best_delta = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double delta = (-2.0 + 8.0 * i / 400.0) * qp.gamma1;
      const auto roots = solve_pump_cubic(qp, qp.resonance_omega0 - delta, 0.9 * cpnt.p_crit);
      const auto op = select_branch(roots, BranchSelect::lowest_stable);
      const auto sg = linearized_gain(qp, op, 0.0, qp.resonance_omega0 - delta);
      if (std::norm(sg.g) > best_gain) {
        best_gain = std::norm(sg.g);
        best_delta = delta;
      }
    }
    CHECK(best_delta > 0.0);  // omega_p* = omega0 - delta* below omega0
    CHECK(opt.omega_p_star == Approx(qp.resonance_omega0 - best_delta).margin(0.1 * qp.gamma1));
  }

  SECTION("weak pump limit approaches 0 dB near resonance") {
    const auto opt = optimal_pump_detuning(qp, 1e-4 * cpnt.p_crit);
    CHECK(opt.peak_gain_db == Approx(0.0).margin(1e-3));
    CHECK(std::abs(opt.omega_p_star - qp.resonance_omega0) < 0.5 * qp.gamma1);
  }

  SECTION("returned point is a local maximum") {
    const auto opt = optimal_pump_detuning(qp, 0.9 * cpnt.p_crit);
    auto gain_at = [&](double omega_p) {
      const auto roots = solve_pump_cubic(qp, omega_p, 0.9 * cpnt.p_crit);
      const auto op = select_branch(roots, BranchSelect::lowest_stable);
      return std::norm(linearized_gain(qp, op, 0.0, omega_p).g);
    };
    const double g0 = gain_at(opt.omega_p_star);
    const double step = 0.05 * qp.gamma1;
    CHECK(g0 >= gain_at(opt.omega_p_star + step));
    CHECK(g0 >= gain_at(opt.omega_p_star - step));
  }

  SECTION("drive above p_crit rejected") {
    CHECK_THROWS_AS(optimal_pump_detuning(qp, 1.01 * cpnt.p_crit), std::domain_error);
  }
}

TEST_CASE("degenerate gain extremes", "[quantum_io]") {
  const QuantumParams qp = paper_like_device();
  const auto cpnt = critical_power(qp);
  const auto opt = optimal_pump_detuning(qp, 0.9 * cpnt.p_crit);
  const auto roots = solve_pump_cubic(qp, opt.omega_p_star, 0.9 * cpnt.p_crit);
  const auto op = select_branch(roots, BranchSelect::lowest_stable);
  const auto dg = degenerate_gain(qp, op, opt.omega_p_star);
  CHECK(dg.phase_max_power_gain >= dg.signal_power_gain);
  CHECK(dg.phase_min_power_gain <= dg.signal_power_gain);
  CHECK(dg.signal_power_gain - dg.image_power_gain == Approx(1.0).margin(1e-6));
}
