#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace jpa {

/// Real roots of a cubic with multiplicities.
struct CubicRoots {
  std::array<double, 3> values{};
  std::array<int, 3> multiplicity{};
  int count = 0;  // number of distinct real roots

  void push(double v, int m) {
    values[static_cast<size_t>(count)] = v;
    multiplicity[static_cast<size_t>(count)] = m;
    ++count;
  }
  void sort() {
    for (int i = 1; i < count; ++i) {
      for (int k = i; k > 0 && values[size_t(k - 1)] > values[size_t(k)]; --k) {
        std::swap(values[size_t(k - 1)], values[size_t(k)]);
        std::swap(multiplicity[size_t(k - 1)], multiplicity[size_t(k)]);
      }
    }
  }
};

namespace detail {

inline double eval_cubic(double a, double b, double c, double x) {
  return ((x + a) * x + b) * x + c;
}
inline double eval_cubic_d1(double a, double b, double x) {
  return (3.0 * x + 2.0 * a) * x + b;
}

// A few Newton polish steps; bails out if the derivative is tiny and the
// iterate would jump.
inline double polish_root(double a, double b, double c, double x) {
  for (int it = 0; it < 3; ++it) {
    const double f = eval_cubic(a, b, c, x);
    const double d = eval_cubic_d1(a, b, x);
    if (d == 0.0) break;
    const double step = f / d;
    if (!std::isfinite(step)) break;
    const double scale = std::max(1.0, std::abs(x));
    if (std::abs(step) > 0.5 * scale) break;  // refuse wild jumps near folds
    x -= step;
  }
  return x;
}

// Companion-matrix eigensolve of x^3 + a x^2 + b x + c. Roots with
// imaginary part below imag_tol * scale are accepted as real.
inline CubicRoots companion_roots(double a, double b, double c, double imag_tol = 1e-8) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(0, 2) = -c;
  m(1, 0) = 1.0;
  m(1, 2) = -b;
  m(2, 1) = 1.0;
  m(2, 2) = -a;
  Eigen::EigenSolver<Eigen::Matrix3d> es(m, /*computeEigenvectors=*/false);
  CubicRoots out;
  const double scale = std::max({1.0, std::abs(a), std::sqrt(std::abs(b)),
                                 std::cbrt(std::abs(c))});
  std::array<double, 3> reals{};
  int n_real = 0;
  for (int i = 0; i < 3; ++i) {
    const auto ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) <= imag_tol * scale) reals[size_t(n_real++)] = ev.real();
  }
  std::sort(reals.begin(), reals.begin() + n_real);
  // merge numerically identical roots into multiplicities
  for (int i = 0; i < n_real;) {
    int m_count = 1;
    while (i + m_count < n_real &&
           std::abs(reals[size_t(i + m_count)] - reals[size_t(i)]) <= 1e-10 * scale) {
      ++m_count;
    }
    double avg = 0.0;
    for (int k = 0; k < m_count; ++k) avg += reals[size_t(i + k)];
    out.push(avg / m_count, m_count);
    i += m_count;
  }
  return out;
}

}  // namespace detail

/// Real roots of a3 x^3 + a2 x^2 + a1 x + a0 = 0 (a3 != 0), Cardano with
/// discriminant classification at `rel_tol`; falls back to a companion
/// matrix eigensolve when the trigonometric branch is ill-conditioned
/// (near-triple roots). Roots are sorted ascending; a double root is
/// reported once with multiplicity 2.
inline CubicRoots cubic_real_roots(double a3, double a2, double a1, double a0,
                                   double rel_tol = 1e-12) {
  if (a3 == 0.0) throw std::invalid_argument("cubic_real_roots: leading coefficient is zero");
  const double a = a2 / a3, b = a1 / a3, c = a0 / a3;

  // depressed form t^3 + p t + q with x = t - a/3
  const double a_over_3 = a / 3.0;
  const double p = b - a * a_over_3;
  const double q = c + a_over_3 * (2.0 * a_over_3 * a_over_3 - b);

  const double scale_p = std::max(std::abs(p), a * a / 9.0 + std::abs(b));
  const double scale_q = std::max({std::abs(q), std::abs(c),
                                   std::abs(a_over_3) * std::abs(b),
                                   std::abs(a_over_3 * a_over_3 * a_over_3)});

  const double half_q = 0.5 * q;
  const double third_p = p / 3.0;
  const double disc = half_q * half_q + third_p * third_p * third_p;  // >0: one real root
  const double disc_scale = std::max(half_q * half_q, std::abs(third_p * third_p * third_p));

  CubicRoots out;
  const bool p_negligible = std::abs(p) <= rel_tol * std::max(1e-300, scale_p);
  const bool q_negligible = std::abs(q) <= rel_tol * std::max(1e-300, scale_q);

  if (p_negligible && q_negligible) {
    // near triple root: Cardano loses everything, hand off
    out = detail::companion_roots(a, b, c);
    if (out.count == 0) out.push(-a_over_3, 3);
  } else if (std::abs(disc) <= rel_tol * std::max(1e-300, disc_scale)) {
    // double-root boundary of the depressed cubic: roots sum to zero,
    // double root at -3q/(2p), simple root at +3q/p
    const double td = -1.5 * q / p;  // p != 0 here
    const double ts = -2.0 * td;
    out.push(detail::polish_root(a, b, c, ts - a_over_3), 1);
    out.push(td - a_over_3, 2);
  } else if (disc > 0.0) {
    // one real root, Cardano with cancellation-safe branch
    const double s = std::sqrt(disc);
    const double u3 = -half_q + (half_q >= 0.0 ? -s : s);  // pick large-magnitude branch
    const double u = std::cbrt(u3);
    const double t = (u == 0.0) ? 0.0 : u - third_p / u;
    out.push(detail::polish_root(a, b, c, t - a_over_3), 1);
  } else {
    // three distinct real roots (trigonometric branch)
    const double m = 2.0 * std::sqrt(-third_p);
    double arg = 3.0 * q / (p * m);
    arg = std::clamp(arg, -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    constexpr double k2pi3 = 2.0 * std::numbers::pi / 3.0;
    for (int k = 0; k < 3; ++k) {
      const double t = m * std::cos(theta - k2pi3 * k);
      out.push(detail::polish_root(a, b, c, t - a_over_3), 1);
    }
  }

  out.sort();
  // collapse roots that polished onto each other
  if (out.count == 3) {
    const double scale = std::max({1.0, std::abs(out.values[0]), std::abs(out.values[2])});
    if (out.values[2] - out.values[1] <= 1e-12 * scale ||
        out.values[1] - out.values[0] <= 1e-12 * scale) {
      CubicRoots merged;
      int i = 0;
      while (i < 3) {
        int m_count = 1;
        while (i + m_count < 3 &&
               out.values[size_t(i + m_count)] - out.values[size_t(i)] <= 1e-12 * scale) {
          ++m_count;
        }
        merged.push(out.values[size_t(i)], m_count);
        i += m_count;
      }
      return merged;
    }
  }
  return out;
}

}  // namespace jpa
