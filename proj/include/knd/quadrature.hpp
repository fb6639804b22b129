// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "knd/errors.hpp"

namespace knd {

/// Integration policy for pencil assembly. The fixed scheme uses a
/// Gauss-Legendre rule of the given order per element (endpoint elements are
/// assembled at twice the order); the adaptive scheme bisects each element
/// until rel_tol is met.
struct QuadratureSpec {
  enum class Scheme { kFixedGauss, kAdaptive };
  Scheme scheme = Scheme::kFixedGauss;
  int order = 16;
  double rel_tol = 1e-12;
};

inline QuadratureSpec validate_quadrature(const QuadratureSpec& q) {
  if (q.order < 2) {
    throw InvalidQuadrature("quadrature order must be >= 2, got " +
                            std::to_string(q.order));
  }
  if (!(q.rel_tol > 0.0 && q.rel_tol < 1e-3)) {
    throw InvalidQuadrature("quadrature rel_tol must lie in (0, 1e-3)");
  }
  return q;
}

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_m; exact for
/// polynomials of degree 2m-1.
inline GaussRule gauss_legendre(int m) {
  GaussRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    // Chebyshev initial guess for the i-th positive root.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // one clean-up step
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= m; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = m * (x * p1 - p0) / (x * x - 1.0);
        x -= p1 / dp;
        break;
      }
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[m - 1 - i] = x;
    rule.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

namespace detail {

// 15-point Kronrod rule with embedded 7-point Gauss (QUADPACK dqk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkEstimate {
  double integral = 0.0;  // K15 value
  double error = 0.0;     // |K15 - G7|
  double abs_integral = 0.0;
};

template <typename F>
GkEstimate gauss_kronrod_15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  double k15 = 0.0, g7 = 0.0, kabs = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = hw * kKronrodNodes[i];
    if (i == 7) {
      const double fc = f(c);
      k15 += kKronrodWeights[7] * fc;
      g7 += kGaussWeights[3] * fc;
      kabs += kKronrodWeights[7] * std::abs(fc);
      break;
    }
    const double fl = f(c - x), fr = f(c + x);
    k15 += kKronrodWeights[i] * (fl + fr);
    kabs += kKronrodWeights[i] * (std::abs(fl) + std::abs(fr));
    if (i % 2 == 1) g7 += kGaussWeights[i / 2] * (fl + fr);
  }
  return GkEstimate{hw * k15, hw * std::abs(k15 - g7), hw * kabs};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b]. Bisects the
/// interval with the largest error estimate until the accumulated estimate
/// falls below max(rel_tol*|I|, roundoff floor) or the interval budget is
/// spent, in which case QuadratureNonConvergence is raised.
template <typename F>
double adaptive_integrate(const F& f, double a, double b, double rel_tol,
                          std::size_t max_intervals = (1u << 15)) {
  if (!(b > a)) return 0.0;
  struct Piece {
    double a, b;
    detail::GkEstimate est;
  };
  auto worse = [](const Piece& x, const Piece& y) {
    return x.est.error < y.est.error;
  };
  std::priority_queue<Piece, std::vector<Piece>, decltype(worse)> queue(worse);
  queue.push({a, b, detail::gauss_kronrod_15(f, a, b)});
  double total = queue.top().est.integral;
  double err = queue.top().est.error;
  double abs_total = queue.top().est.abs_integral;
  const double eps = std::numeric_limits<double>::epsilon();
  std::size_t used = 1;
  while (true) {
    const double floor = 4.0 * eps * abs_total;
    if (err <= std::max(rel_tol * std::abs(total), floor)) return total;
    if (used >= max_intervals) {
      throw QuadratureNonConvergence(
          "adaptive quadrature: tolerance " + std::to_string(rel_tol) +
          " unreached within " + std::to_string(max_intervals) + " intervals");
    }
    Piece p = queue.top();
    queue.pop();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      // interval at roundoff width; keep its estimate and accept
      queue.push(p);
      return total;
    }
    Piece l{p.a, mid, detail::gauss_kronrod_15(f, p.a, mid)};
    Piece r{mid, p.b, detail::gauss_kronrod_15(f, mid, p.b)};
    total += l.est.integral + r.est.integral - p.est.integral;
    err += l.est.error + r.est.error - p.est.error;
    abs_total += l.est.abs_integral + r.est.abs_integral - p.est.abs_integral;
    queue.push(l);
    queue.push(r);
    ++used;
  }
}

}  // namespace knd
