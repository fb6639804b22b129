// SPDX-License-Identifier: Apache-2.0
//
// Coefficient functions, parameter validation, closed-form eigenvalues and
// predicted convergence exponents for the angular Kerr-Newman Dirac operator
//
//   A u = ( C(theta) u1 + u2' + S(theta) u2 ,
//          -u1' + S(theta) u1 - C(theta) u2 ),   0 < theta < pi,
//
// with C(theta) = am*cos(theta) and S(theta) = kappa/sin(theta) + aw*sin(theta).
// The sign convention of the mass coupling C matches the published benchmark
// values (lambda_1(3/2, 1/4, 1/4) = 9/4 etc.).

#pragma once

#include <cmath>
#include <string>

#include "knd/errors.hpp"

namespace knd {

/// Physical/spectral parameters of the operator. kappa is dimensionless
/// (half-integer in the physics, any real with |kappa| >= 1/2 accepted),
/// am and aw are the mass and frequency couplings.
struct OperatorParams {
  double kappa = 0.5;
  double am = 0.0;
  double aw = 0.0;
};

/// Checks the self-adjointness condition |kappa| >= 1/2 (limit point case).
/// Returns the parameters unchanged; throws KappaTooSmall otherwise.
inline OperatorParams validate_params(const OperatorParams& p) {
  if (!(std::isfinite(p.kappa) && std::isfinite(p.am) && std::isfinite(p.aw))) {
    throw KappaTooSmall("operator parameters must be finite");
  }
  if (std::abs(p.kappa) < 0.5) {
    throw KappaTooSmall("|kappa| = " + std::to_string(std::abs(p.kappa)) +
                        " < 1/2: operator is not essentially self-adjoint on "
                        "the maximal domain");
  }
  return p;
}

inline void require_spectral_index(int n) {
  if (n == 0) throw InvalidSpectralIndex("spectral index must be nonzero");
}

/// C(theta) = am*cos(theta); bounded by |am| on [0, pi].
inline double mass_coefficient(const OperatorParams& p, double theta) {
  return p.am * std::cos(theta);
}

/// S(theta) = kappa/sin(theta) + aw*sin(theta); singular at 0 and pi where
/// theta*S(theta) -> kappa and (pi-theta)*S(theta) -> kappa.
inline double singular_coefficient(const OperatorParams& p, double theta) {
  return p.kappa / std::sin(theta) + p.aw * std::sin(theta);
}

/// Zero-coupling eigenvalues: lambda_n(kappa; 0, 0) = sign(n)(|kappa| - 1/2 + |n|).
inline double exact_eigenvalue_zero(double kappa, int n) {
  validate_params({kappa, 0.0, 0.0});
  require_spectral_index(n);
  double lam = std::abs(kappa) - 0.5 + std::abs(n);
  return n > 0 ? lam : -lam;
}

/// Equal-coupling eigenvalues (aw = coupling_sign * am, coupling_sign = +-1):
///
///   lambda_n = s/2 + sign(n) * sqrt((lambda_n(kappa,0,0) - s/2)^2
///                                   + 2*s*kappa*am + am^2),   s = coupling_sign.
///
/// Throws NegativeDiscriminant if the radicand is negative (the closed form
/// then leaves the real line; not clamped). For |kappa| >= 1/2 the radicand
/// is >= (|kappa| - |am|)^2, so this is reachable only at roundoff level.
inline double exact_eigenvalue_equal_coupling(double kappa, double am,
                                              int coupling_sign, int n) {
  validate_params({kappa, am, coupling_sign >= 0 ? am : -am});
  require_spectral_index(n);
  if (coupling_sign != 1 && coupling_sign != -1) {
    throw Error("coupling sign must be +1 or -1");
  }
  const double s = static_cast<double>(coupling_sign);
  const double base = exact_eigenvalue_zero(kappa, n) - 0.5 * s;
  const double radicand = base * base + 2.0 * s * kappa * am + am * am;
  if (radicand < 0.0) {
    throw NegativeDiscriminant("equal-coupling radicand " +
                               std::to_string(radicand) + " < 0");
  }
  return 0.5 * s + (n > 0 ? 1.0 : -1.0) * std::sqrt(radicand);
}

enum class RateMode { kProven, kConjectured };

/// Convergence exponent of the second-order-spectrum residual in h.
///
/// kProven returns p(kappa)/2 with p = 1 for |kappa| = 1 or |kappa| > 3/2 and
/// p = |kappa| - 1/2 (supremum of the open constraint r < |kappa| - 1/2) for
/// |kappa| in (1/2, 3/2] \ {1}.  kConjectured returns min{1, |kappa| - 1/2}
/// with the |kappa| = 1 case returning 1.
inline double predicted_rate(double kappa, RateMode mode) {
  const double k = std::abs(kappa);
  if (k <= 0.5) {
    throw KappaTooSmall("predicted_rate requires |kappa| > 1/2");
  }
  double conjectured = (k == 1.0) ? 1.0 : std::min(1.0, k - 0.5);
  return mode == RateMode::kConjectured ? conjectured : 0.5 * conjectured;
}

}  // namespace knd
