// SPDX-License-Identifier: Apache-2.0
//
// Assembly of the hermitian pencil (Q, R, S) on the piecewise-linear trial
// space: Q couples operator images, R pairs an operator image with a plain
// trial function, S is the mass matrix. Unknowns are interleaved per node as
// (u1(theta_j), u2(theta_j)), which makes all three matrices block
// tridiagonal with 2x2 blocks.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "knd/errors.hpp"
#include "knd/mesh.hpp"
#include "knd/operator_model.hpp"
#include "knd/quadrature.hpp"

namespace knd {

/// Real symmetric-structured block tridiagonal matrix with 2x2 blocks.
/// diag[i] is the block of node j = i+1; sup[i]/sub[i] couple nodes
/// (i+1, i+2) and (i+2, i+1). Blocks with |j-k| > 1 are exactly zero
/// (disjoint hat supports) and are never stored.
struct BlockTridiagonal {
  std::vector<Eigen::Matrix2d> diag;
  std::vector<Eigen::Matrix2d> sup;
  std::vector<Eigen::Matrix2d> sub;

  Eigen::Index dim() const { return 2 * static_cast<Eigen::Index>(diag.size()); }

  static BlockTridiagonal zero(int nodes) {
    BlockTridiagonal m;
    m.diag.assign(nodes, Eigen::Matrix2d::Zero());
    m.sup.assign(nodes > 0 ? nodes - 1 : 0, Eigen::Matrix2d::Zero());
    m.sub.assign(nodes > 0 ? nodes - 1 : 0, Eigen::Matrix2d::Zero());
    return m;
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim(), dim());
    const auto nb = static_cast<Eigen::Index>(diag.size());
    for (Eigen::Index i = 0; i < nb; ++i) {
      out.block<2, 2>(2 * i, 2 * i) = diag[i];
      if (i + 1 < nb) {
        out.block<2, 2>(2 * i, 2 * (i + 1)) = sup[i];
        out.block<2, 2>(2 * (i + 1), 2 * i) = sub[i];
      }
    }
    return out;
  }

  /// M <- (M + M^T)/2.
  void symmetrize() {
    for (auto& d : diag) d = 0.5 * (d + d.transpose()).eval();
    for (std::size_t i = 0; i < sup.size(); ++i) {
      Eigen::Matrix2d avg = 0.5 * (sup[i] + sub[i].transpose());
      sup[i] = avg;
      sub[i] = avg.transpose();
    }
  }

  /// max |M - M^T| entry, a measure of quadrature noise before symmetrize().
  double hermiticity_defect() const {
    double defect = 0.0;
    for (const auto& d : diag) {
      defect = std::max(defect, (d - d.transpose()).cwiseAbs().maxCoeff());
    }
    for (std::size_t i = 0; i < sup.size(); ++i) {
      defect = std::max(defect, (sup[i] - sub[i].transpose()).cwiseAbs().maxCoeff());
    }
    return defect;
  }

  double frobenius_norm() const {
    double sq = 0.0;
    for (const auto& d : diag) sq += d.squaredNorm();
    for (const auto& s : sup) sq += s.squaredNorm();
    for (const auto& s : sub) sq += s.squaredNorm();
    return std::sqrt(sq);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& d : diag) m = std::max(m, d.cwiseAbs().maxCoeff());
    for (const auto& s : sup) m = std::max(m, s.cwiseAbs().maxCoeff());
    for (const auto& s : sub) m = std::max(m, s.cwiseAbs().maxCoeff());
    return m;
  }

  bool all_finite() const {
    for (const auto& d : diag) if (!d.allFinite()) return false;
    for (const auto& s : sup) if (!s.allFinite()) return false;
    for (const auto& s : sub) if (!s.allFinite()) return false;
    return true;
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    const auto nb = static_cast<Eigen::Index>(diag.size());
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(dim());
    for (Eigen::Index i = 0; i < nb; ++i) {
      y.segment<2>(2 * i) += diag[i].cast<std::complex<double>>() * x.segment<2>(2 * i);
      if (i + 1 < nb) {
        y.segment<2>(2 * i) += sup[i].cast<std::complex<double>>() * x.segment<2>(2 * (i + 1));
        y.segment<2>(2 * (i + 1)) += sub[i].cast<std::complex<double>>() * x.segment<2>(2 * i);
      }
    }
    return y;
  }
};

/// The assembled hermitian triple, dimension 2(n-1).
struct PencilMatrices {
  OperatorParams params;
  Mesh mesh;
  BlockTridiagonal q;  // bending  <A b_j, A b_k>
  BlockTridiagonal r;  // stiffness <A b_j, b_k>
  BlockTridiagonal s;  // mass     <b_j, b_k>

  Eigen::Index dim() const { return q.dim(); }
};

/// Applies the operator to a single-component hat basis function at theta.
/// component 1 is the trial function (b_j, 0), component 2 is (0, b_j):
///
///   component 1 -> ( C(theta) b_j,  -b_j' + S(theta) b_j )
///   component 2 -> ( b_j' + S(theta) b_j,  -C(theta) b_j )
///
/// theta must lie strictly inside an element; evaluation within machine
/// epsilon of a node raises EvaluationAtNode (the derivative is undefined
/// there and S(theta) blows up at the boundary nodes).
inline Eigen::Vector2d apply_operator_to_hat(const OperatorParams& p,
                                             const Mesh& mesh, int component,
                                             int j, double theta) {
  validate_params(p);
  if (component != 1 && component != 2) {
    throw Error("component must be 1 or 2");
  }
  if (j < 1 || j > mesh.n - 1) {
    throw Error("basis index out of range");
  }
  const double nearest = std::round(theta / mesh.h) * mesh.h;
  if (std::abs(theta - nearest) <= 8.0 * std::numeric_limits<double>::epsilon() ||
      theta <= 0.0 || theta >= std::numbers::pi) {
    throw EvaluationAtNode("theta = " + std::to_string(theta) +
                           " is at (or within machine epsilon of) a mesh node");
  }
  const double b = hat_value(mesh, j, theta);
  const double db = hat_derivative(mesh, j, theta);
  const double c = mass_coefficient(p, theta);
  const double s = singular_coefficient(p, theta);
  if (component == 1) return {c * b, -db + s * b};
  return {db + s * b, -c * b};
}

namespace detail {

// Per-element contribution accumulator. Element e spans (node(e), node(e+1));
// the active hats are j = e (falling) and j = e+1 (rising), restricted to
// 1..n-1. Evaluation points are strictly interior, so the singular
// coefficient is always finite there.
inline void accumulate_element(const OperatorParams& p, const Mesh& mesh, int e,
                               const GaussRule& rule, PencilMatrices& out) {
  const double a = mesh.node(e), b = mesh.node(e + 1);
  const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
  int active[2], count = 0;
  for (int j : {e, e + 1}) {
    if (j >= 1 && j <= mesh.n - 1) active[count++] = j;
  }
  for (std::size_t qi = 0; qi < rule.nodes.size(); ++qi) {
    const double theta = mid + hw * rule.nodes[qi];
    const double w = hw * rule.weights[qi];
    const double c = mass_coefficient(p, theta);
    const double s = singular_coefficient(p, theta);
    // hat values/derivatives and operator images for the active basis pairs
    Eigen::Vector2d au[2][2], v[2][2];
    double bv[2];
    for (int ai = 0; ai < count; ++ai) {
      const int j = active[ai];
      const bool rising = (j == e + 1);
      bv[ai] = rising ? (theta - a) / (b - a) : (b - theta) / (b - a);
      const double db = (rising ? 1.0 : -1.0) / (b - a);
      au[ai][0] = Eigen::Vector2d(c * bv[ai], -db + s * bv[ai]);
      au[ai][1] = Eigen::Vector2d(db + s * bv[ai], -c * bv[ai]);
      v[ai][0] = Eigen::Vector2d(bv[ai], 0.0);
      v[ai][1] = Eigen::Vector2d(0.0, bv[ai]);
    }
    for (int ai = 0; ai < count; ++ai) {
      for (int bi = 0; bi < count; ++bi) {
        const int j = active[ai], k = active[bi];
        Eigen::Matrix2d* qb;
        Eigen::Matrix2d* rb;
        Eigen::Matrix2d* sb;
        if (j == k) {
          qb = &out.q.diag[j - 1];
          rb = &out.r.diag[j - 1];
          sb = &out.s.diag[j - 1];
        } else if (k == j + 1) {
          qb = &out.q.sup[j - 1];
          rb = &out.r.sup[j - 1];
          sb = &out.s.sup[j - 1];
        } else {
          qb = &out.q.sub[k - 1];
          rb = &out.r.sub[k - 1];
          sb = &out.s.sub[k - 1];
        }
        for (int ca = 0; ca < 2; ++ca) {
          for (int cb = 0; cb < 2; ++cb) {
            (*qb)(ca, cb) += w * au[ai][ca].dot(au[bi][cb]);
            (*rb)(ca, cb) += w * au[ai][ca].dot(v[bi][cb]);
            (*sb)(ca, cb) += w * v[ai][ca].dot(v[bi][cb]);
          }
        }
      }
    }
  }
}

}  // namespace detail

/// Assembles the pencil by per-element quadrature. With the fixed scheme the
/// two endpoint elements are integrated at double order (they carry the
/// strongest variation of the singular coefficient); the adaptive scheme
/// bisects per element until quad.rel_tol. Hermiticity is enforced by
/// averaging M <- (M + M^T)/2 once after assembly.
inline PencilMatrices assemble_pencil(const OperatorParams& params,
                                      const Mesh& mesh,
                                      const QuadratureSpec& quad = {}) {
  validate_params(params);
  if (mesh.n < 4) throw MeshTooCoarse("mesh needs n >= 4 elements");
  // Mechanical floor only; the type-level contract (order >= 2, see
  // validate_quadrature) is checked where specs enter from user input, so an
  // intentionally corrupted spec can still reach the verification suite.
  if (quad.order < 1 || !(quad.rel_tol > 0.0)) {
    throw InvalidQuadrature("quadrature spec is unusable");
  }

  PencilMatrices out;
  out.params = params;
  out.mesh = mesh;
  const int nodes = mesh.n - 1;
  out.q = BlockTridiagonal::zero(nodes);
  out.r = BlockTridiagonal::zero(nodes);
  out.s = BlockTridiagonal::zero(nodes);

  if (quad.scheme == QuadratureSpec::Scheme::kFixedGauss) {
    const GaussRule interior = gauss_legendre(quad.order);
    const GaussRule endpoint = gauss_legendre(2 * quad.order);
    for (int e = 0; e < mesh.n; ++e) {
      const bool end = (e == 0 || e == mesh.n - 1);
      detail::accumulate_element(params, mesh, e, end ? endpoint : interior, out);
    }
  } else {
    // Adaptive: integrate each scalar local pairing with the global adaptive
    // rule restricted to the element.
    for (int e = 0; e < mesh.n; ++e) {
      const double a = mesh.node(e), b = mesh.node(e + 1);
      for (int j : {e, e + 1}) {
        if (j < 1 || j > mesh.n - 1) continue;
        for (int k : {e, e + 1}) {
          if (k < 1 || k > mesh.n - 1) continue;
          Eigen::Matrix2d* blocks[3];
          if (j == k) {
            blocks[0] = &out.q.diag[j - 1];
            blocks[1] = &out.r.diag[j - 1];
            blocks[2] = &out.s.diag[j - 1];
          } else if (k == j + 1) {
            blocks[0] = &out.q.sup[j - 1];
            blocks[1] = &out.r.sup[j - 1];
            blocks[2] = &out.s.sup[j - 1];
          } else {
            blocks[0] = &out.q.sub[k - 1];
            blocks[1] = &out.r.sub[k - 1];
            blocks[2] = &out.s.sub[k - 1];
          }
          for (int ca = 0; ca < 2; ++ca) {
            for (int cb = 0; cb < 2; ++cb) {
              auto image = [&](int comp, int idx, double theta) {
                const double bv = hat_value(mesh, idx, theta);
                const double db = hat_derivative(mesh, idx, theta);
                const double c = mass_coefficient(params, theta);
                const double s = singular_coefficient(params, theta);
                return comp == 0 ? Eigen::Vector2d(c * bv, -db + s * bv)
                                 : Eigen::Vector2d(db + s * bv, -c * bv);
              };
              auto value = [&](int comp, int idx, double theta) {
                const double bv = hat_value(mesh, idx, theta);
                return comp == 0 ? Eigen::Vector2d(bv, 0.0)
                                 : Eigen::Vector2d(0.0, bv);
              };
              (*blocks[0])(ca, cb) += adaptive_integrate(
                  [&](double t) { return image(ca, j, t).dot(image(cb, k, t)); },
                  a, b, quad.rel_tol);
              (*blocks[1])(ca, cb) += adaptive_integrate(
                  [&](double t) { return image(ca, j, t).dot(value(cb, k, t)); },
                  a, b, quad.rel_tol);
              (*blocks[2])(ca, cb) += adaptive_integrate(
                  [&](double t) { return value(ca, j, t).dot(value(cb, k, t)); },
                  a, b, quad.rel_tol);
            }
          }
        }
      }
    }
  }

  if (!out.q.all_finite() || !out.r.all_finite() || !out.s.all_finite()) {
    throw Error("assembly produced non-finite entries");
  }
  out.q.symmetrize();
  out.r.symmetrize();
  out.s.symmetrize();
  return out;
}

/// Independent verification path: naive globally adaptive quadrature over the
/// support intersection of each basis pair, rel_tol 1e-13, no per-element
/// structure, no symmetrization. Guarded to n <= 64 (test scale).
inline PencilMatrices assemble_pencil_oracle(const OperatorParams& params,
                                             const Mesh& mesh) {
  validate_params(params);
  if (mesh.n < 4) throw MeshTooCoarse("mesh needs n >= 4 elements");
  if (mesh.n > 64) {
    throw OracleScaleExceeded("oracle assembly is guarded to n <= 64, got n = " +
                              std::to_string(mesh.n));
  }
  PencilMatrices out;
  out.params = params;
  out.mesh = mesh;
  const int nodes = mesh.n - 1;
  out.q = BlockTridiagonal::zero(nodes);
  out.r = BlockTridiagonal::zero(nodes);
  out.s = BlockTridiagonal::zero(nodes);

  auto image = [&](int comp, int idx, double theta) {
    const double bv = hat_value(mesh, idx, theta);
    const double db = hat_derivative(mesh, idx, theta);
    const double c = mass_coefficient(params, theta);
    const double s = singular_coefficient(params, theta);
    return comp == 0 ? Eigen::Vector2d(c * bv, -db + s * bv)
                     : Eigen::Vector2d(db + s * bv, -c * bv);
  };
  auto value = [&](int comp, int idx, double theta) {
    const double bv = hat_value(mesh, idx, theta);
    return comp == 0 ? Eigen::Vector2d(bv, 0.0) : Eigen::Vector2d(0.0, bv);
  };

  constexpr double kOracleTol = 1e-13;
  for (int j = 1; j <= nodes; ++j) {
    for (int k = std::max(1, j - 1); k <= std::min(nodes, j + 1); ++k) {
      const double lo = mesh.node(std::max(j, k) - 1);
      const double hi = mesh.node(std::min(j, k) + 1);
      Eigen::Matrix2d* qb;
      Eigen::Matrix2d* rb;
      Eigen::Matrix2d* sb;
      if (j == k) {
        qb = &out.q.diag[j - 1];
        rb = &out.r.diag[j - 1];
        sb = &out.s.diag[j - 1];
      } else if (k == j + 1) {
        qb = &out.q.sup[j - 1];
        rb = &out.r.sup[j - 1];
        sb = &out.s.sup[j - 1];
      } else {
        qb = &out.q.sub[k - 1];
        rb = &out.r.sub[k - 1];
        sb = &out.s.sub[k - 1];
      }
      for (int ca = 0; ca < 2; ++ca) {
        for (int cb = 0; cb < 2; ++cb) {
          (*qb)(ca, cb) = adaptive_integrate(
              [&](double t) { return image(ca, j, t).dot(image(cb, k, t)); },
              lo, hi, kOracleTol);
          (*rb)(ca, cb) = adaptive_integrate(
              [&](double t) { return image(ca, j, t).dot(value(cb, k, t)); },
              lo, hi, kOracleTol);
          (*sb)(ca, cb) = adaptive_integrate(
              [&](double t) { return value(ca, j, t).dot(value(cb, k, t)); },
              lo, hi, kOracleTol);
        }
      }
    }
  }
  return out;
}

/// Entrywise deviation between two assemblies, relative with a scale floor:
/// max_ij |a_ij - b_ij| / max(|b_ij|, floor_fraction * max|b|).
inline double max_relative_deviation(const BlockTridiagonal& a,
                                     const BlockTridiagonal& b,
                                     double floor_fraction = 1e-6) {
  const Eigen::MatrixXd da = a.dense(), db = b.dense();
  const double floor = floor_fraction * db.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < da.rows(); ++i) {
    for (Eigen::Index j = 0; j < da.cols(); ++j) {
      const double denom = std::max(std::abs(db(i, j)), floor);
      worst = std::max(worst, std::abs(da(i, j) - db(i, j)) / denom);
    }
  }
  return worst;
}

/// Plain-text coordinate dump: "row col re im" per stored entry, 17
/// significant digits, zero-based indices, row-major over blocks.
inline void write_matrix_coordinates(std::ostream& os,
                                     const BlockTridiagonal& m) {
  const Eigen::MatrixXd d = m.dense();
  char buf[128];
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (std::abs(static_cast<long long>(i - j)) > 3) continue;  // outside block band
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g %.17g\n",
                    static_cast<long long>(i), static_cast<long long>(j),
                    d(i, j), 0.0);
      os << buf;
    }
  }
}

}  // namespace knd
