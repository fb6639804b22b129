// SPDX-License-Identifier: Apache-2.0
//
// Second order spectrum of the assembled pencil: the finite z with
// det(Q - 2 z R + z^2 S) = 0, computed either as the full generalized
// spectrum of the companion linearization (QZ) or by shift-and-invert
// Arnoldi around a target. Every reported point carries a relative residual
// certificate of the quadratic pencil evaluated at its recovered eigenvector.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "knd/assembly.hpp"
#include "knd/errors.hpp"

namespace knd {

using Complex = std::complex<double>;

struct SolverConfig {
  enum class Method { kFullSpectrum, kShifted };
  Method method = Method::kFullSpectrum;
  Complex shift{0.0, 0.0};
  int nevp = 8;               ///< eigenvalue count near the shift (shifted mode)
  double rtol = 1e-12;        ///< relative residual certificate bound
  double infinite_cutoff = 1e-10;  ///< B-part magnitude below which a pair is discarded
};

struct SpectrumMeta {
  Eigen::Index dim = 0;  ///< pencil dimension 2(n-1)
  double h = 0.0;
  OperatorParams params{};
  SolverConfig config{};
  double max_relative_residual = 0.0;
};

/// Finite multiset of pencil roots, conjugation-closed within tau_sym,
/// sorted by (Re, Im); residuals[i] is the certificate of points[i].
struct SecondOrderSpectrum {
  std::vector<Complex> points;
  std::vector<double> residuals;
  SpectrumMeta meta;
};

/// Pairing tolerance tau_sym = 1e-8 (1 + |z|).
inline double conjugate_tolerance(Complex z) { return 1e-8 * (1.0 + std::abs(z)); }

/// A conjugate pair of spectrum points; real points pair with themselves.
struct ConjugatePair {
  Complex z_plus{};   ///< Im >= 0 representative
  Complex z_minus{};
  double residual = 0.0;  ///< max certificate of the two points

  double center() const { return z_plus.real(); }
  double height() const { return std::abs(z_plus.imag()); }
};

/// First companion linearization: A = [[0, I], [-Q, 2R]], B = [[I, 0], [0, S]].
/// z is a finite generalized eigenvalue of (A, B) iff det(Q - 2zR + z^2 S) = 0.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize(
    const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
    const Eigen::MatrixXd& s) {
  const Eigen::Index n = q.rows();
  if (q.cols() != n || r.rows() != n || r.cols() != n || s.rows() != n ||
      s.cols() != n) {
    throw Error("linearize: Q, R, S must be square and of equal dimension");
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  a.topRightCorner(n, n).setIdentity();
  a.bottomLeftCorner(n, n) = -q;
  a.bottomRightCorner(n, n) = 2.0 * r;
  b.topLeftCorner(n, n).setIdentity();
  b.bottomRightCorner(n, n) = s;
  return {std::move(a), std::move(b)};
}

namespace detail {

// Uniform access to a pencil given either dense (Q,R,S) or assembled blocks.
struct PencilOps {
  const BlockTridiagonal* bq = nullptr;
  const BlockTridiagonal* br = nullptr;
  const BlockTridiagonal* bs = nullptr;
  const Eigen::MatrixXd* dq = nullptr;
  const Eigen::MatrixXd* dr = nullptr;
  const Eigen::MatrixXd* ds = nullptr;

  Eigen::Index dim() const { return bq ? bq->dim() : dq->rows(); }

  Eigen::MatrixXd dense_q() const { return bq ? bq->dense() : *dq; }
  Eigen::MatrixXd dense_r() const { return br ? br->dense() : *dr; }
  Eigen::MatrixXd dense_s() const { return bs ? bs->dense() : *ds; }

  Eigen::VectorXcd apply_q(const Eigen::VectorXcd& x) const {
    return bq ? bq->apply(x) : Eigen::VectorXcd(*dq * x);
  }
  Eigen::VectorXcd apply_r(const Eigen::VectorXcd& x) const {
    return br ? br->apply(x) : Eigen::VectorXcd(*dr * x);
  }
  Eigen::VectorXcd apply_s(const Eigen::VectorXcd& x) const {
    return bs ? bs->apply(x) : Eigen::VectorXcd(*ds * x);
  }

  double norm_q() const { return bq ? bq->frobenius_norm() : dq->norm(); }
  double norm_r() const { return br ? br->frobenius_norm() : dr->norm(); }
  double norm_s() const { return bs ? bs->frobenius_norm() : ds->norm(); }

  /// P(z) = Q - 2 z R + z^2 S as a sparse complex matrix.
  Eigen::SparseMatrix<Complex> pencil_at(Complex z) const {
    const Eigen::Index n = dim();
    Eigen::SparseMatrix<Complex> p(n, n);
    std::vector<Eigen::Triplet<Complex>> trip;
    auto add_block = [&](Eigen::Index row, Eigen::Index col,
                         const Eigen::Matrix2d& mq, const Eigen::Matrix2d& mr,
                         const Eigen::Matrix2d& ms) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const Complex v = mq(a, b) - 2.0 * z * mr(a, b) + z * z * ms(a, b);
          trip.emplace_back(row + a, col + b, v);
        }
      }
    };
    if (bq) {
      const auto nb = static_cast<Eigen::Index>(bq->diag.size());
      trip.reserve(12 * nb);
      for (Eigen::Index i = 0; i < nb; ++i) {
        add_block(2 * i, 2 * i, bq->diag[i], br->diag[i], bs->diag[i]);
        if (i + 1 < nb) {
          add_block(2 * i, 2 * (i + 1), bq->sup[i], br->sup[i], bs->sup[i]);
          add_block(2 * (i + 1), 2 * i, bq->sub[i], br->sub[i], bs->sub[i]);
        }
      }
    } else {
      trip.reserve(n * n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          const Complex v =
              (*dq)(i, j) - 2.0 * z * (*dr)(i, j) + z * z * (*ds)(i, j);
          if (v != 0.0) trip.emplace_back(i, j, v);
        }
      }
    }
    p.setFromTriplets(trip.begin(), trip.end());
    p.makeCompressed();
    return p;
  }
};

inline double relative_residual(const PencilOps& ops, Complex z,
                                const Eigen::VectorXcd& u, double norm_q,
                                double norm_r, double norm_s) {
  const double nu = u.norm();
  if (!(nu > 0.0)) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXcd pu =
      ops.apply_q(u) - 2.0 * z * ops.apply_r(u) + z * z * ops.apply_s(u);
  const double denom =
      norm_q + 2.0 * std::abs(z) * norm_r + std::abs(z) * std::abs(z) * norm_s;
  return pu.norm() / (denom * nu);
}

// One to three inverse-iteration steps on P(z) with a Rayleigh-quadratic
// eigenvalue update; returns the best (z, u, residual) seen.
struct Refined {
  Complex z;
  Eigen::VectorXcd u;
  double residual;
};

inline Refined refine_eigenpair(const PencilOps& ops, Complex z,
                                Eigen::VectorXcd u, double residual,
                                double norm_q, double norm_r, double norm_s,
                                double rtol) {
  Refined best{z, u, residual};
  for (int it = 0; it < 3 && best.residual > rtol; ++it) {
    Eigen::SparseMatrix<Complex> p = ops.pencil_at(z);
    Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
    lu.compute(p);
    if (lu.info() != Eigen::Success) {
      // exactly singular: nudge off the root and retry once
      z *= (1.0 + 1e-13);
      p = ops.pencil_at(z);
      lu.compute(p);
      if (lu.info() != Eigen::Success) break;
    }
    Eigen::VectorXcd w = lu.solve(u);
    if (!w.allFinite() || !(w.norm() > 0.0)) break;
    u = w / w.norm();
    // Rayleigh quadratic: (u*Su) z^2 - 2 (u*Ru) z + (u*Qu) = 0
    const Complex alpha = u.dot(ops.apply_s(u));
    const Complex beta = u.dot(ops.apply_r(u));
    const Complex gamma = u.dot(ops.apply_q(u));
    if (alpha != 0.0) {
      const Complex disc = std::sqrt(beta * beta - alpha * gamma);
      const Complex z1 = (beta + disc) / alpha;
      const Complex z2 = (beta - disc) / alpha;
      z = (std::abs(z1 - z) <= std::abs(z2 - z)) ? z1 : z2;
    }
    const double res = relative_residual(ops, z, u, norm_q, norm_r, norm_s);
    if (res < best.residual) best = Refined{z, u, res};
  }
  return best;
}

struct CandidatePoint {
  Complex z;
  double residual;
};

inline void sort_points(std::vector<CandidatePoint>& pts) {
  std::sort(pts.begin(), pts.end(), [](const CandidatePoint& a, const CandidatePoint& b) {
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
  });
}

// Full generalized spectrum of the companion pair via QZ; certificates are
// evaluated on the recovered top-half eigenvectors, with inverse-iteration
// refinement of any pair that misses rtol.
inline std::vector<CandidatePoint> solve_full(const PencilOps& ops,
                                              const SolverConfig& cfg) {
  const Eigen::Index n = ops.dim();
  auto [a, b] = linearize(ops.dense_q(), ops.dense_r(), ops.dense_s());
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges;
  ges.compute(a, b, /*computeEigenvectors=*/true);
  if (ges.info() != Eigen::Success) {
    throw SolverBreakdown("QZ iteration failed to converge");
  }
  const double norm_q = ops.norm_q(), norm_r = ops.norm_r(), norm_s = ops.norm_s();
  std::vector<CandidatePoint> pts;
  pts.reserve(2 * n);
  int unresolved = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const Complex alpha = ges.alphas()(i);
    const double beta = ges.betas()(i);
    if (std::abs(beta) <= cfg.infinite_cutoff * (std::abs(alpha) + std::abs(beta))) {
      continue;  // infinite eigenvalue (cannot occur for positive definite S)
    }
    const Complex z = alpha / beta;
    Eigen::VectorXcd u = ges.eigenvectors().col(i).head(n);
    const double un = u.norm();
    if (!(un > 1e-14 * ges.eigenvectors().col(i).norm())) continue;
    u /= un;
    double res = relative_residual(ops, z, u, norm_q, norm_r, norm_s);
    if (res > cfg.rtol) {
      const Refined ref =
          refine_eigenpair(ops, z, u, res, norm_q, norm_r, norm_s, cfg.rtol);
      // keep the QZ root (the multiset comes from the backward-stable QZ);
      // the refined vector only serves the certificate
      res = std::min(res, relative_residual(ops, z, ref.u, norm_q, norm_r, norm_s));
      if (res > cfg.rtol) ++unresolved;
    }
    pts.push_back({z, res});
  }
  if (unresolved > 0) {
    throw NoConvergence(std::to_string(unresolved) +
                        " eigenpairs missed the residual certificate rtol");
  }
  return pts;
}

// Shift-and-invert Arnoldi for the nevp eigenvalues nearest the shift.
// The companion solve (A - sigma B) w = B v reduces to one solve with
// P(sigma) = Q - 2 sigma R + sigma^2 S of half the dimension:
//   wx = -P(sigma)^{-1} (g - (2R - sigma S) f),  wy = f + sigma wx
// for rhs (f, g) = (x, S y).
inline std::vector<CandidatePoint> solve_shifted(const PencilOps& ops,
                                                 const SolverConfig& cfg) {
  if (cfg.nevp < 1) throw Error("shifted solve needs nevp >= 1");
  const Eigen::Index n = ops.dim();
  const Complex sigma = cfg.shift;
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(ops.pencil_at(sigma));
  if (lu.info() != Eigen::Success) {
    throw SolverBreakdown(
        "shift-invert factorization of P(shift) is singular; perturb the shift");
  }
  const double norm_q = ops.norm_q(), norm_r = ops.norm_r(), norm_s = ops.norm_s();

  auto apply_m = [&](const Eigen::VectorXcd& v) {
    const Eigen::VectorXcd f = v.head(n);
    const Eigen::VectorXcd g = ops.apply_s(v.tail(n));
    const Eigen::VectorXcd rhs = g - (2.0 * ops.apply_r(f) - sigma * ops.apply_s(f));
    Eigen::VectorXcd wx = -lu.solve(rhs);
    Eigen::VectorXcd out(2 * n);
    out.head(n) = wx;
    out.tail(n) = f + sigma * wx;
    return out;
  };

  const int nevp = static_cast<int>(
      std::min<Eigen::Index>(cfg.nevp, 2 * n));  // a pencil has at most 2N roots
  const Eigen::Index max_m =
      std::min<Eigen::Index>(2 * n, std::max<Eigen::Index>(512, 8 * cfg.nevp));
  Eigen::Index m = std::min<Eigen::Index>(
      2 * n, std::max<Eigen::Index>(48, 4 * cfg.nevp));

  std::vector<CandidatePoint> accepted;
  while (true) {
    // Arnoldi with full reorthogonalization from a fixed start vector.
    Eigen::MatrixXcd v(2 * n, m + 1);
    Eigen::MatrixXcd hess = Eigen::MatrixXcd::Zero(m + 1, m);
    v.col(0).setConstant(Complex(1.0, 0.0) / std::sqrt(static_cast<double>(2 * n)));
    Eigen::Index steps = m;
    for (Eigen::Index k = 0; k < m; ++k) {
      Eigen::VectorXcd w = apply_m(v.col(k));
      if (!w.allFinite()) throw SolverBreakdown("shift-invert solve produced non-finite values");
      for (Eigen::Index i = 0; i <= k; ++i) {
        const Complex c = v.col(i).dot(w);
        hess(i, k) += c;
        w -= c * v.col(i);
      }
      for (Eigen::Index i = 0; i <= k; ++i) {
        const Complex c = v.col(i).dot(w);
        hess(i, k) += c;
        w -= c * v.col(i);
      }
      const double nw = w.norm();
      hess(k + 1, k) = nw;
      if (nw < 1e-14) {
        steps = k + 1;
        break;
      }
      v.col(k + 1) = w / nw;
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ritz(hess.topLeftCorner(steps, steps));
    if (ritz.info() != Eigen::Success) throw SolverBreakdown("Ritz eigensolve failed");

    struct Cand { Complex z; Eigen::Index idx; };
    std::vector<Cand> cands;
    for (Eigen::Index i = 0; i < steps; ++i) {
      const Complex mu = ritz.eigenvalues()(i);
      if (std::abs(mu) < cfg.infinite_cutoff) continue;  // z effectively at infinity
      cands.push_back({sigma + 1.0 / mu, i});
    }
    std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
      const double da = std::abs(a.z - sigma), db = std::abs(b.z - sigma);
      if (da != db) return da < db;
      if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
      return a.z.imag() < b.z.imag();
    });

    accepted.clear();
    for (const Cand& c : cands) {
      if (static_cast<int>(accepted.size()) >= nevp) break;
      bool duplicate = false;
      for (const CandidatePoint& p : accepted) {
        if (std::abs(p.z - c.z) <= conjugate_tolerance(c.z)) { duplicate = true; break; }
      }
      if (duplicate) continue;
      Eigen::VectorXcd u = (v.leftCols(steps) * ritz.eigenvectors().col(c.idx)).head(n);
      if (!(u.norm() > 0.0)) continue;
      u /= u.norm();
      Complex z = c.z;
      double res = relative_residual(ops, z, u, norm_q, norm_r, norm_s);
      if (res > cfg.rtol) {
        const Refined ref = refine_eigenpair(ops, z, u, res, norm_q, norm_r,
                                             norm_s, cfg.rtol);
        z = ref.z;
        res = ref.residual;
      }
      if (res <= cfg.rtol) accepted.push_back({z, res});
    }
    if (static_cast<int>(accepted.size()) >= nevp) break;
    if (steps < m) {
      // Arnoldi breakdown: the Krylov space from the fixed start vector is
      // exhausted, so no larger subspace can add directions. Return what was
      // certified if anything, otherwise report failure.
      if (!accepted.empty()) break;
      throw NoConvergence("shifted solve: Krylov space exhausted before any "
                          "eigenvalue was certified");
    }
    if (m >= max_m) {
      throw NoConvergence("shifted solve: only " +
                          std::to_string(accepted.size()) + " of " +
                          std::to_string(nevp) +
                          " eigenvalues certified within the subspace budget");
    }
    m = std::min<Eigen::Index>(max_m, 2 * m);
  }

  // The pencil is real, so the spectrum is closed under conjugation; add the
  // partner of every certified nonreal point (the certificate transfers
  // exactly) and drop duplicates.
  std::vector<CandidatePoint> closed = accepted;
  for (const CandidatePoint& p : accepted) {
    if (std::abs(p.z.imag()) <= conjugate_tolerance(p.z)) continue;
    const Complex zc = std::conj(p.z);
    bool present = false;
    for (const CandidatePoint& q : closed) {
      if (std::abs(q.z - zc) <= conjugate_tolerance(zc)) { present = true; break; }
    }
    if (!present) closed.push_back({zc, p.residual});
  }
  return closed;
}

inline SecondOrderSpectrum finish(std::vector<CandidatePoint> pts,
                                  SpectrumMeta meta) {
  sort_points(pts);
  SecondOrderSpectrum spec;
  spec.points.reserve(pts.size());
  spec.residuals.reserve(pts.size());
  double worst = 0.0;
  for (const CandidatePoint& p : pts) {
    spec.points.push_back(p.z);
    spec.residuals.push_back(p.residual);
    worst = std::max(worst, p.residual);
  }
  meta.max_relative_residual = worst;
  spec.meta = std::move(meta);
  return spec;
}

}  // namespace detail

/// Solves the quadratic eigenvalue problem for an assembled pencil.
inline SecondOrderSpectrum solve_spec2(const PencilMatrices& pencil,
                                       const SolverConfig& cfg = {}) {
  detail::PencilOps ops;
  ops.bq = &pencil.q;
  ops.br = &pencil.r;
  ops.bs = &pencil.s;
  SpectrumMeta meta;
  meta.dim = pencil.dim();
  meta.h = pencil.mesh.h;
  meta.params = pencil.params;
  meta.config = cfg;
  auto pts = cfg.method == SolverConfig::Method::kFullSpectrum
                 ? detail::solve_full(ops, cfg)
                 : detail::solve_shifted(ops, cfg);
  return detail::finish(std::move(pts), std::move(meta));
}

/// Same for a plain dense hermitian triple (used by tests and small models).
inline SecondOrderSpectrum solve_spec2(const Eigen::MatrixXd& q,
                                       const Eigen::MatrixXd& r,
                                       const Eigen::MatrixXd& s,
                                       const SolverConfig& cfg = {}) {
  detail::PencilOps ops;
  ops.dq = &q;
  ops.dr = &r;
  ops.ds = &s;
  SpectrumMeta meta;
  meta.dim = q.rows();
  meta.config = cfg;
  auto pts = cfg.method == SolverConfig::Method::kFullSpectrum
                 ? detail::solve_full(ops, cfg)
                 : detail::solve_shifted(ops, cfg);
  return detail::finish(std::move(pts), std::move(meta));
}

/// Greedy conjugate pairing: each Im > tau point is matched to its nearest
/// conjugate partner, near-real points pair with themselves. Every input
/// point is consumed exactly once; a nonreal point without a partner within
/// tau_sym raises UnpairedPoint.
inline std::vector<ConjugatePair> extract_pairs(const SecondOrderSpectrum& spec) {
  struct Tagged {
    Complex z;
    double res;
    bool used = false;
  };
  std::vector<Tagged> pos, neg;
  std::vector<ConjugatePair> pairs;
  std::vector<std::size_t> order(spec.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (spec.points[a].real() != spec.points[b].real())
      return spec.points[a].real() < spec.points[b].real();
    return spec.points[a].imag() < spec.points[b].imag();
  });
  for (std::size_t i : order) {
    const Complex z = spec.points[i];
    const double res = i < spec.residuals.size() ? spec.residuals[i] : 0.0;
    if (std::abs(z.imag()) <= conjugate_tolerance(z)) {
      pairs.push_back(ConjugatePair{z, z, res});
    } else if (z.imag() > 0.0) {
      pos.push_back({z, res});
    } else {
      neg.push_back({z, res});
    }
  }
  for (const Tagged& p : pos) {
    const Complex want = std::conj(p.z);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < neg.size(); ++i) {
      if (neg[i].used) continue;
      const double d = std::abs(neg[i].z - want);
      if (d < best) {
        best = d;
        best_i = i;
      }
    }
    if (!(best <= conjugate_tolerance(p.z))) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "point %.12g%+.12gi has no conjugate partner",
                    p.z.real(), p.z.imag());
      throw UnpairedPoint(buf);
    }
    neg[best_i].used = true;
    pairs.push_back(ConjugatePair{p.z, neg[best_i].z,
                                  std::max(p.res, neg[best_i].res)});
  }
  for (const Tagged& q : neg) {
    if (!q.used) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "point %.12g%+.12gi has no conjugate partner",
                    q.z.real(), q.z.imag());
      throw UnpairedPoint(buf);
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const ConjugatePair& a, const ConjugatePair& b) {
    if (a.center() != b.center()) return a.center() < b.center();
    return a.height() < b.height();
  });
  return pairs;
}

/// The pair minimizing |center - target|; ties break toward smaller height,
/// then smaller center.
inline ConjugatePair nearest_pair(const std::vector<ConjugatePair>& pairs,
                                  double target) {
  if (pairs.empty()) throw EmptySpectrum("no conjugate pairs available");
  const ConjugatePair* best = &pairs.front();
  for (const ConjugatePair& p : pairs) {
    const double dp = std::abs(p.center() - target);
    const double db = std::abs(best->center() - target);
    if (dp < db ||
        (dp == db && (p.height() < best->height() ||
                      (p.height() == best->height() && p.center() < best->center())))) {
      best = &p;
    }
  }
  return *best;
}

/// Spectrum dump: one point per line, "re im" at 17 significant digits,
/// sorted by (Re, Im).
inline void write_spectrum(std::ostream& os, const SecondOrderSpectrum& spec) {
  std::vector<Complex> pts = spec.points;
  std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  char buf[80];
  for (Complex z : pts) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", z.real(), z.imag());
    os << buf;
  }
}

}  // namespace knd
