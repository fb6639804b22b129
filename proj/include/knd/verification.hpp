// SPDX-License-Identifier: Apache-2.0
//
// Self-check suite behind the `verify` command: oracle equivalence of the
// assembly, structural matrix invariants, conjugate symmetry of computed
// spectra, and containment of closed-form eigenvalues in basic enclosures
// for the exactly solvable couplings.

#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "knd/assembly.hpp"
#include "knd/enclosure.hpp"
#include "knd/operator_model.hpp"
#include "knd/quadratic_spectrum.hpp"

namespace knd {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline CheckResult check(std::string name, bool pass, std::string detail) {
  return CheckResult{std::move(name), pass, std::move(detail)};
}

inline std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

}  // namespace detail

/// Runs the invariant suite. quad_order overrides the assembly quadrature
/// order (the default 16 is the production value; callers inject corrupted
/// values to exercise failure reporting).
inline std::vector<CheckResult> run_invariant_suite(int quad_order = 16) {
  std::vector<CheckResult> results;
  QuadratureSpec quad;
  quad.order = quad_order;

  const std::vector<OperatorParams> param_sets = {
      {0.5, 0.0, 0.0}, {1.5, 0.25, 0.75}, {-4.5, 0.005, 0.015}};

  // oracle equivalence, criterion scale
  for (const OperatorParams& p : param_sets) {
    for (int n : {4, 8, 16}) {
      try {
        const Mesh mesh = build_mesh(n);
        const PencilMatrices fast = assemble_pencil(p, mesh, quad);
        const PencilMatrices oracle = assemble_pencil_oracle(p, mesh);
        const double dev = std::max({max_relative_deviation(fast.q, oracle.q),
                                     max_relative_deviation(fast.r, oracle.r),
                                     max_relative_deviation(fast.s, oracle.s)});
        results.push_back(detail::check(
            detail::fmt("oracle equivalence kappa=%g am=%g aw=%g n=%d", p.kappa,
                        p.am, p.aw, n),
            dev <= 1e-8, detail::fmt("max entrywise relative deviation %.3e", dev)));
      } catch (const Error& err) {
        results.push_back(detail::check(
            detail::fmt("oracle equivalence kappa=%g am=%g aw=%g n=%d", p.kappa,
                        p.am, p.aw, n),
            false, err.what()));
      }
    }
  }

  // hermiticity (exact after symmetrization), S and Q definiteness
  for (const OperatorParams& p : param_sets) {
    const Mesh mesh = build_mesh(16);
    const PencilMatrices pencil = assemble_pencil(p, mesh, quad);
    const double defect =
        std::max({pencil.q.hermiticity_defect(), pencil.r.hermiticity_defect(),
                  pencil.s.hermiticity_defect()});
    results.push_back(detail::check(
        detail::fmt("hermiticity kappa=%g am=%g aw=%g", p.kappa, p.am, p.aw),
        defect == 0.0, detail::fmt("post-symmetrization defect %.3e", defect)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pencil.s.dense());
    const double smin = es.eigenvalues().minCoeff();
    results.push_back(detail::check(
        detail::fmt("mass matrix positive definite kappa=%g", p.kappa),
        smin > mesh.h / 10.0,
        detail::fmt("min eigenvalue %.3e > h/10 = %.3e", smin, mesh.h / 10.0)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eq(pencil.q.dense());
    const double qmin = eq.eigenvalues().minCoeff();
    const double qscale = std::abs(eq.eigenvalues().cwiseAbs().maxCoeff());
    results.push_back(detail::check(
        detail::fmt("bending matrix positive semidefinite kappa=%g", p.kappa),
        qmin > -1e-10 * qscale, detail::fmt("min eigenvalue %.3e", qmin)));
  }

  // mass matrix independent of the parameters (bit identical)
  {
    const Mesh mesh = build_mesh(12);
    const PencilMatrices a = assemble_pencil({1.5, 0.25, 0.75}, mesh, quad);
    const PencilMatrices b = assemble_pencil({-3.5, 0.0, 2.0}, mesh, quad);
    const bool same = a.s.dense() == b.s.dense();
    results.push_back(detail::check("mass matrix parameter independence", same,
                                    same ? "bit-identical across parameter sets"
                                         : "mass matrices differ"));
  }

  // scalar linearization examples, exact to 1e-12
  {
    Eigen::MatrixXd q(1, 1), r(1, 1), s(1, 1);
    q << 5.0;
    r << 2.0;
    s << 1.0;
    const SecondOrderSpectrum spec = solve_spec2(q, r, s);
    bool ok = spec.points.size() == 2;
    double err = 1.0;
    if (ok) {
      err = std::min(std::abs(spec.points[0] - Complex(2.0, -1.0)),
                     std::abs(spec.points[0] - Complex(2.0, 1.0))) +
            std::min(std::abs(spec.points[1] - Complex(2.0, -1.0)),
                     std::abs(spec.points[1] - Complex(2.0, 1.0)));
      ok = err <= 1e-12;
    }
    results.push_back(detail::check("scalar pencil (5,2,1) roots 2 +- i", ok,
                                    detail::fmt("total deviation %.3e", err)));
    q << 1.0;
    r << 0.0;
    const SecondOrderSpectrum spec2 = solve_spec2(q, r, s);
    bool ok2 = spec2.points.size() == 2;
    double err2 = 1.0;
    if (ok2) {
      err2 = std::abs(spec2.points[0] - Complex(0.0, -1.0)) +
             std::abs(spec2.points[1] - Complex(0.0, 1.0));
      ok2 = err2 <= 1e-12;
    }
    results.push_back(detail::check("scalar pencil (1,0,1) roots +- i", ok2,
                                    detail::fmt("total deviation %.3e", err2)));
  }

  // conjugate symmetry of a computed spectrum
  {
    const PencilMatrices pencil =
        assemble_pencil({1.5, 0.25, 0.75}, build_mesh(24), quad);
    const SecondOrderSpectrum spec = solve_spec2(pencil);
    try {
      const auto pairs = extract_pairs(spec);
      results.push_back(detail::check(
          "conjugate symmetry of spec2", true,
          detail::fmt("%zu points form %zu pairs", spec.points.size(), pairs.size())));
    } catch (const UnpairedPoint& err) {
      results.push_back(detail::check("conjugate symmetry of spec2", false, err.what()));
    }
  }

  // containment of closed-form eigenvalues (exactly solvable coupling)
  for (double kappa : {1.5, 2.5}) {
    for (int n : {64, 128}) {
      const double lambda = exact_eigenvalue_equal_coupling(kappa, 0.25, 1, 1);
      const PencilMatrices pencil =
          assemble_pencil({kappa, 0.25, 0.25}, build_mesh(n), quad);
      const SecondOrderSpectrum spec = solve_spec2(pencil);
      try {
        const Enclosure enc = best_enclosure(spec, lambda);
        const bool ok = enc.lower <= lambda && lambda <= enc.upper;
        results.push_back(detail::check(
            detail::fmt("containment kappa=%g n=%d", kappa, n), ok,
            detail::fmt("lambda_1=%.6f in [%.6f, %.6f]", lambda, enc.lower,
                        enc.upper)));
      } catch (const Error& err) {
        results.push_back(detail::check(
            detail::fmt("containment kappa=%g n=%d", kappa, n), false, err.what()));
      }
    }
  }

  // pollution-free spectral gap (zero tolerance)
  {
    const double lo = 2.30, hi = 3.10;
    const PencilMatrices pencil =
        assemble_pencil({1.5, 0.25, 0.25}, build_mesh(63), quad);
    const SecondOrderSpectrum spec = solve_spec2(pencil);
    int inside = 0;
    for (Complex z : spec.points) {
      if (disk_contains(lo, hi, z)) ++inside;
    }
    results.push_back(detail::check(
        "pollution-free disk over the (2.30, 3.10) gap", inside == 0,
        detail::fmt("%d spectrum points inside", inside)));
  }

  return results;
}

/// Prints one line per check; returns true iff all passed. The report is
/// deterministic (no timings), so repeated runs are bit-identical.
inline bool print_report(std::ostream& os, const std::vector<CheckResult>& results) {
  bool all = true;
  for (const CheckResult& r : results) {
    os << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << '\n';
    all = all && r.pass;
  }
  os << (all ? "verification passed" : "verification FAILED") << " ("
     << results.size() << " checks)\n";
  return all;
}

}  // namespace knd
