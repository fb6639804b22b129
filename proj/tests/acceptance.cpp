// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Each numbered criterion runs at its pinned tolerance and
// prints exactly one PASS/FAIL line; the process exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "knd/assembly.hpp"
#include "knd/enclosure.hpp"
#include "knd/experiments.hpp"
#include "knd/operator_model.hpp"
#include "knd/quadratic_spectrum.hpp"

using namespace knd;

namespace {

int failures = 0;

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void report(int criterion, bool pass, const std::string& detail, double secs,
            double budget_secs) {
  const bool ok = pass && secs <= budget_secs;
  if (!ok) ++failures;
  std::printf("%s criterion %d: %s [%.1fs of %.0fs budget]\n",
              ok ? "PASS" : "FAIL", criterion, detail.c_str(), secs,
              budget_secs);
  std::fflush(stdout);
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// 1. Exact-case containment: kappa=3/2, am=aw=1/4, h=0.02. Basic enclosure
//    from the pair nearest 2.25 contains 2.25 with half-width <= 0.05.
void criterion_1() {
  Stopwatch watch;
  try {
    const int n = elements_for_width(0.02);  // 157
    const PencilMatrices pencil =
        assemble_pencil({1.5, 0.25, 0.25}, build_mesh(n));
    const SecondOrderSpectrum spec = solve_spec2(pencil);
    const ConjugatePair pair = nearest_pair(extract_pairs(spec), 2.25);
    const Enclosure enc = basic_enclosure(pair);
    const bool contains = enc.lower <= 2.25 && 2.25 <= enc.upper;
    const bool narrow = pair.height() <= 0.05;
    report(1, contains && narrow,
           fmt("n=%d enclosure [%.6f, %.6f] contains 2.25=%s half-width %.2e",
               n, enc.lower, enc.upper, contains ? "yes" : "no", pair.height()),
           watch.seconds(), 60.0);
  } catch (const std::exception& e) {
    report(1, false, e.what(), watch.seconds(), 60.0);
  }
}

// 2. Benchmark spot check at reduced resolution: kappa=3/2, am=0, aw=0.1,
//    h=0.005, shifted solve near 2.08. The basic enclosure intersects the
//    published h=0.001 interval [2.080123, 2.080500] and contains 2.080309.
void criterion_2() {
  Stopwatch watch;
  try {
    const int n = elements_for_width(0.005);  // 628
    const PencilMatrices pencil =
        assemble_pencil({1.5, 0.0, 0.1}, build_mesh(n));
    SolverConfig cfg;
    cfg.method = SolverConfig::Method::kShifted;
    cfg.shift = Complex(2.08, 0.0);
    cfg.nevp = 8;
    const SecondOrderSpectrum spec = solve_spec2(pencil, cfg);
    const ConjugatePair pair = nearest_pair(extract_pairs(spec), 2.08);
    const Enclosure enc = basic_enclosure(pair);
    const bool intersects = enc.lower <= 2.080500 && enc.upper >= 2.080123;
    const bool contains_series = enc.lower <= 2.080309 && 2.080309 <= enc.upper;
    report(2, intersects && contains_series,
           fmt("enclosure [%.6f, %.6f] intersects published=%s contains "
               "2.080309=%s",
               enc.lower, enc.upper, intersects ? "yes" : "no",
               contains_series ? "yes" : "no"),
           watch.seconds(), 600.0);
  } catch (const std::exception& e) {
    report(2, false, e.what(), watch.seconds(), 600.0);
  }
}

// 3. Sharpened-enclosure reproduction: kappa=-3.5, am=0.25, aw=0.75, n=1,
//    analytic segment (2.91227, 3.65037), h=0.005. Sharpened interval
//    intersects [3.30869, 3.30870] with width <= 5e-4.
void criterion_3() {
  Stopwatch watch;
  try {
    const AprioriSegment seg{2.91227, 3.65037, "analytic"};
    const double target = 0.5 * (seg.a + seg.b);
    const int n = elements_for_width(0.005);
    const PencilMatrices pencil =
        assemble_pencil({-3.5, 0.25, 0.75}, build_mesh(n));
    SolverConfig cfg;
    cfg.method = SolverConfig::Method::kShifted;
    cfg.shift = Complex(target, 0.0);
    cfg.nevp = 8;
    const SecondOrderSpectrum spec = solve_spec2(pencil, cfg);
    const Enclosure enc = best_enclosure(spec, target, {seg});
    const bool sharpened = enc.kind == Enclosure::Kind::kSharpened;
    const bool intersects = enc.lower <= 3.30870 && enc.upper >= 3.30869;
    const bool narrow = enc.width() <= 5e-4;
    report(3, sharpened && intersects && narrow,
           fmt("sharpened [%.8f, %.8f] width %.2e intersects published=%s",
               enc.lower, enc.upper, enc.width(), intersects ? "yes" : "no"),
           watch.seconds(), 600.0);
  } catch (const std::exception& e) {
    report(3, false, e.what(), watch.seconds(), 600.0);
  }
}

// 4. Convergence slopes with am=aw=1/4 over h in {0.1, 0.05, 0.025, 0.0125}:
//    kappa=3 slope >= 0.8; kappa=0.75 slope in [0.10, 0.40].
void criterion_4() {
  Stopwatch watch;
  try {
    const std::vector<double> grid = {0.1, 0.05, 0.025, 0.0125};
    const ConvergenceRun run = convergence_study({3.0, 0.75}, grid);
    const double slope_3 = run.estimates[0].slope;
    const double slope_075 = run.estimates[1].slope;
    const bool ok3 = slope_3 >= 0.8;
    const bool ok075 = slope_075 >= 0.10 && slope_075 <= 0.40;
    report(4, ok3 && ok075 && run.skipped.empty(),
           fmt("slope(kappa=3)=%.3f (conjectured 1), slope(kappa=0.75)=%.3f "
               "(conjectured 0.25)",
               slope_3, slope_075),
           watch.seconds(), 900.0);
  } catch (const std::exception& e) {
    report(4, false, e.what(), watch.seconds(), 900.0);
  }
}

// 5. Pollution-freeness: kappa=3/2, am=aw=1/4, h in {0.05, 0.025}; no
//    spectrum point inside the disk over (2.30, 3.10). Zero tolerance.
void criterion_5() {
  Stopwatch watch;
  try {
    int inside = 0;
    for (double h : {0.05, 0.025}) {
      const PencilMatrices pencil = assemble_pencil(
          {1.5, 0.25, 0.25}, build_mesh(elements_for_width(h)));
      const SecondOrderSpectrum spec = solve_spec2(pencil);
      for (Complex z : spec.points) {
        if (disk_contains(2.30, 3.10, z)) ++inside;
      }
    }
    report(5, inside == 0,
           fmt("%d points inside the disk over (2.30, 3.10)", inside),
           watch.seconds(), 600.0);
  } catch (const std::exception& e) {
    report(5, false, e.what(), watch.seconds(), 600.0);
  }
}

// 6. Oracle equivalence for n in {4, 8, 16} and three parameter sets, all
//    entries within 1e-8 relative (scale-floored metric).
void criterion_6() {
  Stopwatch watch;
  try {
    const std::vector<OperatorParams> sets = {
        {0.5, 0.0, 0.0}, {1.5, 0.25, 0.75}, {-4.5, 0.005, 0.015}};
    double worst = 0.0;
    for (const OperatorParams& p : sets) {
      for (int n : {4, 8, 16}) {
        const Mesh mesh = build_mesh(n);
        const PencilMatrices fast = assemble_pencil(p, mesh);
        const PencilMatrices oracle = assemble_pencil_oracle(p, mesh);
        worst = std::max({worst, max_relative_deviation(fast.q, oracle.q),
                          max_relative_deviation(fast.r, oracle.r),
                          max_relative_deviation(fast.s, oracle.s)});
      }
    }
    report(6, worst <= 1e-8,
           fmt("max entrywise relative deviation %.2e over 9 configurations",
               worst),
           watch.seconds(), 120.0);
  } catch (const std::exception& e) {
    report(6, false, e.what(), watch.seconds(), 120.0);
  }
}

// 7. Structural invariants: exact post-symmetrization hermiticity, positive
//    definite mass matrix, conjugation-closed spectrum, and the scalar
//    linearization examples to 1e-12.
void criterion_7() {
  Stopwatch watch;
  try {
    bool ok = true;
    std::string note;
    for (const OperatorParams& p :
         std::vector<OperatorParams>{{0.5, 0.0, 0.0}, {1.5, 0.25, 0.75}}) {
      const Mesh mesh = build_mesh(16);
      const PencilMatrices pencil = assemble_pencil(p, mesh);
      if (pencil.q.hermiticity_defect() != 0.0 ||
          pencil.r.hermiticity_defect() != 0.0 ||
          pencil.s.hermiticity_defect() != 0.0) {
        ok = false;
        note += "hermiticity defect nonzero; ";
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pencil.s.dense());
      if (!(es.eigenvalues().minCoeff() > 0.0)) {
        ok = false;
        note += "mass matrix not positive definite; ";
      }
    }
    {
      const PencilMatrices pencil =
          assemble_pencil({1.5, 0.25, 0.25}, build_mesh(32));
      const SecondOrderSpectrum spec = solve_spec2(pencil);
      const auto pairs = extract_pairs(spec);  // throws on any unpaired point
      if (pairs.empty()) {
        ok = false;
        note += "no conjugate pairs; ";
      }
    }
    {
      Eigen::MatrixXd q(1, 1), r(1, 1), s(1, 1);
      q << 5.0;
      r << 2.0;
      s << 1.0;
      const SecondOrderSpectrum a = solve_spec2(q, r, s);
      q << 1.0;
      r << 0.0;
      const SecondOrderSpectrum b = solve_spec2(q, r, s);
      const bool scalar_ok =
          a.points.size() == 2 && b.points.size() == 2 &&
          std::abs(a.points[1] - Complex(2.0, 1.0)) <= 1e-12 &&
          std::abs(a.points[0] - Complex(2.0, -1.0)) <= 1e-12 &&
          std::abs(b.points[1] - Complex(0.0, 1.0)) <= 1e-12 &&
          std::abs(b.points[0] - Complex(0.0, -1.0)) <= 1e-12;
      if (!scalar_ok) {
        ok = false;
        note += "scalar linearization examples off; ";
      }
    }
    report(7, ok, ok ? "hermiticity, definiteness, conjugation closure, scalar examples"
                     : note,
           watch.seconds(), 60.0);
  } catch (const std::exception& e) {
    report(7, false, e.what(), watch.seconds(), 60.0);
  }
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  if (failures == 0) {
    std::printf("acceptance: all 7 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) FAILED\n", failures);
  return 1;
}
