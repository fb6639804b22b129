// SPDX-License-Identifier: Apache-2.0
//
// Reproduction harness: enclosure runs against explicit targets, the
// log-log convergence-rate study, and the (aw, am) parameter sweep.
// Emitted CSV/JSON is deterministic: identical inputs give bit-identical
// files (timings are reported out of band on stderr, never in result rows).

#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "knd/assembly.hpp"
#include "knd/enclosure.hpp"
#include "knd/operator_model.hpp"
#include "knd/quadratic_spectrum.hpp"

namespace knd {

/// One enclosure computation. wall_time_seconds is diagnostic state that is
/// serialized in the JSON round trip of the record itself but excluded from
/// emitted result files (those must be bit-identical across runs).
struct RunRecord {
  OperatorParams params{};
  double h = 0.0;
  double target = 0.0;
  std::optional<Enclosure> enclosure{};
  double residual_certificate = 0.0;
  double wall_time_seconds = 0.0;
  std::string error{};  // empty on success (soft per-target failures recorded)
};

/// Least-squares slope of log(residual) against log(h).
struct SlopeEstimate {
  double kappa = 0.0;
  std::vector<double> h_values{};
  std::vector<double> residuals{};
  double slope = 0.0;
  double predicted_proven = 0.0;
  double predicted_conjectured = 0.0;
};

inline double fit_log_slope(const std::vector<double>& h_values,
                            const std::vector<double>& residuals) {
  if (h_values.size() != residuals.size() || h_values.size() < 2) {
    throw Error("slope fit needs matching h/residual lists of length >= 2");
  }
  const auto m = static_cast<double>(h_values.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h_values.size(); ++i) {
    const double x = std::log(h_values[i]);
    const double y = std::log(residuals[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

/// Method selection policy: dense full-spectrum QZ up to pencil dimension
/// 4096, shift-and-invert around the target above.
inline SolverConfig auto_solver_config(Eigen::Index pencil_dim, double target) {
  SolverConfig cfg;
  if (pencil_dim <= 4096) {
    cfg.method = SolverConfig::Method::kFullSpectrum;
  } else {
    cfg.method = SolverConfig::Method::kShifted;
    cfg.shift = Complex(target, 0.0);
    cfg.nevp = 8;
  }
  return cfg;
}

/// Applies best_enclosure to each target; solver failures for a target are
/// recorded in that record's error field, not thrown.
inline std::vector<RunRecord> enclose_targets(
    const OperatorParams& params, int n, const std::vector<double>& targets,
    const std::vector<AprioriSegment>& segments = {},
    std::optional<SolverConfig> solver = std::nullopt) {
  validate_params(params);
  const Mesh mesh = build_mesh(n);
  const PencilMatrices pencil = assemble_pencil(params, mesh);
  std::vector<RunRecord> out;
  out.reserve(targets.size());

  // one full-spectrum solve covers every target; shifted mode resolves per target
  std::optional<SecondOrderSpectrum> shared;
  for (double target : targets) {
    RunRecord rec;
    rec.params = params;
    rec.h = mesh.h;
    rec.target = target;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const SolverConfig cfg =
          solver ? *solver : auto_solver_config(pencil.dim(), target);
      const SecondOrderSpectrum* spec = nullptr;
      SecondOrderSpectrum local;
      if (cfg.method == SolverConfig::Method::kFullSpectrum) {
        if (!shared) shared = solve_spec2(pencil, cfg);
        spec = &*shared;
      } else {
        SolverConfig shifted = cfg;
        if (!solver) shifted.shift = Complex(target, 0.0);
        local = solve_spec2(pencil, shifted);
        spec = &local;
      }
      rec.enclosure = best_enclosure(*spec, target, segments);
      rec.residual_certificate = rec.enclosure->source.residual;
    } catch (const Error& err) {
      rec.error = err.what();
    }
    rec.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    out.push_back(std::move(rec));
  }
  return out;
}

/// Residuals r_kappa(h) = |lambda_1(kappa, 1/4, 1/4) - z_h| against the
/// closed form, with z_h the nearest spectrum point; one estimate per kappa.
/// Solver failures for a single (kappa, h) are skipped and recorded.
struct ConvergenceRun {
  std::vector<SlopeEstimate> estimates;
  std::vector<std::string> skipped;  // human-readable skip notes
};

enum class ConvergenceSolver {
  kAuto,         ///< module default: full QZ up to pencil dim 4096
  kShiftedOnly,  ///< shift-invert at the closed-form target for every mesh
};

inline ConvergenceRun convergence_study(
    const std::vector<double>& kappas, const std::vector<double>& h_values,
    int index = 1, ConvergenceSolver policy = ConvergenceSolver::kAuto) {
  if (h_values.size() < 3) {
    throw Error("convergence study needs at least 3 mesh widths");
  }
  require_spectral_index(index);
  ConvergenceRun run;
  for (double kappa : kappas) {
    if (std::abs(kappa) <= 0.5) {
      throw KappaTooSmall("convergence study requires |kappa| > 1/2");
    }
    const double lambda = exact_eigenvalue_equal_coupling(kappa, 0.25, 1, index);
    SlopeEstimate est;
    est.kappa = kappa;
    est.predicted_proven = predicted_rate(kappa, RateMode::kProven);
    est.predicted_conjectured = predicted_rate(kappa, RateMode::kConjectured);
    for (double h : h_values) {
      try {
        const int n = elements_for_width(h);
        const Mesh mesh = build_mesh(n);
        const PencilMatrices pencil =
            assemble_pencil({kappa, 0.25, 0.25}, mesh);
        SolverConfig cfg = auto_solver_config(pencil.dim(), lambda);
        if (policy == ConvergenceSolver::kShiftedOnly) {
          cfg.method = SolverConfig::Method::kShifted;
          cfg.shift = Complex(lambda, 0.0);
          cfg.nevp = 8;
        }
        const SecondOrderSpectrum spec = solve_spec2(pencil, cfg);
        double best = std::numeric_limits<double>::infinity();
        for (Complex z : spec.points) best = std::min(best, std::abs(z - lambda));
        if (!std::isfinite(best)) throw EmptySpectrum("no spectrum points");
        est.h_values.push_back(mesh.h);
        est.residuals.push_back(best);
      } catch (const Error& err) {
        char note[160];
        std::snprintf(note, sizeof note, "kappa=%.17g h=%.17g skipped: %s",
                      kappa, h, err.what());
        run.skipped.emplace_back(note);
      }
    }
    if (est.h_values.size() >= 3) {
      est.slope = fit_log_slope(est.h_values, est.residuals);
    } else {
      est.slope = std::numeric_limits<double>::quiet_NaN();
    }
    run.estimates.push_back(std::move(est));
  }
  return run;
}

/// One grid point of the (aw, am) sweep; enclosures for the targets
/// lambda_{+1} and lambda_{-1}, with the closed-form reference value on the
/// equal-coupling diagonals am = +-aw.
struct SweepRecord {
  double aw = 0.0;
  double am = 0.0;
  RunRecord positive{};
  RunRecord negative{};
  std::optional<double> exact_positive{};
  std::optional<double> exact_negative{};
};

struct GridSpec {
  double aw_min = 0.0, aw_max = 0.0;
  int aw_count = 1;
  double am_min = 0.0, am_max = 0.0;
  int am_count = 1;
};

inline std::vector<double> grid_points(double lo, double hi, int count) {
  if (count < 1) throw Error("grid needs at least one point per axis");
  std::vector<double> pts;
  pts.reserve(count);
  if (count == 1) {
    pts.push_back(lo);
    return pts;
  }
  for (int i = 0; i < count; ++i) {
    pts.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
  }
  return pts;
}

inline std::vector<SweepRecord> sweep(double kappa, const GridSpec& grid,
                                      int n) {
  std::vector<SweepRecord> out;
  const double target_pos = exact_eigenvalue_zero(kappa, 1);
  const double target_neg = exact_eigenvalue_zero(kappa, -1);
  for (double aw : grid_points(grid.aw_min, grid.aw_max, grid.aw_count)) {
    for (double am : grid_points(grid.am_min, grid.am_max, grid.am_count)) {
      SweepRecord rec;
      rec.aw = aw;
      rec.am = am;
      const OperatorParams params{kappa, am, aw};
      auto records = enclose_targets(params, n, {target_pos, target_neg});
      rec.positive = records[0];
      rec.negative = records[1];
      constexpr double kDiagTol = 1e-12;
      if (std::abs(am - aw) <= kDiagTol) {
        rec.exact_positive = exact_eigenvalue_equal_coupling(kappa, am, 1, 1);
        rec.exact_negative = exact_eigenvalue_equal_coupling(kappa, am, 1, -1);
      } else if (std::abs(am + aw) <= kDiagTol) {
        rec.exact_positive = exact_eigenvalue_equal_coupling(kappa, am, -1, 1);
        rec.exact_negative = exact_eigenvalue_equal_coupling(kappa, am, -1, -1);
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// serialization

inline std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json to_json(const Enclosure& e) {
  nlohmann::json j{{"lower", e.lower},
                   {"upper", e.upper},
                   {"kind", e.kind == Enclosure::Kind::kBasic ? "basic" : "sharpened"},
                   {"z_re", e.source.z_plus.real()},
                   {"z_im", e.source.z_plus.imag()}};
  if (e.segment) {
    j["segment"] = {{"a", e.segment->a}, {"b", e.segment->b}, {"label", e.segment->label}};
  }
  return j;
}

inline nlohmann::json to_json(const RunRecord& r, bool include_wall_time) {
  nlohmann::json j{{"kappa", r.params.kappa}, {"am", r.params.am},
                   {"aw", r.params.aw},       {"h", r.h},
                   {"target", r.target},
                   {"residual_certificate", r.residual_certificate}};
  if (r.enclosure) j["enclosure"] = to_json(*r.enclosure);
  if (!r.error.empty()) j["error"] = r.error;
  if (include_wall_time) j["wall_time_seconds"] = r.wall_time_seconds;
  return j;
}

inline RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.params = {j.at("kappa").get<double>(), j.at("am").get<double>(),
              j.at("aw").get<double>()};
  r.h = j.at("h").get<double>();
  r.target = j.at("target").get<double>();
  r.residual_certificate = j.at("residual_certificate").get<double>();
  if (j.contains("wall_time_seconds")) {
    r.wall_time_seconds = j["wall_time_seconds"].get<double>();
  }
  if (j.contains("error")) r.error = j["error"].get<std::string>();
  if (j.contains("enclosure")) {
    const auto& je = j["enclosure"];
    Enclosure e;
    e.lower = je.at("lower").get<double>();
    e.upper = je.at("upper").get<double>();
    e.kind = je.at("kind").get<std::string>() == "basic"
                 ? Enclosure::Kind::kBasic
                 : Enclosure::Kind::kSharpened;
    e.source.z_plus = Complex(je.at("z_re").get<double>(), je.at("z_im").get<double>());
    e.source.z_minus = std::conj(e.source.z_plus);
    if (je.contains("segment")) {
      e.segment = AprioriSegment{je["segment"].at("a").get<double>(),
                                 je["segment"].at("b").get<double>(),
                                 je["segment"].at("label").get<std::string>()};
    }
    r.enclosure = e;
  }
  return r;
}

namespace detail {

inline void csv_enclosure_fields(std::ostream& os, const RunRecord& r) {
  if (r.enclosure) {
    const Enclosure& e = *r.enclosure;
    os << (e.kind == Enclosure::Kind::kBasic ? "basic" : "sharpened") << ','
       << format_float(e.lower) << ',' << format_float(e.upper) << ','
       << format_float(e.width()) << ',' << format_float(e.source.z_plus.real())
       << ',' << format_float(e.source.z_plus.imag()) << ','
       << format_float(r.residual_certificate) << ',';
    if (e.segment) {
      os << format_float(e.segment->a) << ',' << format_float(e.segment->b)
         << ',' << e.segment->label;
    } else {
      os << ",,none";
    }
  } else {
    os << ",,,,,,,,,";
  }
}

}  // namespace detail

/// CSV stream for enclose runs; schema "knd.enclose.v1".
inline void write_enclose_csv(std::ostream& os,
                              const std::vector<RunRecord>& records) {
  os << "# schema knd.enclose.v1\n";
  os << "kappa,am,aw,h,target,kind,lower,upper,width,z_re,z_im,"
        "residual_certificate,segment_a,segment_b,segment_label,error\n";
  for (const RunRecord& r : records) {
    os << format_float(r.params.kappa) << ',' << format_float(r.params.am)
       << ',' << format_float(r.params.aw) << ',' << format_float(r.h) << ','
       << format_float(r.target) << ',';
    detail::csv_enclosure_fields(os, r);
    os << ',' << r.error << '\n';
  }
}

inline void write_enclose_json(std::ostream& os,
                               const std::vector<RunRecord>& records) {
  nlohmann::json j{{"schema", "knd.enclose.v1"}};
  j["records"] = nlohmann::json::array();
  for (const RunRecord& r : records) j["records"].push_back(to_json(r, false));
  os << j.dump(2) << '\n';
}

/// CSV stream for the convergence study; schema "knd.convergence.v1", one row
/// per (kappa, h) with the per-kappa fit repeated.
inline void write_convergence_csv(std::ostream& os, const ConvergenceRun& run) {
  os << "# schema knd.convergence.v1\n";
  os << "kappa,h,residual,slope,predicted_proven,predicted_conjectured\n";
  for (const SlopeEstimate& est : run.estimates) {
    for (std::size_t i = 0; i < est.h_values.size(); ++i) {
      os << format_float(est.kappa) << ',' << format_float(est.h_values[i])
         << ',' << format_float(est.residuals[i]) << ','
         << format_float(est.slope) << ',' << format_float(est.predicted_proven)
         << ',' << format_float(est.predicted_conjectured) << '\n';
    }
  }
}

inline void write_convergence_json(std::ostream& os, const ConvergenceRun& run) {
  nlohmann::json j{{"schema", "knd.convergence.v1"}};
  j["estimates"] = nlohmann::json::array();
  for (const SlopeEstimate& est : run.estimates) {
    j["estimates"].push_back({{"kappa", est.kappa},
                              {"h_values", est.h_values},
                              {"residuals", est.residuals},
                              {"slope", est.slope},
                              {"predicted_proven", est.predicted_proven},
                              {"predicted_conjectured", est.predicted_conjectured}});
  }
  j["skipped"] = run.skipped;
  os << j.dump(2) << '\n';
}

/// CSV stream for the sweep; schema "knd.sweep.v1", one row per grid point.
inline void write_sweep_csv(std::ostream& os,
                            const std::vector<SweepRecord>& records) {
  os << "# schema knd.sweep.v1\n";
  os << "aw,am,"
        "kind_pos,lower_pos,upper_pos,width_pos,z_re_pos,z_im_pos,residual_pos,"
        "segment_a_pos,segment_b_pos,segment_label_pos,"
        "kind_neg,lower_neg,upper_neg,width_neg,z_re_neg,z_im_neg,residual_neg,"
        "segment_a_neg,segment_b_neg,segment_label_neg,"
        "exact_pos,exact_neg,error\n";
  for (const SweepRecord& r : records) {
    os << format_float(r.aw) << ',' << format_float(r.am) << ',';
    detail::csv_enclosure_fields(os, r.positive);
    os << ',';
    detail::csv_enclosure_fields(os, r.negative);
    os << ',';
    os << (r.exact_positive ? format_float(*r.exact_positive) : std::string{})
       << ','
       << (r.exact_negative ? format_float(*r.exact_negative) : std::string{})
       << ',' << (!r.positive.error.empty() ? r.positive.error : r.negative.error)
       << '\n';
  }
}

inline void write_sweep_json(std::ostream& os,
                             const std::vector<SweepRecord>& records) {
  nlohmann::json j{{"schema", "knd.sweep.v1"}};
  j["records"] = nlohmann::json::array();
  for (const SweepRecord& r : records) {
    nlohmann::json row{{"aw", r.aw},
                       {"am", r.am},
                       {"positive", to_json(r.positive, false)},
                       {"negative", to_json(r.negative, false)}};
    if (r.exact_positive) row["exact_positive"] = *r.exact_positive;
    if (r.exact_negative) row["exact_negative"] = *r.exact_negative;
    j["records"].push_back(std::move(row));
  }
  os << j.dump(2) << '\n';
}

}  // namespace knd
