#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lodbs/errors.hpp"

namespace lodbs {

/// The built-in studies. exp1 runs the fully dynamic boundary with a smooth
/// or random oscillatory coefficient, exp2 the mixed problem driven by
/// Clement correctors with configurable patch radii, exp3 the boundary-only
/// refinement study without any multiscale space. custom starts from the
/// exp1/exp2 data (depending on the selected boundary) and takes every knob
/// from the config file.
enum class ExperimentKind {
  exp1_smooth,
  exp1_random,
  exp2_mixed,
  exp3_boundary_refine,
  custom,
};

std::string experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_name(const std::string& name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::custom;
  DynamicBoundary dynamic = DynamicBoundary::full;
  Coefficient::Kind coefficient = Coefficient::Kind::smooth;
  double epsilon = 1.0 / 64.0;
  double coefficient_value = 1.0;  ///< constant kind only
  std::uint64_t seed = 1;
  double kappa = 0.1;
  double tau = 0.01;
  double t_end = 0.1;
  /// Coarse levels; level k means H = 2^-k on both the bulk and the trace.
  std::vector<int> h_levels = {2, 3, 4, 5, 6};
  /// Patch radius policy for plain "lod" series: "log" grows the radius as
  /// ceil(log2(1/H_Gamma)), "fixed" pins it to m_fixed.
  std::string m_policy = "log";
  int m_fixed = 2;
  InterpolationKind interpolation = InterpolationKind::nodal;
  CorrectorForm form = CorrectorForm::plain;
  /// Series to run: "uniform", "lod" (radius per policy), or "lod-mK" with a
  /// fixed radius K.
  std::vector<std::string> variants = {"uniform", "lod"};
  int reference_level = 9;  ///< reference bulk mesh n = 2^level
  int fine_level = 9;       ///< corrector mesh size h = 2^-level
  int boundary_refinements = 4;  ///< exp3: rows beyond the unrefined one
  bool paper_scale = false;
  bool write_trajectories = true;
  bool dump_matrices = false;
  std::string output_dir = "out";
};

/// Built-in defaults; paper_scale switches to the published resolutions
/// (epsilon = 2^-9, coarse levels up to 2^-8, reference 2^10).
ExperimentConfig preset(ExperimentKind kind, bool paper_scale = false);

ProblemData experiment_data(const ExperimentConfig& cfg);
Coefficient experiment_coefficient(const ExperimentConfig& cfg);

struct TrajectorySummary {
  std::vector<double> t;
  std::vector<double> norm_u;  ///< L2(Omega) norm per step
  std::vector<double> norm_p;  ///< L2(Gamma) norm of the coarse part per step
  std::vector<double> constraint_residual;
};

struct SeriesResult {
  std::string name;
  std::vector<ErrorRow> rows;
  std::vector<OrderRow> orders;
  std::vector<TrajectorySummary> trajectories;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeriesResult> series;
  double reference_seconds = 0.0;
  double total_seconds = 0.0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Write report.csv, summary.json, convergence.svg and the per-run
/// trajectory files into the result's output directory. Returns the paths
/// written. The CSV and SVG bytes depend only on the config.
std::vector<std::string> write_outputs(const ExperimentResult& result);

void write_report_csv(const ExperimentResult& result, const std::string& path);
void write_summary_json(const ExperimentResult& result, const std::string& path);
void write_convergence_svg(const ExperimentResult& result, const std::string& path);

}  // namespace lodbs
