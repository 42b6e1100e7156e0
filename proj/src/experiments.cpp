#include "lodbs/experiments.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lodbs/plot.hpp"

namespace lodbs {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// "lod-m3" -> 3, anything else -> -1.
int fixed_radius_of(const std::string& variant) {
  const std::string prefix = "lod-m";
  if (variant.rfind(prefix, 0) != 0) return -1;
  const int m = std::stoi(variant.substr(prefix.size()));
  if (m < 0) throw std::invalid_argument("variant radius must be >= 0");
  return m;
}

int log_radius(const BoundaryMesh& gamma) {
  const double h = gamma.segment_length(0);
  return static_cast<int>(std::ceil(std::log2(1.0 / h) - 1e-12));
}

TrajectorySummary summarize(const PdaeSystem& sys, const Trajectory& traj) {
  TrajectorySummary ts;
  const SpMat mass_p =
      assemble_boundary_matrices(sys.p_space, make_constant_coefficient(1.0)).mass;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    ts.t.push_back(traj.times[k]);
    ts.norm_u.push_back(std::sqrt(traj.u[k].dot(sys.m_u * traj.u[k])));
    ts.norm_p.push_back(std::sqrt(traj.p[k].dot(mass_p * traj.p[k])));
    ts.constraint_residual.push_back(traj.constraint_residual[k]);
  }
  return ts;
}

void dump_system(const ExperimentConfig& cfg, const std::string& series, int row,
                 const PdaeSystem& sys) {
  const fs::path dir = fs::path(cfg.output_dir) / "matrices";
  fs::create_directories(dir);
  const std::string stem = series + "-row" + std::to_string(row) + "-";
  write_matrix_market(sys.m_u, (dir / (stem + "mass_u.mtx")).string());
  write_matrix_market(sys.k_u, (dir / (stem + "stiff_u.mtx")).string());
  write_matrix_market(sys.m_p, (dir / (stem + "mass_p.mtx")).string());
  write_matrix_market(sys.a_p, (dir / (stem + "stiff_p.mtx")).string());
  write_matrix_market(sys.b_u, (dir / (stem + "b_u.mtx")).string());
  write_matrix_market(sys.b_p, (dir / (stem + "b_p.mtx")).string());
}

SeriesResult run_series(const ExperimentConfig& cfg, const std::string& name,
                        const Coefficient& c, const ProblemData& data,
                        const ReferenceSolution& ref,
                        std::vector<std::string>& failures) {
  SeriesResult series;
  series.name = name;
  const bool uniform = name == "uniform";
  if (!uniform && name != "lod" && fixed_radius_of(name) < 0)
    throw std::invalid_argument("unknown variant '" + name + "'");

  for (std::size_t i = 0; i < cfg.h_levels.size(); ++i) {
    const int lvl = cfg.h_levels[i];
    try {
      const BulkMesh bulk = build_bulk_mesh(1 << lvl, cfg.dynamic);
      const BoundaryMesh gamma = restrict_to_boundary(bulk, cfg.dynamic);
      PdaeSystem sys;
      int m = 0;
      if (uniform) {
        sys = assemble_system(bulk, gamma, c, cfg.kappa, Variant::standard_fem);
      } else {
        const int fixed = fixed_radius_of(name);
        m = fixed >= 0               ? fixed
            : cfg.m_policy == "fixed" ? cfg.m_fixed
                                      : log_radius(gamma);
        if (cfg.fine_level < lvl)
          throw std::invalid_argument("fine_level below the coarse level");
        const BoundaryMesh fine = refine_boundary(gamma, cfg.fine_level - lvl);
        const CorrectorBasis cb =
            compute_correctors(fine, gamma, c, m, cfg.form, cfg.interpolation);
        sys = assemble_system(bulk, gamma, c, cfg.kappa, Variant::pglod, &fine, &cb);
      }
      const Trajectory traj = implicit_euler(sys, data, cfg.tau, cfg.t_end);
      series.rows.push_back(error_norms(sys, traj, ref, m));
      if (cfg.write_trajectories)
        series.trajectories.push_back(summarize(sys, traj));
      if (cfg.dump_matrices)
        dump_system(cfg, name, static_cast<int>(series.rows.size()) - 1, sys);
    } catch (const std::exception& e) {
      failures.push_back(name + " level " + std::to_string(lvl) + ": " + e.what());
    }
  }
  series.orders = observed_orders(series.rows);
  return series;
}

/// exp3 mode: fixed bulk level, successively refined p mesh.
SeriesResult run_refinement_series(const ExperimentConfig& cfg,
                                   const std::string& name, const Coefficient& c,
                                   const ProblemData& data,
                                   const ReferenceSolution& ref,
                                   std::vector<std::string>& failures) {
  SeriesResult series;
  series.name = name;
  if (name != "uniform") {
    failures.push_back(name + ": the refinement study runs standard elements only");
    return series;
  }
  const int lvl = cfg.h_levels.front();
  const BulkMesh bulk = build_bulk_mesh(1 << lvl, cfg.dynamic);
  const BoundaryMesh gamma = restrict_to_boundary(bulk, cfg.dynamic);
  for (int r = 0; r <= cfg.boundary_refinements; ++r) {
    try {
      const BoundaryMesh p_mesh = refine_boundary(gamma, r);
      const PdaeSystem sys =
          assemble_system(bulk, p_mesh, c, cfg.kappa, Variant::standard_fem);
      const Trajectory traj = implicit_euler(sys, data, cfg.tau, cfg.t_end);
      series.rows.push_back(error_norms(sys, traj, ref, 0));
      if (cfg.write_trajectories)
        series.trajectories.push_back(summarize(sys, traj));
      if (cfg.dump_matrices)
        dump_system(cfg, name, static_cast<int>(series.rows.size()) - 1, sys);
    } catch (const std::exception& e) {
      failures.push_back(name + " refinement " + std::to_string(r) + ": " +
                         e.what());
    }
  }
  series.orders = observed_orders(series.rows);
  return series;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = experiment_name(cfg.kind);
  j["paper_scale"] = cfg.paper_scale;
  j["dynamic_boundary"] = cfg.dynamic == DynamicBoundary::full ? "full" : "bottom";
  j["coefficient"] = cfg.coefficient == Coefficient::Kind::constant ? "constant"
                     : cfg.coefficient == Coefficient::Kind::smooth ? "smooth"
                                                                    : "random";
  j["epsilon"] = cfg.epsilon;
  j["coefficient_value"] = cfg.coefficient_value;
  j["seed"] = cfg.seed;
  j["kappa"] = cfg.kappa;
  j["tau"] = cfg.tau;
  j["t_end"] = cfg.t_end;
  j["h_levels"] = cfg.h_levels;
  j["m_policy"] = cfg.m_policy;
  j["m_fixed"] = cfg.m_fixed;
  j["interpolation"] =
      cfg.interpolation == InterpolationKind::nodal ? "nodal" : "clement";
  j["form"] = cfg.form == CorrectorForm::plain ? "plain" : "shifted";
  j["variants"] = cfg.variants;
  j["reference_level"] = cfg.reference_level;
  j["fine_level"] = cfg.fine_level;
  j["boundary_refinements"] = cfg.boundary_refinements;
  j["write_trajectories"] = cfg.write_trajectories;
  j["dump_matrices"] = cfg.dump_matrices;
  j["output_dir"] = cfg.output_dir;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::exp1_smooth: return "exp1-smooth";
    case ExperimentKind::exp1_random: return "exp1-random";
    case ExperimentKind::exp2_mixed: return "exp2-mixed";
    case ExperimentKind::exp3_boundary_refine: return "exp3-boundary-refine";
    case ExperimentKind::custom: return "custom";
  }
  throw std::logic_error("experiment_name: bad kind");
}

ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "exp1-smooth") return ExperimentKind::exp1_smooth;
  if (name == "exp1-random") return ExperimentKind::exp1_random;
  if (name == "exp2-mixed") return ExperimentKind::exp2_mixed;
  if (name == "exp3-boundary-refine") return ExperimentKind::exp3_boundary_refine;
  if (name == "custom") return ExperimentKind::custom;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

ExperimentConfig preset(ExperimentKind kind, bool paper_scale) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.paper_scale = paper_scale;
  switch (kind) {
    case ExperimentKind::exp1_smooth:
    case ExperimentKind::exp1_random:
      cfg.dynamic = DynamicBoundary::full;
      cfg.coefficient = kind == ExperimentKind::exp1_smooth
                            ? Coefficient::Kind::smooth
                            : Coefficient::Kind::random;
      cfg.interpolation = InterpolationKind::nodal;
      cfg.form = CorrectorForm::plain;
      cfg.variants = {"uniform", "lod"};
      if (paper_scale) {
        cfg.epsilon = 1.0 / 512.0;
        cfg.h_levels = {2, 3, 4, 5, 6, 7, 8};
        cfg.reference_level = 10;
        cfg.fine_level = 11;
      }
      break;
    case ExperimentKind::exp2_mixed:
      cfg.dynamic = DynamicBoundary::bottom;
      cfg.coefficient = Coefficient::Kind::random;
      cfg.interpolation = InterpolationKind::clement;
      cfg.form = CorrectorForm::shifted;
      cfg.variants = {"lod", "lod-m1", "lod-m2", "lod-m3"};
      if (paper_scale) {
        cfg.epsilon = 1.0 / 512.0;
        cfg.h_levels = {2, 3, 4, 5, 6, 7, 8};
        cfg.reference_level = 10;
        cfg.fine_level = 11;
      }
      break;
    case ExperimentKind::exp3_boundary_refine:
      cfg.dynamic = DynamicBoundary::bottom;
      cfg.coefficient = Coefficient::Kind::smooth;
      cfg.epsilon = 0.25;
      cfg.h_levels = {3};
      cfg.variants = {"uniform"};
      cfg.boundary_refinements = paper_scale ? 6 : 4;
      cfg.reference_level = paper_scale ? 10 : 9;
      break;
    case ExperimentKind::custom:
      break;
  }
  return cfg;
}

ProblemData experiment_data(const ExperimentConfig& cfg) {
  constexpr double pi = std::numbers::pi;
  ProblemData data;
  data.f = [](double, double, double) { return 1.0; };
  const bool full = cfg.dynamic == DynamicBoundary::full;
  switch (cfg.kind) {
    case ExperimentKind::exp1_smooth:
    case ExperimentKind::exp1_random:
      data.g = [](double t, double) { return t; };
      data.u0 = [pi](double x, double y) {
        return std::sin(pi * x) * std::cos(2.5 * pi * y + 1.0);
      };
      break;
    case ExperimentKind::exp2_mixed:
      data.g = [](double, double) { return 0.0; };
      data.u0 = [pi](double x, double y) {
        return std::sin(pi * x) * std::cos(2.5 * pi * y);
      };
      break;
    case ExperimentKind::exp3_boundary_refine:
      data.g = [](double, double) { return 0.0; };
      data.u0 = [pi](double x, double y) {
        return std::sin(3.0 * pi * x) * std::cos(2.5 * pi * y + 1.0);
      };
      break;
    case ExperimentKind::custom:
      if (full) {
        data.g = [](double t, double) { return t; };
        data.u0 = [pi](double x, double y) {
          return std::sin(pi * x) * std::cos(2.5 * pi * y + 1.0);
        };
      } else {
        data.g = [](double, double) { return 0.0; };
        data.u0 = [pi](double x, double y) {
          return std::sin(pi * x) * std::cos(2.5 * pi * y);
        };
      }
      break;
  }
  return data;
}

Coefficient experiment_coefficient(const ExperimentConfig& cfg) {
  switch (cfg.coefficient) {
    case Coefficient::Kind::constant:
      return make_constant_coefficient(cfg.coefficient_value);
    case Coefficient::Kind::smooth:
      return make_smooth_coefficient(cfg.epsilon);
    case Coefficient::Kind::random: {
      const double total = cfg.dynamic == DynamicBoundary::full ? 4.0 : 1.0;
      return make_random_coefficient(cfg.epsilon, cfg.seed, total);
    }
  }
  throw std::logic_error("experiment_coefficient: bad kind");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.h_levels.empty())
    throw std::invalid_argument("run_experiment: h_levels is empty");
  for (int lvl : cfg.h_levels)
    if (lvl < 1 || lvl > cfg.reference_level)
      throw std::invalid_argument(
          "run_experiment: h_levels must lie in [1, reference_level]");

  ExperimentResult result;
  result.config = cfg;
  const auto t0 = Clock::now();

  const Coefficient c = experiment_coefficient(cfg);
  const ProblemData data = experiment_data(cfg);

  const auto t_ref = Clock::now();
  const ReferenceSolution ref = compute_reference(
      1 << cfg.reference_level, cfg.dynamic, c, data, cfg.kappa, cfg.tau, cfg.t_end);
  result.reference_seconds = seconds_since(t_ref);

  const bool refinement_mode = cfg.kind == ExperimentKind::exp3_boundary_refine;
  for (const std::string& name : cfg.variants) {
    result.series.push_back(
        refinement_mode
            ? run_refinement_series(cfg, name, c, data, ref, result.failures)
            : run_series(cfg, name, c, data, ref, result.failures));
  }
  result.total_seconds = seconds_since(t0);
  return result;
}

void write_report_csv(const ExperimentResult& result, const std::string& path) {
  std::ostringstream out;
  out << "series,H_Omega,H_Gamma,m,err_u_L2,err_p_L2,err_u_H1,err_p_H1,"
         "err_p_full_H1,order_u_L2,order_p_L2,order_u_H1,order_p_H1,"
         "order_p_full_H1\n";
  for (const SeriesResult& s : result.series) {
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      const ErrorRow& r = s.rows[i];
      const OrderRow& o = s.orders[i];
      out << s.name << ',' << format_double(r.H_Omega) << ','
          << format_double(r.H_Gamma) << ',' << r.m << ','
          << format_double(r.err_u_L2) << ',' << format_double(r.err_p_L2) << ','
          << format_double(r.err_u_H1) << ',' << format_double(r.err_p_H1) << ','
          << format_double(r.err_p_full_H1) << ',' << format_double(o.u_L2) << ','
          << format_double(o.p_L2) << ',' << format_double(o.u_H1) << ','
          << format_double(o.p_H1) << ',' << format_double(o.p_full_H1) << '\n';
    }
  }
  write_text_file(path, out.str());
}

void write_summary_json(const ExperimentResult& result, const std::string& path) {
  json j;
  j["config"] = config_json(result.config);
  j["reference_seconds"] = result.reference_seconds;
  j["total_seconds"] = result.total_seconds;
  j["failures"] = result.failures;
  j["ok"] = result.ok();
  json series = json::array();
  for (const SeriesResult& s : result.series) {
    json sj;
    sj["name"] = s.name;
    json rows = json::array();
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      const ErrorRow& r = s.rows[i];
      const OrderRow& o = s.orders[i];
      json rj;
      rj["H_Omega"] = r.H_Omega;
      rj["H_Gamma"] = r.H_Gamma;
      rj["m"] = r.m;
      rj["err_u_L2"] = r.err_u_L2;
      rj["err_p_L2"] = r.err_p_L2;
      rj["err_u_H1"] = r.err_u_H1;
      rj["err_p_H1"] = r.err_p_H1;
      rj["err_p_full_H1"] = r.err_p_full_H1;
      rj["order_u_L2"] = o.u_L2;
      rj["order_p_L2"] = o.p_L2;
      rj["order_u_H1"] = o.u_H1;
      rj["order_p_H1"] = o.p_H1;
      rj["order_p_full_H1"] = o.p_full_H1;
      rows.push_back(rj);
    }
    sj["rows"] = rows;
    const int window = 3;
    sj["fit"] = {{"u_L2", order_fit(s.rows, 0, window)},
                 {"p_L2", order_fit(s.rows, 1, window)},
                 {"u_H1", order_fit(s.rows, 2, window)},
                 {"p_H1", order_fit(s.rows, 3, window)},
                 {"p_full_H1", order_fit(s.rows, 4, window)}};
    series.push_back(sj);
  }
  j["series"] = series;
  write_text_file(path, j.dump(2) + "\n");
}

void write_convergence_svg(const ExperimentResult& result, const std::string& path) {
  std::vector<PlotSeries> plots;
  double x0 = 0.0, x1 = 0.0, y0 = 0.0;
  for (const SeriesResult& s : result.series) {
    PlotSeries pu, pp;
    pu.label = s.name + " u L2";
    pp.label = s.name + " p L2";
    for (const ErrorRow& r : s.rows) {
      pu.x.push_back(r.H_Gamma);
      pu.y.push_back(r.err_u_L2);
      pp.x.push_back(r.H_Gamma);
      pp.y.push_back(r.err_p_L2);
      if (x0 == 0.0 && r.err_u_L2 > 0.0) {
        x0 = r.H_Gamma;
        y0 = r.err_u_L2;
      }
      if (r.H_Gamma > 0.0) x1 = r.H_Gamma;
    }
    plots.push_back(pu);
    plots.push_back(pp);
  }
  std::vector<GuideLine> guides;
  if (x0 > 0.0 && x1 > 0.0 && x1 != x0) {
    guides.push_back({2.0, x0, y0, x1, "slope 2"});
    guides.push_back({1.0, x0, y0, x1, "slope 1"});
  }
  std::string title = experiment_name(result.config.kind);
  if (result.config.paper_scale) title += " (paper scale)";
  write_text_file(path,
                  render_loglog_svg(title, "H_Gamma", "L2 error", plots, guides));
}

std::vector<std::string> write_outputs(const ExperimentResult& result) {
  const fs::path dir(result.config.output_dir);
  fs::create_directories(dir);
  std::vector<std::string> paths;

  const std::string report = (dir / "report.csv").string();
  write_report_csv(result, report);
  paths.push_back(report);

  const std::string summary = (dir / "summary.json").string();
  write_summary_json(result, summary);
  paths.push_back(summary);

  const std::string svg = (dir / "convergence.svg").string();
  write_convergence_svg(result, svg);
  paths.push_back(svg);

  if (result.config.write_trajectories) {
    for (const SeriesResult& s : result.series) {
      for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
        const TrajectorySummary& ts = s.trajectories[i];
        std::ostringstream out;
        out << "t,norm_u,norm_p,constraint_residual\n";
        for (std::size_t k = 0; k < ts.t.size(); ++k)
          out << format_double(ts.t[k]) << ',' << format_double(ts.norm_u[k])
              << ',' << format_double(ts.norm_p[k]) << ','
              << format_double(ts.constraint_residual[k]) << '\n';
        const std::string name =
            "trajectory-" + s.name + "-" + std::to_string(i) + ".csv";
        const std::string p = (dir / name).string();
        write_text_file(p, out.str());
        paths.push_back(p);
      }
    }
  }
  return paths;
}

}  // namespace lodbs
