#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "lodbs/config.hpp"
#include "lodbs/errors.hpp"
#include "lodbs/experiments.hpp"
#include "lodbs/lod.hpp"

namespace {

lodbs::DynamicBoundary parse_boundary(const std::string& name) {
  if (name == "full") return lodbs::DynamicBoundary::full;
  if (name == "bottom") return lodbs::DynamicBoundary::bottom;
  throw std::invalid_argument("dynamic boundary must be full or bottom");
}

int run_and_write(const lodbs::ExperimentConfig& cfg) {
  const lodbs::ExperimentResult result = lodbs::run_experiment(cfg);

  std::printf("%-10s %9s %9s %3s %12s %12s %12s %12s %13s\n", "series",
              "H_Omega", "H_Gamma", "m", "err_u_L2", "err_p_L2", "err_u_H1",
              "err_p_H1", "err_p_full_H1");
  for (const lodbs::SeriesResult& s : result.series)
    for (const lodbs::ErrorRow& r : s.rows)
      std::printf("%-10s %9.3g %9.3g %3d %12.4e %12.4e %12.4e %12.4e %13.4e\n",
                  s.name.c_str(), r.H_Omega, r.H_Gamma, r.m, r.err_u_L2,
                  r.err_p_L2, r.err_u_H1, r.err_p_H1, r.err_p_full_H1);

  for (const std::string& path : lodbs::write_outputs(result))
    std::printf("wrote %s\n", path.c_str());
  std::printf("reference solve %.1f s, total %.1f s\n", result.reference_seconds,
              result.total_seconds);
  for (const std::string& f : result.failures)
    std::fprintf(stderr, "failed: %s\n", f.c_str());
  return result.ok() ? 0 : 1;
}

int run_correctors(double epsilon, double coarse_h, int fine_level, int max_m,
                   const std::string& coefficient, std::uint64_t seed,
                   const std::string& form_name, const std::string& boundary,
                   const std::string& output) {
  const int lvl = static_cast<int>(std::lround(std::log2(1.0 / coarse_h)));
  if (lvl < 1 || std::abs(std::ldexp(1.0, -lvl) - coarse_h) > 1e-12)
    throw std::invalid_argument("--H must be a power of two, e.g. 0.0625");
  if (fine_level < lvl + 2)
    throw std::invalid_argument("--fine-level must exceed the coarse level by >= 2");

  const lodbs::DynamicBoundary dyn = parse_boundary(boundary);
  const lodbs::BulkMesh bulk = lodbs::build_bulk_mesh(1 << lvl, dyn);
  const lodbs::BoundaryMesh gamma = lodbs::restrict_to_boundary(bulk, dyn);
  const lodbs::BoundaryMesh fine =
      lodbs::refine_boundary(gamma, fine_level - lvl);

  lodbs::Coefficient c;
  if (coefficient == "smooth")
    c = lodbs::make_smooth_coefficient(epsilon);
  else if (coefficient == "random")
    c = lodbs::make_random_coefficient(epsilon, seed, gamma.length);
  else if (coefficient == "constant")
    c = lodbs::make_constant_coefficient(1.0);
  else
    throw std::invalid_argument("--coefficient must be smooth, random or constant");

  const lodbs::CorrectorForm form = form_name == "shifted"
                                        ? lodbs::CorrectorForm::shifted
                                        : lodbs::CorrectorForm::plain;
  if (form_name != "plain" && form_name != "shifted")
    throw std::invalid_argument("--form must be plain or shifted");

  const auto rows = lodbs::corrector_decay_profile(fine, gamma, c, form, max_m);

  std::ofstream out(output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + output);
  out << "m,relative_energy_error\n";
  std::printf("m,relative_energy_error\n");
  for (const lodbs::DecayRow& row : rows) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d,%.12g\n", row.m,
                  row.relative_energy_error);
    out << buf;
    std::printf("%s", buf);
  }
  std::printf("wrote %s\n", output.c_str());
  return 0;
}

int run_infsup(int levels, const std::string& boundary) {
  if (levels < 2) throw std::invalid_argument("--levels must be >= 2");
  const lodbs::DynamicBoundary dyn = parse_boundary(boundary);
  std::printf("n,beta\n");
  for (int lvl = 2; lvl <= levels; ++lvl) {
    const lodbs::BulkMesh bulk = lodbs::build_bulk_mesh(1 << lvl, dyn);
    const lodbs::BoundaryMesh gamma = lodbs::restrict_to_boundary(bulk, dyn);
    const double beta = lodbs::infsup_constant(bulk, gamma);
    std::printf("%d,%.12g\n", 1 << lvl, beta);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled bulk/surface parabolic solver with a multiscale "
               "boundary space"};
  app.require_subcommand(1);

  auto* cmd_run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string config_path;
  cmd_run->add_option("--config", config_path, "TOML or JSON config file")
      ->required();

  auto* cmd_conv =
      app.add_subcommand("convergence", "Run a built-in convergence study");
  std::string experiment;
  bool paper_scale = false, dump_matrices = false;
  std::string output_dir;
  cmd_conv
      ->add_option("--experiment", experiment,
                   "exp1-smooth, exp1-random, exp2-mixed or exp3-boundary-refine")
      ->required();
  cmd_conv->add_flag("--paper-scale", paper_scale,
                     "Published resolutions instead of the quick defaults");
  cmd_conv->add_option("--output-dir", output_dir, "Override the output directory");
  cmd_conv->add_flag("--dump-matrices", dump_matrices,
                     "Write the assembled blocks in MatrixMarket format");

  auto* cmd_corr =
      app.add_subcommand("correctors", "Corrector localization decay profile");
  double epsilon = 1.0 / 128.0, coarse_h = 1.0 / 16.0;
  int max_m = 6, fine_level = 9;
  std::string coefficient = "smooth", form_name = "shifted", boundary = "full";
  std::string decay_output = "decay.csv";
  std::uint64_t seed = 1;
  cmd_corr->add_option("--epsilon", epsilon, "Coefficient period")->required();
  cmd_corr->add_option("--H", coarse_h, "Coarse meshsize (power of two)")
      ->required();
  cmd_corr->add_option("--max-m", max_m, "Largest patch radius");
  cmd_corr->add_option("--fine-level", fine_level, "Fine meshsize 2^-level");
  cmd_corr->add_option("--coefficient", coefficient, "smooth, random or constant");
  cmd_corr->add_option("--seed", seed, "Random coefficient seed");
  cmd_corr->add_option("--form", form_name, "plain or shifted corrector form");
  cmd_corr->add_option("--dynamic-boundary", boundary, "full or bottom");
  cmd_corr->add_option("--output", decay_output, "Decay CSV path");

  auto* cmd_infsup =
      app.add_subcommand("infsup", "Discrete inf-sup constants across levels");
  int levels = 6;
  std::string infsup_boundary = "full";
  cmd_infsup->add_option("--levels", levels, "Run n = 4 .. 2^levels")->required();
  cmd_infsup->add_option("--dynamic-boundary", infsup_boundary, "full or bottom");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) return run_and_write(lodbs::parse_config_file(config_path));
    if (cmd_conv->parsed()) {
      lodbs::ExperimentConfig cfg =
          lodbs::preset(lodbs::experiment_from_name(experiment), paper_scale);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      if (dump_matrices) cfg.dump_matrices = true;
      return run_and_write(cfg);
    }
    if (cmd_corr->parsed())
      return run_correctors(epsilon, coarse_h, fine_level, max_m, coefficient,
                            seed, form_name, boundary, decay_output);
    if (cmd_infsup->parsed()) return run_infsup(levels, infsup_boundary);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
