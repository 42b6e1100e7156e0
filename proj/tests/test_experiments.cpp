#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "lodbs/config.hpp"
#include "lodbs/experiments.hpp"

using namespace lodbs;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig cfg = preset(ExperimentKind::custom);
  cfg.dynamic = DynamicBoundary::full;
  cfg.coefficient = Coefficient::Kind::constant;
  cfg.coefficient_value = 0.9;
  cfg.tau = 0.01;
  cfg.t_end = 0.02;
  cfg.h_levels = {2, 3};
  cfg.variants = {"uniform", "lod"};
  cfg.interpolation = InterpolationKind::clement;
  cfg.form = CorrectorForm::shifted;
  cfg.m_policy = "log";
  cfg.reference_level = 5;
  cfg.fine_level = 5;
  cfg.output_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("experiment names round-trip") {
  for (const ExperimentKind kind :
       {ExperimentKind::exp1_smooth, ExperimentKind::exp1_random,
        ExperimentKind::exp2_mixed, ExperimentKind::exp3_boundary_refine,
        ExperimentKind::custom})
    CHECK(experiment_from_name(experiment_name(kind)) == kind);
  CHECK_THROWS_AS((void)experiment_from_name("exp9-unknown"), std::invalid_argument);
}

TEST_CASE("presets follow the published setups") {
  const ExperimentConfig e1 = preset(ExperimentKind::exp1_smooth);
  CHECK(e1.dynamic == DynamicBoundary::full);
  CHECK(e1.coefficient == Coefficient::Kind::smooth);
  CHECK(e1.epsilon == 1.0 / 64.0);
  CHECK(e1.h_levels == std::vector<int>{2, 3, 4, 5, 6});
  CHECK(e1.kappa == 0.1);
  CHECK(e1.tau == 0.01);
  CHECK(e1.t_end == 0.1);

  const ExperimentConfig p1 = preset(ExperimentKind::exp1_smooth, true);
  CHECK(p1.epsilon == 1.0 / 512.0);
  CHECK(p1.paper_scale);
  CHECK(p1.h_levels.back() == 8);

  const ExperimentConfig e2 = preset(ExperimentKind::exp2_mixed);
  CHECK(e2.dynamic == DynamicBoundary::bottom);
  CHECK(e2.coefficient == Coefficient::Kind::random);
  CHECK(e2.interpolation == InterpolationKind::clement);

  const ExperimentConfig e3 = preset(ExperimentKind::exp3_boundary_refine);
  CHECK(e3.epsilon == 0.25);
  CHECK(e3.boundary_refinements >= 4);
  CHECK(e3.variants == std::vector<std::string>{"uniform"});
}

TEST_CASE("config serialization round-trips") {
  ExperimentConfig cfg = preset(ExperimentKind::exp2_mixed);
  cfg.epsilon = 1.0 / 48.0;
  cfg.seed = 77;
  cfg.h_levels = {3, 4, 5};
  cfg.m_policy = "fixed";
  cfg.m_fixed = 4;
  cfg.variants = {"lod", "lod-m2"};
  cfg.write_trajectories = false;
  cfg.output_dir = "somewhere/else";

  const ExperimentConfig back = parse_config_text(serialize_config(cfg), false);
  CHECK(back.kind == cfg.kind);
  CHECK(back.dynamic == cfg.dynamic);
  CHECK(back.coefficient == cfg.coefficient);
  CHECK(back.epsilon == cfg.epsilon);
  CHECK(back.coefficient_value == cfg.coefficient_value);
  CHECK(back.seed == cfg.seed);
  CHECK(back.kappa == cfg.kappa);
  CHECK(back.tau == cfg.tau);
  CHECK(back.t_end == cfg.t_end);
  CHECK(back.h_levels == cfg.h_levels);
  CHECK(back.m_policy == cfg.m_policy);
  CHECK(back.m_fixed == cfg.m_fixed);
  CHECK(back.interpolation == cfg.interpolation);
  CHECK(back.form == cfg.form);
  CHECK(back.variants == cfg.variants);
  CHECK(back.reference_level == cfg.reference_level);
  CHECK(back.fine_level == cfg.fine_level);
  CHECK(back.boundary_refinements == cfg.boundary_refinements);
  CHECK(back.paper_scale == cfg.paper_scale);
  CHECK(back.write_trajectories == cfg.write_trajectories);
  CHECK(back.dump_matrices == cfg.dump_matrices);
  CHECK(back.output_dir == cfg.output_dir);
}

TEST_CASE("TOML parsing: comments, sections, overrides") {
  const std::string text = R"(# convergence study
experiment = "exp1-smooth"   # preset first
[run]                        # section headers are decoration
epsilon = 0.03125
h_levels = [2, 3, 4]
variants = ["uniform"]
tau = 0.005
write_trajectories = false
output_dir = "runs/a#b"      # hash inside quotes stays
)";
  const ExperimentConfig cfg = parse_config_text(text, false);
  CHECK(cfg.kind == ExperimentKind::exp1_smooth);
  CHECK(cfg.epsilon == 0.03125);
  CHECK(cfg.h_levels == std::vector<int>{2, 3, 4});
  CHECK(cfg.variants == std::vector<std::string>{"uniform"});
  CHECK(cfg.tau == 0.005);
  CHECK_FALSE(cfg.write_trajectories);
  CHECK(cfg.output_dir == "runs/a#b");
  // Preset values survive where the file is silent.
  CHECK(cfg.dynamic == DynamicBoundary::full);
  CHECK(cfg.t_end == 0.1);

  CHECK_THROWS_AS((void)parse_config_text("no_such_key = 1\n", false),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)parse_config_text("interpolation = \"cubic\"\n", false),
                  std::invalid_argument);
}

TEST_CASE("JSON configs parse identically") {
  const std::string text = R"({
    "experiment": "exp2-mixed",
    "seed": 5,
    "h_levels": [3, 4],
    "m_policy": "fixed",
    "m_fixed": 1
  })";
  const ExperimentConfig cfg = parse_config_text(text, true);
  CHECK(cfg.kind == ExperimentKind::exp2_mixed);
  CHECK(cfg.seed == 5);
  CHECK(cfg.h_levels == std::vector<int>{3, 4});
  CHECK(cfg.m_policy == "fixed");
  CHECK(cfg.m_fixed == 1);
  CHECK(cfg.dynamic == DynamicBoundary::bottom);
}

TEST_CASE("tiny study runs end to end") {
  const fs::path dir = fs::temp_directory_path() / "lodbs-exp-test";
  fs::remove_all(dir);
  const ExperimentConfig cfg = tiny_config(dir.string());
  const ExperimentResult result = run_experiment(cfg);
  REQUIRE(result.ok());
  REQUIRE(result.series.size() == 2);
  for (const SeriesResult& s : result.series) {
    REQUIRE(s.rows.size() == 2);
    CHECK(s.rows[0].H_Omega == 0.25);
    CHECK(s.rows[1].H_Omega == 0.125);
    for (const ErrorRow& row : s.rows) {
      CHECK(std::isfinite(row.err_u_L2));
      CHECK(row.err_u_L2 > 0.0);
      CHECK(row.err_u_L2 < 1.0);
    }
    // Coarsening errors shrink under refinement for this smooth setup.
    CHECK(s.rows[1].err_u_L2 < s.rows[0].err_u_L2);
    REQUIRE(s.trajectories.size() == 2);
    CHECK(s.trajectories[0].t.size() == 3);
  }

  const auto paths = write_outputs(result);
  CHECK(fs::exists(dir / "report.csv"));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "convergence.svg"));

  const std::string csv = slurp(dir / "report.csv");
  CHECK(csv.rfind("series,H_Omega,H_Gamma,m,err_u_L2,err_p_L2,err_u_H1,"
                  "err_p_H1,err_p_full_H1,order_u_L2,order_p_L2,order_u_H1,"
                  "order_p_H1,order_p_full_H1\n", 0) == 0);

  const nlohmann::json summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary.contains("config"));
  CHECK(summary.contains("series"));
  CHECK(summary["ok"].get<bool>());
  CHECK(summary["config"]["coefficient"].get<std::string>() == "constant");

  const std::string svg = slurp(dir / "convergence.svg");
  CHECK(svg.find("<svg") != std::string::npos);

  fs::remove_all(dir);
}

TEST_CASE("reports are deterministic") {
  const fs::path a = fs::temp_directory_path() / "lodbs-det-a";
  const fs::path b = fs::temp_directory_path() / "lodbs-det-b";
  fs::remove_all(a);
  fs::remove_all(b);

  ExperimentConfig ca = tiny_config(a.string());
  ca.h_levels = {2};
  ca.coefficient = Coefficient::Kind::random;
  ca.epsilon = 1.0 / 16.0;
  ca.seed = 12;
  ExperimentConfig cb = ca;
  cb.output_dir = b.string();

  write_outputs(run_experiment(ca));
  write_outputs(run_experiment(cb));

  CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
  CHECK(slurp(a / "convergence.svg") == slurp(b / "convergence.svg"));

  fs::remove_all(a);
  fs::remove_all(b);
}

}  // TEST_SUITE
