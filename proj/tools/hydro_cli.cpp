#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hydro/experiments.hpp"

namespace {

std::string fmt(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

int do_run(const std::string& config, const std::filesystem::path& out_dir,
           int snapshot_every, bool dump_constraints) {
  const hydro::Scenario scenario = hydro::load_scenario(config);
  hydro::RunOptions options;
  options.output_directory = out_dir;
  options.snapshot_every = snapshot_every;
  options.dump_constraints = dump_constraints;
  const hydro::RunResult result = hydro::run_scenario(scenario, options);

  const auto csv_path = out_dir / (scenario.name + "_trajectory.csv");
  auto csv = open_output(csv_path);
  hydro::write_trajectory_csv(csv, result.trajectory);

  std::cout << scenario.name << ": " << result.steps << " steps, "
            << result.retries << " retries, max newton iterations "
            << result.max_newton_iterations << "\n";
  std::cout << "mean per-step seconds: broadphase "
            << fmt(result.mean_broadphase_seconds) << ", narrowphase "
            << fmt(result.mean_narrowphase_seconds) << ", solve "
            << fmt(result.mean_solve_seconds) << "\n";
  std::cout << "wrote " << csv_path.string() << "\n";
  return 0;
}

int do_study(const std::string& config, const std::filesystem::path& out_dir,
             const std::vector<double>& sweep_dt,
             const std::vector<double>& sweep_dx, double reference) {
  const hydro::Scenario scenario = hydro::load_scenario(config);
  if (sweep_dt.empty() == sweep_dx.empty()) {
    throw std::runtime_error("pass exactly one of --sweep-dt or --sweep-dx");
  }
  hydro::StudyResult result;
  std::string label;
  if (!sweep_dt.empty()) {
    result = hydro::time_step_study(scenario, sweep_dt, reference);
    label = "dt";
  } else {
    result = hydro::resolution_study(scenario, sweep_dx, reference);
    label = "dx";
  }
  const auto csv_path = out_dir / (scenario.name + "_" + label + "_study.csv");
  auto csv = open_output(csv_path);
  hydro::write_study_csv(csv, result);
  std::cout << scenario.name << " " << label << " study slope "
            << fmt(result.slope) << "\n";
  std::cout << "wrote " << csv_path.string() << "\n";
  return 0;
}

int do_report(const std::string& config, const std::filesystem::path& out_dir) {
  const hydro::Scenario scenario = hydro::load_scenario(config);
  const hydro::TessellationReport report = hydro::tessellation_report(scenario);
  const auto csv_path = out_dir / (scenario.name + "_tessellation.csv");
  auto csv = open_output(csv_path);
  hydro::write_tessellation_csv(csv, report);
  std::cout << scenario.name << ": mean face ratio "
            << fmt(report.mean_face_ratio) << ", max net-force difference "
            << fmt(report.max_force_relative_difference) << " (relative)\n";
  std::cout << "wrote " << csv_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pressure-field contact simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  int snapshot_every = 0;
  bool dump_constraints = false;
  std::vector<double> sweep_dt;
  std::vector<double> sweep_dx;
  double reference = 0.0;
  bool tessellation = false;

  CLI::App* run_cmd = app.add_subcommand("run", "Run a scenario config");
  run_cmd->add_option("config", config, "Scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--snapshot-every", snapshot_every,
                      "Write a contact-surface snapshot every N steps");
  run_cmd->add_flag("--dump-constraints", dump_constraints,
                    "Also dump per-constraint CSVs with each snapshot");

  CLI::App* study_cmd =
      app.add_subcommand("study", "Convergence study on a scenario");
  study_cmd->add_option("config", config, "Scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  study_cmd->add_option("--out", out_dir, "Output directory");
  study_cmd->add_option("--sweep-dt", sweep_dt, "Time steps to sweep")
      ->delimiter(',');
  study_cmd->add_option("--sweep-dx", sweep_dx, "Mesh resolutions to sweep")
      ->delimiter(',');
  study_cmd->add_option("--ref", reference, "Reference time step or resolution")
      ->required();

  CLI::App* report_cmd = app.add_subcommand("report", "Comparison reports");
  report_cmd->add_option("config", config, "Scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--out", out_dir, "Output directory");
  report_cmd->add_flag("--tessellation", tessellation,
                       "Polygonal vs. triangulated tessellation report");

  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    if (run_cmd->parsed()) {
      return do_run(config, out_dir, snapshot_every, dump_constraints);
    }
    if (study_cmd->parsed()) {
      return do_study(config, out_dir, sweep_dt, sweep_dx, reference);
    }
    if (report_cmd->parsed()) {
      if (!tessellation) {
        throw std::runtime_error("report requires --tessellation");
      }
      return do_report(config, out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
