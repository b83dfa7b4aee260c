// mfgnet: solve stationary mean field games on networks from the command line.
//
//   mfgnet solve  --preset tripod --N 250 --nu 0.1 --out sol.csv
//   mfgnet study  --N-list 100,200,400,800,1000 --N-ref 2000 --table study.csv
//   mfgnet preset test1 --out-dir results/

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfgnet/harness.hpp"

namespace {

using namespace mfgnet;

struct ModelFlags {
  std::string network_file;
  std::string preset;
  std::optional<int> n;
  std::optional<double> h;
  std::optional<double> nu;
  std::string vertex_source;
  std::string execution;
};

void add_model_options(CLI::App& cmd, ExperimentConfig& cfg, ModelFlags& flags) {
  auto* net = cmd.add_option("--network", flags.network_file, "Network JSON file")->check(CLI::ExistingFile);
  cmd.add_option("--preset", flags.preset, "Built-in network: tripod | self-similar")
      ->check(CLI::IsMember({"tripod", "self-similar"}))
      ->excludes(net);
  cmd.add_option("--levels", cfg.levels, "Branching levels of the self-similar network")->capture_default_str();
  auto* n = cmd.add_option("--N", flags.n, "Intervals per edge");
  cmd.add_option("--step", flags.h, "Global step h; every edge length must be a multiple")->excludes(n);
  cmd.add_option("--nu", flags.nu, "Uniform diffusion coefficient");
  cmd.add_option("--beta", cfg.beta, "Hamiltonian exponent (>= 2)")->capture_default_str();
  cmd.add_option("--hamiltonian-scale", cfg.hamiltonian_scale, "Factor kappa in kappa |p|^beta")->capture_default_str();
  cmd.add_option("--vertex-source", flags.vertex_source, "h/2 (V - Lambda) terms in the vertex rows: on | off")
      ->check(CLI::IsMember({"on", "off"}));
  auto* sw = cmd.add_option("--cost-switches", cfg.cost_switches, "Per-edge cost switches, e.g. 1,0,0")->delimiter(',');
  cmd.add_option("--cost-file", cfg.cost_file, "Per-node cost CSV (edge,k,f)")->check(CLI::ExistingFile)->excludes(sw);
  cmd.add_option("--coupling", cfg.coupling, "power:<gamma> | arctan")->capture_default_str();
  cmd.add_option("--epsilon", cfg.solver.epsilon, "Stop when the undamped step norm drops below this")
      ->capture_default_str();
  cmd.add_option("--alpha", cfg.solver.alpha, "Damping in (0, 1]")->capture_default_str();
  cmd.add_option("--max-iter", cfg.solver.max_iterations, "Iteration limit")->capture_default_str();
  cmd.add_option("--execution", flags.execution, "Assembly kernels: parallel | serial")
      ->check(CLI::IsMember({"parallel", "serial"}));
}

void apply_flags(ExperimentConfig& cfg, const ModelFlags& flags) {
  if (!flags.network_file.empty()) cfg.network_file = flags.network_file;
  if (!flags.preset.empty()) cfg.network_preset = flags.preset;
  if (flags.n) {
    cfg.nodes_per_edge = *flags.n;
    cfg.step.reset();
  }
  if (flags.h) cfg.step = *flags.h;
  if (flags.nu) cfg.nu = *flags.nu;
  else if (cfg.network_file) cfg.nu.reset();
  if (!flags.vertex_source.empty()) cfg.vertex_source = flags.vertex_source == "on";
  if (!flags.execution.empty())
    cfg.solver.execution = flags.execution == "serial" ? Execution::serial : Execution::parallel;
}

void print_summary(const std::string& label, const RunSummary& s, double seconds) {
  std::printf("%-16s %-9s iter=%-3d min M=%.6g  max M=%.6g  Lambda=%.9g  %.2fs%s%s\n", label.c_str(),
              s.converged ? "converged" : "NOT converged", s.iterations, s.min_m, s.max_m, s.lambda, seconds,
              s.note.empty() ? "" : "  ", s.note.c_str());
}

int run_solve(const ExperimentConfig& cfg, const std::string& out, const std::string& format, const std::string& log,
              const std::string& dump) {
  const auto run = run_experiment(cfg);
  print_summary(cfg.label.empty() ? "solve" : cfg.label, run.summary, run.solve.report.wall_seconds);
  if (!out.empty()) export_solution(out, run.problem, run.solve.x, parse_export_format(format));
  if (!log.empty()) write_convergence_log(log, run.solve.report);
  if (!dump.empty()) {
    write_system(dump, assemble_jacobian(run.problem, run.solve.x), assemble_residual(run.problem, run.solve.x));
  }
  return run.summary.converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary mean field games on networks: finite differences + Gauss-Newton"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one configuration");
  ExperimentConfig solve_cfg;
  ModelFlags solve_flags;
  std::string out, format = "csv", log, dump;
  add_model_options(*solve, solve_cfg, solve_flags);
  solve->add_option("--out", out, "Write the solution here");
  solve->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  solve->add_option("--log", log, "Write the iteration history as JSON");
  solve->add_option("--dump-system", dump, "Write J and F at the final iterate (MatrixMarket)");

  // study
  auto* study = app.add_subcommand("study", "Grid refinement study against a fine reference solution");
  ExperimentConfig study_cfg = preset_configs(PresetId::test1).front();
  study_cfg.solver.epsilon = 1e-8;
  ModelFlags study_flags;
  std::vector<int> n_list = {100, 200, 400, 800, 1000};
  int n_ref = 2000;
  std::string table;
  add_model_options(*study, study_cfg, study_flags);
  study->add_option("--N-list", n_list, "Grid sizes to measure")->delimiter(',')->capture_default_str();
  study->add_option("--N-ref", n_ref, "Reference grid size")->capture_default_str();
  study->add_option("--table", table, "Write the table as CSV");

  // preset
  auto* preset = app.add_subcommand("preset", "Run every panel of a reference test")->alias("presets");
  std::string preset_name;
  std::string out_dir;
  std::string preset_format = "csv";
  preset->add_option("name", preset_name, "test1 | test2 | test3 | test4")
      ->required()
      ->check(CLI::IsMember({"test1", "test2", "test3", "test4"}));
  preset->add_option("--out-dir", out_dir, "Write <panel>.<format> and <panel>-log.json here");
  preset->add_option("--format", preset_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      apply_flags(solve_cfg, solve_flags);
      return run_solve(solve_cfg, out, format, log, dump);
    }
    if (*study) {
      apply_flags(study_cfg, study_flags);
      const auto result = error_study(study_cfg, n_list, n_ref);
      std::printf("reference N=%d  Lambda=%.9g  iter=%d%s\n", result.n_ref, result.lambda_ref, result.ref_iterations,
                  result.ref_converged ? "" : "  (NOT converged)");
      std::printf("%6s %7s %12s %12s %12s %5s %6s %6s %8s\n", "N", "dofs", "E_h", "E_h mean", "|dLambda|", "iter",
                  "Eoc", "Eoc m", "seconds");
      bool ok = result.ref_converged;
      for (const auto& r : result.rows) {
        ok = ok && r.converged;
        std::printf("%6d %7zu %12.5g %12.5g %12.5g %5d %6s %6s %8.2f\n", r.n, r.dofs, r.error, r.error_mean,
                    r.lambda_error, r.iterations, r.eoc ? std::to_string(*r.eoc).substr(0, 4).c_str() : "--",
                    r.eoc_mean ? std::to_string(*r.eoc_mean).substr(0, 4).c_str() : "--", r.seconds);
      }
      if (!table.empty()) write_study_csv(table, result);
      return ok ? 0 : 2;
    }
    if (*preset) {
      const auto format_id = parse_export_format(preset_format);
      if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
      bool ok = true;
      for (const auto& cfg : preset_configs(parse_preset(preset_name))) {
        try {
          const auto run = run_experiment(cfg);
          print_summary(cfg.label, run.summary, run.solve.report.wall_seconds);
          ok = ok && run.summary.converged;
          if (!out_dir.empty()) {
            const std::filesystem::path dir(out_dir);
            export_solution(dir / (cfg.label + "." + preset_format), run.problem, run.solve.x, format_id);
            write_convergence_log(dir / (cfg.label + "-log.json"), run.solve.report);
          }
        } catch (const SolveAborted& e) {
          std::printf("%-16s aborted after %d iterations: %s\n", cfg.label.c_str(), e.report.iterations, e.what());
          ok = false;
        }
      }
      return ok ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
