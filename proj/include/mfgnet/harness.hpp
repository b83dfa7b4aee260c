#pragma once

// Experiment drivers: the four reference test configurations, the grid
// refinement study, error metrics and solution export.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfgnet/solver.hpp"
#include "mfgnet/system.hpp"

namespace mfgnet {

enum class PresetId { test1, test2, test3, test4, custom };

PresetId parse_preset(const std::string& name);
std::string to_string(PresetId id);

struct ExperimentConfig {
  PresetId preset = PresetId::custom;
  std::string label;  // panel name, e.g. "test1-111"

  // Network: a JSON file, or a built-in preset ("tripod", "self-similar").
  std::optional<std::filesystem::path> network_file;
  std::string network_preset = "tripod";
  int levels = 2;

  int nodes_per_edge = 250;
  std::optional<double> step;  // global h; overrides nodes_per_edge

  std::optional<double> nu = 0.1;  // uniform diffusion; empty keeps per-edge values from the file
  double beta = 2.0;
  double hamiltonian_scale = 1.0;
  bool vertex_source = true;
  std::vector<double> cost_switches;  // empty: s_j = 1 on every edge
  std::optional<std::filesystem::path> cost_file;
  std::string coupling = "power:2";

  SolverOptions solver;
};

/// Panels of a reference test, in figure order. Test 1 and Test 2 give the
/// switch patterns (1,1,1), (1,1,0), (1,0,0); Test 3 gives nu = 0.1 and
/// nu = 1e-3; Test 4 gives one run on the two-level self-similar network.
///
/// All presets use kappa = 1/2, no vertex source term, N_j = 250 and
/// epsilon = 1e-4. Test 2 runs with damping 0.2.
std::vector<ExperimentConfig> preset_configs(PresetId id);

Network build_experiment_network(const ExperimentConfig& config);
Problem build_problem(const ExperimentConfig& config);

struct RunSummary {
  double min_m = 0.0;
  double max_m = 0.0;
  double lambda = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string note;  // e.g. non-uniqueness warning for decreasing couplings
};

struct RunResult {
  ExperimentConfig config;
  Problem problem;
  SolveResult solve;
  RunSummary summary;
};

/// Solve one configuration. SolveAborted propagates with its partial report.
RunResult run_experiment(const ExperimentConfig& config);
RunSummary summarize(const Problem& problem, const SolveResult& solve);

// ---- error study --------------------------------------------------------

/// Reference solution sampled on a coarser grid of the same network by
/// linear interpolation along each edge.
std::vector<double> interpolate_solution(const Problem& fine, std::span<const double> x_fine, const Problem& coarse);

struct ErrorParts {
  double u = 0.0;       // sum |U - U_ref| over all dofs
  double m = 0.0;       // sum |M - M_ref| over all dofs
  double lambda = 0.0;  // |Lambda - Lambda_ref|
};

ErrorParts error_parts(const Problem& problem, std::span<const double> x, std::span<const double> x_ref);

/// E_h = h sum|U - U_ref| + h sum|M - M_ref| + |Lambda - Lambda_ref|, h the
/// largest grid step.
double error_weighted(const Problem& problem, const ErrorParts& parts);
/// Same with the nodal sums divided by the dof count instead of multiplied
/// by h: (sum|U - U_ref| + sum|M - M_ref|) / N^h + |Lambda - Lambda_ref|.
double error_mean(const Problem& problem, const ErrorParts& parts);

/// log(E1 / E2) / log(h1 / h2).
double order_of_convergence(double e1, double h1, double e2, double h2);

struct ErrorStudyRow {
  int n = 0;
  std::size_t dofs = 0;  // 2 N^h
  double h = 0.0;
  double error = 0.0;       // error_weighted
  double error_mean = 0.0;  // error_mean
  double lambda = 0.0;
  double lambda_error = 0.0;
  int iterations = 0;
  bool converged = false;
  std::optional<double> eoc;       // from error, vs the previous row
  std::optional<double> eoc_mean;  // from error_mean, vs the previous row
  double seconds = 0.0;
};

struct ErrorStudy {
  int n_ref = 0;
  double lambda_ref = 0.0;
  int ref_iterations = 0;
  bool ref_converged = false;
  double ref_seconds = 0.0;
  std::vector<ErrorStudyRow> rows;  // N ascending
};

/// Solve at every N of `n_list` and at `n_ref` (uniform N_j = N), then
/// measure each coarse solution against the reference. Requires
/// n_ref > max(n_list).
ErrorStudy error_study(const ExperimentConfig& config, std::vector<int> n_list, int n_ref);

void write_study_csv(const std::filesystem::path& path, const ErrorStudy& study);

// ---- export -------------------------------------------------------------

enum class ExportFormat { csv, json };

ExportFormat parse_export_format(const std::string& name);

struct NodeRecord {
  std::string kind;  // "vertex" or "edge"
  std::string id;    // vertex class id or edge id
  int k = 0;         // node index on the edge; 0 for vertices
  double t = 0.0;    // arc fraction; 0 for vertices
  double x = 0.0;
  double y = 0.0;
  double u = 0.0;
  double m = 0.0;
};

struct ExportedSolution {
  std::map<std::string, std::string> header;  // lambda, nu, beta, coupling, kappa, vertex_source
  std::vector<NodeRecord> nodes;              // vertices, then edge interiors in edge order
};

ExportedSolution make_export(const Problem& problem, std::span<const double> x);
void export_solution(const std::filesystem::path& path, const Problem& problem, std::span<const double> x,
                     ExportFormat format);
ExportedSolution read_solution(const std::filesystem::path& path);

/// Per-iteration history as JSON.
void write_convergence_log(const std::filesystem::path& path, const SolveReport& report);

}  // namespace mfgnet
