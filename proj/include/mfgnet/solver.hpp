#pragma once

// Damped Gauss-Newton for overdetermined nonlinear least squares. Each step
// solves min ||J dX + F||_2 through an orthogonal factorization of J; the
// normal equations J^T J are never formed.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mfgnet/system.hpp"

namespace mfgnet {

struct RankDeficientError : std::runtime_error {
  RankDeficientError(std::size_t rank, std::size_t cols);
  std::size_t rank;
  std::size_t cols;
};

enum class LsqBackend {
  sparse_qr,  // SuiteSparseQR multifrontal factorization
  dense_qr,   // column-pivoted Householder QR; small systems and cross-checks
};

struct LsqOptions {
  LsqBackend backend = LsqBackend::sparse_qr;
  /// Sparse backend only. Rows with more than max(dense_row_min, cols / 8)
  /// nonzeros make R dense, so they are rewritten as running-sum chains over
  /// auxiliary unknowns. The rewrite has the same least-squares minimiser
  /// whenever the system is consistent; the result is checked and the plain
  /// factorization is used when it is not.
  bool split_dense_rows = true;
  std::size_t dense_row_min = 64;
};

struct LsqResult {
  std::vector<double> step;
  double residual_norm = 0.0;  // ||J step + F||_2
  std::size_t rank = 0;
  bool split_dense_rows = false;  // true when the chained system was accepted
};

LsqResult lsq_solve(const SparseJacobian& jacobian, std::span<const double> residual, const LsqOptions& options = {});
inline LsqResult lsq_solve(const SparseJacobian& jacobian, std::span<const double> residual, LsqBackend backend) {
  return lsq_solve(jacobian, residual, LsqOptions{backend});
}

struct SolverOptions {
  double alpha = 0.9;
  double epsilon = 1e-4;
  int max_iterations = 200;
  LsqOptions lsq;
  Execution execution = Execution::parallel;
  /// Starting point; the problem's uniform guess when empty.
  std::optional<std::vector<double>> initial;

  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
  double initial_residual_norm = 0.0;
  double final_residual_norm = 0.0;
  // One entry per iteration: ||F|| before the step, ||dX|| (undamped), and
  // the monitored scalar (Lambda for MFG problems) after the update.
  std::vector<double> residual_norms;
  std::vector<double> step_norms;
  std::vector<double> lambdas;
};

/// Rank deficiency met inside gauss_newton, with the iterations done so far.
struct SolveAborted : RankDeficientError {
  SolveAborted(const RankDeficientError& cause, SolveReport partial)
      : RankDeficientError(cause), report(std::move(partial)) {}
  SolveReport report;
};

struct SolveResult {
  std::vector<double> x;
  SolveReport report;
};

/// Any residual map with a Jacobian.
struct LeastSquaresModel {
  std::function<std::vector<double>(std::span<const double>)> residual;
  std::function<SparseJacobian(std::span<const double>)> jacobian;
  /// Component of X recorded in SolveReport::lambdas, if any.
  std::optional<std::size_t> monitor;
};

/// X <- X + alpha dX until ||dX||_2 < epsilon or max_iterations is reached.
/// Non-convergence is reported, not thrown; rank deficiency throws SolveAborted.
SolveResult gauss_newton(const LeastSquaresModel& model, std::vector<double> x0, const SolverOptions& options);

SolveResult gauss_newton(const Problem& problem, const SolverOptions& options);

double norm2(std::span<const double> v);

}  // namespace mfgnet
