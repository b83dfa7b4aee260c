#pragma once

// The stationary MFG system as an overdetermined nonlinear map
//
//   F : R^{2N+1} -> R^{2N+2},   N = number of grid dofs.
//
// Unknown layout X = [U (N) | M (N) | Lambda (1)].
//
// Residual layout, with n_int = N - #vertices interior nodes:
//   [0, n_int)            HJB rows  -nu D2U + g(x,[D_h U]) + Lambda - V(M)
//   [n_int, N)            S^h(U, V(M) - Lambda)_i, one per vertex (V - Lambda
//                         replaced by 0 when vertex_source is off)
//   [N, N + n_int)        FP rows   nu D2M + B^h(U,M)
//   [N + n_int, 2N)       T^h(M, U)_i, one per vertex
//   2N                    (M,1)_2 - 1
//   2N + 1                (U,1)_2
// Interior rows follow the grid's dof order (edge by edge, k ascending).

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "mfgnet/coupling.hpp"
#include "mfgnet/hamiltonian.hpp"
#include "mfgnet/network.hpp"
#include "mfgnet/operators.hpp"

namespace mfgnet {

struct Problem {
  std::shared_ptr<const Grid> grid;
  HamiltonianSpec hamiltonian;
  CouplingOperator coupling = CouplingOperator::power(2.0);
  /// Keep the h_j/2 (V(M) - Lambda) terms in the vertex rows S^h. Without
  /// them the vertex rows are the bare first-order Kirchhoff balance.
  bool vertex_source = true;

  std::size_t num_dofs() const { return grid->num_dofs(); }
  std::size_t num_unknowns() const { return 2 * num_dofs() + 1; }
  std::size_t num_equations() const { return 2 * num_dofs() + 2; }

  std::size_t u_index(std::size_t dof) const { return dof; }
  std::size_t m_index(std::size_t dof) const { return num_dofs() + dof; }
  std::size_t lambda_index() const { return 2 * num_dofs(); }

  void validate() const;
};

/// U = 0, M = 1/L, Lambda = 0.
std::vector<double> initial_guess(const Problem& problem);

GridFunction extract_u(const Problem& problem, std::span<const double> x);
GridFunction extract_m(const Problem& problem, std::span<const double> x);
double extract_lambda(const Problem& problem, std::span<const double> x);

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Coordinate-format Jacobian; duplicate (row, col) entries add up.
struct SparseJacobian {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Triplet> entries;

  /// Row-major dense copy with duplicates summed. Test and debug use only.
  std::vector<double> dense() const;
  /// Entries with duplicates summed, sorted by (col, row).
  SparseJacobian compressed() const;
};

enum class Execution { serial, parallel };

/// Fused residual kernel. Rows are independent and written to fixed slots,
/// so serial and parallel runs agree bit for bit.
std::vector<double> assemble_residual(const Problem& problem, std::span<const double> x,
                                      Execution exec = Execution::parallel);

/// Row-by-row residual composed from the operator layer. Slow; kept as the
/// reference the fused kernel is tested against.
std::vector<double> assemble_residual_reference(const Problem& problem, std::span<const double> x);

/// Analytic Jacobian (chain rule through g, its Hessian and V').
SparseJacobian assemble_jacobian(const Problem& problem, std::span<const double> x,
                                 Execution exec = Execution::parallel);

/// Central-difference Jacobian, one column per unknown; test oracle only.
/// The step for column c is step * (1 + |x_c|).
SparseJacobian fd_jacobian(const Problem& problem, std::span<const double> x, double step = 1e-6);

/// Smallest |q1|, |q2| over all gradient pairs. Finite-difference checks are
/// meaningful only when this stays away from the kinks of g.
double min_kink_distance(const Problem& problem, std::span<const double> x);

/// Write J and F in MatrixMarket coordinate / array sections.
void write_system(const std::filesystem::path& path, const SparseJacobian& jacobian, std::span<const double> residual);

}  // namespace mfgnet
