#pragma once

// Finite-difference calculus on a network grid.
//
// All node arguments are (edge j, node k) with k in [0, N_j]; the end nodes
// resolve to vertex dofs, so every operator automatically sees continuous
// grid functions.

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "mfgnet/hamiltonian.hpp"
#include "mfgnet/network.hpp"

namespace mfgnet {

/// One real value per dof of a shared grid.
class GridFunction {
public:
  GridFunction() = default;
  explicit GridFunction(std::shared_ptr<const Grid> grid, double fill = 0.0);
  GridFunction(std::shared_ptr<const Grid> grid, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t dof) const { return values_[dof]; }
  double& operator[](std::size_t dof) { return values_[dof]; }

  double value(std::size_t j, int k) const { return values_[grid_->dof(j, k)]; }
  void set(std::size_t j, int k, double v) { values_[grid_->dof(j, k)] = v; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> values_;
};

/// (D+U)_{j,k} = (U_{j,k+1} - U_{j,k}) / h_j, k in [0, N_j - 1].
double forward_diff(const GridFunction& u, std::size_t j, int k);
/// (D^2 U)_{j,k}, k in [1, N_j - 1].
double second_diff(const GridFunction& u, std::size_t j, int k);
/// [D_h U]_{j,k} = ((D+U)_{j,k}, (D+U)_{j,k-1}), k in [1, N_j - 1].
std::pair<double, double> grad_pair(const GridFunction& u, std::size_t j, int k);

/// Discrete L2 product (U, W)_2: interior nodes weighted by h_j, every edge
/// end by h_j / 2.
double weighted_inner(const GridFunction& u, const GridFunction& w);

/// g and its partials at interior node (j,k), evaluated on [D_h U]_{j,k}.
GValue node_hamiltonian(const GridFunction& u, const HamiltonianSpec& ham, std::size_t j, int k);

/// Transport operator B^h(U, M)_{j,k}, k in [1, N_j - 1]. The end stencils
/// k = 1 and k = N_j - 1 drop the vertex-side flux; kirchhoff_m carries it.
double transport(const GridFunction& u, const GridFunction& m, const HamiltonianSpec& ham, std::size_t j, int k);

/// Vertex operator S^h(U, V)_i for the value function. Callers pass
/// V = V_h[M] - Lambda.
double kirchhoff_u(const GridFunction& u, const GridFunction& v, std::size_t vertex);

/// Vertex operator T^h(M, U)_i: diffusive plus upwind transport flux balance.
double kirchhoff_m(const GridFunction& m, const GridFunction& u, const HamiltonianSpec& ham, std::size_t vertex);

}  // namespace mfgnet
