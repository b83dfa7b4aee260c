#include "mfgnet/operators.hpp"

#include <stdexcept>
#include <string>

namespace mfgnet {

namespace {

void check_interior(const Grid& grid, std::size_t j, int k) {
  if (j >= grid.num_edges()) throw std::out_of_range("edge index out of range");
  if (k < 1 || k > grid.intervals(j) - 1)
    throw std::out_of_range("interior node index " + std::to_string(k) + " out of range");
}

double arc_fraction(const Grid& grid, std::size_t j, int k) {
  return static_cast<double>(k) / static_cast<double>(grid.intervals(j));
}

}  // namespace

GridFunction::GridFunction(std::shared_ptr<const Grid> grid, double fill)
    : grid_(std::move(grid)), values_(grid_->num_dofs(), fill) {}

GridFunction::GridFunction(std::shared_ptr<const Grid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->num_dofs())
    throw std::invalid_argument("grid function size " + std::to_string(values_.size()) + " does not match " +
                                std::to_string(grid_->num_dofs()) + " dofs");
}

double forward_diff(const GridFunction& u, std::size_t j, int k) {
  const auto& grid = u.grid();
  if (j >= grid.num_edges()) throw std::out_of_range("edge index out of range");
  if (k < 0 || k > grid.intervals(j) - 1) throw std::out_of_range("forward difference index out of range");
  return (u.value(j, k + 1) - u.value(j, k)) / grid.step(j);
}

double second_diff(const GridFunction& u, std::size_t j, int k) {
  check_interior(u.grid(), j, k);
  const double h = u.grid().step(j);
  return (u.value(j, k - 1) - 2.0 * u.value(j, k) + u.value(j, k + 1)) / (h * h);
}

std::pair<double, double> grad_pair(const GridFunction& u, std::size_t j, int k) {
  check_interior(u.grid(), j, k);
  return {forward_diff(u, j, k), forward_diff(u, j, k - 1)};
}

double weighted_inner(const GridFunction& u, const GridFunction& w) {
  if (u.grid_ptr() != w.grid_ptr()) throw std::invalid_argument("weighted_inner: grid functions live on different grids");
  const auto& grid = u.grid();
  const auto& net = grid.network();
  double sum = 0.0;
  for (std::size_t j = 0; j < grid.num_edges(); ++j) {
    const double h = grid.step(j);
    for (int k = 1; k < grid.intervals(j); ++k) sum += h * u.value(j, k) * w.value(j, k);
  }
  for (std::size_t i = 0; i < net.num_vertices(); ++i) {
    const auto& inc = net.incidence(i);
    for (auto j : inc.outgoing) sum += 0.5 * grid.step(j) * u.value(j, 0) * w.value(j, 0);
    for (auto j : inc.incoming) {
      const int n = grid.intervals(j);
      sum += 0.5 * grid.step(j) * u.value(j, n) * w.value(j, n);
    }
  }
  return sum;
}

GValue node_hamiltonian(const GridFunction& u, const HamiltonianSpec& ham, std::size_t j, int k) {
  const auto [q1, q2] = grad_pair(u, j, k);
  return ham.eval(j, arc_fraction(u.grid(), j, k), q1, q2);
}

double transport(const GridFunction& u, const GridFunction& m, const HamiltonianSpec& ham, std::size_t j, int k) {
  const auto& grid = u.grid();
  check_interior(grid, j, k);
  const int n = grid.intervals(j);
  const auto here = node_hamiltonian(u, ham, j, k);
  double flux = m.value(j, k) * here.dq1 - m.value(j, k) * here.dq2;
  if (k > 1) flux -= m.value(j, k - 1) * node_hamiltonian(u, ham, j, k - 1).dq1;
  if (k < n - 1) flux += m.value(j, k + 1) * node_hamiltonian(u, ham, j, k + 1).dq2;
  return flux / grid.step(j);
}

double kirchhoff_u(const GridFunction& u, const GridFunction& v, std::size_t vertex) {
  const auto& grid = u.grid();
  const auto& net = grid.network();
  const auto& inc = net.incidence(vertex);
  double sum = 0.0;
  for (auto j : inc.outgoing) sum += net.edge(j).nu * forward_diff(u, j, 0) + 0.5 * grid.step(j) * v.value(j, 0);
  for (auto j : inc.incoming) {
    const int n = grid.intervals(j);
    sum -= net.edge(j).nu * forward_diff(u, j, n - 1) - 0.5 * grid.step(j) * v.value(j, n);
  }
  return sum;
}

double kirchhoff_m(const GridFunction& m, const GridFunction& u, const HamiltonianSpec& ham, std::size_t vertex) {
  const auto& grid = u.grid();
  const auto& net = grid.network();
  const auto& inc = net.incidence(vertex);
  double sum = 0.0;
  for (auto j : inc.outgoing)
    sum += net.edge(j).nu * forward_diff(m, j, 0) + m.value(j, 1) * node_hamiltonian(u, ham, j, 1).dq2;
  for (auto j : inc.incoming) {
    const int n = grid.intervals(j);
    sum -= net.edge(j).nu * forward_diff(m, j, n - 1) + m.value(j, n - 1) * node_hamiltonian(u, ham, j, n - 1).dq1;
  }
  return sum;
}

}  // namespace mfgnet
