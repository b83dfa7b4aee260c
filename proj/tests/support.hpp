#pragma once

// Hand-rolled generators for property tests.

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mfgnet/harness.hpp"
#include "mfgnet/network.hpp"
#include "mfgnet/operators.hpp"
#include "mfgnet/system.hpp"

namespace mfgnet::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Connected multigraph with random orientations, parallel edges, the odd
/// self-loop and occasional identification of two raw vertices.
inline NetworkSpec random_network_spec(Rng& rng) {
  NetworkSpec spec;
  const int n_raw = uniform_int(rng, 2, 6);
  for (int v = 0; v < n_raw; ++v)
    spec.vertices.push_back({"v" + std::to_string(v), {uniform(rng, -1, 1), uniform(rng, -1, 1)}});
  int e = 0;
  auto add_edge = [&](int a, int b) {
    if (uniform(rng, 0, 1) < 0.5) std::swap(a, b);
    spec.edges.push_back({"e" + std::to_string(e++), "v" + std::to_string(a), "v" + std::to_string(b),
                          uniform(rng, 0.3, 2.0), uniform(rng, 0.05, 1.0)});
  };
  for (int v = 1; v < n_raw; ++v) add_edge(uniform_int(rng, 0, v - 1), v);  // spanning tree
  const int extra = uniform_int(rng, 0, 3);
  for (int x = 0; x < extra; ++x) add_edge(uniform_int(rng, 0, n_raw - 1), uniform_int(rng, 0, n_raw - 1));
  if (n_raw >= 3 && uniform(rng, 0, 1) < 0.3) spec.identify.push_back({"v0", "v" + std::to_string(n_raw - 1)});
  return spec;
}

inline std::shared_ptr<const Grid> random_grid(Rng& rng, const Network& net) {
  std::vector<int> n(net.num_edges());
  for (auto& v : n) v = uniform_int(rng, 3, 12);
  return std::make_shared<const Grid>(build_grid(net, n));
}

inline GridFunction random_function(Rng& rng, const std::shared_ptr<const Grid>& grid, double lo = -1.0,
                                    double hi = 1.0) {
  GridFunction f(grid);
  for (std::size_t d = 0; d < f.size(); ++d) f[d] = uniform(rng, lo, hi);
  return f;
}

inline Problem random_problem(Rng& rng, bool vertex_source = true, double beta = 2.0) {
  auto net = build_network(random_network_spec(rng));
  Problem p;
  p.grid = random_grid(rng, net);
  std::vector<double> s(net.num_edges());
  for (auto& v : s) v = uniform(rng, 0, 1) < 0.7 ? 1.0 : 0.0;
  p.hamiltonian.beta = beta;
  p.hamiltonian.scale = uniform(rng, 0.5, 1.5);
  p.hamiltonian.cost = CostField(s);
  p.coupling = uniform(rng, 0, 1) < 0.5 ? CouplingOperator::power(2.0) : CouplingOperator::arctan();
  p.vertex_source = vertex_source;
  return p;
}

/// Random unknowns whose forward differences stay at least `margin` away
/// from zero, so no gradient pair sits on a kink of g.
inline std::vector<double> random_unknowns(Rng& rng, const Problem& p, double margin = 1e-2) {
  std::vector<double> x(p.num_unknowns());
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (auto& v : x) v = uniform(rng, -1, 1);
    for (std::size_t d = 0; d < p.num_dofs(); ++d) x[p.m_index(d)] = uniform(rng, 0.1, 1.0);
    if (min_kink_distance(p, x) > margin) return x;
  }
  throw std::runtime_error("could not draw kink-free unknowns");
}

inline std::shared_ptr<const Grid> tripod_grid(int n) {
  return std::make_shared<const Grid>(build_grid_uniform(preset_tripod(0.1), n));
}

inline Problem tripod_problem(int n, double nu = 0.1, std::vector<double> switches = {1, 1, 1}) {
  Problem p;
  p.grid = std::make_shared<const Grid>(build_grid_uniform(preset_tripod(nu), n));
  p.hamiltonian.cost = CostField(std::move(switches));
  return p;
}

}  // namespace mfgnet::testing
