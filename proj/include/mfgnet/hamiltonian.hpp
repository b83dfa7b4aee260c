#pragma once

// Godunov-type numerical Hamiltonian
//
//   g(x, q1, q2) = kappa ((q1^-)^2 + (q2^+)^2)^(beta/2) + f(x)
//
// with q^- = max(-q, 0), q^+ = max(q, 0) and kappa > 0 (default 1). It is
// consistent with H(x, p) = kappa |p|^beta + f(x). At the kinks q1 = 0 and
// q2 = 0 the first partials are 0 and the second partials take the limit from
// the side where the term is active (q1 < 0, q2 > 0).

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mfgnet/network.hpp"

namespace mfgnet {

struct GValue {
  double g = 0.0;
  double dq1 = 0.0;
  double dq2 = 0.0;
};

/// Second partials of g in (q1, q2); f does not contribute.
struct GHessian {
  double d11 = 0.0;
  double d12 = 0.0;
  double d22 = 0.0;
};

/// Running cost f on each edge, as a function of the arc fraction t in [0,1].
///
/// Default profile: f_j(t) = s_j (1 + cos(2 pi (t + 1/2))). Edges with a
/// sampled profile use linear interpolation between equispaced samples
/// (sample k sits at t = k / (n - 1)).
class CostField {
public:
  CostField() = default;
  explicit CostField(std::vector<double> switches) : switches_(std::move(switches)) {}

  static CostField from_switches(std::vector<double> switches) { return CostField(std::move(switches)); }
  /// Switch s on every one of `num_edges` edges.
  static CostField uniform(std::size_t num_edges, double s);

  void set_samples(std::size_t edge, std::vector<double> samples);

  double eval(std::size_t edge, double t) const;

  std::size_t num_switches() const { return switches_.size(); }
  const std::vector<double>& switches() const { return switches_; }

private:
  std::vector<double> switches_;
  std::map<std::size_t, std::vector<double>> samples_;
};

/// Read a per-node cost CSV with header `edge,k,f`; every node k = 0..N_j of
/// every edge must be present.
CostField load_cost_csv(const std::filesystem::path& path, const Grid& grid);

double eval_cost(const CostField& cost, std::size_t edge, double t);

struct HamiltonianSpec {
  double beta = 2.0;
  CostField cost;
  double scale = 1.0;  // kappa

  /// (value, dg/dq1, dg/dq2) at arc fraction t of `edge`.
  GValue eval(std::size_t edge, double t, double q1, double q2) const;
  GHessian hessian(double q1, double q2) const;
  void validate() const;
};

GValue eval_g(const HamiltonianSpec& spec, std::size_t edge, double t, double q1, double q2);

}  // namespace mfgnet
