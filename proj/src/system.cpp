#include "mfgnet/system.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace mfgnet {

void Problem::validate() const {
  if (!grid) throw std::invalid_argument("problem has no grid");
  hamiltonian.validate();
}

std::vector<double> initial_guess(const Problem& problem) {
  std::vector<double> x(problem.num_unknowns(), 0.0);
  const double mass = 1.0 / problem.grid->network().total_length();
  for (std::size_t d = 0; d < problem.num_dofs(); ++d) x[problem.m_index(d)] = mass;
  return x;
}

GridFunction extract_u(const Problem& problem, std::span<const double> x) {
  const auto n = problem.num_dofs();
  return GridFunction(problem.grid, std::vector<double>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)));
}

GridFunction extract_m(const Problem& problem, std::span<const double> x) {
  const auto n = static_cast<std::ptrdiff_t>(problem.num_dofs());
  return GridFunction(problem.grid, std::vector<double>(x.begin() + n, x.begin() + 2 * n));
}

double extract_lambda(const Problem& problem, std::span<const double> x) { return x[problem.lambda_index()]; }

std::vector<double> SparseJacobian::dense() const {
  std::vector<double> out(rows * cols, 0.0);
  for (const auto& t : entries) out[t.row * cols + t.col] += t.value;
  return out;
}

SparseJacobian SparseJacobian::compressed() const {
  std::map<std::pair<std::size_t, std::size_t>, double> sums;
  for (const auto& t : entries) sums[{t.col, t.row}] += t.value;
  SparseJacobian out{rows, cols, {}};
  out.entries.reserve(sums.size());
  for (const auto& [key, value] : sums) out.entries.push_back({key.second, key.first, value});
  return out;
}

namespace {

void check_size(const Problem& problem, std::span<const double> x) {
  if (x.size() != problem.num_unknowns())
    throw std::invalid_argument("unknown vector has " + std::to_string(x.size()) + " entries, expected " +
                                std::to_string(problem.num_unknowns()));
}

struct NodeState {
  GValue g;
  GHessian hess;
};

// Everything a row needs, computed once per assembly.
struct Context {
  const Problem& problem;
  const Grid& grid;
  const Network& net;
  std::span<const double> x;
  std::size_t n_dofs;
  std::size_t n_vertices;
  std::size_t n_interior;
  std::vector<NodeState> nodes;  // indexed by interior dof - n_vertices
  std::vector<double> v;         // V(M) per dof
  std::vector<double> dv;        // V'(M) per dof

  double u(std::size_t j, int k) const { return x[grid.dof(j, k)]; }
  double m(std::size_t j, int k) const { return x[n_dofs + grid.dof(j, k)]; }
  std::size_t ucol(std::size_t j, int k) const { return grid.dof(j, k); }
  std::size_t mcol(std::size_t j, int k) const { return n_dofs + grid.dof(j, k); }
  std::size_t lambda_col() const { return 2 * n_dofs; }
  double lambda() const { return x[2 * n_dofs]; }
  const NodeState& node(std::size_t j, int k) const { return nodes[grid.dof(j, k) - n_vertices]; }
};

Context make_context(const Problem& problem, std::span<const double> x, bool with_hessian, Execution exec) {
  problem.validate();
  check_size(problem, x);
  const auto& grid = *problem.grid;
  Context ctx{problem,
              grid,
              grid.network(),
              x,
              grid.num_dofs(),
              grid.network().num_vertices(),
              grid.num_dofs() - grid.network().num_vertices(),
              {},
              {},
              {}};
  ctx.nodes.resize(ctx.n_interior);
  ctx.v.resize(ctx.n_dofs);
  ctx.dv.resize(ctx.n_dofs);
  const bool parallel = exec == Execution::parallel;
  const auto n_interior = static_cast<std::ptrdiff_t>(ctx.n_interior);
  const auto n_dofs = static_cast<std::ptrdiff_t>(ctx.n_dofs);

#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t r = 0; r < n_interior; ++r) {
    const auto node = grid.resolve(ctx.n_vertices + static_cast<std::size_t>(r));
    const auto j = node.edge;
    const int k = node.k;
    const double h = grid.step(j);
    const double q1 = (ctx.u(j, k + 1) - ctx.u(j, k)) / h;
    const double q2 = (ctx.u(j, k) - ctx.u(j, k - 1)) / h;
    auto& state = ctx.nodes[static_cast<std::size_t>(r)];
    state.g = problem.hamiltonian.eval(j, static_cast<double>(k) / grid.intervals(j), q1, q2);
    if (with_hessian) state.hess = problem.hamiltonian.hessian(q1, q2);
  }

#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t d = 0; d < n_dofs; ++d) {
    const double mass = x[ctx.n_dofs + static_cast<std::size_t>(d)];
    ctx.v[static_cast<std::size_t>(d)] = problem.coupling.value(mass);
    if (with_hessian) ctx.dv[static_cast<std::size_t>(d)] = problem.coupling.derivative(mass);
  }
  return ctx;
}

// Row sinks: the same row code either accumulates the value only or also
// records partial derivatives.
struct ValueSink {
  double value = 0.0;
  void add(double v) { value += v; }
  void d(std::size_t, double) {}
  static constexpr bool wants_derivatives = false;
};

template <std::size_t Capacity>
struct TripletSink {
  double value = 0.0;
  std::size_t row = 0;
  std::array<Triplet, Capacity>* slots = nullptr;
  std::size_t count = 0;
  void add(double v) { value += v; }
  void d(std::size_t col, double v) {
    if (count == Capacity) throw std::logic_error("row capacity exceeded");
    (*slots)[count++] = Triplet{row, col, v};
  }
  static constexpr bool wants_derivatives = true;
};

struct VectorSink {
  double value = 0.0;
  std::size_t row = 0;
  std::vector<Triplet>* out = nullptr;
  void add(double v) { value += v; }
  void d(std::size_t col, double v) { out->push_back(Triplet{row, col, v}); }
  static constexpr bool wants_derivatives = true;
};

// coeff * M_{j,k} * dg/dq_which at node (j,k), with its derivatives in M and U.
template <typename Sink>
void flux_term(const Context& ctx, Sink& sink, double coeff, std::size_t j, int k, int which) {
  const auto& state = ctx.node(j, k);
  const double partial = which == 1 ? state.g.dq1 : state.g.dq2;
  const double mass = ctx.m(j, k);
  sink.add(coeff * mass * partial);
  if constexpr (Sink::wants_derivatives) {
    sink.d(ctx.mcol(j, k), coeff * partial);
    const double h = ctx.grid.step(j);
    const double hq1 = which == 1 ? state.hess.d11 : state.hess.d12;
    const double hq2 = which == 1 ? state.hess.d12 : state.hess.d22;
    const double scale = coeff * mass / h;
    if (hq1 != 0.0 || hq2 != 0.0) {
      sink.d(ctx.ucol(j, k + 1), scale * hq1);
      sink.d(ctx.ucol(j, k), scale * (hq2 - hq1));
      sink.d(ctx.ucol(j, k - 1), -scale * hq2);
    }
  }
}

template <typename Sink>
void hjb_interior_row(const Context& ctx, Sink& sink, std::size_t j, int k) {
  const double h = ctx.grid.step(j);
  const double nu = ctx.net.edge(j).nu;
  const double diff = nu / (h * h);
  const auto& state = ctx.node(j, k);
  const std::size_t dof = ctx.grid.dof(j, k);
  sink.add(-diff * (ctx.u(j, k - 1) - 2.0 * ctx.u(j, k) + ctx.u(j, k + 1)));
  sink.add(state.g.g);
  sink.add(ctx.lambda());
  sink.add(-ctx.v[dof]);
  if constexpr (Sink::wants_derivatives) {
    sink.d(ctx.ucol(j, k - 1), -diff - state.g.dq2 / h);
    sink.d(ctx.ucol(j, k), 2.0 * diff + (state.g.dq2 - state.g.dq1) / h);
    sink.d(ctx.ucol(j, k + 1), -diff + state.g.dq1 / h);
    sink.d(ctx.lambda_col(), 1.0);
    sink.d(ctx.n_dofs + dof, -ctx.dv[dof]);
  }
}

template <typename Sink>
void fp_interior_row(const Context& ctx, Sink& sink, std::size_t j, int k) {
  const double h = ctx.grid.step(j);
  const int n = ctx.grid.intervals(j);
  const double diff = ctx.net.edge(j).nu / (h * h);
  sink.add(diff * (ctx.m(j, k - 1) - 2.0 * ctx.m(j, k) + ctx.m(j, k + 1)));
  if constexpr (Sink::wants_derivatives) {
    sink.d(ctx.mcol(j, k - 1), diff);
    sink.d(ctx.mcol(j, k), -2.0 * diff);
    sink.d(ctx.mcol(j, k + 1), diff);
  }
  const double inv_h = 1.0 / h;
  flux_term(ctx, sink, inv_h, j, k, 1);
  flux_term(ctx, sink, -inv_h, j, k, 2);
  if (k > 1) flux_term(ctx, sink, -inv_h, j, k - 1, 1);
  if (k < n - 1) flux_term(ctx, sink, inv_h, j, k + 1, 2);
}

template <typename Sink>
void hjb_vertex_row(const Context& ctx, Sink& sink, std::size_t i) {
  const auto& inc = ctx.net.incidence(i);
  const double src = ctx.problem.vertex_source ? 1.0 : 0.0;
  const double vm = src * (ctx.v[i] - ctx.lambda());
  // Outgoing ends contribute nu (U_{j,1} - U_i)/h, incoming ends
  // -nu (U_i - U_{j,N-1})/h: both are nu (U_inner - U_i)/h.
  auto one_side = [&](std::size_t j, int inner) {
    const double h = ctx.grid.step(j);
    const double c = ctx.net.edge(j).nu / h;
    sink.add(c * (ctx.u(j, inner) - ctx.x[i]));
    sink.add(0.5 * h * vm);
    if constexpr (Sink::wants_derivatives) {
      sink.d(ctx.ucol(j, inner), c);
      sink.d(i, -c);
      if (src != 0.0) {
        sink.d(ctx.n_dofs + i, 0.5 * h * ctx.dv[i]);
        sink.d(ctx.lambda_col(), -0.5 * h);
      }
    }
  };
  for (auto j : inc.outgoing) one_side(j, 1);
  for (auto j : inc.incoming) one_side(j, ctx.grid.intervals(j) - 1);
}

template <typename Sink>
void fp_vertex_row(const Context& ctx, Sink& sink, std::size_t i) {
  const auto& inc = ctx.net.incidence(i);
  const double mi = ctx.x[ctx.n_dofs + i];
  for (auto j : inc.outgoing) {
    const double c = ctx.net.edge(j).nu / ctx.grid.step(j);
    sink.add(c * (ctx.m(j, 1) - mi));
    if constexpr (Sink::wants_derivatives) {
      sink.d(ctx.mcol(j, 1), c);
      sink.d(ctx.n_dofs + i, -c);
    }
    flux_term(ctx, sink, 1.0, j, 1, 2);
  }
  for (auto j : inc.incoming) {
    const int n = ctx.grid.intervals(j);
    const double c = ctx.net.edge(j).nu / ctx.grid.step(j);
    sink.add(-c * (mi - ctx.m(j, n - 1)));
    if constexpr (Sink::wants_derivatives) {
      sink.d(ctx.mcol(j, n - 1), c);
      sink.d(ctx.n_dofs + i, -c);
    }
    flux_term(ctx, sink, -1.0, j, n - 1, 1);
  }
}

}  // namespace

std::vector<double> assemble_residual(const Problem& problem, std::span<const double> x, Execution exec) {
  const auto ctx = make_context(problem, x, false, exec);
  const auto nd = ctx.n_dofs;
  const auto ni = ctx.n_interior;
  std::vector<double> f(problem.num_equations(), 0.0);
  const bool parallel = exec == Execution::parallel;
  const auto n_interior = static_cast<std::ptrdiff_t>(ni);

#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t r = 0; r < n_interior; ++r) {
    const auto node = ctx.grid.resolve(ctx.n_vertices + static_cast<std::size_t>(r));
    ValueSink hjb, fp;
    hjb_interior_row(ctx, hjb, node.edge, node.k);
    fp_interior_row(ctx, fp, node.edge, node.k);
    f[static_cast<std::size_t>(r)] = hjb.value;
    f[nd + static_cast<std::size_t>(r)] = fp.value;
  }
  for (std::size_t i = 0; i < ctx.n_vertices; ++i) {
    ValueSink hjb, fp;
    hjb_vertex_row(ctx, hjb, i);
    fp_vertex_row(ctx, fp, i);
    f[ni + i] = hjb.value;
    f[nd + ni + i] = fp.value;
  }
  double mass = 0.0;
  double mean = 0.0;
  for (std::size_t d = 0; d < nd; ++d) {
    const double w = ctx.grid.weight(d);
    mass += w * x[nd + d];
    mean += w * x[d];
  }
  f[2 * nd] = mass - 1.0;
  f[2 * nd + 1] = mean;
  return f;
}

std::vector<double> assemble_residual_reference(const Problem& problem, std::span<const double> x) {
  problem.validate();
  check_size(problem, x);
  const auto& grid = *problem.grid;
  const auto& net = grid.network();
  const auto u = extract_u(problem, x);
  const auto m = extract_m(problem, x);
  const double lambda = extract_lambda(problem, x);
  const auto coupling = eval_coupling(problem.coupling, m);

  std::vector<double> hjb, hjb_vertex, fp, fp_vertex;
  for (std::size_t j = 0; j < grid.num_edges(); ++j) {
    const double nu = net.edge(j).nu;
    for (int k = 1; k < grid.intervals(j); ++k) {
      hjb.push_back(-nu * second_diff(u, j, k) + node_hamiltonian(u, problem.hamiltonian, j, k).g + lambda -
                    coupling.value.value(j, k));
      fp.push_back(nu * second_diff(m, j, k) + transport(u, m, problem.hamiltonian, j, k));
    }
  }
  GridFunction shifted = coupling.value;
  for (std::size_t d = 0; d < shifted.size(); ++d) shifted[d] = problem.vertex_source ? shifted[d] - lambda : 0.0;
  for (std::size_t i = 0; i < net.num_vertices(); ++i) {
    hjb_vertex.push_back(kirchhoff_u(u, shifted, i));
    fp_vertex.push_back(kirchhoff_m(m, u, problem.hamiltonian, i));
  }
  const GridFunction ones(problem.grid, 1.0);

  std::vector<double> f;
  f.reserve(problem.num_equations());
  f.insert(f.end(), hjb.begin(), hjb.end());
  f.insert(f.end(), hjb_vertex.begin(), hjb_vertex.end());
  f.insert(f.end(), fp.begin(), fp.end());
  f.insert(f.end(), fp_vertex.begin(), fp_vertex.end());
  f.push_back(weighted_inner(m, ones) - 1.0);
  f.push_back(weighted_inner(u, ones));
  return f;
}

SparseJacobian assemble_jacobian(const Problem& problem, std::span<const double> x, Execution exec) {
  const auto ctx = make_context(problem, x, true, exec);
  const auto nd = ctx.n_dofs;
  const auto ni = ctx.n_interior;
  constexpr std::size_t hjb_cap = 5;
  constexpr std::size_t fp_cap = 3 + 4 * 4;
  std::vector<std::array<Triplet, hjb_cap>> hjb_slots(ni);
  std::vector<std::array<Triplet, fp_cap>> fp_slots(ni);
  std::vector<std::size_t> hjb_count(ni), fp_count(ni);
  const bool parallel = exec == Execution::parallel;
  const auto n_interior = static_cast<std::ptrdiff_t>(ni);

#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t rr = 0; rr < n_interior; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const auto node = ctx.grid.resolve(ctx.n_vertices + r);
    TripletSink<hjb_cap> hjb{0.0, r, &hjb_slots[r], 0};
    hjb_interior_row(ctx, hjb, node.edge, node.k);
    hjb_count[r] = hjb.count;
    TripletSink<fp_cap> fp{0.0, nd + r, &fp_slots[r], 0};
    fp_interior_row(ctx, fp, node.edge, node.k);
    fp_count[r] = fp.count;
  }

  SparseJacobian jac{problem.num_equations(), problem.num_unknowns(), {}};
  jac.entries.reserve(ni * 12 + 4 * nd);
  for (std::size_t r = 0; r < ni; ++r) {
    jac.entries.insert(jac.entries.end(), hjb_slots[r].begin(),
                       hjb_slots[r].begin() + static_cast<std::ptrdiff_t>(hjb_count[r]));
  }
  for (std::size_t i = 0; i < ctx.n_vertices; ++i) {
    VectorSink sink{0.0, ni + i, &jac.entries};
    hjb_vertex_row(ctx, sink, i);
  }
  for (std::size_t r = 0; r < ni; ++r) {
    jac.entries.insert(jac.entries.end(), fp_slots[r].begin(),
                       fp_slots[r].begin() + static_cast<std::ptrdiff_t>(fp_count[r]));
  }
  for (std::size_t i = 0; i < ctx.n_vertices; ++i) {
    VectorSink sink{0.0, nd + ni + i, &jac.entries};
    fp_vertex_row(ctx, sink, i);
  }
  for (std::size_t d = 0; d < nd; ++d) {
    const double w = ctx.grid.weight(d);
    jac.entries.push_back({2 * nd, nd + d, w});
  }
  for (std::size_t d = 0; d < nd; ++d) {
    const double w = ctx.grid.weight(d);
    jac.entries.push_back({2 * nd + 1, d, w});
  }
  return jac;
}

SparseJacobian fd_jacobian(const Problem& problem, std::span<const double> x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  check_size(problem, x);
  std::vector<double> probe(x.begin(), x.end());
  SparseJacobian jac{problem.num_equations(), problem.num_unknowns(), {}};
  for (std::size_t c = 0; c < probe.size(); ++c) {
    const double original = probe[c];
    const double delta = step * (1.0 + std::abs(original));
    probe[c] = original + delta;
    const auto plus = assemble_residual(problem, probe, Execution::serial);
    probe[c] = original - delta;
    const auto minus = assemble_residual(problem, probe, Execution::serial);
    probe[c] = original;
    for (std::size_t r = 0; r < plus.size(); ++r) {
      const double value = (plus[r] - minus[r]) / (2.0 * delta);
      if (value != 0.0) jac.entries.push_back({r, c, value});
    }
  }
  return jac;
}

double min_kink_distance(const Problem& problem, std::span<const double> x) {
  check_size(problem, x);
  const auto u = extract_u(problem, x);
  const auto& grid = *problem.grid;
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.num_edges(); ++j) {
    for (int k = 0; k < grid.intervals(j); ++k) closest = std::min(closest, std::abs(forward_diff(u, j, k)));
  }
  return closest;
}

void write_system(const std::filesystem::path& path, const SparseJacobian& jacobian, std::span<const double> residual) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto compact = jacobian.compressed();
  out.precision(17);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << "% Jacobian J_F(X)\n";
  out << compact.rows << ' ' << compact.cols << ' ' << compact.entries.size() << '\n';
  for (const auto& t : compact.entries) out << t.row + 1 << ' ' << t.col + 1 << ' ' << t.value << '\n';
  out << "%%MatrixMarket matrix array real general\n";
  out << "% residual F(X)\n";
  out << residual.size() << " 1\n";
  for (double v : residual) out << v << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace mfgnet
