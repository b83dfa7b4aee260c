#include "mfgnet/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SPQRSupport>
#include <Eigen/Sparse>

namespace mfgnet {

RankDeficientError::RankDeficientError(std::size_t r, std::size_t c)
    : std::runtime_error("Jacobian is rank deficient: numerical rank " + std::to_string(r) + " < " +
                         std::to_string(c) + " columns"),
      rank(r),
      cols(c) {}

double norm2(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())).norm();
}

namespace {

using SpqrMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, SuiteSparse_long>;

SpqrMatrix to_spqr_matrix(const SparseJacobian& jac) {
  std::vector<Eigen::Triplet<double, SuiteSparse_long>> triplets;
  triplets.reserve(jac.entries.size());
  for (const auto& t : jac.entries) {
    triplets.emplace_back(static_cast<SuiteSparse_long>(t.row), static_cast<SuiteSparse_long>(t.col), t.value);
  }
  SpqrMatrix a(static_cast<Eigen::Index>(jac.rows), static_cast<Eigen::Index>(jac.cols));
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

Eigen::VectorXd solve_sparse(const SparseJacobian& jac, const Eigen::VectorXd& rhs, std::size_t& rank) {
  SpqrMatrix a = to_spqr_matrix(jac);
  Eigen::SPQR<SpqrMatrix> qr;
  qr.compute(a);
  if (qr.info() != Eigen::Success) throw std::runtime_error("SuiteSparseQR factorization failed");
  rank = static_cast<std::size_t>(qr.rank());
  if (rank < jac.cols) throw RankDeficientError(rank, jac.cols);
  Eigen::VectorXd step = qr.solve(rhs);
  if (qr.info() != Eigen::Success) throw std::runtime_error("SuiteSparseQR solve failed");
  return step;
}

// J P = Q [R1; 0]: minimise by back substitution R1 z = (Q^T rhs)_top, step = P z.
Eigen::VectorXd solve_dense(const SparseJacobian& jac, const Eigen::VectorXd& rhs, std::size_t& rank) {
  const auto m = static_cast<Eigen::Index>(jac.rows);
  const auto n = static_cast<Eigen::Index>(jac.cols);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
  for (const auto& t : jac.entries) a(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) += t.value;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  rank = static_cast<std::size_t>(qr.rank());
  if (rank < jac.cols) throw RankDeficientError(rank, jac.cols);
  const Eigen::VectorXd qt_rhs = qr.householderQ().transpose() * rhs;
  const Eigen::VectorXd z =
      qr.matrixQR().topLeftCorner(n, n).triangularView<Eigen::Upper>().solve(qt_rhs.head(n));
  return qr.colsPermutation() * z;
}

Eigen::VectorXd apply(const SparseJacobian& jac, const Eigen::VectorXd& v, const Eigen::VectorXd& shift) {
  Eigen::VectorXd out = shift;
  for (const auto& t : jac.entries) out[static_cast<Eigen::Index>(t.row)] += t.value * v[static_cast<Eigen::Index>(t.col)];
  return out;
}

Eigen::VectorXd apply_transpose(const SparseJacobian& jac, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(jac.cols));
  for (const auto& t : jac.entries) out[static_cast<Eigen::Index>(t.col)] += t.value * v[static_cast<Eigen::Index>(t.row)];
  return out;
}

double frobenius(const SparseJacobian& jac) {
  double sum = 0.0;
  for (const auto& t : jac.entries) sum += t.value * t.value;
  return std::sqrt(sum);
}

// Rewrite each dense row  a^T x + f  as the chain
//   s_1 - a_1 x_{c_1} = 0,  s_t - s_{t-1} - a_t x_{c_t} = 0,  s_p + f = 0
// over fresh unknowns s. Returns false when no row is dense.
bool chain_dense_rows(const SparseJacobian& jac, const Eigen::VectorXd& f, std::size_t threshold,
                      SparseJacobian& out, Eigen::VectorXd& out_f) {
  std::vector<std::size_t> count(jac.rows, 0);
  for (const auto& t : jac.entries) ++count[t.row];
  std::vector<std::vector<Triplet>> dense(jac.rows);
  bool any = false;
  for (std::size_t r = 0; r < jac.rows; ++r) any = any || count[r] > threshold;
  if (!any) return false;

  std::vector<std::size_t> new_row(jac.rows, 0);
  std::size_t next = 0;
  for (std::size_t r = 0; r < jac.rows; ++r) {
    if (count[r] <= threshold) new_row[r] = next++;
  }
  out = SparseJacobian{0, jac.cols, {}};
  std::vector<double> rhs;
  rhs.reserve(jac.rows);
  for (std::size_t r = 0; r < jac.rows; ++r) {
    if (count[r] <= threshold) rhs.push_back(f[static_cast<Eigen::Index>(r)]);
  }
  for (const auto& t : jac.entries) {
    if (count[t.row] <= threshold) out.entries.push_back({new_row[t.row], t.col, t.value});
    else dense[t.row].push_back(t);
  }
  std::size_t row = next;
  for (std::size_t r = 0; r < jac.rows; ++r) {
    if (dense[r].empty()) continue;
    auto& terms = dense[r];
    std::stable_sort(terms.begin(), terms.end(), [](const Triplet& a, const Triplet& b) { return a.col < b.col; });
    const std::size_t first_aux = out.cols;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      out.entries.push_back({row, first_aux + t, 1.0});
      if (t > 0) out.entries.push_back({row, first_aux + t - 1, -1.0});
      out.entries.push_back({row, terms[t].col, -terms[t].value});
      rhs.push_back(0.0);
      ++row;
    }
    out.entries.push_back({row, first_aux + terms.size() - 1, 1.0});
    rhs.push_back(f[static_cast<Eigen::Index>(r)]);
    ++row;
    out.cols += terms.size();
  }
  out.rows = row;
  out_f = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  return true;
}

}  // namespace

LsqResult lsq_solve(const SparseJacobian& jacobian, std::span<const double> residual, const LsqOptions& options) {
  if (residual.size() != jacobian.rows) throw std::invalid_argument("lsq_solve: residual length does not match rows");
  if (jacobian.rows < jacobian.cols) throw std::invalid_argument("lsq_solve: system is underdetermined");
  const Eigen::VectorXd f =
      Eigen::Map<const Eigen::VectorXd>(residual.data(), static_cast<Eigen::Index>(residual.size()));
  LsqResult out;

  if (options.backend == LsqBackend::sparse_qr && options.split_dense_rows) {
    SparseJacobian chained;
    Eigen::VectorXd chained_f;
    const auto threshold = std::max(options.dense_row_min, jacobian.cols / 8);
    if (chain_dense_rows(jacobian, f, threshold, chained, chained_f)) {
      try {
        std::size_t rank = 0;
        const Eigen::VectorXd full = solve_sparse(chained, -chained_f, rank);
        const Eigen::VectorXd step = full.head(static_cast<Eigen::Index>(jacobian.cols));
        const Eigen::VectorXd r = apply(jacobian, step, f);
        const double scale = frobenius(jacobian);
        const bool consistent = r.norm() <= 1e-10 * (f.norm() + scale * step.norm());
        const bool stationary = apply_transpose(jacobian, r).norm() <= 1e-8 * scale * r.norm();
        if (consistent || stationary) {
          out.step.assign(step.data(), step.data() + step.size());
          out.residual_norm = r.norm();
          out.rank = jacobian.cols;
          out.split_dense_rows = true;
          return out;
        }
      } catch (const RankDeficientError&) {
        // fall through to the plain factorization, which reports the rank of J itself
      }
    }
  }

  const Eigen::VectorXd rhs = -f;
  Eigen::VectorXd step = options.backend == LsqBackend::sparse_qr ? solve_sparse(jacobian, rhs, out.rank)
                                                                  : solve_dense(jacobian, rhs, out.rank);
  out.residual_norm = apply(jacobian, step, f).norm();
  out.step.assign(step.data(), step.data() + step.size());
  return out;
}

void SolverOptions::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("damping alpha must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw std::invalid_argument("tolerance epsilon must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
}

SolveResult gauss_newton(const LeastSquaresModel& model, std::vector<double> x0, const SolverOptions& options) {
  options.validate();
  const auto start = std::chrono::steady_clock::now();
  SolveResult result{std::move(x0), {}};
  auto& x = result.x;
  auto& report = result.report;

  const auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const auto f = model.residual(x);
    const double f_norm = norm2(f);
    if (iter == 0) report.initial_residual_norm = f_norm;
    const auto jac = model.jacobian(x);
    LsqResult lsq;
    try {
      lsq = lsq_solve(jac, f, options.lsq);
    } catch (const RankDeficientError& e) {
      report.final_residual_norm = f_norm;
      report.wall_seconds = elapsed();
      throw SolveAborted(e, report);
    }
    const double step_norm = norm2(lsq.step);
    for (std::size_t c = 0; c < x.size(); ++c) x[c] += options.alpha * lsq.step[c];

    report.iterations = iter + 1;
    report.residual_norms.push_back(f_norm);
    report.step_norms.push_back(step_norm);
    report.lambdas.push_back(model.monitor ? x[*model.monitor] : 0.0);
    if (!std::isfinite(step_norm)) break;
    if (step_norm < options.epsilon) {
      report.converged = true;
      break;
    }
  }
  report.final_residual_norm = norm2(model.residual(x));
  report.wall_seconds = elapsed();
  return result;
}

SolveResult gauss_newton(const Problem& problem, const SolverOptions& options) {
  problem.validate();
  const auto exec = options.execution;
  LeastSquaresModel model{
      [&problem, exec](std::span<const double> x) { return assemble_residual(problem, x, exec); },
      [&problem, exec](std::span<const double> x) { return assemble_jacobian(problem, x, exec); },
      problem.lambda_index()};
  auto x0 = options.initial ? *options.initial : initial_guess(problem);
  if (x0.size() != problem.num_unknowns()) throw std::invalid_argument("initial guess has the wrong length");
  return gauss_newton(model, std::move(x0), options);
}

}  // namespace mfgnet
