#include "mfgnet/hamiltonian.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mfgnet {

CostField CostField::uniform(std::size_t num_edges, double s) { return CostField(std::vector<double>(num_edges, s)); }

void CostField::set_samples(std::size_t edge, std::vector<double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("cost samples need at least 2 values per edge");
  for (double v : samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("cost samples must be finite");
  }
  samples_[edge] = std::move(samples);
}

double CostField::eval(std::size_t edge, double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("arc fraction t must lie in [0,1]");
  if (auto it = samples_.find(edge); it != samples_.end()) {
    const auto& s = it->second;
    const double pos = t * static_cast<double>(s.size() - 1);
    const auto left = std::min(static_cast<std::size_t>(pos), s.size() - 2);
    const double w = pos - static_cast<double>(left);
    return (1.0 - w) * s[left] + w * s[left + 1];
  }
  if (switches_.empty() && samples_.empty()) return 0.0;
  if (edge >= switches_.size()) throw std::out_of_range("no cost switch for edge " + std::to_string(edge));
  return switches_[edge] * (1.0 + std::cos(2.0 * std::numbers::pi * (t + 0.5)));
}

double eval_cost(const CostField& cost, std::size_t edge, double t) { return cost.eval(edge, t); }

CostField load_cost_csv(const std::filesystem::path& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cost file " + path.string());
  const auto& net = grid.network();
  std::vector<std::vector<double>> samples(net.num_edges());
  std::vector<std::vector<bool>> seen(net.num_edges());
  for (std::size_t j = 0; j < net.num_edges(); ++j) {
    samples[j].assign(static_cast<std::size_t>(grid.intervals(j)) + 1, 0.0);
    seen[j].assign(samples[j].size(), false);
  }
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("edge", 0) == 0) continue;
    }
    std::istringstream row(line);
    std::string edge_id, k_text, f_text;
    if (!std::getline(row, edge_id, ',') || !std::getline(row, k_text, ',') || !std::getline(row, f_text))
      throw std::runtime_error("malformed cost row: " + line);
    const auto j = net.edge_index(edge_id);
    const int k = std::stoi(k_text);
    if (k < 0 || k > grid.intervals(j)) throw std::runtime_error("cost row node out of range: " + line);
    samples[j][static_cast<std::size_t>(k)] = std::stod(f_text);
    seen[j][static_cast<std::size_t>(k)] = true;
  }
  CostField cost;
  for (std::size_t j = 0; j < net.num_edges(); ++j) {
    for (bool s : seen[j]) {
      if (!s) throw std::runtime_error("cost file misses nodes on edge '" + net.edge(j).id + "'");
    }
    cost.set_samples(j, std::move(samples[j]));
  }
  return cost;
}

void HamiltonianSpec::validate() const {
  if (!(beta >= 2.0) || !std::isfinite(beta)) throw std::invalid_argument("Hamiltonian exponent beta must be >= 2");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("Hamiltonian scale must be positive");
}

GValue HamiltonianSpec::eval(std::size_t edge, double t, double q1, double q2) const {
  const double a = q1 < 0.0 ? -q1 : 0.0;
  const double b = q2 > 0.0 ? q2 : 0.0;
  const double s = a * a + b * b;
  GValue out;
  if (beta == 2.0) {
    out.g = s;
    out.dq1 = -2.0 * a;
    out.dq2 = 2.0 * b;
  } else {
    const double sp = std::pow(s, 0.5 * beta - 1.0);
    out.g = sp * s;
    out.dq1 = -beta * sp * a;
    out.dq2 = beta * sp * b;
  }
  out.g *= scale;
  out.dq1 *= scale;
  out.dq2 *= scale;
  out.g += cost.eval(edge, t);
  return out;
}

// At q1 = 0 (q2 = 0) the second partial is the limit from the active side.
GHessian HamiltonianSpec::hessian(double q1, double q2) const {
  const bool left = q1 <= 0.0;
  const bool right = q2 >= 0.0;
  if (!left && !right) return {};
  if (beta == 2.0) return {left ? 2.0 * scale : 0.0, 0.0, right ? 2.0 * scale : 0.0};
  const double a = left ? -q1 : 0.0;
  const double b = right ? q2 : 0.0;
  const double s = a * a + b * b;
  if (s == 0.0) return {};
  const double p = 0.5 * beta - 1.0;
  const double sp = std::pow(s, p);
  const double spm1 = sp / s;
  const double c = scale * beta;
  GHessian h;
  if (left) h.d11 = c * (2.0 * p * spm1 * a * a + sp);
  if (right) h.d22 = c * (2.0 * p * spm1 * b * b + sp);
  if (left && right) h.d12 = -2.0 * c * p * spm1 * a * b;
  return h;
}

GValue eval_g(const HamiltonianSpec& spec, std::size_t edge, double t, double q1, double q2) {
  return spec.eval(edge, t, q1, q2);
}

}  // namespace mfgnet
