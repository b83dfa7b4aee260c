#include "mfgnet/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mfgnet {

namespace {

bool is_integer(double x) { return std::floor(x) == x; }

}  // namespace

CouplingOperator CouplingOperator::power(double gamma) {
  if (!std::isfinite(gamma) || gamma <= 0.0) throw std::invalid_argument("power coupling needs a positive exponent");
  CouplingOperator op;
  op.kind_ = Kind::power;
  op.gamma_ = gamma;
  return op;
}

CouplingOperator CouplingOperator::arctan() {
  CouplingOperator op;
  op.kind_ = Kind::arctan;
  return op;
}

CouplingOperator CouplingOperator::table(std::vector<std::pair<double, double>> knots) {
  if (knots.size() < 2) throw std::invalid_argument("coupling table needs at least 2 knots");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].first > knots[i - 1].first)) throw std::invalid_argument("coupling table knots must increase");
  }
  CouplingOperator op;
  op.kind_ = Kind::table;
  op.knots_ = std::move(knots);
  return op;
}

CouplingOperator CouplingOperator::parse(const std::string& text) {
  if (text == "arctan") return arctan();
  if (text == "power") return power(2.0);
  if (text.rfind("power:", 0) == 0) {
    std::size_t used = 0;
    const auto exponent = text.substr(6);
    double gamma = 0.0;
    try {
      gamma = std::stod(exponent, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != exponent.size()) throw std::invalid_argument("bad coupling exponent in '" + text + "'");
    return power(gamma);
  }
  throw std::invalid_argument("unknown coupling '" + text + "' (expected power:<gamma> or arctan)");
}

std::string CouplingOperator::describe() const {
  switch (kind_) {
    case Kind::power: {
      std::ostringstream out;
      out << "power:" << gamma_;
      return out.str();
    }
    case Kind::arctan: return "arctan";
    case Kind::table: return "table";
  }
  return "unknown";
}

double CouplingOperator::value(double m) const {
  switch (kind_) {
    case Kind::power:
      if (m < 0.0 && !is_integer(gamma_))
        throw std::domain_error("power coupling with non-integer exponent is undefined for negative mass; "
                                "use a sign-preserving extension or an integer exponent");
      return std::pow(m, gamma_);
    case Kind::arctan: return 1.0 - 4.0 / std::numbers::pi * std::atan(m);
    case Kind::table: {
      auto it = std::upper_bound(knots_.begin(), knots_.end(), m,
                                 [](double x, const auto& knot) { return x < knot.first; });
      std::size_t right = static_cast<std::size_t>(std::distance(knots_.begin(), it));
      right = std::clamp<std::size_t>(right, 1, knots_.size() - 1);
      const auto& [m0, v0] = knots_[right - 1];
      const auto& [m1, v1] = knots_[right];
      return v0 + (v1 - v0) * (m - m0) / (m1 - m0);
    }
  }
  return 0.0;
}

double CouplingOperator::derivative(double m) const {
  switch (kind_) {
    case Kind::power:
      if (m < 0.0 && !is_integer(gamma_))
        throw std::domain_error("power coupling with non-integer exponent is undefined for negative mass; "
                                "use a sign-preserving extension or an integer exponent");
      if (gamma_ == 1.0) return 1.0;
      return gamma_ * std::pow(m, gamma_ - 1.0);
    case Kind::arctan: return -4.0 / std::numbers::pi / (1.0 + m * m);
    case Kind::table: {
      auto it = std::upper_bound(knots_.begin(), knots_.end(), m,
                                 [](double x, const auto& knot) { return x < knot.first; });
      std::size_t right = static_cast<std::size_t>(std::distance(knots_.begin(), it));
      right = std::clamp<std::size_t>(right, 1, knots_.size() - 1);
      const auto& [m0, v0] = knots_[right - 1];
      const auto& [m1, v1] = knots_[right];
      return (v1 - v0) / (m1 - m0);
    }
  }
  return 0.0;
}

bool CouplingOperator::nondecreasing() const {
  switch (kind_) {
    case Kind::power: return true;
    case Kind::arctan: return false;
    case Kind::table:
      for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (knots_[i].second < knots_[i - 1].second) return false;
      }
      return true;
  }
  return false;
}

double CouplingOperator::bound(double m_max) const {
  if (m_max < 0.0) throw std::invalid_argument("bound needs m_max >= 0");
  switch (kind_) {
    case Kind::power: return std::pow(m_max, gamma_);
    case Kind::arctan: return std::max(1.0, std::abs(value(m_max)));
    case Kind::table: {
      double sup = std::max(std::abs(value(0.0)), std::abs(value(m_max)));
      for (const auto& [m, v] : knots_) {
        if (m > 0.0 && m < m_max) sup = std::max(sup, std::abs(v));
      }
      return sup;
    }
  }
  return 0.0;
}

CouplingValues eval_coupling(const CouplingOperator& op, const GridFunction& m) {
  CouplingValues out{GridFunction(m.grid_ptr()), GridFunction(m.grid_ptr())};
  for (std::size_t d = 0; d < m.size(); ++d) {
    out.value[d] = op.value(m[d]);
    out.derivative[d] = op.derivative(m[d]);
  }
  return out;
}

}  // namespace mfgnet
