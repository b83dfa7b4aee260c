#pragma once

// Local coupling operators V_h[M]_{j,k} = F(M_{j,k}), evaluated nodewise.

#include <string>
#include <utility>
#include <vector>

#include "mfgnet/operators.hpp"

namespace mfgnet {

class CouplingOperator {
public:
  enum class Kind { power, arctan, table };

  /// V(m) = m^gamma. Non-integer gamma rejects negative masses.
  static CouplingOperator power(double gamma = 2.0);
  /// V(m) = 1 - (4/pi) arctan(m). Decreasing, so uniqueness may fail.
  static CouplingOperator arctan();
  /// Piecewise-linear interpolation through (m, V) knots, linear extrapolation
  /// with the end slopes. Knots must be strictly increasing in m.
  static CouplingOperator table(std::vector<std::pair<double, double>> knots);
  /// Parse "power:<gamma>", "power" or "arctan".
  static CouplingOperator parse(const std::string& text);

  Kind kind() const { return kind_; }
  double exponent() const { return gamma_; }
  std::string describe() const;

  double value(double m) const;
  double derivative(double m) const;

  /// Nondecreasing operators give uniqueness of the discrete solution.
  bool nondecreasing() const;
  /// sup |V(m)| over m in [0, m_max], reported as the bound in (V3).
  double bound(double m_max) const;

private:
  Kind kind_ = Kind::power;
  double gamma_ = 2.0;
  std::vector<std::pair<double, double>> knots_;
};

struct CouplingValues {
  GridFunction value;
  GridFunction derivative;
};

CouplingValues eval_coupling(const CouplingOperator& op, const GridFunction& m);

}  // namespace mfgnet
