#pragma once

#include <cstddef>
#include <vector>

namespace mh {

constexpr std::size_t tri_index(int l, int m) {
  return static_cast<std::size_t>(l * (l + 1) / 2 + m);
}

/// lambda_{lm}(t) = n_{lm} P_l^m(cos t) for 0 <= m <= l <= L at one colatitude,
/// with n_{lm} the area-4pi orthonormalization and no Condon-Shortley phase.
/// Optionally also d/dt lambda_{lm}; that needs sin t > 0.
class LegendreTable {
 public:
  LegendreTable(int L, double cos_t, bool with_derivative = false);

  double value(int l, int m) const { return values_[tri_index(l, m)]; }
  double dtheta(int l, int m) const { return derivs_[tri_index(l, m)]; }
  int max_degree() const { return L_; }

 private:
  int L_;
  std::vector<double> values_;
  std::vector<double> derivs_;
};

}  // namespace mh
