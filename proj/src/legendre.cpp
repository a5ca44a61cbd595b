#include "mh/legendre.hpp"

#include <cmath>

#include "mh/sphere_fields.hpp"

namespace mh {

LegendreTable::LegendreTable(int L, double cos_t, bool with_derivative)
    : L_(L), values_(tri_index(L + 1, 0), 0.0) {
  const double x = cos_t;
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));

  // Sectoral seeds: lambda_mm = sqrt((2m+1)/(2m)) sin t lambda_{m-1,m-1}.
  double sectoral = 1.0 / std::sqrt(kSphereArea);
  for (int m = 0; m <= L; ++m) {
    if (m > 0) sectoral *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    values_[tri_index(m, m)] = sectoral;
    if (m + 1 <= L) values_[tri_index(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * sectoral;
    for (int l = m + 2; l <= L; ++l) {
      const double ll = static_cast<double>(l) * l;
      const double mm = static_cast<double>(m) * m;
      const double a = std::sqrt((4.0 * ll - 1.0) / (ll - mm));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - mm) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      values_[tri_index(l, m)] = a * (x * values_[tri_index(l - 1, m)] - b * values_[tri_index(l - 2, m)]);
    }
  }

  if (!with_derivative) return;
  derivs_.assign(values_.size(), 0.0);
  // d/dt lambda_lm = (l cos t lambda_lm - sqrt((2l+1)(l^2-m^2)/(2l-1)) lambda_{l-1,m}) / sin t
  for (int m = 0; m <= L; ++m) {
    for (int l = m; l <= L; ++l) {
      double num = l * x * values_[tri_index(l, m)];
      if (l > m) {
        const double c = std::sqrt((2.0 * l + 1.0) * (static_cast<double>(l) * l - static_cast<double>(m) * m) /
                                   (2.0 * l - 1.0));
        num -= c * values_[tri_index(l - 1, m)];
      }
      derivs_[tri_index(l, m)] = num / s;
    }
  }
}

}  // namespace mh
