#include "mh/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "mh/dynamics.hpp"
#include "mh/splitting.hpp"

namespace mh {

DiagnosticsRecord diagnose(const QMatrix& W, double time, const QuantBasis& basis, const DiagnosticsOptions& opts) {
  DiagnosticsRecord r;
  r.time = time;
  r.energy = energy(W, basis);
  r.momentum = momentum(W, basis);
  const SpectralMeasure mu = spectral_measure(W);
  const auto c = casimirs(mu, 6);
  for (std::size_t k = 0; k < 5; ++k) r.casimirs[k] = c[k + 1];
  double m = 0.0;
  for (double x : mu.eigenvalues) m = std::max(m, std::abs(x));
  r.spectral_norm = m;  // W is normal
  r.residual_energy_norm = opts.split ? residual_energy_norm(canonical_split(W, basis, opts.cluster_tol), basis)
                                      : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace mh
