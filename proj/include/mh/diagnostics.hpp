#pragma once

#include <array>

#include "mh/quantization.hpp"

namespace mh {

/// One row of the run time series.
struct DiagnosticsRecord {
  double time = 0.0;
  double energy = 0.0;
  std::array<double, 3> momentum{};
  std::array<double, 5> casimirs{};  // C_2..C_6
  double residual_energy_norm = 0.0;  // ||W_r||_E, NaN when the split is skipped
  double spectral_norm = 0.0;
};

struct DiagnosticsOptions {
  bool split = true;
  double cluster_tol = 1e-9;
};

DiagnosticsRecord diagnose(const QMatrix& W, double time, const QuantBasis& basis,
                           const DiagnosticsOptions& opts = {});

}  // namespace mh
