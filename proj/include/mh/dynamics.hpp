#pragma once

// Euler-Zeitlin flow  dW/dt = -(1/hbar)[P, W],  Delta_N P = W,
// and its isospectral Cayley-midpoint integrator.

#include <array>
#include <cstdint>
#include <vector>

#include "mh/quantization.hpp"

namespace mh {

/// -(1/hbar)[P, W] with P = solve_laplacian(W).
QMatrix rhs(const QMatrix& W, const QuantBasis& basis);

struct StepOptions {
  double tol = 1e-12;  // Frobenius change between iterates, relative to ||W||_F
  int max_iters = 100;
  int max_halvings = 6;  // only used by advance()
  // Follow each step with a small unitary correction restoring H and M
  // (the bare midpoint step keeps H exactly but lets M drift at O(h^3) per step).
  bool restore_momentum = true;
};

struct StepStats {
  int iterations = 0;
  double residual = 0.0;
};

/// One isospectral midpoint step:
///   W' = Q W Q^dagger,  Q = (I + a P_mid)^{-1} (I - a P_mid),  a = h / (2 hbar),
///   P_mid = Delta_N^{-1} ((W + W') / 2)  by fixed-point iteration from W' = W.
/// Throws StepError (with the final residual) if max_iters is exhausted.
QMatrix step(const QMatrix& W, double h, const QuantBasis& basis, const StepOptions& opts = {},
             StepStats* stats = nullptr);

/// Advance by h, splitting into 2^k equal sub-steps when the fixed point
/// fails to converge (k <= max_halvings).
QMatrix advance(const QMatrix& W, double h, const QuantBasis& basis, const StepOptions& opts = {});

/// Conjugate W by a near-identity unitary so that energy and momentum match
/// the targets (least squares over the 4 isospectral directions [[W,P],W],
/// [[W,X_a],W]). Spectrum is untouched.
void restore_invariants(QMatrix& W, double target_energy, const std::array<double, 3>& target_momentum,
                        const QuantBasis& basis);

/// Unitary Cayley factor (I + a P)^{-1} (I - a P).
QMatrix cayley(const QMatrix& P, double a);

/// H_N = (2 pi / N) tr(W Delta_N^{-1} W) >= 0.
double energy(const QMatrix& W, const QuantBasis& basis);

/// M_alpha = <<W, X_alpha>>.
std::array<double, 3> momentum(const QMatrix& W, const QuantBasis& basis);

struct SpectralMeasure {
  std::vector<double> eigenvalues;  // sorted ascending, each atom has mass 1/N
  std::size_t size() const { return eigenvalues.size(); }
  double moment(int m) const;
};

/// Sorted imaginary parts of the eigenvalues of a skew-Hermitian W.
SpectralMeasure spectral_measure(const QMatrix& W);

/// C_1..C_{m_max}, C_m = (1/N) sum lambda_k^m.
std::vector<double> casimirs(const QMatrix& W, int m_max);
std::vector<double> casimirs(const SpectralMeasure& mu, int m_max);

/// Project onto skew-Hermitian matrices: (W - W^dagger) / 2.
QMatrix skew_part(const QMatrix& W);

}  // namespace mh
