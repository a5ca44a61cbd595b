#pragma once

// Scale separation W = W_s + W_r, W_s = Pi_P W, where Pi_P is the orthogonal
// projection onto the stabilizer of the stream matrix P = Delta_N^{-1} W.
//
// Pi_P keeps the block-diagonal part of W in the eigenbasis of P; blocks are
// clusters of eigenvalues closer than cluster_tol * ||P||_2. In the exactly
// non-degenerate case this is the plain diagonal.

#include <utility>
#include <vector>

#include "mh/quantization.hpp"

namespace mh {

/// P = V diag(i p) V^dagger with p ascending, plus the cluster partition.
struct StreamEigen {
  QMatrix V;
  Eigen::VectorXd p;
  std::vector<Eigen::Index> block_start;  // first index of each cluster, plus p.size() at the end
  double cluster_tol = 0.0;               // absolute

  Eigen::Index cluster_count() const { return static_cast<Eigen::Index>(block_start.size()) - 1; }
  /// Smallest distance between eigenvalues in different clusters (+inf for one cluster).
  double min_gap() const;
};

/// Eigen-decompose a skew-Hermitian P and cluster its spectrum at
/// rel_tol * ||P||_2. Throws NumericalError on solver failure.
StreamEigen stream_eigen(const QMatrix& P, double rel_tol = 1e-9);

/// V (block-diag of V^dagger W V) V^dagger.
QMatrix stabilizer_projection(const QMatrix& W, const StreamEigen& eig);
QMatrix stabilizer_projection(const QMatrix& W, const QMatrix& P, double rel_tol = 1e-9);

/// P with each cluster's eigenvalues replaced by the cluster mean.
QMatrix clustered_stream(const StreamEigen& eig);

struct SplitState {
  QMatrix W_s;
  QMatrix W_r;
  QMatrix P;
  StreamEigen eig;
};

/// P = Delta_N^{-1} W, W_s = Pi_P W, W_r = W - W_s.
SplitState canonical_split(const QMatrix& W, const QuantBasis& basis, double cluster_tol = 1e-9);

/// B in the complement of the stabilizer with [B, P] = Pi_P^perp Delta_N^{-1} [P, W].
/// Throws ConditioningError when two clusters are closer than gap_floor * ||P||_2.
QMatrix solve_B(const SplitState& split, const QuantBasis& basis, double gap_floor = 1e-8);

/// Time derivatives (dW_s/dt, dW_r/dt) of the split along dW/dt = -(1/hbar)[P, W].
/// With Bh = -B / hbar:
///   dW_s = [Bh, W_s] - Pi_P [Bh, W_r]
///   dW_r = -(1/hbar)[P, W_r] - [Bh, W_s] + Pi_P [Bh, W_r]
std::pair<QMatrix, QMatrix> split_rhs(const SplitState& split, const QMatrix& B, const QuantBasis& basis);

/// ||W||_E = sqrt(-<<W, Delta_N^{-1} W>>) = sqrt((4 pi/N) tr(W P)).
double energy_norm(const QMatrix& W, const QuantBasis& basis);
double residual_energy_norm(const SplitState& split, const QuantBasis& basis);

}  // namespace mh
