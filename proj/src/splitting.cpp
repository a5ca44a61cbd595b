#include "mh/splitting.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "mh/errors.hpp"

namespace mh {

namespace {

const std::complex<double> kI(0.0, 1.0);

QMatrix block_diagonal(const QMatrix& A, const std::vector<Eigen::Index>& starts) {
  QMatrix out = QMatrix::Zero(A.rows(), A.cols());
  for (std::size_t b = 0; b + 1 < starts.size(); ++b) {
    const Eigen::Index s = starts[b], n = starts[b + 1] - starts[b];
    out.block(s, s, n, n) = A.block(s, s, n, n);
  }
  return out;
}

}  // namespace

double StreamEigen::min_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t b = 1; b + 1 < block_start.size(); ++b) {
    const Eigen::Index k = block_start[b];
    gap = std::min(gap, p(k) - p(k - 1));
  }
  return gap;
}

StreamEigen stream_eigen(const QMatrix& P, double rel_tol) {
  const QMatrix H = -kI * P;
  Eigen::SelfAdjointEigenSolver<QMatrix> es(0.5 * (H + H.adjoint()));
  if (es.info() != Eigen::Success) throw NumericalError("stream_eigen: eigen-solver failed");
  StreamEigen e;
  e.V = es.eigenvectors();
  e.p = es.eigenvalues();
  const Eigen::Index n = e.p.size();
  const double scale = n > 0 ? std::max(std::abs(e.p(0)), std::abs(e.p(n - 1))) : 0.0;
  e.cluster_tol = rel_tol * scale;
  e.block_start.push_back(0);
  for (Eigen::Index k = 1; k < n; ++k)
    if (e.p(k) - e.p(k - 1) > e.cluster_tol) e.block_start.push_back(k);
  e.block_start.push_back(n);
  return e;
}

QMatrix stabilizer_projection(const QMatrix& W, const StreamEigen& eig) {
  const QMatrix Wt = eig.V.adjoint() * W * eig.V;
  const QMatrix D = block_diagonal(Wt, eig.block_start);
  return eig.V * D * eig.V.adjoint();
}

QMatrix stabilizer_projection(const QMatrix& W, const QMatrix& P, double rel_tol) {
  if (W.rows() != P.rows() || W.cols() != P.cols())
    throw std::invalid_argument("stabilizer_projection: size mismatch");
  return stabilizer_projection(W, stream_eigen(P, rel_tol));
}

QMatrix clustered_stream(const StreamEigen& eig) {
  Eigen::VectorXd q = eig.p;
  for (std::size_t b = 0; b + 1 < eig.block_start.size(); ++b) {
    const Eigen::Index s = eig.block_start[b], n = eig.block_start[b + 1] - s;
    q.segment(s, n).setConstant(eig.p.segment(s, n).mean());
  }
  return eig.V * (kI * q).asDiagonal() * eig.V.adjoint();
}

SplitState canonical_split(const QMatrix& W, const QuantBasis& basis, double cluster_tol) {
  SplitState s;
  s.P = solve_laplacian(W, basis);
  s.eig = stream_eigen(s.P, cluster_tol);
  s.W_s = stabilizer_projection(W, s.eig);
  s.W_r = W - s.W_s;
  return s;
}

QMatrix solve_B(const SplitState& split, const QuantBasis& basis, double gap_floor) {
  const StreamEigen& e = split.eig;
  const Eigen::Index n = e.p.size();
  const double scale = n > 0 ? std::max(std::abs(e.p(0)), std::abs(e.p(n - 1))) : 0.0;
  const double gap = e.min_gap();
  if (gap < gap_floor * scale)
    throw ConditioningError("solve_B: eigenvalue clusters of P separated by only " + std::to_string(gap), gap);

  const QMatrix W = split.W_s + split.W_r;
  const QMatrix C = split.P * W - W * split.P;
  // R = Pi^perp Delta^{-1}[P, W]; in the eigenbasis Pi^perp zeroes the cluster blocks.
  QMatrix Rt = e.V.adjoint() * solve_laplacian(C, basis) * e.V;
  Rt -= block_diagonal(Rt, e.block_start);

  std::vector<Eigen::Index> cluster(static_cast<std::size_t>(n));
  for (std::size_t b = 0; b + 1 < e.block_start.size(); ++b)
    for (Eigen::Index k = e.block_start[b]; k < e.block_start[b + 1]; ++k)
      cluster[static_cast<std::size_t>(k)] = static_cast<Eigen::Index>(b);

  // [B, P]_kl = i (p_l - p_k) B_kl in the eigenbasis.
  QMatrix Bt = QMatrix::Zero(n, n);
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index k = 0; k < n; ++k)
      if (cluster[static_cast<std::size_t>(k)] != cluster[static_cast<std::size_t>(l)])
        Bt(k, l) = Rt(k, l) / (kI * (e.p(l) - e.p(k)));
  return e.V * Bt * e.V.adjoint();
}

std::pair<QMatrix, QMatrix> split_rhs(const SplitState& split, const QMatrix& B, const QuantBasis& basis) {
  const double hbar = basis.hbar();
  const QMatrix Bh = (-1.0 / hbar) * B;
  const QMatrix bs = Bh * split.W_s - split.W_s * Bh;
  const QMatrix br = Bh * split.W_r - split.W_r * Bh;
  const QMatrix pbr = stabilizer_projection(br, split.eig);
  QMatrix dWs = bs - pbr;
  QMatrix dWr = (-1.0 / hbar) * (split.P * split.W_r - split.W_r * split.P) - bs + pbr;
  return {std::move(dWs), std::move(dWr)};
}

double energy_norm(const QMatrix& W, const QuantBasis& basis) {
  const QMatrix P = solve_laplacian(W, basis);
  const double q = (4.0 * kPi / static_cast<double>(basis.size())) * W.cwiseProduct(P.transpose()).sum().real();
  return std::sqrt(std::max(q, 0.0));
}

double residual_energy_norm(const SplitState& split, const QuantBasis& basis) {
  return energy_norm(split.W_r, basis);
}

}  // namespace mh
