#include "mh/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "mh/errors.hpp"

namespace mh {

QMatrix skew_part(const QMatrix& W) { return 0.5 * (W - W.adjoint()); }

QMatrix rhs(const QMatrix& W, const QuantBasis& basis) {
  const QMatrix P = solve_laplacian(W, basis);
  return -scaled_bracket(P, W, basis.hbar());
}

QMatrix cayley(const QMatrix& P, double a) {
  const Eigen::Index n = P.rows();
  const QMatrix I = QMatrix::Identity(n, n);
  return (I + a * P).partialPivLu().solve(I - a * P);
}

void restore_invariants(QMatrix& W, double target_energy, const std::array<double, 3>& target_momentum,
                        const QuantBasis& basis) {
  const double e_scale = std::max(std::abs(target_energy), 1e-300);
  const double m_norm = std::sqrt(target_momentum[0] * target_momentum[0] + target_momentum[1] * target_momentum[1] +
                                  target_momentum[2] * target_momentum[2]);
  const double m_scale = std::max({m_norm, 1e-3 * matrix_l2_norm(W), 1e-300});

  const QMatrix P = solve_laplacian(W, basis);
  const auto M = momentum(W, basis);
  Eigen::Vector4d r;
  const double E = (2.0 * kPi / static_cast<double>(basis.size())) * W.cwiseProduct(P.transpose()).sum().real();
  r << (E - target_energy) / e_scale, (M[0] - target_momentum[0]) / m_scale,
      (M[1] - target_momentum[1]) / m_scale, (M[2] - target_momentum[2]) / m_scale;
  if (r.cwiseAbs().maxCoeff() < 1e-15) return;

  // Isospectral variations W + [A, W] with A in span{[W,P], [W,X_a]}. Since
  // tr([A,W] B) = tr(A [W,B]), the linearised response is a Gram matrix.
  std::array<QMatrix, 4> A;
  A[0] = W * P - P * W;
  for (int a = 1; a <= 3; ++a) A[static_cast<std::size_t>(a)] = W * basis.X(a) - basis.X(a) * W;
  Eigen::Matrix4d J;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      J(i, j) = matrix_inner(A[static_cast<std::size_t>(i)], A[static_cast<std::size_t>(j)]) *
                (i == 0 ? -1.0 / e_scale : 1.0 / m_scale);
  const Eigen::Vector4d c = J.completeOrthogonalDecomposition().solve(-r);
  if (!c.allFinite()) return;
  QMatrix gen = QMatrix::Zero(W.rows(), W.cols());
  for (int j = 0; j < 4; ++j) gen += c(j) * A[static_cast<std::size_t>(j)];
  const QMatrix U = cayley(skew_part(gen), -0.5);
  W = skew_part(U * W * U.adjoint());
}

QMatrix step(const QMatrix& W, double h, const QuantBasis& basis, const StepOptions& opts, StepStats* stats) {
  if (!(h > 0.0)) throw std::invalid_argument("step: h must be positive");
  const double a = h / (2.0 * basis.hbar());
  const double scale = std::max(W.norm(), 1e-300);

  QMatrix next = W;
  double residual = 0.0;
  for (int it = 1; it <= opts.max_iters; ++it) {
    const QMatrix P_mid = skew_part(solve_laplacian(0.5 * (W + next), basis));
    const QMatrix Q = cayley(P_mid, a);
    QMatrix candidate = skew_part(Q * W * Q.adjoint());
    residual = (candidate - next).norm() / scale;
    next = std::move(candidate);
    if (residual <= opts.tol) {
      if (stats) *stats = {it, residual};
      if (opts.restore_momentum) restore_invariants(next, energy(W, basis), momentum(W, basis), basis);
      return next;
    }
  }
  if (stats) *stats = {opts.max_iters, residual};
  throw StepError("step: midpoint iteration did not converge in " + std::to_string(opts.max_iters) +
                      " iterations (residual " + std::to_string(residual) + ", h=" + std::to_string(h) + ")",
                  residual);
}

namespace {

QMatrix advance_split(const QMatrix& W, double h, const QuantBasis& basis, const StepOptions& opts, int depth) {
  try {
    return step(W, h, basis, opts);
  } catch (const StepError&) {
    if (depth >= opts.max_halvings) throw;
  }
  const QMatrix half = advance_split(W, 0.5 * h, basis, opts, depth + 1);
  return advance_split(half, 0.5 * h, basis, opts, depth + 1);
}

}  // namespace

QMatrix advance(const QMatrix& W, double h, const QuantBasis& basis, const StepOptions& opts) {
  return advance_split(W, h, basis, opts, 0);
}

double energy(const QMatrix& W, const QuantBasis& basis) {
  const QMatrix P = solve_laplacian(W, basis);
  const double N = static_cast<double>(basis.size());
  return (2.0 * kPi / N) * W.cwiseProduct(P.transpose()).sum().real();
}

std::array<double, 3> momentum(const QMatrix& W, const QuantBasis& basis) {
  return {matrix_inner(W, basis.X(1)), matrix_inner(W, basis.X(2)), matrix_inner(W, basis.X(3))};
}

double SpectralMeasure::moment(int m) const {
  if (eigenvalues.empty()) return 0.0;
  double acc = 0.0;
  for (double x : eigenvalues) acc += std::pow(x, m);
  return acc / static_cast<double>(eigenvalues.size());
}

SpectralMeasure spectral_measure(const QMatrix& W) {
  // W = iH with H Hermitian; eigenvalues of W are i * eig(H).
  const QMatrix H = std::complex<double>(0.0, -1.0) * W;
  Eigen::SelfAdjointEigenSolver<QMatrix> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_measure: eigen-solver failed");
  SpectralMeasure mu;
  mu.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return mu;
}

std::vector<double> casimirs(const SpectralMeasure& mu, int m_max) {
  if (m_max < 1) throw std::invalid_argument("casimirs: m_max must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(m_max), 0.0);
  for (double x : mu.eigenvalues) {
    double p = 1.0;
    for (int m = 1; m <= m_max; ++m) {
      p *= x;
      out[static_cast<std::size_t>(m - 1)] += p;
    }
  }
  for (double& c : out) c /= static_cast<double>(mu.size());
  return out;
}

std::vector<double> casimirs(const QMatrix& W, int m_max) { return casimirs(spectral_measure(W), m_max); }

}  // namespace mh
