#include "mh/quantization.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "mh/errors.hpp"

namespace mh {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

// m_k = l' - k
double weight_of(int N, int k) { return 0.5 * (N - 1) - k; }

double norm_diag0(int N) { return std::sqrt(N / kSphereArea); }
double norm_offdiag(int N) { return std::sqrt(N / (2.0 * kSphereArea)); }

/// <u^{l,m}, [J_+, E^{l,m-1}]> for the oriented block m-1 vector `prev`.
double ladder_overlap(const Eigen::VectorXd& a, const Eigen::VectorXd& prev, const Eigen::VectorXd& cur, int m) {
  const Eigen::Index n = cur.size();
  double acc = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double raised = a(r + 1) * prev(r + 1) - a(r + m) * prev(r);
    acc += raised * cur(r);
  }
  return acc;
}

}  // namespace

double hbar_for(int N) { return 2.0 / std::sqrt(static_cast<double>(N) * N - 1.0); }

Eigen::VectorXd raising_coefficients(int N) {
  const double lp = 0.5 * (N - 1);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(N);
  for (int k = 1; k < N; ++k) {
    const double mk = weight_of(N, k);
    a(k) = std::sqrt(lp * (lp + 1.0) - mk * (mk + 1.0));
  }
  return a;
}

Generators build_generators(int N) {
  if (N < 2) throw std::invalid_argument("build_generators: N must be >= 2, got " + std::to_string(N));
  const Eigen::VectorXd a = raising_coefficients(N);
  QMatrix jp = QMatrix::Zero(N, N);
  for (int k = 1; k < N; ++k) jp(k - 1, k) = a(k);
  QMatrix j3 = QMatrix::Zero(N, N);
  for (int k = 0; k < N; ++k) j3(k, k) = weight_of(N, k);
  const QMatrix j1 = 0.5 * (jp + jp.transpose());
  const QMatrix j2 = (jp - jp.transpose()) / (2.0 * kI);

  Generators g;
  g.s[0] = -kI * j1;
  g.s[1] = -kI * j2;
  g.s[2] = -kI * j3;
  g.hbar = hbar_for(N);
  return g;
}

void laplacian_block(int N, int m, Eigen::VectorXd& diag, Eigen::VectorXd& offdiag) {
  const int n = N - m;
  const double lp = 0.5 * (N - 1);
  const double c = lp * (lp + 1.0);
  const Eigen::VectorXd a = raising_coefficients(N);
  diag.resize(n);
  offdiag.resize(std::max(0, n - 1));
  for (int i = 0; i < n; ++i) {
    const double mi = weight_of(N, i);
    const double mj = weight_of(N, i + m);
    diag(i) = -(static_cast<double>(m) * m + 2.0 * c - mi * mi - mj * mj);
  }
  for (int i = 0; i + 1 < n; ++i) offdiag(i) = a(i + 1) * a(i + 1 + m);
}

// ---------------------------------------------------------------------------
// QuantBasis

QuantBasis::QuantBasis(int N) : N_(N) {
  gens_ = build_generators(N);
  hbar_ = gens_.hbar;
  const Eigen::VectorXd a = raising_coefficients(N);
  eigenvalues_.resize(static_cast<std::size_t>(N));
  eigenvectors_.resize(static_cast<std::size_t>(N));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  Eigen::VectorXd diag, off;
  for (int m = 0; m < N; ++m) {
    const int n = N - m;
    laplacian_block(N, m, diag, off);
    solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("QuantBasis: tridiagonal eigen-solver failed on block m=" + std::to_string(m));
    }
    // Ascending eigenvalues means descending l; reverse so column k is l = m + k.
    Eigen::VectorXd vals = solver.eigenvalues().reverse();
    Eigen::MatrixXd vecs = solver.eigenvectors().rowwise().reverse();

    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd u = vecs.col(k);
      const int l = m + k;
      double orient = 0.0;
      if (m == 0) {
        orient = -u(n - 1);
      } else {
        orient = ladder_overlap(a, eigenvectors_[static_cast<std::size_t>(m - 1)].col(l - (m - 1)), u, m);
      }
      if (orient > 0.0) vecs.col(k) = -u;
    }
    eigenvalues_[static_cast<std::size_t>(m)] = std::move(vals);
    eigenvectors_[static_cast<std::size_t>(m)] = std::move(vecs);
  }
  finish();
}

QuantBasis QuantBasis::from_blocks(int N, std::vector<Eigen::VectorXd> eigenvalues,
                                   std::vector<Eigen::MatrixXd> eigenvectors) {
  if (N < 2 || eigenvalues.size() != static_cast<std::size_t>(N) ||
      eigenvectors.size() != static_cast<std::size_t>(N)) {
    throw NumericalError("QuantBasis::from_blocks: block count does not match N");
  }
  const Eigen::VectorXd a = raising_coefficients(N);
  for (int m = 0; m < N; ++m) {
    const auto& vals = eigenvalues[static_cast<std::size_t>(m)];
    const auto& vecs = eigenvectors[static_cast<std::size_t>(m)];
    const int n = N - m;
    if (vals.size() != n || vecs.rows() != n || vecs.cols() != n) {
      throw NumericalError("QuantBasis::from_blocks: block " + std::to_string(m) + " has the wrong shape");
    }
    const double ortho = (vecs.transpose() * vecs - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (ortho > 1e-10) {
      throw NumericalError("QuantBasis::from_blocks: block " + std::to_string(m) + " is not orthonormal");
    }
    for (int k = 0; k < n; ++k) {
      const double orient =
          m == 0 ? -vecs(n - 1, k)
                 : ladder_overlap(a, eigenvectors[static_cast<std::size_t>(m - 1)].col(k + 1), vecs.col(k), m);
      if (orient > 0.0) {
        throw NumericalError("QuantBasis::from_blocks: eigenvector orientation mismatch in block " +
                             std::to_string(m));
      }
    }
  }
  QuantBasis b;
  b.N_ = N;
  b.gens_ = build_generators(N);
  b.hbar_ = b.gens_.hbar;
  b.eigenvalues_ = std::move(eigenvalues);
  b.eigenvectors_ = std::move(eigenvectors);
  b.finish();
  return b;
}

void QuantBasis::finish() {
  for (int alpha = 0; alpha < 3; ++alpha) x_[static_cast<std::size_t>(alpha)] = hbar_ * gens_.s[static_cast<std::size_t>(alpha)];
  const double err = eigenvalue_error();
  if (!(err < 1e-8)) {
    throw NumericalError("QuantBasis: eigenvalue self-check failed (max deviation " + std::to_string(err) + ")");
  }
}

double QuantBasis::eigenvalue_error() const {
  double worst = 0.0;
  for (int m = 0; m < N_; ++m) {
    const auto& vals = eigenvalues(m);
    for (Eigen::Index k = 0; k < vals.size(); ++k) {
      const double l = static_cast<double>(m + k);
      worst = std::max(worst, std::abs(vals(k) + l * (l + 1.0)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Inner products and norms

double matrix_inner(const QMatrix& A, const QMatrix& B) {
  const double N = static_cast<double>(A.rows());
  return -(kSphereArea / N) * A.cwiseProduct(B.transpose()).sum().real();
}

double matrix_l2_norm(const QMatrix& W) {
  // <<W, W>> = (4 pi/N) ||W||_F^2 for skew-Hermitian W.
  return std::sqrt(std::max(0.0, matrix_inner(W, W)));
}

double spectral_norm(const QMatrix& W) {
  if (W.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<QMatrix> es(W.adjoint() * W, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_norm: eigen-solver failed");
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

bool is_skew_hermitian(const QMatrix& W, double tol) {
  const double scale = std::max(1.0, W.norm());
  return (W + W.adjoint()).norm() <= tol * scale;
}

// ---------------------------------------------------------------------------
// Laplacian

QMatrix laplacian_apply(const QMatrix& W, const QuantBasis& basis) {
  const int N = basis.size();
  if (W.rows() != N || W.cols() != N) throw std::invalid_argument("laplacian_apply: dimension mismatch");
  QMatrix out(N, N);
  Eigen::VectorXd d, e;
  for (int m = 0; m < N; ++m) {
    laplacian_block(N, m, d, e);
    const int n = N - m;
    for (int side = 0; side < (m == 0 ? 1 : 2); ++side) {
      const Eigen::Index idx = side == 0 ? m : -m;
      const Eigen::VectorXcd v = W.diagonal(idx);
      Eigen::VectorXcd r = d.cwiseProduct(v);
      if (n > 1) {
        r.head(n - 1) += e.cwiseProduct(v.tail(n - 1));
        r.tail(n - 1) += e.cwiseProduct(v.head(n - 1));
      }
      out.diagonal(idx) = r;
    }
  }
  return out;
}

QMatrix laplacian_commutator(const QMatrix& W, const QuantBasis& basis) {
  QMatrix out = QMatrix::Zero(W.rows(), W.cols());
  for (int alpha = 1; alpha <= 3; ++alpha) {
    const QMatrix& s = basis.S(alpha);
    const QMatrix inner = s * W - W * s;
    out += s * inner - inner * s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// T_N and T_N^*

QMatrix project(const SphField& f, const QuantBasis& basis) {
  const int N = basis.size();
  const double k0 = norm_diag0(N);
  const double k1 = norm_offdiag(N);
  QMatrix W = QMatrix::Zero(N, N);
  for (int m = 0; m < N; ++m) {
    const int n = N - m;
    const Eigen::MatrixXd& U = basis.eigenvectors(m);
    if (m == 0) {
      Eigen::VectorXd c(n);
      for (int k = 0; k < n; ++k) c(k) = f(k, 0);
      W.diagonal() = (kI * k0) * (U * c).cast<std::complex<double>>();
      continue;
    }
    if (m > f.max_degree()) break;
    Eigen::MatrixXd c(n, 2);
    for (int k = 0; k < n; ++k) {
      c(k, 0) = f(m + k, m);
      c(k, 1) = f(m + k, -m);
    }
    const Eigen::MatrixXd v = U * c;
    const Eigen::VectorXcd vc = v.col(0).cast<std::complex<double>>();
    const Eigen::VectorXcd vs = v.col(1).cast<std::complex<double>>();
    W.diagonal(m) = kI * k1 * vc + k1 * vs;
    W.diagonal(-m) = kI * k1 * vc - k1 * vs;
  }
  return W;
}

QMatrix matrix_harmonic(int l, int m, const QuantBasis& basis) {
  if (l < 0 || l >= basis.size() || std::abs(m) > l) {
    throw std::out_of_range("matrix_harmonic: need |m| <= l < N");
  }
  return project(harmonic(l, m), basis);
}

SphField lift(const QMatrix& W, const QuantBasis& basis) {
  const int N = basis.size();
  if (W.rows() != N || W.cols() != N) throw std::invalid_argument("lift: dimension mismatch");
  const double s0 = std::sqrt(kSphereArea / N);        // (4 pi/N) k0
  const double s1 = std::sqrt(kSphereArea / (2.0 * N));  // (4 pi/N) k1
  SphField f(N - 1);
  for (int m = 0; m < N; ++m) {
    const int n = N - m;
    const Eigen::MatrixXd& U = basis.eigenvectors(m);
    if (m == 0) {
      const Eigen::VectorXd c = s0 * (U.transpose() * W.diagonal().imag());
      for (int k = 0; k < n; ++k) f(k, 0) = c(k);
      continue;
    }
    const Eigen::VectorXcd up = W.diagonal(m);
    const Eigen::VectorXcd lo = W.diagonal(-m);
    Eigen::MatrixXd rhs(n, 2);
    rhs.col(0) = (up + lo).imag();
    rhs.col(1) = (up - lo).real();
    const Eigen::MatrixXd c = s1 * (U.transpose() * rhs);
    for (int k = 0; k < n; ++k) {
      f(m + k, m) = c(k, 0);
      f(m + k, -m) = c(k, 1);
    }
  }
  return f;
}

QMatrix solve_laplacian(const QMatrix& W, const QuantBasis& basis) {
  const int N = basis.size();
  if (W.rows() != N || W.cols() != N) throw std::invalid_argument("solve_laplacian: dimension mismatch");
  const double kernel = std::abs(W.trace()) / std::sqrt(static_cast<double>(N));
  if (kernel > 1e-12 * std::max(1.0, W.norm())) {
    throw std::domain_error("solve_laplacian: input has a trace component (" + std::to_string(kernel) +
                            ") in the kernel of Delta_N");
  }
  QMatrix P(N, N);
  for (int m = 0; m < N; ++m) {
    const int n = N - m;
    const Eigen::MatrixXd& U = basis.eigenvectors(m);
    const Eigen::VectorXd& lam = basis.eigenvalues(m);
    const int cols = m == 0 ? 2 : 4;
    Eigen::MatrixXd M(n, cols);
    const Eigen::VectorXcd up = W.diagonal(m);
    M.col(0) = up.real();
    M.col(1) = up.imag();
    if (m > 0) {
      const Eigen::VectorXcd lo = W.diagonal(-m);
      M.col(2) = lo.real();
      M.col(3) = lo.imag();
    }
    Eigen::MatrixXd c = U.transpose() * M;
    for (int k = 0; k < n; ++k) {
      if (m == 0 && k == 0) {
        c.row(0).setZero();
      } else {
        c.row(k) /= lam(k);
      }
    }
    const Eigen::MatrixXd back = U * c;
    P.diagonal(m) = back.col(0).cast<std::complex<double>>() + kI * back.col(1).cast<std::complex<double>>();
    if (m > 0) {
      P.diagonal(-m) = back.col(2).cast<std::complex<double>>() + kI * back.col(3).cast<std::complex<double>>();
    }
  }
  return P;
}

QMatrix scaled_bracket(const QMatrix& A, const QMatrix& B, double hbar) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw std::invalid_argument("scaled_bracket: dimension mismatch");
  return (A * B - B * A) / hbar;
}

double matrix_seminorm(const SphField& f, const QuantBasis& basis) { return spectral_norm(project(f, basis)); }

// ---------------------------------------------------------------------------
// Structure constants

namespace {

void check_index(HarmonicIndex x, int limit, const char* who) {
  if (x.l < 0 || std::abs(x.m) > x.l || (limit > 0 && x.l >= limit)) {
    throw std::out_of_range(std::string(who) + ": harmonic index (" + std::to_string(x.l) + "," +
                            std::to_string(x.m) + ") out of range");
  }
}

}  // namespace

double structure_constant(const QuantBasis& basis, HarmonicIndex a, HarmonicIndex b, HarmonicIndex c) {
  const int N = basis.size();
  check_index(a, N, "structure_constant");
  check_index(b, N, "structure_constant");
  check_index(c, N, "structure_constant");
  const QMatrix ta = matrix_harmonic(a.l, a.m, basis);
  const QMatrix tb = matrix_harmonic(b.l, b.m, basis);
  const QMatrix tc = matrix_harmonic(c.l, c.m, basis);
  return matrix_inner(tc, scaled_bracket(ta, tb, basis.hbar()));
}

double structure_constant(HarmonicIndex a, HarmonicIndex b, HarmonicIndex c) {
  check_index(a, 0, "structure_constant");
  check_index(b, 0, "structure_constant");
  check_index(c, 0, "structure_constant");
  const SphField br = poisson_bracket(harmonic(a.l, a.m), harmonic(b.l, b.m), c.l);
  return br(c.l, c.m);
}

}  // namespace mh
