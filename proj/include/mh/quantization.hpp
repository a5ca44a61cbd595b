#pragma once

// Quantization u(N) <-> functions on the sphere.
//
// Spin generators: S_alpha = -i J_alpha with J the spin-(N-1)/2 matrices in the
// basis m_k = (N-1)/2 - k, so S_3 = diag(-i l', ..., i l') and [S_1, S_2] = S_3.
// X_alpha = hbar S_alpha with hbar = 2/sqrt(N^2-1), so sum X_alpha^2 = -I.
//
// The Laplacian Delta_N = sum [S_a, [S_a, .]] maps each matrix diagonal to
// itself and acts there as a real symmetric tridiagonal matrix with spectrum
// {-l(l+1) : l = |m|..N-1}. Its unit eigenvectors u^{lm} define the matrix
// harmonics
//   T_{l0}  = i k0 diag(u^{l0}),                 k0 = sqrt(N/(4 pi))
//   T_{lm}  = i k1 (E^{lm} + E^{lm}^T),          k1 = sqrt(N/(8 pi)), m > 0
//   T_{l-m} =   k1 (E^{lm} - E^{lm}^T)
// with E^{lm} holding u^{lm} on the m-th superdiagonal. They are orthonormal
// for <<A, B>> = -(4 pi/N) tr(AB). Eigenvector signs: u^{l0} has a positive
// last entry, and u^{l,m+1} is oriented so that <u^{l,m+1}, [J_+, E^{lm}]> < 0,
// which reproduces the ladder relation of the Condon-Shortley-free real
// harmonics and makes T_N exactly so(3)-equivariant.

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "mh/sphere_fields.hpp"

namespace mh {

using QMatrix = Eigen::MatrixXcd;

double hbar_for(int N);

struct Generators {
  std::array<QMatrix, 3> s;  // S_1, S_2, S_3
  double hbar = 0.0;
};

/// Spin generators for the irreducible N-dimensional representation.
/// Throws std::invalid_argument for N < 2.
Generators build_generators(int N);

/// Superdiagonal of J_+: a_k = sqrt(l'(l'+1) - m_k(m_k+1)), k = 1..N-1
/// (entry 0 is unused and zero).
Eigen::VectorXd raising_coefficients(int N);

/// Diagonal and off-diagonal of Delta_N restricted to the m-th diagonal
/// (size N-m and N-m-1).
void laplacian_block(int N, int m, Eigen::VectorXd& diag, Eigen::VectorXd& offdiag);

class QuantBasis {
 public:
  /// Builds generators and all per-diagonal eigen-decompositions.
  /// Throws NumericalError if the eigen-solver fails or the self-check
  /// against -l(l+1) exceeds 1e-8.
  explicit QuantBasis(int N);

  /// Rebuild from stored blocks (basis cache). Validates sizes, the
  /// eigenvalue self-check and orthonormality.
  static QuantBasis from_blocks(int N, std::vector<Eigen::VectorXd> eigenvalues,
                                std::vector<Eigen::MatrixXd> eigenvectors);

  int size() const { return N_; }
  double hbar() const { return hbar_; }

  /// Block m: entry k is the eigenvalue for l = m + k.
  const Eigen::VectorXd& eigenvalues(int m) const { return eigenvalues_[static_cast<std::size_t>(m)]; }
  /// Block m: column k is u^{(m+k) m}.
  const Eigen::MatrixXd& eigenvectors(int m) const { return eigenvectors_[static_cast<std::size_t>(m)]; }

  const QMatrix& S(int alpha) const { return gens_.s[static_cast<std::size_t>(alpha - 1)]; }
  const QMatrix& X(int alpha) const { return x_[static_cast<std::size_t>(alpha - 1)]; }

  /// Largest |eigenvalue + l(l+1)| over all blocks.
  double eigenvalue_error() const;

 private:
  QuantBasis() = default;
  void finish();

  int N_ = 0;
  double hbar_ = 0.0;
  Generators gens_;
  std::array<QMatrix, 3> x_;
  std::vector<Eigen::VectorXd> eigenvalues_;
  std::vector<Eigen::MatrixXd> eigenvectors_;
};

/// <<A, B>> = -(4 pi / N) Re tr(AB); the L2 inner product of the lifts.
double matrix_inner(const QMatrix& A, const QMatrix& B);
/// sqrt(<<W, W>>)
double matrix_l2_norm(const QMatrix& W);
/// Largest singular value.
double spectral_norm(const QMatrix& W);

bool is_skew_hermitian(const QMatrix& W, double tol = 1e-12);

/// Delta_N W, computed diagonal by diagonal from the tridiagonal blocks.
QMatrix laplacian_apply(const QMatrix& W, const QuantBasis& basis);

/// Reference Delta_N W = sum [S_a, [S_a, W]] by dense commutators.
QMatrix laplacian_commutator(const QMatrix& W, const QuantBasis& basis);

/// T_N: degrees l >= N are dropped.
QMatrix project(const SphField& f, const QuantBasis& basis);
/// The single matrix harmonic T_{lm}.
QMatrix matrix_harmonic(int l, int m, const QuantBasis& basis);
/// T_N^*: coefficients <<W, T_{lm}>>, returned with max degree N-1.
SphField lift(const QMatrix& W, const QuantBasis& basis);

/// Unique traceless P with Delta_N P = W. Throws std::domain_error if
/// |tr W| / sqrt(N) exceeds 1e-12 max(1, ||W||_F).
QMatrix solve_laplacian(const QMatrix& W, const QuantBasis& basis);

/// (AB - BA) / hbar
QMatrix scaled_bracket(const QMatrix& A, const QMatrix& B, double hbar);

/// |f|_N = ||T_N f||_inf
double matrix_seminorm(const SphField& f, const QuantBasis& basis);

struct HarmonicIndex {
  int l = 0;
  int m = 0;
};

/// <<T_c, (1/hbar)[T_a, T_b]>>. Throws std::out_of_range for degrees >= N.
double structure_constant(const QuantBasis& basis, HarmonicIndex a, HarmonicIndex b, HarmonicIndex c);
/// <Y_c, {Y_a, Y_b}> by quadrature.
double structure_constant(HarmonicIndex a, HarmonicIndex b, HarmonicIndex c);

}  // namespace mh
