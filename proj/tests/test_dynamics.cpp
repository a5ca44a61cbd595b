#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mh/diagnostics.hpp"
#include "mh/dynamics.hpp"
#include "mh/errors.hpp"

using namespace mh;

namespace {

double max_eig_diff(const QMatrix& A, const QMatrix& B) {
  const auto a = spectral_measure(A).eigenvalues, b = spectral_measure(B).eigenvalues;
  double d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

// H = (1/2) int |grad psi|^2 = (1/2) sum_{l>=1} c_lm^2 / (l(l+1)).
double energy_oracle(const SphField& f) {
  double e = 0;
  for (int l = 1; l <= f.max_degree(); ++l)
    for (int m = -l; m <= l; ++m) e += f(l, m) * f(l, m) / (l * (l + 1.0));
  return 0.5 * e;
}

// <omega, x_alpha> by quadrature.
double momentum_oracle(const SphField& f, int alpha) {
  const GridSpec spec = GridSpec::for_degree(f.max_degree() + 2);
  GridField g = synthesize(f, spec);
  const GridField x = synthesize(coordinate_field(alpha), spec);
  for (std::size_t k = 0; k < g.values().size(); ++k) g.values()[k] *= x.values()[k];
  return g.integrate();
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("right-hand side is tangent to the coadjoint orbit") {
    const QuantBasis b(16);
    const QMatrix W = project(random_smooth_field(15, 1.5, 2), b);
    const QMatrix F = rhs(W, b);
    CHECK(is_skew_hermitian(F, 1e-12));
    QMatrix p = QMatrix::Identity(16, 16);
    for (int k = 0; k <= 4; ++k) {
      CHECK(std::abs((F * p).trace().real()) < 1e-12 * (1 + p.norm()) * F.norm());
      p = (p * W).eval();
    }
  }

  TEST_CASE("steady states are exactly the commuting pairs") {
    const QuantBasis b(12);
    SphField zonal(6);
    zonal(2, 0) = 1.0;
    zonal(5, 0) = -0.3;
    CHECK(rhs(project(zonal, b), b).norm() < 1e-13);
    // a single degree gives P proportional to W
    const QMatrix deg3 = project(harmonic(3, 2) + harmonic(3, -1, 0.4), b);
    CHECK(rhs(deg3, b).norm() < 1e-12);
    // generic data: both the commutator and the rhs are nonzero
    const QMatrix W = project(random_smooth_field(11, 1.0, 5), b);
    const QMatrix P = solve_laplacian(W, b);
    CHECK((P * W - W * P).norm() > 1e-3);
    CHECK(rhs(W, b).norm() > 1e-3);
  }

  TEST_CASE("Cayley factor is unitary") {
    const QuantBasis b(10);
    const QMatrix P = solve_laplacian(project(random_smooth_field(9, 1.0, 1), b), b);
    const QMatrix Q = cayley(P, 3.7);
    CHECK((Q * Q.adjoint() - QMatrix::Identity(10, 10)).norm() < 1e-13);
  }

  TEST_CASE("energy and momentum match continuum oracles") {
    const QuantBasis b(20);
    const SphField f = random_smooth_field(19, 1.0, 3);
    const QMatrix W = project(f, b);
    CHECK(energy(W, b) == doctest::Approx(energy_oracle(f)).epsilon(1e-12));
    const auto M = momentum(W, b);
    for (int a = 1; a <= 3; ++a) CHECK(M[a - 1] == doctest::Approx(momentum_oracle(f, a)).epsilon(1e-12));
  }

  TEST_CASE("momentum of coordinate and degree-2 fields") {
    const QuantBasis b(8);
    const auto M3 = momentum(project(coordinate_field(3), b), b);
    CHECK(M3[0] == doctest::Approx(0.0).scale(1));
    CHECK(M3[1] == doctest::Approx(0.0).scale(1));
    CHECK(M3[2] == doctest::Approx(4 * kPi / 3));  // ||x_3||^2 on the area-4pi sphere
    const auto M2 = momentum(project(harmonic(2, 0), b), b);
    for (double m : M2) CHECK(std::abs(m) < 1e-14);
  }

  TEST_CASE("spectral measure of x_3 is hbar times the spin weights") {
    for (int N : {2, 7, 32}) {
      const QuantBasis b(N);
      const SpectralMeasure mu = spectral_measure(project(coordinate_field(3), b));
      REQUIRE(mu.size() == static_cast<std::size_t>(N));
      const double lp = 0.5 * (N - 1);
      for (int k = 0; k < N; ++k) CHECK(mu.eigenvalues[k] == doctest::Approx(b.hbar() * (k - lp)).scale(1));
      CHECK(mu.eigenvalues.back() < 1.0);
    }
  }

  TEST_CASE("Casimirs") {
    const QuantBasis b(16);
    const SphField f = random_smooth_field(15, 1.0, 11);
    const QMatrix W = project(f, b);
    const auto c = casimirs(W, 6);
    CHECK(std::abs(c[0]) < 1e-14);
    // C_2 = ||omega||^2 / 4pi exactly for degree < N (isometry)
    CHECK(c[1] == doctest::Approx(l2_inner(f, f) / kSphereArea).epsilon(1e-12));
    // trace formula (-i)^m tr(W^m) / N
    const QMatrix W3 = W * W * W;
    CHECK(c[2] == doctest::Approx((std::complex<double>(0, 1) * W3.trace()).real() / 16).epsilon(1e-10));
    CHECK_THROWS_AS(casimirs(W, 0), std::invalid_argument);
    const QMatrix W1 = step(W, 0.01, b);
    const auto c1 = casimirs(W1, 6);
    for (int m = 2; m <= 6; ++m) CHECK(c1[m - 1] == doctest::Approx(c[m - 1]).epsilon(1e-10));
  }

  TEST_CASE("step preserves the spectrum to roundoff") {
    const QuantBasis b(32);
    QMatrix W = project(random_smooth_field(31, 2.0, 4), b);
    for (int k = 0; k < 10; ++k) {
      const QMatrix next = step(W, 0.01, b);
      CHECK(max_eig_diff(W, next) < 1e-12);
      CHECK(is_skew_hermitian(next));
      W = next;
    }
  }

  TEST_CASE("bare midpoint step conserves energy, corrected step also momentum") {
    const QuantBasis b(16);
    const QMatrix W0 = project(random_smooth_field(15, 2.0, 6), b);
    const double e0 = energy(W0, b);
    const auto m0 = momentum(W0, b);
    StepOptions bare;
    bare.restore_momentum = false;
    QMatrix Wb = W0, Wc = W0;
    for (int k = 0; k < 300; ++k) {
      Wb = step(Wb, 0.02, b, bare);
      Wc = step(Wc, 0.02, b);
    }
    CHECK(std::abs(energy(Wb, b) - e0) / e0 < 1e-12);
    CHECK(std::abs(energy(Wc, b) - e0) / e0 < 1e-12);
    const auto mc = momentum(Wc, b);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(mc[a] - m0[a]) < 1e-13);
    CHECK(max_eig_diff(W0, Wc) < 1e-11);
  }

  TEST_CASE("restore_invariants hits the targets without touching the spectrum") {
    const QuantBasis b(12);
    QMatrix W = project(random_smooth_field(11, 1.0, 7), b);
    const QMatrix W0 = W;
    const double e = energy(W, b) * (1 + 1e-6);
    auto m = momentum(W, b);
    m[1] += 1e-6;
    restore_invariants(W, e, m, b);
    CHECK(energy(W, b) == doctest::Approx(e).epsilon(1e-12));
    CHECK(momentum(W, b)[1] == doctest::Approx(m[1]).epsilon(1e-12));
    CHECK(max_eig_diff(W0, W) < 1e-13);
  }

  TEST_CASE("second order in time") {
    const QuantBasis b(12);
    const QMatrix W0 = project(random_smooth_field(11, 1.5, 8), b);
    auto run = [&](double h) {
      QMatrix W = W0;
      for (int k = 0; k < std::lround(0.4 / h); ++k) W = step(W, h, b);
      return W;
    };
    const QMatrix a = run(0.04), c = run(0.02), d = run(0.01);
    const double order = std::log2((a - c).norm() / (c - d).norm());
    CHECK(order == doctest::Approx(2.0).epsilon(0.05));
  }

  TEST_CASE("non-convergence raises StepError and advance() recovers by halving") {
    const QuantBasis b(16);
    const QMatrix W = project(random_smooth_field(15, 1.0, 9), b);
    StepOptions o;
    o.max_iters = 6;
    CHECK_THROWS_AS(step(W, 0.2, b, o), StepError);
    try {
      step(W, 0.2, b, o);
    } catch (const StepError& e) {
      CHECK(e.residual() > o.tol);
    }
    const QMatrix Wa = advance(W, 0.2, b, o);
    CHECK(max_eig_diff(W, Wa) < 1e-12);
    o.max_halvings = 0;
    CHECK_THROWS_AS(advance(W, 0.2, b, o), StepError);
    CHECK_THROWS_AS(step(W, 0.0, b), std::invalid_argument);
  }

  TEST_CASE("zonal flow is stationary") {
    const QuantBasis b(10);
    SphField z(5);
    z(1, 0) = 1.0;
    z(4, 0) = 0.5;
    const QMatrix W = project(z, b);
    QMatrix V = W;
    for (int k = 0; k < 20; ++k) V = step(V, 0.05, b);
    CHECK((V - W).norm() < 1e-13);
  }

  TEST_CASE("diagnostics record") {
    const QuantBasis b(12);
    const SphField f = random_smooth_field(11, 1.0, 10);
    const QMatrix W = project(f, b);
    const DiagnosticsRecord r = diagnose(W, 1.5, b);
    CHECK(r.time == 1.5);
    CHECK(r.energy == doctest::Approx(energy_oracle(f)));
    CHECK(r.casimirs[0] == doctest::Approx(casimirs(W, 2)[1]));
    CHECK(r.spectral_norm == doctest::Approx(spectral_norm(W)));
    CHECK(r.residual_energy_norm > 0.0);
    CHECK(std::isnan(diagnose(W, 0.0, b, {false, 1e-9}).residual_energy_norm));
  }
}
