#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mh/sphere_fields.hpp"

using namespace mh;

namespace {

// Closed forms of the low-degree real harmonics (no Condon-Shortley phase).
double y_closed(int l, int m, double ct, double phi) {
  const double st = std::sqrt(1.0 - ct * ct);
  const double pi = kPi;
  if (l == 0) return 1.0 / std::sqrt(4 * pi);
  if (l == 1 && m == 0) return std::sqrt(3 / (4 * pi)) * ct;
  if (l == 1 && m == 1) return std::sqrt(3 / (4 * pi)) * st * std::cos(phi);
  if (l == 1 && m == -1) return std::sqrt(3 / (4 * pi)) * st * std::sin(phi);
  if (l == 2 && m == 0) return std::sqrt(5 / (16 * pi)) * (3 * ct * ct - 1);
  if (l == 2 && m == 1) return std::sqrt(15 / (4 * pi)) * st * ct * std::cos(phi);
  if (l == 2 && m == -1) return std::sqrt(15 / (4 * pi)) * st * ct * std::sin(phi);
  if (l == 2 && m == 2) return std::sqrt(15 / (16 * pi)) * st * st * std::cos(2 * phi);
  if (l == 2 && m == -2) return std::sqrt(15 / (16 * pi)) * st * st * std::sin(2 * phi);
  return NAN;
}

double max_diff(const GridField& a, const GridField& b) {
  double d = 0;
  for (std::size_t k = 0; k < a.values().size(); ++k) d = std::max(d, std::abs(a.values()[k] - b.values()[k]));
  return d;
}

}  // namespace

TEST_SUITE("sphere_fields") {
  TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    for (int n : {1, 2, 5, 16, 65}) {
      std::vector<double> x, w;
      gauss_legendre(n, x, w);
      REQUIRE(x.size() == static_cast<std::size_t>(n));
      for (int i = 1; i < n; ++i) CHECK(x[i] < x[i - 1]);
      for (int k = 0; k <= 2 * n - 1; ++k) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], k);
        const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
        CHECK(s == doctest::Approx(exact).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("synthesized harmonics match closed forms") {
    const GridSpec spec{9, 17};
    for (int l = 0; l <= 2; ++l) {
      for (int m = -l; m <= l; ++m) {
        const GridField g = synthesize(harmonic(l, m), spec);
        const auto lon = g.longitudes();
        for (int i = 0; i < spec.n_lat; ++i)
          for (int j = 0; j < spec.n_lon; ++j)
            CHECK(g.at(i, j) == doctest::Approx(y_closed(l, m, g.cos_colat()[i], lon[j])).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("coordinate fields are the Cartesian coordinates") {
    const GridSpec spec{6, 11};
    const auto fx = GridField::from_function(spec, [](double x, double, double) { return x; });
    const auto fy = GridField::from_function(spec, [](double, double y, double) { return y; });
    const auto fz = GridField::from_function(spec, [](double, double, double z) { return z; });
    CHECK(max_diff(synthesize(coordinate_field(1), spec), fx) < 1e-14);
    CHECK(max_diff(synthesize(coordinate_field(2), spec), fy) < 1e-14);
    CHECK(max_diff(synthesize(coordinate_field(3), spec), fz) < 1e-14);
  }

  TEST_CASE("grid integration") {
    const GridField one = GridField::from_function(GridSpec{4, 7}, [](double, double, double) { return 1.0; });
    CHECK(one.integrate() == doctest::Approx(kSphereArea).epsilon(1e-14));
    CHECK(one.total_weight() == doctest::Approx(kSphereArea).epsilon(1e-14));
    const GridField z2 = GridField::from_function(GridSpec{4, 7}, [](double, double, double z) { return z * z; });
    CHECK(z2.integrate() == doctest::Approx(kSphereArea / 3).epsilon(1e-14));
  }

  TEST_CASE("analyze inverts synthesize on resolving grids") {
    for (int L : {0, 1, 7, 24}) {
      const SphField f = random_smooth_field(std::max(L, 1), 1.0, 42).resized(L);
      for (GridSpec spec : {GridSpec::for_degree(L), GridSpec{L + 5, 2 * L + 8}}) {
        const SphField g = analyze(synthesize(f, spec), L);
        for (std::size_t k = 0; k < f.size(); ++k) CHECK(g.coeffs()[k] == doctest::Approx(f.coeffs()[k]).epsilon(1e-12).scale(1));
      }
    }
  }

  TEST_CASE("orthonormality by quadrature") {
    const int L = 6;
    const GridSpec spec = GridSpec::for_degree(2 * L);
    for (int l1 = 0; l1 <= L; ++l1)
      for (int m1 = -l1; m1 <= l1; ++m1) {
        const GridField a = synthesize(harmonic(l1, m1), spec);
        for (int l2 = 0; l2 <= L; ++l2)
          for (int m2 = -l2; m2 <= l2; ++m2) {
            GridField b = synthesize(harmonic(l2, m2), spec);
            for (std::size_t k = 0; k < b.values().size(); ++k) b.values()[k] *= a.values()[k];
            CHECK(b.integrate() == doctest::Approx(l1 == l2 && m1 == m2 ? 1.0 : 0.0).scale(1).epsilon(1e-13));
          }
      }
  }

  TEST_CASE("under-resolved grids are rejected") {
    CHECK_THROWS_AS(synthesize(harmonic(5, 3), GridSpec{4, 11}), std::invalid_argument);
    CHECK_THROWS_AS(analyze(GridField(GridSpec{4, 7}), 4), std::invalid_argument);
  }

  TEST_CASE("Laplacian and inverse") {
    const SphField f = random_smooth_field(10, 1.0, 3);
    const SphField lf = laplacian(f);
    for (int l = 0; l <= 10; ++l)
      for (int m = -l; m <= l; ++m) CHECK(lf(l, m) == doctest::Approx(-l * (l + 1) * f(l, m)));
    SphField g = f;
    g(0, 0) = 2.5;
    const SphField back = laplacian(inverse_laplacian(g));
    CHECK(back(0, 0) == 0.0);
    for (int l = 1; l <= 10; ++l)
      for (int m = -l; m <= l; ++m) CHECK(back(l, m) == doctest::Approx(g(l, m)));
  }

  TEST_CASE("norms") {
    const SphField f = random_smooth_field(6, 0.5, 9);
    CHECK(l2_norm(f) == doctest::Approx(std::sqrt(l2_inner(f, f))));
    CHECK(sobolev_norm(f, 0.0) == doctest::Approx(l2_norm(f)));
    CHECK(sobolev_norm(f, 1.0) > l2_norm(f));
    // quadrature oracle for the L2 norm
    GridField g = synthesize(f, GridSpec::for_degree(12));
    for (double& v : g.values()) v *= v;
    CHECK(l2_norm(f) == doctest::Approx(std::sqrt(g.integrate())).epsilon(1e-12));
  }

  TEST_CASE("Poisson bracket of coordinates") {
    const auto x1 = coordinate_field(1), x2 = coordinate_field(2), x3 = coordinate_field(3);
    const auto check_eq = [](const SphField& a, const SphField& b) {
      const SphField d = a.resized(3) - b.resized(3);
      CHECK(l2_norm(d) < 1e-13);
    };
    check_eq(poisson_bracket(x1, x2, 2), x3);
    check_eq(poisson_bracket(x2, x3, 2), x1);
    check_eq(poisson_bracket(x3, x1, 2), x2);
    check_eq(poisson_bracket(x2, x1, 2), -1.0 * x3);
  }

  TEST_CASE("Poisson bracket against the ambient triple-product formula") {
    // F = x y + z^3, G = x^2 z + y; on the sphere {f, g} = r . (grad F x grad G).
    auto F = [](double x, double y, double z) { return x * y + z * z * z; };
    auto G = [](double x, double y, double z) { return x * x * z + y; };
    auto pb = [](double x, double y, double z) {
      const double fx = y, fy = x, fz = 3 * z * z;
      const double gx = 2 * x * z, gy = 1, gz = x * x;
      const double cx = fy * gz - fz * gy, cy = fz * gx - fx * gz, cz = fx * gy - fy * gx;
      return x * cx + y * cy + z * cz;
    };
    const GridSpec spec = GridSpec::for_degree(12);
    const SphField f = analyze(GridField::from_function(spec, F), 3);
    const SphField g = analyze(GridField::from_function(spec, G), 3);
    const GridField got = synthesize(poisson_bracket(f, g, 6), spec);
    const GridField want = GridField::from_function(spec, pb);
    CHECK(max_diff(got, want) < 1e-12);
  }

  TEST_CASE("Poisson bracket is antisymmetric and satisfies Jacobi") {
    const SphField a = random_smooth_field(4, 1.0, 1), b = random_smooth_field(4, 1.0, 2), c = random_smooth_field(4, 1.0, 3);
    CHECK(l2_norm(poisson_bracket(a, b, 7) + poisson_bracket(b, a, 7)) < 1e-13);
    const SphField j = poisson_bracket(a, poisson_bracket(b, c, 7), 10) + poisson_bracket(b, poisson_bracket(c, a, 7), 10) +
                       poisson_bracket(c, poisson_bracket(a, b, 7), 10);
    CHECK(l2_norm(j) < 1e-12);
  }

  TEST_CASE("random fields") {
    const SphField a = random_smooth_field(12, 2.0, 77), b = random_smooth_field(12, 2.0, 77);
    CHECK(a == b);
    CHECK_FALSE(a == random_smooth_field(12, 2.0, 78));
    CHECK(a(0, 0) == 0.0);
    const SphField z = random_smooth_field(12, 2.0, 77, true);
    for (int m = -1; m <= 1; ++m) CHECK(z(1, m) == 0.0);
    CHECK(z(5, 2) == a(5, 2));
    CHECK_THROWS_AS(random_smooth_field(0, 2.0, 1), std::invalid_argument);
  }

  TEST_CASE("level-set histogram") {
    const GridField g = synthesize(coordinate_field(3), GridSpec{400, 3});
    const LevelSetHistogram h = level_set_measure(g, 10);
    CHECK(h.total_mass() == doctest::Approx(kSphereArea).epsilon(1e-13));
    CHECK(h.edges.size() == 11);
    // z is uniformly distributed on the sphere (Archimedes): equal-width bins
    // carry roughly equal mass.
    for (double m : h.masses) CHECK(m == doctest::Approx(kSphereArea / 10).epsilon(0.02));
    const LevelSetHistogram c = level_set_measure(synthesize(constant_field(2.0), GridSpec{3, 5}), 4);
    CHECK(c.edges.front() == doctest::Approx(1.5));
    CHECK(c.edges.back() == doctest::Approx(2.5));
    CHECK(c.total_mass() == doctest::Approx(kSphereArea));
    CHECK_THROWS_AS(level_set_measure(g, 0), std::invalid_argument);
  }

  TEST_CASE("coefficient container") {
    SphField f(2);
    f(2, -1) = 3.0;
    CHECK(f.coeffs()[sh_index(2, -1)] == 3.0);
    const SphField& cf = f;
    CHECK(cf(7, 3) == 0.0);
    CHECK_THROWS(f(7, 3));
    CHECK(f.resized(1).size() == sh_count(1));
    CHECK(f.resized(4)(2, -1) == 3.0);
    CHECK(constant_field(1.0)(0, 0) == doctest::Approx(std::sqrt(kSphereArea)));
  }
}
