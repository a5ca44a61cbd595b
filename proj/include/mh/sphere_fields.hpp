#pragma once

// Continuum side: real spherical harmonics on the unit sphere (area 4*pi),
// Gauss-Legendre grids, direct transforms and the Poisson bracket.
//
// Basis convention. Y_{l0} = n_{l0} P_l(cos t), and for m > 0
//   Y_{l,m}  = sqrt(2) n_{lm} P_l^m(cos t) cos(m p)
//   Y_{l,-m} = sqrt(2) n_{lm} P_l^m(cos t) sin(m p)
// with n_{lm}^2 = (2l+1)/(4 pi) (l-m)!/(l+m)! and P_l^m taken WITHOUT the
// Condon-Shortley phase, so every Y_{lm} is positive near the north pole
// along p = 0. The set is orthonormal for the plain area integral.
// Coordinate functions: x1 = sqrt(4pi/3) Y_{1,1}, x2 = sqrt(4pi/3) Y_{1,-1},
// x3 = sqrt(4pi/3) Y_{1,0}.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mh {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSphereArea = 4.0 * kPi;

/// Position of (l, m) in the coefficient vector: l-major, m = -l..l.
constexpr std::size_t sh_index(int l, int m) {
  return static_cast<std::size_t>(l * l + l + m);
}

constexpr std::size_t sh_count(int max_degree) {
  return static_cast<std::size_t>((max_degree + 1) * (max_degree + 1));
}

class SphField {
 public:
  SphField() : SphField(0) {}
  explicit SphField(int max_degree);
  SphField(int max_degree, std::vector<double> coeffs);

  int max_degree() const { return max_degree_; }
  std::size_t size() const { return coeffs_.size(); }

  /// Coefficient c_{lm}; degrees above max_degree read as zero.
  double operator()(int l, int m) const;
  double& operator()(int l, int m);

  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }

  /// Copy with max degree L (truncates or zero-pads).
  SphField resized(int L) const;

  SphField& operator+=(const SphField& o);
  SphField& operator-=(const SphField& o);
  SphField& operator*=(double s);

  friend SphField operator+(SphField a, const SphField& b) { return a += b; }
  friend SphField operator-(SphField a, const SphField& b) { return a -= b; }
  friend SphField operator*(double s, SphField a) { return a *= s; }

  bool operator==(const SphField&) const = default;

 private:
  int max_degree_;
  std::vector<double> coeffs_;
};

SphField constant_field(double value);
/// x_alpha for alpha in {1, 2, 3}.
SphField coordinate_field(int alpha);
/// Single harmonic a * Y_{lm}.
SphField harmonic(int l, int m, double amplitude = 1.0);

/// Apply the Laplace-Beltrami operator (eigenvalue -l(l+1)).
SphField laplacian(const SphField& f);
/// Inverse Laplacian on the mean-zero part; the l = 0 coefficient is dropped.
SphField inverse_laplacian(const SphField& f);

double l2_inner(const SphField& a, const SphField& b);
double l2_norm(const SphField& f);
/// (sum (1 + l(l+1))^s c_{lm}^2)^{1/2}
double sobolev_norm(const SphField& f, double s);

struct GridSpec {
  int n_lat = 0;
  int n_lon = 0;

  /// Smallest grid on which analyze() is exact for degree L.
  static GridSpec for_degree(int L) { return {L + 1, 2 * L + 1}; }
  bool resolves(int L) const { return n_lat >= L + 1 && n_lon >= 2 * L + 1; }
  bool operator==(const GridSpec&) const = default;
};

/// Gauss-Legendre nodes on [-1, 1] (descending, i.e. north to south when read
/// as cos(colatitude)) and weights summing to 2.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Real values on a Gauss-Legendre x equiangular grid. Row i is the i-th
/// latitude from the north, column j is longitude 2*pi*j/n_lon.
class GridField {
 public:
  GridField() = default;
  explicit GridField(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  int n_lat() const { return spec_.n_lat; }
  int n_lon() const { return spec_.n_lon; }

  std::span<const double> cos_colat() const { return cos_colat_; }
  /// Latitude in radians (pi/2 - colatitude), north first.
  std::vector<double> latitudes() const;
  std::vector<double> longitudes() const;
  /// Quadrature weight of every node in row i (sums to 4 pi over the grid).
  double weight(int i) const { return row_weights_[static_cast<std::size_t>(i)]; }
  double total_weight() const;

  double& at(int i, int j) { return values_[static_cast<std::size_t>(i * spec_.n_lon + j)]; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(i * spec_.n_lon + j)]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Area integral of the grid values.
  double integrate() const;

  /// Fill with f(x, y, z) evaluated at the node positions.
  static GridField from_function(GridSpec spec,
                                 const std::function<double(double, double, double)>& f);

 private:
  GridSpec spec_{};
  std::vector<double> cos_colat_;
  std::vector<double> row_weights_;
  std::vector<double> values_;
};

/// Pointwise sum c_{lm} Y_{lm}. Throws std::invalid_argument on an
/// under-resolved grid.
GridField synthesize(const SphField& f, GridSpec spec);
/// Quadrature projection onto Y_{lm}, l <= L. Throws std::invalid_argument
/// if the grid cannot resolve degree L.
SphField analyze(const GridField& g, int L);

/// {f, g} = grad^perp f . grad g, oriented so that {x1, x2} = x3.
/// Exact for band-limited inputs when L_out >= deg f + deg g - 1.
SphField poisson_bracket(const SphField& f, const SphField& g, int L_out);

/// Gaussian coefficients with standard deviation (1+l)^(-gamma), l >= 1.
/// zero_momentum additionally removes l = 1.
SphField random_smooth_field(int L, double gamma, std::uint64_t seed, bool zero_momentum = false);

struct LevelSetHistogram {
  std::vector<double> edges;   // n_bins + 1, increasing
  std::vector<double> masses;  // area units, sums to the grid's total weight
  double total_mass() const;
};

LevelSetHistogram level_set_measure(const GridField& g, int n_bins);

}  // namespace mh
