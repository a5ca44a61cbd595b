#include "mh/sphere_fields.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "mh/legendre.hpp"

namespace mh {

// ---------------------------------------------------------------------------
// SphField

SphField::SphField(int max_degree) : max_degree_(max_degree) {
  if (max_degree < 0) throw std::invalid_argument("SphField: negative max degree");
  coeffs_.assign(sh_count(max_degree), 0.0);
}

SphField::SphField(int max_degree, std::vector<double> coeffs)
    : max_degree_(max_degree), coeffs_(std::move(coeffs)) {
  if (max_degree < 0 || coeffs_.size() != sh_count(max_degree)) {
    throw std::invalid_argument("SphField: coefficient count must be (L+1)^2");
  }
}

double SphField::operator()(int l, int m) const {
  if (l > max_degree_) return 0.0;
  return coeffs_[sh_index(l, m)];
}

double& SphField::operator()(int l, int m) {
  if (l > max_degree_) throw std::out_of_range("SphField: degree above band limit");
  return coeffs_[sh_index(l, m)];
}

SphField SphField::resized(int L) const {
  SphField out(L);
  const std::size_t n = std::min(out.size(), size());
  std::copy_n(coeffs_.begin(), n, out.coeffs_.begin());
  return out;
}

SphField& SphField::operator+=(const SphField& o) {
  if (o.max_degree_ > max_degree_) *this = resized(o.max_degree_);
  for (std::size_t i = 0; i < o.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SphField& SphField::operator-=(const SphField& o) {
  if (o.max_degree_ > max_degree_) *this = resized(o.max_degree_);
  for (std::size_t i = 0; i < o.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SphField& SphField::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

SphField constant_field(double value) {
  SphField f(0);
  f(0, 0) = value * std::sqrt(kSphereArea);
  return f;
}

SphField coordinate_field(int alpha) {
  static constexpr int kOrder[] = {1, -1, 0};
  if (alpha < 1 || alpha > 3) throw std::invalid_argument("coordinate_field: alpha must be 1, 2 or 3");
  return harmonic(1, kOrder[alpha - 1], std::sqrt(kSphereArea / 3.0));
}

SphField harmonic(int l, int m, double amplitude) {
  if (l < 0 || m < -l || m > l) throw std::invalid_argument("harmonic: need |m| <= l");
  SphField f(l);
  f(l, m) = amplitude;
  return f;
}

SphField laplacian(const SphField& f) {
  SphField out = f;
  for (int l = 0; l <= f.max_degree(); ++l)
    for (int m = -l; m <= l; ++m) out(l, m) *= -static_cast<double>(l) * (l + 1);
  return out;
}

SphField inverse_laplacian(const SphField& f) {
  SphField out = f;
  out(0, 0) = 0.0;
  for (int l = 1; l <= f.max_degree(); ++l)
    for (int m = -l; m <= l; ++m) out(l, m) /= -static_cast<double>(l) * (l + 1);
  return out;
}

double l2_inner(const SphField& a, const SphField& b) {
  const std::size_t n = std::min(a.size(), b.size());
  return std::inner_product(a.coeffs().begin(), a.coeffs().begin() + static_cast<std::ptrdiff_t>(n),
                            b.coeffs().begin(), 0.0);
}

double l2_norm(const SphField& f) { return std::sqrt(l2_inner(f, f)); }

double sobolev_norm(const SphField& f, double s) {
  double acc = 0.0;
  for (int l = 0; l <= f.max_degree(); ++l) {
    const double w = std::pow(1.0 + static_cast<double>(l) * (l + 1), s);
    for (int m = -l; m <= l; ++m) acc += w * f(l, m) * f(l, m);
  }
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Grids

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  // P_n(x) and P_n'(x) by the three-term recurrence.
  const auto legendre = [n](double x, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      const double dx = legendre(x, dp) / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = -x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
}

GridField::GridField(GridSpec spec) : spec_(spec) {
  if (spec.n_lat < 1 || spec.n_lon < 1) throw std::invalid_argument("GridField: empty grid");
  std::vector<double> w;
  gauss_legendre(spec.n_lat, cos_colat_, w);
  row_weights_.resize(w.size());
  const double dphi = 2.0 * kPi / spec.n_lon;
  for (std::size_t i = 0; i < w.size(); ++i) row_weights_[i] = w[i] * dphi;
  values_.assign(static_cast<std::size_t>(spec.n_lat) * static_cast<std::size_t>(spec.n_lon), 0.0);
}

std::vector<double> GridField::latitudes() const {
  std::vector<double> out(cos_colat_.size());
  std::transform(cos_colat_.begin(), cos_colat_.end(), out.begin(),
                 [](double c) { return kPi / 2.0 - std::acos(c); });
  return out;
}

std::vector<double> GridField::longitudes() const {
  std::vector<double> out(static_cast<std::size_t>(spec_.n_lon));
  for (int j = 0; j < spec_.n_lon; ++j) out[static_cast<std::size_t>(j)] = 2.0 * kPi * j / spec_.n_lon;
  return out;
}

double GridField::total_weight() const {
  return std::accumulate(row_weights_.begin(), row_weights_.end(), 0.0) * spec_.n_lon;
}

double GridField::integrate() const {
  double acc = 0.0;
  for (int i = 0; i < spec_.n_lat; ++i) {
    double row = 0.0;
    for (int j = 0; j < spec_.n_lon; ++j) row += at(i, j);
    acc += row * weight(i);
  }
  return acc;
}

GridField GridField::from_function(GridSpec spec, const std::function<double(double, double, double)>& f) {
  GridField g(spec);
  const auto lon = g.longitudes();
  for (int i = 0; i < spec.n_lat; ++i) {
    const double z = g.cos_colat_[static_cast<std::size_t>(i)];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < spec.n_lon; ++j) {
      const double p = lon[static_cast<std::size_t>(j)];
      g.at(i, j) = f(s * std::cos(p), s * std::sin(p), z);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Transforms

namespace {

/// cos(m p_j), sin(m p_j) for m = 0..L, j = 0..n_lon-1, stored [m * n_lon + j].
struct TrigTable {
  std::vector<double> c, s;
  int n_lon;
  TrigTable(int L, int n) : c(static_cast<std::size_t>((L + 1) * n)), s(c.size()), n_lon(n) {
    for (int m = 0; m <= L; ++m)
      for (int j = 0; j < n; ++j) {
        const double p = 2.0 * kPi * static_cast<double>(static_cast<long long>(m) * j % n) / n;
        c[static_cast<std::size_t>(m * n + j)] = std::cos(p);
        s[static_cast<std::size_t>(m * n + j)] = std::sin(p);
      }
  }
};

enum class LatPart { kValue, kDTheta };

/// Per-latitude Fourier amplitudes a_m (cos) and b_m (sin) of f or d/dt f.
void fourier_row(const SphField& f, const LegendreTable& leg, LatPart part, std::vector<double>& a,
                 std::vector<double>& b) {
  const int L = f.max_degree();
  a.assign(static_cast<std::size_t>(L + 1), 0.0);
  b.assign(static_cast<std::size_t>(L + 1), 0.0);
  const double r2 = std::sqrt(2.0);
  for (int m = 0; m <= L; ++m) {
    double am = 0.0, bm = 0.0;
    for (int l = m; l <= L; ++l) {
      const double lam = part == LatPart::kValue ? leg.value(l, m) : leg.dtheta(l, m);
      am += f(l, m) * lam;
      if (m > 0) bm += f(l, -m) * lam;
    }
    a[static_cast<std::size_t>(m)] = m > 0 ? r2 * am : am;
    b[static_cast<std::size_t>(m)] = r2 * bm;
  }
}

void fourier_to_row(const std::vector<double>& a, const std::vector<double>& b, const TrigTable& trig,
                    double* row) {
  const int n = trig.n_lon;
  for (int j = 0; j < n; ++j) row[j] = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) {
    const double* c = &trig.c[m * static_cast<std::size_t>(n)];
    const double* s = &trig.s[m * static_cast<std::size_t>(n)];
    for (int j = 0; j < n; ++j) row[j] += a[m] * c[j] + b[m] * s[j];
  }
}

void require_resolution(GridSpec spec, int L, const char* who) {
  if (!spec.resolves(L)) {
    throw std::invalid_argument(std::string(who) + ": grid " + std::to_string(spec.n_lat) + "x" +
                                std::to_string(spec.n_lon) + " does not resolve degree " + std::to_string(L));
  }
}

}  // namespace

GridField synthesize(const SphField& f, GridSpec spec) {
  require_resolution(spec, f.max_degree(), "synthesize");
  GridField g(spec);
  const int L = f.max_degree();
  const TrigTable trig(L, spec.n_lon);
  std::vector<double> a, b;
  for (int i = 0; i < spec.n_lat; ++i) {
    const LegendreTable leg(L, g.cos_colat()[static_cast<std::size_t>(i)]);
    fourier_row(f, leg, LatPart::kValue, a, b);
    fourier_to_row(a, b, trig, &g.at(i, 0));
  }
  return g;
}

SphField analyze(const GridField& g, int L) {
  require_resolution(g.spec(), L, "analyze");
  SphField f(L);
  const int n = g.n_lon();
  const TrigTable trig(L, n);
  const double r2 = std::sqrt(2.0);
  std::vector<double> A(static_cast<std::size_t>(L + 1)), B(A.size());
  for (int i = 0; i < g.n_lat(); ++i) {
    const double* row = g.values().data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
    for (int m = 0; m <= L; ++m) {
      const double* c = &trig.c[static_cast<std::size_t>(m * n)];
      const double* s = &trig.s[static_cast<std::size_t>(m * n)];
      double am = 0.0, bm = 0.0;
      for (int j = 0; j < n; ++j) {
        am += row[j] * c[j];
        bm += row[j] * s[j];
      }
      A[static_cast<std::size_t>(m)] = am * g.weight(i);
      B[static_cast<std::size_t>(m)] = bm * g.weight(i);
    }
    const LegendreTable leg(L, g.cos_colat()[static_cast<std::size_t>(i)]);
    for (int m = 0; m <= L; ++m) {
      for (int l = m; l <= L; ++l) {
        const double lam = leg.value(l, m);
        if (m == 0) {
          f(l, 0) += lam * A[0];
        } else {
          f(l, m) += r2 * lam * A[static_cast<std::size_t>(m)];
          f(l, -m) += r2 * lam * B[static_cast<std::size_t>(m)];
        }
      }
    }
  }
  return f;
}

SphField poisson_bracket(const SphField& f, const SphField& g, int L_out) {
  if (L_out < 0) throw std::invalid_argument("poisson_bracket: negative output degree");
  const int content = std::max(0, f.max_degree() + g.max_degree() - 1);
  const GridSpec spec = GridSpec::for_degree(std::max(content, L_out));
  const int Lf = f.max_degree(), Lg = g.max_degree();
  const int Lmax = std::max(Lf, Lg);
  const TrigTable trig(Lmax, spec.n_lon);

  GridField out(spec);
  const int n = spec.n_lon;
  std::vector<double> a, b, fa, fb, ga, gb;
  std::vector<double> ft(static_cast<std::size_t>(n)), fp(ft.size()), gt(ft.size()), gp(ft.size());
  for (int i = 0; i < spec.n_lat; ++i) {
    const double z = out.cos_colat()[static_cast<std::size_t>(i)];
    const double sin_t = std::sqrt(1.0 - z * z);
    const LegendreTable leg(Lmax, z, true);

    // theta derivatives
    fourier_row(f, leg, LatPart::kDTheta, a, b);
    fourier_to_row(a, b, trig, ft.data());
    fourier_row(g, leg, LatPart::kDTheta, a, b);
    fourier_to_row(a, b, trig, gt.data());

    // phi derivatives: d/dp (a cos mp + b sin mp) = m b cos mp - m a sin mp
    fourier_row(f, leg, LatPart::kValue, fa, fb);
    fourier_row(g, leg, LatPart::kValue, ga, gb);
    for (std::size_t m = 0; m < fa.size(); ++m) {
      const double mm = static_cast<double>(m);
      const double ta = mm * fb[m];
      fb[m] = -mm * fa[m];
      fa[m] = ta;
    }
    for (std::size_t m = 0; m < ga.size(); ++m) {
      const double mm = static_cast<double>(m);
      const double ta = mm * gb[m];
      gb[m] = -mm * ga[m];
      ga[m] = ta;
    }
    fourier_to_row(fa, fb, trig, fp.data());
    fourier_to_row(ga, gb, trig, gp.data());

    double* row = &out.at(i, 0);
    for (int j = 0; j < n; ++j) {
      const auto k = static_cast<std::size_t>(j);
      row[j] = (ft[k] * gp[k] - fp[k] * gt[k]) / sin_t;
    }
  }
  return analyze(out, L_out);
}

SphField random_smooth_field(int L, double gamma, std::uint64_t seed, bool zero_momentum) {
  if (L < 1) throw std::invalid_argument("random_smooth_field: L must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SphField f(L);
  for (int l = 1; l <= L; ++l) {
    const double sigma = std::pow(1.0 + l, -gamma);
    for (int m = -l; m <= l; ++m) {
      const double z = normal(rng);
      f(l, m) = (zero_momentum && l == 1) ? 0.0 : sigma * z;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Level sets

double LevelSetHistogram::total_mass() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

LevelSetHistogram level_set_measure(const GridField& g, int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("level_set_measure: n_bins must be >= 1");
  const auto vals = g.values();
  const auto [lo_it, hi_it] = std::minmax_element(vals.begin(), vals.end());
  double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  LevelSetHistogram h;
  h.edges.resize(static_cast<std::size_t>(n_bins) + 1);
  for (int k = 0; k <= n_bins; ++k) h.edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / n_bins;
  h.masses.assign(static_cast<std::size_t>(n_bins), 0.0);
  for (int i = 0; i < g.n_lat(); ++i) {
    for (int j = 0; j < g.n_lon(); ++j) {
      const double v = g.at(i, j);
      int k = static_cast<int>(std::floor((v - lo) / (hi - lo) * n_bins));
      k = std::clamp(k, 0, n_bins - 1);
      h.masses[static_cast<std::size_t>(k)] += g.weight(i);
    }
  }
  return h;
}

}  // namespace mh
