#include "mh/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mh/binary_io.hpp"
#include "mh/errors.hpp"
#include "mh/hash.hpp"

namespace mh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const std::complex<double> kMinusI(0.0, -1.0);

void check_N_list(const std::vector<int>& N_list) {
  if (N_list.empty()) throw std::invalid_argument("N list is empty");
  for (std::size_t k = 0; k < N_list.size(); ++k) {
    if (N_list[k] < 2) throw std::invalid_argument("N values must be >= 2");
    if (k > 0 && N_list[k] <= N_list[k - 1]) throw std::invalid_argument("N values must be strictly increasing");
  }
}

ConvergenceReport make_report(std::string kind, std::string norm, const std::vector<int>& N_list) {
  ConvergenceReport r;
  r.kind = std::move(kind);
  r.norm = std::move(norm);
  r.N = N_list;
  r.error.assign(N_list.size(), kNaN);
  r.failure.assign(N_list.size(), "");
  return r;
}

// Pointwise power by quadrature; exact for band-limited omega.
SphField field_power(const SphField& omega, int m) {
  if (m == 1) return omega;
  const int L = std::max(1, m * omega.max_degree());
  GridField g = synthesize(omega, GridSpec::for_degree(L));
  for (double& v : g.values()) v = std::pow(v, m);
  return analyze(g, L);
}

}  // namespace

const QuantBasis& BasisCache::get(int N) {
  auto it = bases_.find(N);
  if (it != bases_.end()) return *it->second;

  std::unique_ptr<QuantBasis> b;
  std::filesystem::path file;
  if (dir_) {
    file = *dir_ / ("basis_N" + std::to_string(N) + ".mhqb");
    if (std::filesystem::exists(file)) {
      try {
        if (auto loaded = read_basis(file, N)) b = std::make_unique<QuantBasis>(std::move(*loaded));
      } catch (const FormatError&) {
        // stale or damaged cache entry; rebuilt below
      }
    }
  }
  if (!b) {
    b = std::make_unique<QuantBasis>(N);
    if (dir_) {
      std::filesystem::create_directories(*dir_);
      write_basis(file, *b);
    }
  }
  return *bases_.emplace(N, std::move(b)).first->second;
}

QMatrix resolution_project(const QMatrix& W, const QuantBasis& from, const QuantBasis& to) {
  if (to.size() > from.size()) throw std::invalid_argument("resolution_project: target N exceeds source N");
  return project(lift(W, from).resized(to.size() - 1), to);
}

bool ConvergenceReport::all_ok() const {
  return std::all_of(failure.begin(), failure.end(), [](const std::string& s) { return s.empty(); });
}

double fit_loglog_slope(const std::vector<int>& N, const std::vector<double>& error) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < std::min(N.size(), error.size()); ++k) {
    if (std::isfinite(error[k]) && error[k] > 0.0 && N[k] > 0) {
      x.push_back(std::log(static_cast<double>(N[k])));
      y.push_back(std::log(error[k]));
    }
  }
  if (x.size() >= 3) {
    x.erase(x.begin());
    y.erase(y.begin());
  }
  if (x.size() < 2) return kNaN;
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::uint64_t field_hash(const SphField& f) {
  const auto c = f.coeffs();
  const std::int32_t L = f.max_degree();
  std::uint64_t h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&L), sizeof L));
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(c.data()), c.size() * sizeof(double)), h);
}

QMatrix evolve(const SphField& omega0, double t, double h, const QuantBasis& basis, const StepOptions& opts) {
  if (!(t >= 0.0) || !(h > 0.0)) throw std::invalid_argument("evolve: need t >= 0 and h > 0");
  QMatrix W = project(omega0, basis);
  const long long n = std::llround(t / h);
  if (n == 0) return W;
  const double dt = t / static_cast<double>(n);
  for (long long k = 0; k < n; ++k) W = advance(W, dt, basis, opts);
  return W;
}

ConvergenceReport solution_convergence(const SphField& omega0, double t, const std::vector<int>& N_list, int N_ref,
                                       double h, BasisCache& cache, const StepOptions& opts) {
  check_N_list(N_list);
  if (N_ref <= N_list.back()) throw std::invalid_argument("solution_convergence: N_ref must exceed every N");
  ConvergenceReport r = make_report("solution", "L2", N_list);
  r.t = t;
  r.data_hash = field_hash(omega0);

  const SphField ref = lift(evolve(omega0, t, h, cache.get(N_ref), opts), cache.get(N_ref));
  for (std::size_t k = 0; k < N_list.size(); ++k) {
    const QuantBasis& b = cache.get(N_list[k]);
    try {
      const SphField f = lift(evolve(omega0, t, h, b, opts), b).resized(ref.max_degree());
      r.error[k] = l2_norm(f - ref);
    } catch (const NumericalError& e) {
      r.failure[k] = e.what();
    }
  }
  r.slope = fit_loglog_slope(r.N, r.error);
  return r;
}

ConvergenceReport bracket_convergence(const SphField& omega, const SphField& psi, const std::vector<int>& N_list,
                                      BracketNorm norm, BasisCache& cache) {
  check_N_list(N_list);
  ConvergenceReport r = make_report("bracket", norm == BracketNorm::kSpectral ? "spectral" : "L2", N_list);
  r.data_hash = field_hash(omega) ^ (field_hash(psi) * 0x9e3779b97f4a7c15ull);

  const SphField pb = poisson_bracket(omega, psi, omega.max_degree() + psi.max_degree());
  for (std::size_t k = 0; k < N_list.size(); ++k) {
    const QuantBasis& b = cache.get(N_list[k]);
    const QMatrix E = scaled_bracket(project(omega, b), project(psi, b), b.hbar()) - project(pb, b);
    r.error[k] = norm == BracketNorm::kSpectral ? spectral_norm(E) : matrix_l2_norm(E);
  }
  r.slope = fit_loglog_slope(r.N, r.error);
  return r;
}

std::vector<double> continuum_moments(const SphField& omega, int m_max) {
  if (m_max < 1) throw std::invalid_argument("continuum_moments: m_max must be >= 1");
  const GridField g = synthesize(omega, GridSpec::for_degree(std::max(1, m_max * omega.max_degree())));
  std::vector<double> c(static_cast<std::size_t>(m_max), 0.0);
  for (int i = 0; i < g.n_lat(); ++i) {
    for (int j = 0; j < g.n_lon(); ++j) {
      const double v = g.at(i, j);
      double p = 1.0;
      for (int m = 1; m <= m_max; ++m) {
        p *= v;
        c[static_cast<std::size_t>(m - 1)] += g.weight(i) * p;
      }
    }
  }
  for (double& x : c) x /= kSphereArea;
  return c;
}

ConvergenceReport spectral_measure_convergence(const SphField& omega, const std::vector<int>& N_list, int m_max,
                                               BasisCache& cache, int histogram_bins) {
  check_N_list(N_list);
  ConvergenceReport r = make_report("spectral", "max moment error", N_list);
  r.data_hash = field_hash(omega);
  r.extra_name = "w1_histogram";
  r.extra.assign(N_list.size(), kNaN);

  const std::vector<double> exact = continuum_moments(omega, m_max);
  const GridField g = synthesize(omega, GridSpec::for_degree(std::max(4 * omega.max_degree(), 64)));
  const LevelSetHistogram hist = level_set_measure(g, histogram_bins);

  for (std::size_t k = 0; k < N_list.size(); ++k) {
    const QuantBasis& b = cache.get(N_list[k]);
    try {
      const SpectralMeasure mu = spectral_measure(project(omega, b));
      double err = 0.0;
      for (int m = 1; m <= m_max; ++m) err = std::max(err, std::abs(mu.moment(m) - exact[static_cast<std::size_t>(m - 1)]));
      r.error[k] = err;
      r.extra[k] = wasserstein1(mu.eigenvalues, hist);
    } catch (const NumericalError& e) {
      r.failure[k] = e.what();
    }
  }
  r.slope = fit_loglog_slope(r.N, r.error);
  return r;
}

ConvergenceReport power_convergence(const SphField& omega, int m, const std::vector<int>& N_list, BasisCache& cache) {
  if (m < 1) throw std::invalid_argument("power_convergence: m must be >= 1");
  check_N_list(N_list);
  ConvergenceReport r = make_report("power", "spectral", N_list);
  r.data_hash = field_hash(omega);

  const SphField wm = field_power(omega, m);
  for (std::size_t k = 0; k < N_list.size(); ++k) {
    const QuantBasis& b = cache.get(N_list[k]);
    const QMatrix A = kMinusI * project(omega, b);
    QMatrix Am = A;
    for (int p = 1; p < m; ++p) Am = (Am * A).eval();
    const QMatrix E = Am - kMinusI * project(wm, b);
    r.error[k] = spectral_norm(E);
  }
  r.slope = fit_loglog_slope(r.N, r.error);
  return r;
}

namespace {

// Semicircle of radius R: CDF and first-moment antiderivative.
struct Semicircle {
  double R;
  double cdf(double x) const {
    if (x <= -R) return 0.0;
    if (x >= R) return 1.0;
    return 0.5 + (x * std::sqrt(R * R - x * x)) / (kPi * R * R) + std::asin(x / R) / kPi;
  }
  double first_moment(double x) const {
    x = std::clamp(x, -R, R);
    const double s = R * R - x * x;
    return -2.0 / (3.0 * kPi * R * R) * s * std::sqrt(s);
  }
  double quantile(double u) const {
    if (u <= 0.0) return -R;
    if (u >= 1.0) return R;
    double lo = -R, hi = R;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * R; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

}  // namespace

double semicircle_distance(const SpectralMeasure& mu) {
  if (mu.eigenvalues.empty()) throw std::invalid_argument("semicircle_distance: empty measure");
  std::vector<double> x = mu.eigenvalues;
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  const double c2 = mu.moment(2);
  if (!(c2 > 0.0)) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s / n;
  }
  const Semicircle sc{2.0 * std::sqrt(c2)};
  // Atom k carries quantile mass [k/n, (k+1)/n].
  double total = 0.0;
  double x0 = -sc.R;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double u0 = static_cast<double>(k) / n, u1 = static_cast<double>(k + 1) / n;
    const double x1 = k + 1 == x.size() ? sc.R : sc.quantile(u1);
    const double lam = x[k];
    const double c = std::clamp(lam, x0, x1);
    const double Fc = sc.cdf(c);
    total += lam * (Fc - u0) - (sc.first_moment(c) - sc.first_moment(x0)) + (sc.first_moment(x1) - sc.first_moment(c)) -
             lam * (u1 - Fc);
    x0 = x1;
  }
  return total;
}

double wasserstein1(const std::vector<double>& sorted_atoms, const LevelSetHistogram& hist) {
  if (sorted_atoms.empty() || hist.masses.empty()) throw std::invalid_argument("wasserstein1: empty measure");
  const double total = hist.total_mass();
  if (!(total > 0.0)) throw std::invalid_argument("wasserstein1: histogram has no mass");

  std::vector<double> pts(sorted_atoms);
  pts.insert(pts.end(), hist.edges.begin(), hist.edges.end());
  std::sort(pts.begin(), pts.end());

  const double n = static_cast<double>(sorted_atoms.size());
  std::vector<double> cum(hist.edges.size(), 0.0);
  for (std::size_t b = 0; b < hist.masses.size(); ++b) cum[b + 1] = cum[b] + hist.masses[b] / total;
  auto hist_cdf = [&](double x) {
    if (x <= hist.edges.front()) return 0.0;
    if (x >= hist.edges.back()) return 1.0;
    const auto it = std::upper_bound(hist.edges.begin(), hist.edges.end(), x);
    const std::size_t b = static_cast<std::size_t>(it - hist.edges.begin()) - 1;
    const double w = (x - hist.edges[b]) / (hist.edges[b + 1] - hist.edges[b]);
    return cum[b] + w * (cum[b + 1] - cum[b]);
  };

  double acc = 0.0;
  std::size_t below = 0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double a = pts[k], b = pts[k + 1];
    if (!(b > a)) continue;
    while (below < sorted_atoms.size() && sorted_atoms[below] <= a) ++below;
    const double fa = static_cast<double>(below) / n;
    const double ga = hist_cdf(a) - fa, gb = hist_cdf(b) - fa;
    if (ga * gb >= 0.0) {
      acc += 0.5 * (std::abs(ga) + std::abs(gb)) * (b - a);
    } else {
      acc += 0.5 * (ga * ga + gb * gb) / (std::abs(ga) + std::abs(gb)) * (b - a);
    }
  }
  return acc;
}

int count_condensates(const GridField& g, int smoothing_degree, double threshold_frac) {
  const int L_max = std::min(g.n_lat() - 1, (g.n_lon() - 1) / 2);
  const int L = std::clamp(smoothing_degree, 0, L_max);
  SphField f = analyze(g, L);
  f(0, 0) = 0.0;
  const GridField s = synthesize(f, g.spec());

  double raw = 0.0, peak = 0.0;
  for (double v : g.values()) raw = std::max(raw, std::abs(v));
  for (double v : s.values()) peak = std::max(peak, std::abs(v));
  if (!(peak > 1e-12 * std::max(raw, 1.0))) return 0;

  const int nl = g.n_lat(), nm = g.n_lon();
  auto idx = [nm](int i, int j) { return i * nm + j; };
  // v "beats" w at positions p, q: strictly larger, or equal with smaller index.
  auto beats = [&](int sign, int p, double v, int q, double w) { return sign * v > sign * w || (v == w && p < q); };

  int count = 0;
  for (int i = 0; i < nl; ++i) {
    for (int j = 0; j < nm; ++j) {
      const double v = s.at(i, j);
      if (std::abs(v) < threshold_frac * peak) continue;
      const int p = idx(i, j);
      for (int sign : {+1, -1}) {
        bool extremum = true;
        for (int di = -1; di <= 1 && extremum; ++di) {
          const int ii = i + di;
          if (ii < 0 || ii >= nl) continue;
          const bool whole_row = (ii == i) && (i == 0 || i == nl - 1);
          if (whole_row) {
            for (int jj = 0; jj < nm && extremum; ++jj)
              if (jj != j) extremum = beats(sign, p, v, idx(ii, jj), s.at(ii, jj));
          } else {
            for (int dj = -1; dj <= 1 && extremum; ++dj) {
              if (di == 0 && dj == 0) continue;
              const int jj = ((j + dj) % nm + nm) % nm;
              if (ii == i && jj == j) continue;
              extremum = beats(sign, p, v, idx(ii, jj), s.at(ii, jj));
            }
          }
        }
        if (extremum) ++count;
      }
    }
  }
  return count;
}

}  // namespace mh
