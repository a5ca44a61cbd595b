#pragma once

// Convergence harnesses and statistical diagnostics.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mh/dynamics.hpp"
#include "mh/quantization.hpp"
#include "mh/sphere_fields.hpp"

namespace mh {

/// Builds each QuantBasis once. With a directory, bases are also loaded from
/// and stored to "basis_N<N>.mhqb" there.
class BasisCache {
 public:
  BasisCache() = default;
  explicit BasisCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}
  const QuantBasis& get(int N);

 private:
  std::optional<std::filesystem::path> dir_;
  std::map<int, std::unique_ptr<QuantBasis>> bases_;
};

/// project_{N'}(lift_N(W)); throws std::invalid_argument if N' > N.
QMatrix resolution_project(const QMatrix& W, const QuantBasis& from, const QuantBasis& to);

struct ConvergenceReport {
  std::string kind;
  std::string norm;
  std::vector<int> N;
  std::vector<double> error;  // NaN where the run for that N failed
  std::vector<std::string> failure;  // empty string for success
  std::string extra_name;     // optional second column
  std::vector<double> extra;
  double slope = 0.0;
  double t = 0.0;
  std::uint64_t data_hash = 0;

  bool all_ok() const;
};

/// Least-squares slope of log(error) against log(N), first point dropped
/// when at least three points are available. Non-finite or non-positive
/// errors are skipped. NaN if fewer than two usable points remain.
double fit_loglog_slope(const std::vector<int>& N, const std::vector<double>& error);

/// FNV-1a over the coefficient bytes.
std::uint64_t field_hash(const SphField& f);

/// Integrate dW/dt = -(1/hbar)[P,W] from T_N omega0 for round(t/h) steps.
QMatrix evolve(const SphField& omega0, double t, double h, const QuantBasis& basis, const StepOptions& opts = {});

/// L2 error of lift(W_N(t)) against a reference run at N_ref.
ConvergenceReport solution_convergence(const SphField& omega0, double t, const std::vector<int>& N_list, int N_ref,
                                       double h, BasisCache& cache, const StepOptions& opts = {});

enum class BracketNorm { kSpectral, kL2 };

/// || (1/hbar)[T omega, T psi] - T{omega, psi} || per N.
ConvergenceReport bracket_convergence(const SphField& omega, const SphField& psi, const std::vector<int>& N_list,
                                      BracketNorm norm, BasisCache& cache);

/// (1/4pi) int omega^m, m = 1..m_max, by exact quadrature.
std::vector<double> continuum_moments(const SphField& omega, int m_max);

/// Per N: max_m |C^N_m(T_N omega) - C_m(omega)|; extra column is the
/// Wasserstein-1 distance between the spectral measure and the grid
/// level-set histogram of omega.
ConvergenceReport spectral_measure_convergence(const SphField& omega, const std::vector<int>& N_list, int m_max,
                                               BasisCache& cache, int histogram_bins = 200);

/// || (-i T omega)^m - (-i) T(omega^m) ||_2 per N (Hermitian representatives).
ConvergenceReport power_convergence(const SphField& omega, int m, const std::vector<int>& N_list, BasisCache& cache);

/// W1 between the atomic measure (sorted atoms, equal weights) and the
/// semicircle of equal second moment, radius 2 sqrt(C_2). A zero second
/// moment compares against the point mass at 0.
double semicircle_distance(const SpectralMeasure& mu);

/// W1 between equal-weight atoms and a histogram with uniform density per bin.
double wasserstein1(const std::vector<double>& sorted_atoms, const LevelSetHistogram& hist);

/// Smooth to degree <= smoothing_degree, remove the mean, and count strict
/// local extrema (8-neighbourhood, periodic in longitude, each polar row
/// treated as mutually adjacent, ties broken by index) with
/// |value| >= threshold_frac * max|value|.
int count_condensates(const GridField& g, int smoothing_degree, double threshold_frac);

}  // namespace mh
