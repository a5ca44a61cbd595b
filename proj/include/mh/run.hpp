#pragma once

// Run orchestration and text outputs.
//
// Run directory layout:
//   config.ini                 canonical configuration text
//   manifest.txt               config hash and the files written
//   diagnostics.csv            one row per output tick
//   checkpoints/step_<k>.mhmx  W at step k, with step_<k>.mhck sidecar
//   grids/{w,ws,wr}_<k>.mhgd   lift(W), lift(W_s), lift(W_r) (grid_dumps)
// Time is always step * h, so a resumed run reproduces the CSV bit for bit.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mh/analysis.hpp"
#include "mh/config.hpp"
#include "mh/diagnostics.hpp"

namespace mh {

inline constexpr const char* kDiagnosticsHeader = "time,energy,mom_x,mom_y,mom_z,C2,C3,C4,C5,C6,Wr_E,specnorm";

std::string csv_row(const DiagnosticsRecord& r);

using ProgressFn = std::function<void(const std::string&)>;

struct RunSummary {
  long long steps_done = 0;
  double final_time = 0.0;
  std::uint64_t config_hash = 0;
};

/// Fresh run into out_dir (created; existing run files are overwritten).
/// Relative initial-data paths resolve against base_dir.
RunSummary simulate(const RunConfig& cfg, const std::filesystem::path& out_dir, BasisCache& cache,
                    const std::string& base_dir = "", const ProgressFn& progress = {});

/// Continue from the latest checkpoint in out_dir whose sidecar carries
/// cfg's hash. Throws IoError if none exists.
RunSummary resume(const RunConfig& cfg, const std::filesystem::path& out_dir, BasisCache& cache,
                  const ProgressFn& progress = {});

/// Latest matching checkpoint (step, matrix path), or step -1.
std::pair<long long, std::filesystem::path> latest_checkpoint(const std::filesystem::path& out_dir,
                                                              std::uint64_t config_hash);

/// "<kind>.csv" (N,error), optional "<kind>_<extra>.csv", "<kind>_summary.txt".
void write_report(const ConvergenceReport& r, const std::filesystem::path& out_dir, std::uint64_t config_hash);

/// Runs the configured study; throws ConfigError / NumericalError.
ConvergenceReport run_convergence(const ConvergeConfig& cfg, BasisCache& cache);

struct SplitSummary {
  double l2_total = 0.0, l2_s = 0.0, l2_r = 0.0;
  double e_total = 0.0, e_s = 0.0, e_r = 0.0;
  double min_gap = 0.0;
  int clusters = 0;
  int condensates = 0;
};

/// Split W, write lift grids of W, W_s, W_r plus split_summary.txt.
SplitSummary split_diagnose(const QMatrix& W, const QuantBasis& basis, const std::filesystem::path& out_dir,
                            double cluster_tol = 1e-9);

/// eigenvalues.csv (one eigenvalue per line, header "lambda") and
/// spectrum_summary.txt (moments C_1..C_6, semicircle W1).
void write_spectrum(const QMatrix& W, const std::filesystem::path& out_dir);

}  // namespace mh
