#include "mh/run.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mh/binary_io.hpp"
#include "mh/dynamics.hpp"
#include "mh/errors.hpp"
#include "mh/splitting.hpp"

namespace fs = std::filesystem;

namespace mh {

namespace {

std::string hex64(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
  return buf;
}

std::string step_name(long long k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%010lld", k);
  return buf;
}

std::ofstream open_text(const fs::path& p, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream os(p, std::ios::out | mode);
  if (!os) throw IoError("cannot open for writing: " + p.string());
  return os;
}

void write_text(const fs::path& p, const std::string& text) {
  auto os = open_text(p);
  os << text;
  if (!os) throw IoError("write failed: " + p.string());
}

// Write via a temporary so a crash never leaves a half-written file behind.
template <class F>
void write_atomic(const fs::path& p, F&& write) {
  fs::path tmp = p;
  tmp += ".tmp";
  write(tmp);
  fs::rename(tmp, p);
}

void write_manifest(const fs::path& out_dir, std::uint64_t hash) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(out_dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), out_dir).generic_string();
    if (rel != "manifest.txt" && rel.find(".tmp") == std::string::npos) files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  std::string text = "config_hash = " + hex64(hash) + "\n";
  for (const auto& f : files) text += "file = " + f + "\n";
  write_text(out_dir / "manifest.txt", text);
}

StepOptions step_options(const RunConfig& cfg) {
  StepOptions o;
  o.tol = cfg.fp_tol;
  o.max_iters = cfg.max_iters;
  o.restore_momentum = cfg.restore_momentum;
  return o;
}

void dump_grids(const QMatrix& W, const QuantBasis& basis, double cluster_tol, const fs::path& dir,
                const std::string& suffix) {
  const GridSpec spec = GridSpec::for_degree(basis.size() - 1);
  const SplitState s = canonical_split(W, basis, cluster_tol);
  write_grid(dir / ("w_" + suffix + ".mhgd"), synthesize(lift(W, basis), spec));
  write_grid(dir / ("ws_" + suffix + ".mhgd"), synthesize(lift(s.W_s, basis), spec));
  write_grid(dir / ("wr_" + suffix + ".mhgd"), synthesize(lift(s.W_r, basis), spec));
}

void checkpoint(const RunConfig& cfg, const QuantBasis& basis, const QMatrix& W, long long k, const fs::path& out_dir) {
  const fs::path base = out_dir / "checkpoints" / step_name(k);
  write_atomic(fs::path(base).replace_extension(".mhmx"), [&](const fs::path& p) { write_matrix(p, W); });
  const CheckpointHeader h{static_cast<double>(k) * cfg.h, static_cast<std::uint64_t>(k), cfg.hash()};
  write_atomic(fs::path(base).replace_extension(".mhck"), [&](const fs::path& p) { write_checkpoint_header(p, h); });
  if (cfg.grid_dumps) dump_grids(W, basis, cfg.cluster_tol, out_dir / "grids", step_name(k));
}

RunSummary run_steps(const RunConfig& cfg, const QuantBasis& basis, QMatrix W, long long start, const fs::path& out_dir,
                     std::ofstream& csv, const ProgressFn& progress) {
  const long long total = cfg.total_steps();
  const StepOptions opts = step_options(cfg);
  const DiagnosticsOptions dopt{cfg.split, cfg.cluster_tol};
  RunSummary sum;
  sum.config_hash = cfg.hash();
  sum.steps_done = start;
  sum.final_time = static_cast<double>(start) * cfg.h;
  try {
    for (long long k = start + 1; k <= total; ++k) {
      W = advance(W, cfg.h, basis, opts);
      const double t = static_cast<double>(k) * cfg.h;
      if (k % cfg.output_cadence == 0 || k == total) {
        csv << csv_row(diagnose(W, t, basis, dopt)) << '\n';
        csv.flush();
        if (!csv) throw IoError("write failed: diagnostics.csv");
      }
      if (k % cfg.checkpoint_cadence == 0 || k == total) {
        checkpoint(cfg, basis, W, k, out_dir);
        if (progress) progress("step " + std::to_string(k) + "/" + std::to_string(total) + " t = " + format_double(t));
      }
      sum.steps_done = k;
      sum.final_time = t;
    }
  } catch (...) {
    csv.flush();
    write_manifest(out_dir, cfg.hash());
    throw;
  }
  write_manifest(out_dir, cfg.hash());
  return sum;
}

}  // namespace

std::string csv_row(const DiagnosticsRecord& r) {
  std::string s = format_double(r.time);
  auto add = [&s](double x) {
    s += ',';
    s += format_double(x);
  };
  add(r.energy);
  for (double m : r.momentum) add(m);
  for (double c : r.casimirs) add(c);
  add(r.residual_energy_norm);
  add(r.spectral_norm);
  return s;
}

RunSummary simulate(const RunConfig& cfg, const fs::path& out_dir, BasisCache& cache, const std::string& base_dir,
                    const ProgressFn& progress) {
  fs::create_directories(out_dir / "checkpoints");
  if (cfg.grid_dumps) fs::create_directories(out_dir / "grids");
  for (const auto& e : fs::directory_iterator(out_dir / "checkpoints")) fs::remove(e.path());
  write_text(out_dir / "config.ini", cfg.canonical());

  const QuantBasis& basis = cache.get(cfg.N);
  const QMatrix W0 = project(make_initial(cfg.initial, base_dir), basis);

  auto csv = open_text(out_dir / "diagnostics.csv");
  csv << kDiagnosticsHeader << '\n';
  csv << csv_row(diagnose(W0, 0.0, basis, {cfg.split, cfg.cluster_tol})) << '\n';
  checkpoint(cfg, basis, W0, 0, out_dir);
  return run_steps(cfg, basis, W0, 0, out_dir, csv, progress);
}

std::pair<long long, fs::path> latest_checkpoint(const fs::path& out_dir, std::uint64_t config_hash) {
  long long best = -1;
  fs::path best_path;
  const fs::path dir = out_dir / "checkpoints";
  if (!fs::is_directory(dir)) return {best, best_path};
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".mhck") continue;
    CheckpointHeader h;
    try {
      h = read_checkpoint_header(e.path());
    } catch (const IoError&) {
      continue;
    }
    const fs::path mat = fs::path(e.path()).replace_extension(".mhmx");
    if (h.config_hash != config_hash || !fs::exists(mat)) continue;
    if (static_cast<long long>(h.step) > best) {
      best = static_cast<long long>(h.step);
      best_path = mat;
    }
  }
  return {best, best_path};
}

RunSummary resume(const RunConfig& cfg, const fs::path& out_dir, BasisCache& cache, const ProgressFn& progress) {
  const auto [step, path] = latest_checkpoint(out_dir, cfg.hash());
  if (step < 0) throw IoError("no checkpoint matching this configuration in " + out_dir.string());
  const QuantBasis& basis = cache.get(cfg.N);
  const QMatrix W = read_matrix(path);
  if (W.rows() != cfg.N) throw FormatError(path.string() + ": matrix size does not match N");

  // Keep the diagnostics rows up to the checkpoint.
  const fs::path csv_path = out_dir / "diagnostics.csv";
  std::vector<std::string> keep;
  {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open " + csv_path.string());
    std::string line;
    std::getline(in, line);
    if (line != kDiagnosticsHeader) throw FormatError(csv_path.string() + ": unexpected header");
    while (std::getline(in, line)) {
      const double t = std::strtod(line.c_str(), nullptr);
      if (std::llround(t / cfg.h) <= step) keep.push_back(line);
    }
  }
  auto csv = open_text(csv_path);
  csv << kDiagnosticsHeader << '\n';
  for (const auto& l : keep) csv << l << '\n';
  return run_steps(cfg, basis, W, step, out_dir, csv, progress);
}

void write_report(const ConvergenceReport& r, const fs::path& out_dir, std::uint64_t config_hash) {
  fs::create_directories(out_dir);
  std::string csv = "N,error\n";
  for (std::size_t k = 0; k < r.N.size(); ++k) csv += std::to_string(r.N[k]) + "," + format_double(r.error[k]) + "\n";
  write_text(out_dir / (r.kind + ".csv"), csv);
  if (!r.extra_name.empty()) {
    std::string x = "N," + r.extra_name + "\n";
    for (std::size_t k = 0; k < r.N.size(); ++k) x += std::to_string(r.N[k]) + "," + format_double(r.extra[k]) + "\n";
    write_text(out_dir / (r.kind + "_" + r.extra_name + ".csv"), x);
  }
  std::string s;
  s += "kind = " + r.kind + "\n";
  s += "norm = " + r.norm + "\n";
  s += "t = " + format_double(r.t) + "\n";
  s += "slope = " + format_double(r.slope) + "\n";
  s += "data_hash = " + hex64(r.data_hash) + "\n";
  s += "config_hash = " + hex64(config_hash) + "\n";
  for (std::size_t k = 0; k < r.N.size(); ++k)
    if (!r.failure[k].empty()) s += "failure.N" + std::to_string(r.N[k]) + " = " + r.failure[k] + "\n";
  write_text(out_dir / (r.kind + "_summary.txt"), s);
}

ConvergenceReport run_convergence(const ConvergeConfig& cfg, BasisCache& cache) {
  const SphField omega = cfg.field.empty() ? random_smooth_field(cfg.L, cfg.gamma, cfg.seed) : parse_expression(cfg.field);
  if (cfg.kind == "solution") return solution_convergence(omega, cfg.t, cfg.N_list, cfg.N_ref, cfg.h, cache);
  if (cfg.kind == "bracket") {
    const SphField psi = random_smooth_field(cfg.L, cfg.gamma, cfg.seed2);
    return bracket_convergence(omega, psi, cfg.N_list, cfg.norm == "L2" ? BracketNorm::kL2 : BracketNorm::kSpectral,
                               cache);
  }
  if (cfg.kind == "spectral") return spectral_measure_convergence(omega, cfg.N_list, cfg.m_max, cache);
  if (cfg.kind == "power") return power_convergence(omega, cfg.m, cfg.N_list, cache);
  throw ConfigError("unknown convergence kind '" + cfg.kind + "'");
}

SplitSummary split_diagnose(const QMatrix& W, const QuantBasis& basis, const fs::path& out_dir, double cluster_tol) {
  fs::create_directories(out_dir);
  const SplitState s = canonical_split(W, basis, cluster_tol);
  const GridSpec spec = GridSpec::for_degree(basis.size() - 1);
  const GridField gs = synthesize(lift(s.W_s, basis), spec);
  write_grid(out_dir / "w.mhgd", synthesize(lift(W, basis), spec));
  write_grid(out_dir / "ws.mhgd", gs);
  write_grid(out_dir / "wr.mhgd", synthesize(lift(s.W_r, basis), spec));

  SplitSummary r;
  r.l2_total = matrix_l2_norm(W);
  r.l2_s = matrix_l2_norm(s.W_s);
  r.l2_r = matrix_l2_norm(s.W_r);
  r.e_total = energy_norm(W, basis);
  r.e_s = energy_norm(s.W_s, basis);
  r.e_r = energy_norm(s.W_r, basis);
  r.min_gap = s.eig.min_gap();
  r.clusters = static_cast<int>(s.eig.cluster_count());
  r.condensates = count_condensates(gs, 8, 0.25);

  std::string t;
  t += "N = " + std::to_string(basis.size()) + "\n";
  t += "l2_W = " + format_double(r.l2_total) + "\n";
  t += "l2_Ws = " + format_double(r.l2_s) + "\n";
  t += "l2_Wr = " + format_double(r.l2_r) + "\n";
  t += "energy_norm_W = " + format_double(r.e_total) + "\n";
  t += "energy_norm_Ws = " + format_double(r.e_s) + "\n";
  t += "energy_norm_Wr = " + format_double(r.e_r) + "\n";
  t += "clusters = " + std::to_string(r.clusters) + "\n";
  t += "min_gap = " + format_double(r.min_gap) + "\n";
  t += "condensates = " + std::to_string(r.condensates) + "\n";
  write_text(out_dir / "split_summary.txt", t);
  return r;
}

void write_spectrum(const QMatrix& W, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const SpectralMeasure mu = spectral_measure(W);
  std::string csv = "lambda\n";
  for (double x : mu.eigenvalues) csv += format_double(x) + "\n";
  write_text(out_dir / "eigenvalues.csv", csv);
  std::string t = "N = " + std::to_string(mu.size()) + "\n";
  const auto c = casimirs(mu, 6);
  for (int m = 1; m <= 6; ++m) t += "C" + std::to_string(m) + " = " + format_double(c[static_cast<std::size_t>(m - 1)]) + "\n";
  t += "semicircle_w1 = " + format_double(semicircle_distance(mu)) + "\n";
  write_text(out_dir / "spectrum_summary.txt", t);
}

}  // namespace mh
