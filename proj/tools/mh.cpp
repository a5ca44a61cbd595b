// mh: command line front end for the matrix hydrodynamics library.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mh/analysis.hpp"
#include "mh/binary_io.hpp"
#include "mh/config.hpp"
#include "mh/errors.hpp"
#include "mh/run.hpp"

namespace fs = std::filesystem;

namespace {

std::optional<fs::path> env_cache_dir() {
  if (const char* d = std::getenv("MATRIXHYDRO_CACHE_DIR"); d && *d) return fs::path(d);
  return std::nullopt;
}

std::optional<fs::path> cache_dir(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  return env_cache_dir();
}

std::string config_dir(const std::string& config_path) {
  return fs::absolute(config_path).parent_path().string();
}

int code(mh::ExitCode c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isospectral matrix hydrodynamics on the sphere"};
  app.require_subcommand(1);

  std::string config_path, out_dir, cache, input;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  int N = 0;
  std::string kind;
  double cluster_tol = 1e-9;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    if (needs_config) c->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--cache", cache, "basis cache directory (default $MATRIXHYDRO_CACHE_DIR)");
    sub->add_option("--seed", seed, "override the initial-data seed");
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };

  auto* basis = app.add_subcommand("basis", "build the quantization basis and store it as an MHQB file");
  basis->add_option("-N,--size", N, "matrix size")->required()->check(CLI::Range(2, 4096));
  basis->add_option("--cache", cache, "output file (default $MATRIXHYDRO_CACHE_DIR/basis_N<N>.mhqb)");
  basis->add_flag("--quiet", quiet, "suppress progress output");

  auto* simulate = app.add_subcommand("simulate", "run the Euler-Zeitlin flow");
  common(simulate, true);
  auto* resume = app.add_subcommand("resume", "continue a run from its latest checkpoint");
  common(resume, true);

  auto* converge = app.add_subcommand("converge", "convergence study (solution, bracket, spectral, power)");
  converge->add_option("kind", kind, "study kind; overrides the config")
      ->check(CLI::IsMember({"solution", "bracket", "spectral", "power"}));
  common(converge, true);

  auto* split = app.add_subcommand("split-diagnose", "canonical splitting of a stored matrix");
  split->add_option("input", input, "MHMX matrix file")->required()->check(CLI::ExistingFile);
  split->add_option("--out", out_dir, "output directory")->required();
  split->add_option("--cluster-tol", cluster_tol, "relative eigenvalue clustering tolerance");
  split->add_option("--cache", cache, "basis cache directory");
  split->add_flag("--quiet", quiet, "suppress progress output");

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues, moments and semicircle distance of a stored matrix");
  spectrum->add_option("input", input, "MHMX matrix file")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--out", out_dir, "output directory")->required();
  spectrum->add_flag("--quiet", quiet, "suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(mh::ExitCode::kConfig);
  }

  auto log = [&](const std::string& msg) {
    if (!quiet) std::cerr << msg << '\n';
  };

  try {
    if (*basis) {
      fs::path file = cache.empty() ? cache_dir("").value_or(fs::current_path()) / ("basis_N" + std::to_string(N) + ".mhqb")
                                    : fs::path(cache);
      if (file.has_parent_path()) fs::create_directories(file.parent_path());
      const mh::QuantBasis b(N);
      mh::write_basis(file, b);
      log("wrote " + file.string() + " (max eigenvalue error " + mh::format_double(b.eigenvalue_error()) + ")");
    } else if (*simulate || *resume) {
      const mh::RunConfig cfg = mh::run_config_from_ini(mh::IniFile::load(config_path), seed);
      const fs::path out = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
      mh::BasisCache bases(cache_dir(cache));
      const mh::RunSummary s = *simulate ? mh::simulate(cfg, out, bases, config_dir(config_path), log)
                                         : mh::resume(cfg, out, bases, log);
      log("done: " + std::to_string(s.steps_done) + " steps, t = " + mh::format_double(s.final_time));
    } else if (*converge) {
      mh::IniFile ini = mh::IniFile::load(config_path);
      if (!kind.empty()) ini.sections["converge"]["kind"] = kind;
      const mh::ConvergeConfig cfg = mh::converge_config_from_ini(ini, seed);
      const fs::path out = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
      mh::BasisCache bases(cache_dir(cache));
      const mh::ConvergenceReport r = mh::run_convergence(cfg, bases);
      mh::write_report(r, out, cfg.hash());
      for (std::size_t k = 0; k < r.N.size(); ++k) {
        char line[96];
        std::snprintf(line, sizeof line, "N = %4d  error = %.6e", r.N[k], r.error[k]);
        log(line);
      }
      log("slope = " + mh::format_double(r.slope));
      if (!r.all_ok()) return code(mh::ExitCode::kNumerical);
    } else if (*split) {
      const mh::QMatrix W = mh::read_matrix(fs::path(input));
      mh::BasisCache bases(cache_dir(cache));
      const auto s = mh::split_diagnose(W, bases.get(static_cast<int>(W.rows())), out_dir, cluster_tol);
      log("||W_r||_E = " + mh::format_double(s.e_r) + ", condensates = " + std::to_string(s.condensates));
    } else if (*spectrum) {
      mh::write_spectrum(mh::read_matrix(fs::path(input)), out_dir);
      log("wrote " + (fs::path(out_dir) / "eigenvalues.csv").string());
    }
  } catch (const mh::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return code(mh::ExitCode::kConfig);
  } catch (const mh::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return code(mh::ExitCode::kIo);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return code(mh::ExitCode::kIo);
  } catch (const mh::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return code(mh::ExitCode::kNumerical);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return code(mh::ExitCode::kConfig);
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return code(mh::ExitCode::kNumerical);
  }
  return code(mh::ExitCode::kOk);
}
