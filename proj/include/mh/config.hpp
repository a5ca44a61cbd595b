#pragma once

// INI-style run configuration. Sections [run], [initial], [diagnostics],
// [numerics] describe a simulation; [converge] describes a convergence study.
// Unknown sections or keys are errors. Validation collects every violated
// constraint before throwing ConfigError.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mh/sphere_fields.hpp"

namespace mh {

struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static IniFile parse(std::string_view text);
  static IniFile load(const std::string& path);
};

struct InitialSpec {
  enum class Kind { kRandom, kFile, kExpression };
  Kind kind = Kind::kRandom;
  int L = 8;
  double gamma = 2.0;
  std::uint64_t seed = 1;
  bool zero_momentum = false;
  std::string path;        // MHSF coefficient file
  std::string expression;  // e.g. "0.5*Y(2,0) - Y(3,1) + 1"
};

/// Sum of c*Y(l,m) terms; a bare number is a constant. Throws ConfigError.
SphField parse_expression(std::string_view expr);

/// Initial vorticity for a spec; `base_dir` resolves relative file paths.
SphField make_initial(const InitialSpec& spec, const std::string& base_dir = "");

struct RunConfig {
  int N = 64;
  double h = 0.01;
  double T = 1.0;
  int output_cadence = 10;
  int checkpoint_cadence = 100;
  std::string output_dir = "run";  // not part of the hash
  InitialSpec initial;
  bool split = true;
  bool grid_dumps = false;
  double cluster_tol = 1e-9;
  double fp_tol = 1e-12;
  int max_iters = 100;
  bool restore_momentum = true;

  long long total_steps() const;
  std::string canonical() const;
  std::uint64_t hash() const;
};

/// Throws ConfigError listing every problem.
RunConfig run_config_from_ini(const IniFile& ini, std::optional<std::uint64_t> seed_override = std::nullopt);

struct ConvergeConfig {
  std::string kind = "bracket";  // solution | bracket | spectral | power
  std::vector<int> N_list{8, 16, 32, 64, 128};
  int N_ref = 256;
  double t = 1.0;
  double h = 0.005;
  int L = 8;
  double gamma = 2.0;
  std::uint64_t seed = 1;
  std::uint64_t seed2 = 2;  // second field for the bracket
  std::string field;        // expression; overrides the random field when set
  std::string norm = "spectral";
  int m = 2;
  int m_max = 6;
  std::string output_dir = "converge";

  std::string canonical() const;
  std::uint64_t hash() const;
};

ConvergeConfig converge_config_from_ini(const IniFile& ini, std::optional<std::uint64_t> seed_override = std::nullopt);

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double x);

}  // namespace mh
