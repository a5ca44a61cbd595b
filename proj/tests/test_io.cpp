#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mh/binary_io.hpp"
#include "mh/config.hpp"
#include "mh/errors.hpp"
#include "mh/run.hpp"

using namespace mh;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("mh_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kSmallRun = R"(
[run]
N = 8
h = 0.02
T = 0.4
output_cadence = 2
checkpoint_cadence = 5

[initial]
kind = random
L = 7
seed = 3

[diagnostics]
grid_dumps = true
)";

}  // namespace

TEST_SUITE("cli_io") {
  TEST_CASE("grid dump layout and round trip") {
    const GridField g = synthesize(random_smooth_field(5, 1.0, 1), GridSpec{6, 11});
    std::stringstream ss;
    write_grid(ss, g);
    const std::string bytes = ss.str();
    CHECK(bytes.size() == 4 + 4 + 8 + 8 * (6 + 11 + 66));
    CHECK(bytes.substr(0, 4) == "MHGD");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // little-endian version
    CHECK(static_cast<unsigned char>(bytes[8]) == 6);
    const GridField r = read_grid(ss);
    CHECK(std::equal(r.values().begin(), r.values().end(), g.values().begin()));
    std::stringstream again;
    write_grid(again, r);
    CHECK(again.str() == bytes);
  }

  TEST_CASE("coefficient, matrix and checkpoint round trips") {
    const SphField f = random_smooth_field(9, 1.0, 2);
    std::stringstream s1;
    write_sphfield(s1, f);
    CHECK(s1.str().size() == 12 + 8 * 100);
    CHECK(read_sphfield(s1) == f);

    const QuantBasis b(7);
    const QMatrix W = project(f, b);
    std::stringstream s2;
    write_matrix(s2, W);
    CHECK(s2.str().size() == 12 + 16 * 49);
    CHECK((read_matrix(s2) - W).norm() == 0.0);

    const CheckpointHeader h{1.25, 125, 0xdeadbeefcafef00dull};
    std::stringstream s3;
    write_checkpoint_header(s3, h);
    CHECK(read_checkpoint_header(s3) == h);

    std::stringstream in(s2.str()), again;
    write_matrix(again, read_matrix(in));
    CHECK(again.str() == s2.str());
  }

  TEST_CASE("basis cache file") {
    const QuantBasis b(64);
    std::stringstream s1, s2;
    write_basis(s1, b);
    write_basis(s2, QuantBasis(64));
    CHECK(s1.str() == s2.str());  // deterministic
    auto loaded = read_basis(s1, 64);
    REQUIRE(loaded.has_value());
    CHECK(loaded->eigenvalue_error() < 1e-8);
    CHECK((matrix_harmonic(10, -4, *loaded) - matrix_harmonic(10, -4, b)).norm() == 0.0);
    std::stringstream s3(s2.str());
    CHECK_FALSE(read_basis(s3, 32).has_value());  // stale cache

    std::string bad = s2.str();
    bad[27] ^= 0x01;  // exponent byte of the second eigenvalue
    std::stringstream s4(bad);
    CHECK_THROWS_AS(read_basis(s4, 64), FormatError);
  }

  TEST_CASE("format errors") {
    std::stringstream bad_magic("MHXX\x01\0\0\0");
    CHECK_THROWS_AS(read_matrix(bad_magic), FormatError);
    std::stringstream wrong_kind;
    write_sphfield(wrong_kind, harmonic(1, 0));
    CHECK_THROWS_AS(read_matrix(wrong_kind), FormatError);
    std::stringstream full;
    write_matrix(full, QMatrix::Identity(4, 4));
    std::stringstream truncated(full.str().substr(0, 40));
    CHECK_THROWS_AS(read_matrix(truncated), FormatError);
    std::string v2 = full.str();
    v2[4] = 2;
    std::stringstream version(v2);
    CHECK_THROWS_AS(read_matrix(version), FormatError);
    CHECK_THROWS_AS(read_matrix(fs::path("/nonexistent/dir/x.mhmx")), IoError);
  }

  TEST_CASE("ini parsing and validation") {
    const IniFile ini = IniFile::parse("# comment\n[run]\nN = 16 ; trailing\nh=0.1\n\n[initial]\nkind = random\n");
    CHECK(ini.sections.at("run").at("N") == "16");
    CHECK(ini.sections.at("run").at("h") == "0.1");
    CHECK_THROWS_AS(IniFile::parse("N = 3\n"), ConfigError);
    CHECK_THROWS_AS(IniFile::parse("[run]\nN = 3\nN = 4\n"), ConfigError);

    try {
      run_config_from_ini(IniFile::parse("[run]\nN = 1\nh = 0\nT = -1\ncolour = red\n[extra]\n"));
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("N must be >= 2") != std::string::npos);
      CHECK(msg.find("h must be > 0") != std::string::npos);
      CHECK(msg.find("T must be > 0") != std::string::npos);
      CHECK(msg.find("unknown key 'colour'") != std::string::npos);
      CHECK(msg.find("unknown section [extra]") != std::string::npos);
    }
    CHECK_THROWS_AS(run_config_from_ini(IniFile::parse("[run]\nN = 8\nh = 0.03\nT = 0.1\n")), ConfigError);
    CHECK_THROWS_AS(run_config_from_ini(IniFile::parse("[run]\nN = eight\n")), ConfigError);
  }

  TEST_CASE("canonical text and hash") {
    const RunConfig a = run_config_from_ini(IniFile::parse(kSmallRun));
    const RunConfig b = run_config_from_ini(IniFile::parse(a.canonical()));
    CHECK(a.canonical() == b.canonical());
    CHECK(a.hash() == b.hash());
    const RunConfig c = run_config_from_ini(IniFile::parse(kSmallRun), 99);
    CHECK(c.initial.seed == 99);
    CHECK(c.hash() != a.hash());
    RunConfig d = a;
    d.output_dir = "elsewhere";
    CHECK(d.hash() == a.hash());
    CHECK(a.total_steps() == 20);
  }

  TEST_CASE("expressions") {
    const SphField f = parse_expression("0.5*Y(2,0) - Y(3,-1) + 2");
    CHECK(f.max_degree() == 3);
    CHECK(f(2, 0) == 0.5);
    CHECK(f(3, -1) == -1.0);
    CHECK(f(0, 0) == doctest::Approx(2 * std::sqrt(kSphereArea)));
    CHECK_THROWS_AS(parse_expression("Y(2,3)"), ConfigError);
    CHECK_THROWS_AS(parse_expression("Y(2 0)"), ConfigError);
    CHECK_THROWS_AS(parse_expression(""), ConfigError);
  }

  TEST_CASE("converge config") {
    const ConvergeConfig c = converge_config_from_ini(IniFile::parse("[converge]\nkind = power\nN_list = 8, 16\nm = 3\n"));
    CHECK(c.N_list == std::vector<int>{8, 16});
    CHECK(c.m == 3);
    CHECK_THROWS_AS(converge_config_from_ini(IniFile::parse("[converge]\nN_list =\n")), ConfigError);
    CHECK_THROWS_AS(converge_config_from_ini(IniFile::parse("[converge]\nN_list = 16,8\n")), ConfigError);
    CHECK_THROWS_AS(converge_config_from_ini(IniFile::parse("[converge]\nkind = magic\n")), ConfigError);
  }

  TEST_CASE("simulate writes a complete run and resume is bit-exact") {
    TempDir tmp;
    const RunConfig cfg = run_config_from_ini(IniFile::parse(kSmallRun));
    BasisCache cache;
    const RunSummary s = simulate(cfg, tmp.path / "a", cache);
    CHECK(s.steps_done == 20);
    const std::string csv = slurp(tmp.path / "a" / "diagnostics.csv");
    CHECK(csv.rfind(std::string(kDiagnosticsHeader) + "\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 11);
    CHECK(fs::exists(tmp.path / "a" / "checkpoints" / "step_0000000020.mhmx"));
    CHECK(fs::exists(tmp.path / "a" / "grids" / "ws_step_0000000010.mhgd"));
    CHECK(slurp(tmp.path / "a" / "manifest.txt").find("config_hash") == 0);

    // drop the later checkpoints, resume, compare
    fs::copy(tmp.path / "a", tmp.path / "b", fs::copy_options::recursive);
    for (int k : {15, 20}) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%010d", k);
      fs::remove(tmp.path / "b" / "checkpoints" / (std::string(name) + ".mhck"));
    }
    CHECK(latest_checkpoint(tmp.path / "b", cfg.hash()).first == 10);
    resume(cfg, tmp.path / "b", cache);
    CHECK(slurp(tmp.path / "b" / "diagnostics.csv") == csv);
    CHECK(slurp(tmp.path / "b" / "checkpoints" / "step_0000000020.mhmx") ==
          slurp(tmp.path / "a" / "checkpoints" / "step_0000000020.mhmx"));

    // a different configuration does not pick these checkpoints up
    const RunConfig other = run_config_from_ini(IniFile::parse(kSmallRun), 4);
    CHECK_THROWS_AS(resume(other, tmp.path / "b", cache), IoError);

    // reproducible byte for byte
    simulate(cfg, tmp.path / "c", cache);
    CHECK(slurp(tmp.path / "c" / "diagnostics.csv") == csv);
  }

  TEST_CASE("zonal run has constant diagnostics") {
    TempDir tmp;
    const RunConfig cfg = run_config_from_ini(IniFile::parse(
        "[run]\nN = 12\nh = 0.05\nT = 1\noutput_cadence = 4\n[initial]\nkind = expression\n"
        "expression = Y(1,0) + 0.5*Y(3,0) - 0.2*Y(6,0)\n"));
    BasisCache cache;
    simulate(cfg, tmp.path, cache);
    std::ifstream in(tmp.path / "diagnostics.csv");
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      std::vector<double> v;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
      rows.push_back(v);
    }
    REQUIRE(rows.size() == 6);
    for (const auto& r : rows)
      for (std::size_t c = 1; c < r.size(); ++c)
        CHECK(r[c] == doctest::Approx(rows[0][c]).epsilon(1e-13).scale(1e-3));
  }

  TEST_CASE("reports") {
    TempDir tmp;
    ConvergenceReport r;
    r.kind = "power";
    r.norm = "spectral";
    r.N = {8, 16};
    r.error = {0.5, NAN};
    r.failure = {"", "step failed"};
    r.slope = -1.0;
    write_report(r, tmp.path, 42);
    CHECK(slurp(tmp.path / "power.csv") == "N,error\n8,0.5\n16,nan\n");
    const std::string s = slurp(tmp.path / "power_summary.txt");
    CHECK(s.find("config_hash = 000000000000002a") != std::string::npos);
    CHECK(s.find("failure.N16 = step failed") != std::string::npos);
    CHECK_FALSE(r.all_ok());
  }

  TEST_CASE("split diagnose and spectrum outputs") {
    TempDir tmp;
    const QuantBasis b(10);
    const QMatrix W = project(random_smooth_field(9, 1.0, 6), b);
    const SplitSummary s = split_diagnose(W, b, tmp.path);
    CHECK(s.e_s * s.e_s == doctest::Approx(s.e_total * s.e_total + s.e_r * s.e_r));
    CHECK(read_grid(tmp.path / "ws.mhgd").n_lat() == 10);
    write_spectrum(W, tmp.path);
    const std::string csv = slurp(tmp.path / "eigenvalues.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
    CHECK(slurp(tmp.path / "spectrum_summary.txt").find("semicircle_w1") != std::string::npos);
  }
}
