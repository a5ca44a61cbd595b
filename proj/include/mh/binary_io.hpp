#pragma once

// Little-endian binary formats. Each file starts with a 4-byte magic and a
// u32 version (currently 1).
//   MHGD  grid dump:   n_lat u32, n_lon u32, latitudes f64[n_lat],
//                      longitudes f64[n_lon], values f64[n_lat*n_lon] row-major
//   MHSF  coefficients: L u32, (L+1)^2 f64 in (l, m) lexicographic order
//   MHQB  basis cache: N u32, for m = 0..N-1: eigenvalues f64[N-m],
//                      eigenvectors f64[(N-m)^2] column-major
//   MHMX  matrix:      N u32, N^2 (re, im) f64 pairs row-major
//   MHCK  checkpoint sidecar: time f64, step u64, config hash u64
// Readers throw FormatError on a wrong magic, unknown version, inconsistent
// sizes or truncation; IoError when the file cannot be opened.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "mh/quantization.hpp"
#include "mh/sphere_fields.hpp"

namespace mh {

inline constexpr std::uint32_t kFormatVersion = 1;

void write_grid(std::ostream& os, const GridField& g);
GridField read_grid(std::istream& is);
void write_grid(const std::filesystem::path& path, const GridField& g);
GridField read_grid(const std::filesystem::path& path);

void write_sphfield(std::ostream& os, const SphField& f);
SphField read_sphfield(std::istream& is);
void write_sphfield(const std::filesystem::path& path, const SphField& f);
SphField read_sphfield(const std::filesystem::path& path);

void write_basis(std::ostream& os, const QuantBasis& b);
/// Returns nullopt if the stored N differs from expected_N (stale cache).
std::optional<QuantBasis> read_basis(std::istream& is, int expected_N);
void write_basis(const std::filesystem::path& path, const QuantBasis& b);
std::optional<QuantBasis> read_basis(const std::filesystem::path& path, int expected_N);

void write_matrix(std::ostream& os, const QMatrix& W);
QMatrix read_matrix(std::istream& is);
void write_matrix(const std::filesystem::path& path, const QMatrix& W);
QMatrix read_matrix(const std::filesystem::path& path);

struct CheckpointHeader {
  double time = 0.0;
  std::uint64_t step = 0;
  std::uint64_t config_hash = 0;
  bool operator==(const CheckpointHeader&) const = default;
};

void write_checkpoint_header(std::ostream& os, const CheckpointHeader& h);
CheckpointHeader read_checkpoint_header(std::istream& is);
void write_checkpoint_header(const std::filesystem::path& path, const CheckpointHeader& h);
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

}  // namespace mh
