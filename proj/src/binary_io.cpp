#include "mh/binary_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "mh/errors.hpp"

namespace mh {

namespace {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b.data(), sizeof(T));
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  void magic(const char* m) { os_.write(m, 4); }
  template <class T>
  void put(T v) {
    v = to_little(v);
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void done() {
    os_.flush();
    if (!os_) throw IoError("write failed");
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  Reader(std::istream& is, const char* magic) : is_(is) {
    char m[4];
    is_.read(m, 4);
    if (!is_ || std::memcmp(m, magic, 4) != 0)
      throw FormatError(std::string("bad magic, expected ") + std::string(magic, 4));
    const auto v = get<std::uint32_t>();
    if (v != kFormatVersion) throw FormatError(std::string(magic, 4) + ": unsupported version " + std::to_string(v));
  }
  template <class T>
  T get() {
    T v;
    is_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is_) throw FormatError("truncated file at byte " + std::to_string(offset_));
    offset_ += sizeof(T);
    return to_little(v);
  }
  std::uint32_t dim(const char* what, std::uint32_t max) {
    const auto n = get<std::uint32_t>();
    if (n > max) throw FormatError(std::string("implausible ") + what + " " + std::to_string(n));
    return n;
  }

 private:
  std::istream& is_;
  std::size_t offset_ = 8;
};

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  return is;
}

template <class F>
auto with_path(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

constexpr std::uint32_t kMaxDim = 1u << 16;

}  // namespace

// --- grid ------------------------------------------------------------------

void write_grid(std::ostream& os, const GridField& g) {
  Writer w(os);
  w.magic("MHGD");
  w.put(kFormatVersion);
  w.put(static_cast<std::uint32_t>(g.n_lat()));
  w.put(static_cast<std::uint32_t>(g.n_lon()));
  for (double x : g.latitudes()) w.put(x);
  for (double x : g.longitudes()) w.put(x);
  for (double x : g.values()) w.put(x);
  w.done();
}

GridField read_grid(std::istream& is) {
  Reader r(is, "MHGD");
  const int n_lat = static_cast<int>(r.dim("n_lat", kMaxDim));
  const int n_lon = static_cast<int>(r.dim("n_lon", kMaxDim));
  if (n_lat < 1 || n_lon < 1) throw FormatError("MHGD: empty grid");
  GridField g(GridSpec{n_lat, n_lon});
  const auto lat = g.latitudes();
  for (int i = 0; i < n_lat; ++i)
    if (std::abs(r.get<double>() - lat[static_cast<std::size_t>(i)]) > 1e-12)
      throw FormatError("MHGD: latitudes are not the Gauss-Legendre nodes");
  const auto lon = g.longitudes();
  for (int j = 0; j < n_lon; ++j)
    if (std::abs(r.get<double>() - lon[static_cast<std::size_t>(j)]) > 1e-12)
      throw FormatError("MHGD: longitudes are not equiangular");
  for (double& v : g.values()) v = r.get<double>();
  return g;
}

void write_grid(const std::filesystem::path& path, const GridField& g) {
  with_path(path, [&] {
    auto os = open_out(path);
    write_grid(os, g);
  });
}

GridField read_grid(const std::filesystem::path& path) {
  return with_path(path, [&] {
    auto is = open_in(path);
    return read_grid(is);
  });
}

// --- coefficients ----------------------------------------------------------

void write_sphfield(std::ostream& os, const SphField& f) {
  Writer w(os);
  w.magic("MHSF");
  w.put(kFormatVersion);
  w.put(static_cast<std::uint32_t>(f.max_degree()));
  for (double c : f.coeffs()) w.put(c);
  w.done();
}

SphField read_sphfield(std::istream& is) {
  Reader r(is, "MHSF");
  const int L = static_cast<int>(r.dim("L", kMaxDim));
  SphField f(L);
  for (double& c : f.coeffs()) c = r.get<double>();
  return f;
}

void write_sphfield(const std::filesystem::path& path, const SphField& f) {
  with_path(path, [&] {
    auto os = open_out(path);
    write_sphfield(os, f);
  });
}

SphField read_sphfield(const std::filesystem::path& path) {
  return with_path(path, [&] {
    auto is = open_in(path);
    return read_sphfield(is);
  });
}

// --- basis cache -----------------------------------------------------------

void write_basis(std::ostream& os, const QuantBasis& b) {
  Writer w(os);
  w.magic("MHQB");
  w.put(kFormatVersion);
  const int N = b.size();
  w.put(static_cast<std::uint32_t>(N));
  for (int m = 0; m < N; ++m) {
    const auto& ev = b.eigenvalues(m);
    const auto& U = b.eigenvectors(m);
    for (Eigen::Index k = 0; k < ev.size(); ++k) w.put(ev(k));
    for (Eigen::Index c = 0; c < U.cols(); ++c)
      for (Eigen::Index r = 0; r < U.rows(); ++r) w.put(U(r, c));
  }
  w.done();
}

std::optional<QuantBasis> read_basis(std::istream& is, int expected_N) {
  Reader r(is, "MHQB");
  const int N = static_cast<int>(r.dim("N", kMaxDim));
  if (N != expected_N) return std::nullopt;
  if (N < 2) throw FormatError("MHQB: N must be >= 2");
  std::vector<Eigen::VectorXd> vals;
  std::vector<Eigen::MatrixXd> vecs;
  for (int m = 0; m < N; ++m) {
    const int n = N - m;
    Eigen::VectorXd ev(n);
    for (int k = 0; k < n; ++k) ev(k) = r.get<double>();
    Eigen::MatrixXd U(n, n);
    for (int c = 0; c < n; ++c)
      for (int k = 0; k < n; ++k) U(k, c) = r.get<double>();
    vals.push_back(std::move(ev));
    vecs.push_back(std::move(U));
  }
  try {
    return QuantBasis::from_blocks(N, std::move(vals), std::move(vecs));
  } catch (const std::exception& e) {
    throw FormatError(std::string("MHQB: stored basis failed validation: ") + e.what());
  }
}

void write_basis(const std::filesystem::path& path, const QuantBasis& b) {
  with_path(path, [&] {
    auto os = open_out(path);
    write_basis(os, b);
  });
}

std::optional<QuantBasis> read_basis(const std::filesystem::path& path, int expected_N) {
  return with_path(path, [&] {
    auto is = open_in(path);
    return read_basis(is, expected_N);
  });
}

// --- matrices --------------------------------------------------------------

void write_matrix(std::ostream& os, const QMatrix& W) {
  if (W.rows() != W.cols()) throw std::invalid_argument("write_matrix: matrix must be square");
  Writer w(os);
  w.magic("MHMX");
  w.put(kFormatVersion);
  w.put(static_cast<std::uint32_t>(W.rows()));
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      w.put(W(i, j).real());
      w.put(W(i, j).imag());
    }
  w.done();
}

QMatrix read_matrix(std::istream& is) {
  Reader r(is, "MHMX");
  const auto N = static_cast<Eigen::Index>(r.dim("N", kMaxDim));
  QMatrix W(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      const double re = r.get<double>();
      const double im = r.get<double>();
      W(i, j) = {re, im};
    }
  return W;
}

void write_matrix(const std::filesystem::path& path, const QMatrix& W) {
  with_path(path, [&] {
    auto os = open_out(path);
    write_matrix(os, W);
  });
}

QMatrix read_matrix(const std::filesystem::path& path) {
  return with_path(path, [&] {
    auto is = open_in(path);
    return read_matrix(is);
  });
}

// --- checkpoint sidecar ----------------------------------------------------

void write_checkpoint_header(std::ostream& os, const CheckpointHeader& h) {
  Writer w(os);
  w.magic("MHCK");
  w.put(kFormatVersion);
  w.put(h.time);
  w.put(h.step);
  w.put(h.config_hash);
  w.done();
}

CheckpointHeader read_checkpoint_header(std::istream& is) {
  Reader r(is, "MHCK");
  CheckpointHeader h;
  h.time = r.get<double>();
  h.step = r.get<std::uint64_t>();
  h.config_hash = r.get<std::uint64_t>();
  return h;
}

void write_checkpoint_header(const std::filesystem::path& path, const CheckpointHeader& h) {
  with_path(path, [&] {
    auto os = open_out(path);
    write_checkpoint_header(os, h);
  });
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  return with_path(path, [&] {
    auto is = open_in(path);
    return read_checkpoint_header(is);
  });
}

}  // namespace mh
