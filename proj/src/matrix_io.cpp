#include "koopman/matrix_io.hpp"

#include <cstring>
#include <fstream>

#include "koopman/common.hpp"

namespace koopman {

namespace {

constexpr char kMagic[8] = {'K', 'O', 'O', 'P', 'M', 'T', 'X', '1'};

void write_raw(std::ofstream& out, const void* p, std::size_t bytes) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
}

void read_raw(std::ifstream& in, void* p, std::size_t bytes,
              const std::string& path) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("truncated matrix file: " + path);
}

}  // namespace

std::uint64_t fnv1a(const void* data, std::size_t n_bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n_bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

void write_matrix_bundle(const std::string& path, const MatrixBundleFile& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const std::uint64_t n = static_cast<std::uint64_t>(f.matrix.rows());
  if (f.matrix.cols() != f.matrix.rows())
    throw ConfigError("write_matrix_bundle: matrix must be square");
  const std::uint32_t kind = static_cast<std::uint32_t>(f.kind);
  const std::uint32_t pad = 0;
  write_raw(out, kMagic, sizeof kMagic);
  write_raw(out, &kind, sizeof kind);
  write_raw(out, &pad, sizeof pad);
  write_raw(out, &n, sizeof n);
  write_raw(out, &f.Q, sizeof f.Q);
  write_raw(out, &f.epsilon, sizeof f.epsilon);
  // Row-major payload; the in-memory layout is column-major but the matrix
  // is symmetric, so the bytes coincide.
  write_raw(out, f.matrix.data(), sizeof(double) * n * n);
  if (f.kind == MatrixKind::markov_symmetric) {
    if (static_cast<std::uint64_t>(f.rho.size()) != n ||
        static_cast<std::uint64_t>(f.sigma.size()) != n)
      throw ConfigError("write_matrix_bundle: rho/sigma size mismatch");
    write_raw(out, f.rho.data(), sizeof(double) * n);
    write_raw(out, f.sigma.data(), sizeof(double) * n);
  }
  if (!out) throw IoError("write failed for " + path);
}

MatrixBundleFile read_matrix_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[8];
  read_raw(in, magic, sizeof magic, path);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IoError("bad magic in " + path);
  std::uint32_t kind = 0, pad = 0;
  std::uint64_t n = 0;
  MatrixBundleFile f;
  read_raw(in, &kind, sizeof kind, path);
  read_raw(in, &pad, sizeof pad, path);
  read_raw(in, &n, sizeof n, path);
  read_raw(in, &f.Q, sizeof f.Q, path);
  read_raw(in, &f.epsilon, sizeof f.epsilon, path);
  if (kind > 2) throw IoError("unknown matrix kind in " + path);
  f.kind = static_cast<MatrixKind>(kind);
  f.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  read_raw(in, f.matrix.data(), sizeof(double) * n * n, path);
  if (f.kind == MatrixKind::markov_symmetric) {
    f.rho.resize(static_cast<Eigen::Index>(n));
    f.sigma.resize(static_cast<Eigen::Index>(n));
    read_raw(in, f.rho.data(), sizeof(double) * n, path);
    read_raw(in, f.sigma.data(), sizeof(double) * n, path);
  }
  return f;
}

}  // namespace koopman
