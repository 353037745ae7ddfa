#pragma once

#include <Eigen/Dense>
#include <string>

namespace koopman {

// Binary matrix cache: 8-byte magic, kind, n, Q, epsilon, then the matrix
// row-major as 64-bit floats; kind 2 appends the rho and sigma vectors.
enum class MatrixKind : std::uint32_t {
  squared_distance = 0,
  kernel = 1,
  markov_symmetric = 2,
};

struct MatrixBundleFile {
  MatrixKind kind = MatrixKind::squared_distance;
  std::uint64_t Q = 1;
  double epsilon = 0.0;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rho;    // kind == markov_symmetric only
  Eigen::VectorXd sigma;  // kind == markov_symmetric only
};

void write_matrix_bundle(const std::string& path, const MatrixBundleFile& f);
MatrixBundleFile read_matrix_bundle(const std::string& path);

// FNV-1a over raw bytes; used for content-addressed cache keys.
std::uint64_t fnv1a(const void* data, std::size_t n_bytes,
                    std::uint64_t h = 1469598103934665603ULL);

}  // namespace koopman
