#pragma once

// Independent helpers for tests: std::mt19937_64 draws (deliberately not
// the library generator) and a Gaussian-elimination rank oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "dyclu/numerics.hpp"

namespace dyclu::testing {

inline Matrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = z(gen);
  }
  return m;
}

/// rows × cols matrix of exact rank `rank` (almost surely).
inline Matrix random_low_rank(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols,
                              Eigen::Index rank) {
  if (rank == 0) return Matrix::Zero(rows, cols);
  return random_matrix(gen, rows, rank) * random_matrix(gen, rank, cols);
}

inline Vector random_unit(std::mt19937_64& gen, Eigen::Index d) {
  Vector v = random_matrix(gen, d, 1).col(0);
  return v / v.norm();
}

/// Row echelon form with partial pivoting; pivots below tol·max|entry| are
/// treated as zero.
inline std::size_t elimination_rank(Matrix m, double tol = 1e-9) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  std::size_t rank = 0;
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < m.cols() && row < m.rows(); ++col) {
    Eigen::Index pivot = row;
    for (Eigen::Index r = row + 1; r < m.rows(); ++r) {
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    }
    if (std::abs(m(pivot, col)) <= tol * scale) continue;
    m.row(row).swap(m.row(pivot));
    for (Eigen::Index r = row + 1; r < m.rows(); ++r) {
      m.row(r) -= (m(r, col) / m(row, col)) * m.row(row);
    }
    ++row;
    ++rank;
  }
  return rank;
}

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("dyclu-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto file = path_ / name;
    std::ofstream(file, std::ios::binary) << text;
    return file;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace dyclu::testing
