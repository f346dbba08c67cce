#include "avfd/rng.hpp"

namespace avfd {

Matrix gaussian_matrix(std::uint64_t seed, Eigen::Index rows,
                       Eigen::Index cols, double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = dist(rng);
    }
  }
  return m;
}

Vector gaussian_vector(std::uint64_t seed, Eigen::Index size, double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = dist(rng);
  return v;
}

}  // namespace avfd
