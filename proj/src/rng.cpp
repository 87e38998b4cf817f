#include "hetquad/rng.hpp"

namespace hetquad {

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

Eigen::MatrixXd Rng::gaussian(int rows, int cols, double stddev) {
  Eigen::MatrixXd g(rows, cols);
  // Column-major fill so the draw order is fixed regardless of storage tricks.
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = stddev * normal();
  return g;
}

}  // namespace hetquad
