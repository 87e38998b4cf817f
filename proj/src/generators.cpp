#include "hetquad/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hetquad/rng.hpp"

namespace hetquad {

ProblemInstance gen_random_psd(int d, int k, int rank, std::uint64_t seed) {
  if (d < 1 || k < 1 || k > d || rank < 1) throw PreconditionViolation("gen_random_psd: need 1 <= k <= d, rank >= 1");
  Rng rng(seed);
  std::vector<SymMat> mats;
  for (int i = 0; i < k; ++i) {
    const Matrix a = rng.gaussian(d, rank);
    mats.emplace_back(a * a.transpose());
  }
  return normalize_instance(ProblemInstance(std::move(mats)));
}

ProblemInstance gen_cjd(int d, int k, int r, double sigma, std::uint64_t seed, bool literal_index) {
  if (d < 1 || k < 1 || k > d) throw PreconditionViolation("gen_cjd: need 1 <= k <= d");
  if (r < 0 || r > d) throw PreconditionViolation("gen_cjd: need 0 <= r <= d");
  if (sigma < 0) throw PreconditionViolation("gen_cjd: sigma must be >= 0");
  Rng rng(seed);
  // One rank-r diagonal support shared by every level.
  std::vector<int> pos(d);
  std::iota(pos.begin(), pos.end(), 0);
  std::shuffle(pos.begin(), pos.end(), rng.engine());
  auto increment = [&] {
    Vector diag = Vector::Zero(d);
    for (int j = 0; j < r; ++j) diag(pos[j]) = rng.uniform();
    Matrix inc = diag.asDiagonal();
    if (sigma > 0) {
      const Matrix s = rng.gaussian(d, 10 * d, std::sqrt(sigma));
      inc += s * s.transpose() / (10.0 * d);
    }
    return inc;
  };
  std::vector<Matrix> m(k);
  if (!literal_index) {
    m[k - 1] = increment();
    for (int i = k - 2; i >= 0; --i) m[i] = m[i + 1] + increment();
  } else {
    m[0] = increment();
    for (int i = 1; i < k; ++i) m[i] = m[i - 1] + increment();
  }
  std::vector<SymMat> mats;
  for (auto& x : m) mats.emplace_back(x);
  return normalize_instance(ProblemInstance(std::move(mats)));
}

NestedInstance gen_nested(int d, int k, const Matrix& coeffs, std::uint64_t seed) {
  if (d < 1 || k < 1 || k > d) throw PreconditionViolation("gen_nested: need 1 <= k <= d");
  if (coeffs.rows() != k || coeffs.cols() != k) throw DimensionMismatch("gen_nested: coeffs must be k x k");
  for (int j = 0; j < k; ++j)
    if (std::abs(coeffs(j, j)) < 1e-12) throw RankDeficient("gen_nested: vectors are linearly dependent");
  Rng rng(seed);
  Eigen::HouseholderQR<Matrix> qr(rng.gaussian(d, k));
  const Matrix q = qr.householderQ() * Matrix::Identity(d, k);
  const Matrix r = coeffs.triangularView<Eigen::Upper>();
  const Matrix v = q * r;
  std::vector<SymMat> mats;
  Matrix acc = Matrix::Zero(d, d);
  std::vector<Matrix> m(k);
  for (int i = k - 1; i >= 0; --i) {
    acc += v.col(i) * v.col(i).transpose();
    m[i] = acc;
  }
  for (auto& x : m) mats.emplace_back(x);
  return NestedInstance{ProblemInstance(std::move(mats)), v.squaredNorm(), q, v};
}

NestedInstance gen_nested(int d, int k, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {1}));
  Matrix r = Matrix::Zero(k, k);
  for (int j = 0; j < k; ++j)
    for (int l = 0; l <= j; ++l) r(l, j) = (l == j) ? 0.5 + std::abs(rng.normal()) : rng.normal();
  return gen_nested(d, k, r, seed);
}

std::pair<SymMat, SymMat> non_rank_one_fixture() {
  Matrix x1 = Matrix::Zero(4, 4);
  x1(0, 0) = x1(1, 1) = 0.5;
  Matrix x2(4, 4);
  x2 << 3, 1, 3, 1,
        1, 3, 1, 3,
        3, 1, 3, 1,
        1, 3, 1, 3;
  return {SymMat(x1), SymMat(x2 / 12.0)};
}

}  // namespace hetquad
