#pragma once

#include <cstdint>
#include <utility>

#include "hetquad/symmat.hpp"

namespace hetquad {

/// M_i = A_i A_i' with A_i a d x rank Gaussian matrix; normalized.
ProblemInstance gen_random_psd(int d, int k, int rank, std::uint64_t seed);

/// Nested diagonally dominant instance: M_k = D_k + N_k and
/// M_i = M_{i+1} + D_i + N_i for i = k-1..1, so M_1 >= ... >= M_k. D_i has r
/// uniform[0,1] entries on a random support of size r shared by all levels,
/// N_i = SS'/(10d) with S a d x 10d matrix of N(0, sigma) entries (sigma is
/// the variance).
/// literal_index builds the chain the other way (M_i = M_{i-1} + ...).
/// Normalized.
ProblemInstance gen_cjd(int d, int k, int r, double sigma, std::uint64_t seed, bool literal_index = false);

struct NestedInstance {
  ProblemInstance instance;  ///< not normalized
  double known_optimum = 0.0;  ///< tr(M_1) = sum_j ||v_j||^2
  Matrix frame;    ///< d x k orthonormal q_1..q_k
  Matrix vectors;  ///< d x k, v_j = sum_{l <= j} R_lj q_l
};

/// M_i = sum_{j >= i} v_j v_j' with v_j = frame * coeffs.col(j); coeffs is a
/// k x k upper-triangular matrix. Throws RankDeficient if some R_jj is zero.
NestedInstance gen_nested(int d, int k, const Matrix& coeffs, std::uint64_t seed);

/// Same with coeffs drawn at random: off-diagonal N(0,1), diagonal 0.5 + |N(0,1)|.
NestedInstance gen_nested(int d, int k, std::uint64_t seed);

/// The two 4 x 4 trace-one rank-two blocks whose sum is feasible but which
/// do not decompose into orthogonal rank-one projectors.
std::pair<SymMat, SymMat> non_rank_one_fixture();

}  // namespace hetquad
