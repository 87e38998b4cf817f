#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hetquad/sdp.hpp"

namespace hetquad {

struct JointDiagonalization {
  StiefelPoint basis;   ///< d x d orthogonal Q
  Matrix diag_values;   ///< k x d, row i = diag(Q' M_i Q)
  double off_diag_residual = 0.0;
};

/// Returns nullopt (not jointly diagonalizable) when the largest pairwise
/// commuting distance exceeds tol or the off-diagonal residual exceeds 10 tol.
std::optional<JointDiagonalization> joint_diagonalize(const ProblemInstance& c, double tol = 1e-8,
                                                      std::uint64_t seed = 0);

/// Dual of the assignment LP: z_ij = y_j + nu_i - m_ij >= 0, y >= 0.
struct AssignmentDual {
  Vector y;
  Vector nu;
  Matrix z;
};

struct AssignmentSolution {
  std::vector<int> assignment;  ///< row i -> column
  double value = 0.0;
  bool unique = true;
  double second_best = 0.0;  ///< best value of any other assignment (-inf if none)
  AssignmentDual dual;       ///< an optimal (not necessarily strictly complementary) dual
};

/// Maximum-weight injective assignment of k rows to d >= k columns.
/// Uniqueness is decided against tie_tol.
AssignmentSolution solve_assignment(const Matrix& diag_values, double tie_tol = 1e-9);

/// Rank-one primal blocks Q e_j e_j' Q' for the assignment.
std::vector<SymMat> assignment_primal(const Matrix& basis, const std::vector<int>& assignment);

/// Strictly complementary dual of the assignment LP lifted to SDP form
/// (Y = Q diag(y) Q', Z_i = Q diag(z_i) Q'), so every Z_i has rank d-1.
/// Throws TieError when the optimal assignment is not unique.
SdpDualSolution goldman_tucker_dual(const Matrix& diag_values, const AssignmentSolution& primal,
                                    const Matrix* basis = nullptr, double eps = 1e-6);

struct SweepResult {
  int trials = 0;
  int tight = 0;
  int failures = 0;  ///< solver failures, counted as not tight
  double fraction_tight = 0.0;
  std::vector<double> rop_errors;
};

/// Perturb each M_i by a random symmetric matrix of spectral norm `scale`,
/// shift to PSD, normalize, solve, and count rank-one orthogonal solutions.
SweepResult tightness_sweep(const ProblemInstance& center, double scale, int trials, std::uint64_t seed,
                            const SdpConfig& cfg = {}, int jobs = 1);

}  // namespace hetquad
