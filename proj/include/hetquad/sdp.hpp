#pragma once

#include <array>
#include <string>
#include <vector>

#include "hetquad/symmat.hpp"

namespace hetquad {

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };
enum class Backend { Builtin, External };

std::string to_string(SolveStatus s);

struct SdpConfig {
  double tol = 1e-9;       ///< interior-point stopping tolerance
  double gap_tol = 1e-7;   ///< |p* - d*| required for Optimal
  double kkt_tol = 1e-6;   ///< every KKT residual required for Optimal
  double rank_tol = 1e-7;
  int max_iters = 100;
  Backend backend = Backend::Builtin;
};

/// Minimization form: objective = -sum_i <M_i, X_i>.
struct SdpPrimalSolution {
  std::vector<SymMat> x_blocks;
  double objective = 0.0;
};

/// Y = M_i + Z_i - nu_i I; objective d* = -(tr Y + sum nu).
struct SdpDualSolution {
  SymMat y;
  std::vector<SymMat> z_blocks;
  Vector nu;
  double objective = 0.0;
};

/// (a) primal feasibility, (b) dual equality and Y PSD, (c) <I - sum X_i, Y>,
/// (d) max_i <Z_i, X_i>, (e) Z_i PSD violation.
using KktResiduals = std::array<double, 5>;

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  SdpPrimalSolution primal;
  SdpDualSolution dual;
  double gap = 0.0;
  KktResiduals kkt{};
  int iterations = 0;
  double wall_time = 0.0;
  double psd_shift = 0.0;  ///< shift applied internally before solving
  double scale = 1.0;      ///< normalization factor applied internally
  std::string message;

  /// Value of the maximization problem, -p*.
  double value() const { return -primal.objective; }
  double max_kkt() const;
};

/// Solve the relaxation. The instance is shifted to PSD and normalized
/// internally; every reported quantity is mapped back to the units of `c`.
/// Backend::External is not available in this build and throws.
SolveReport solve_sdp(const ProblemInstance& c, const SdpConfig& cfg = {});

KktResiduals check_kkt(const ProblemInstance& c, const SdpPrimalSolution& primal,
                       const SdpDualSolution& dual);

struct Candidate {
  StiefelPoint u;
  double rop_error = 0.0;
  std::vector<bool> tie_flags;  ///< leading eigenvalue of block i is tied
  Matrix raw;                   ///< top eigenvectors before projection
  bool projection_degenerate = false;
};

/// Top eigenvector of each block, then polar projection onto St(k,d).
Candidate extract_candidate(const SdpPrimalSolution& primal, const Tolerances& tol = {});

/// Number of eigenvalues of Z_i above rank_tol * ||Z_i||_2, per block.
std::vector<int> dual_rank_profile(const SdpDualSolution& dual, double rank_tol = 1e-7);

/// Relaxation with additive linear terms sum_i c_i'u_i. Lifted matrices are
/// [[M_i, c_i/2], [c_i'/2, 0]] so that <Mt_i, Xt_i> = <M_i, X_i> + c_i'u_i.
struct LiftedInstance {
  ProblemInstance base;
  std::vector<Vector> linear;
  std::vector<SymMat> lifted_mats;
};

LiftedInstance build_lifted(const ProblemInstance& c, const std::vector<Vector>& linear);

struct LiftedSolveReport {
  /// Top-left d x d blocks, the shared Y, mapped Z_i := A'Zt_iA and nu.
  /// kkt (b) also covers the full lifted dual equality; (d), (e) are taken
  /// on the full lifted blocks.
  SolveReport report;
  std::vector<SymMat> x_lifted;
  std::vector<SymMat> z_lifted;
  Vector xi;        ///< multipliers of the corner constraints
  Matrix u_linear;  ///< d x k, top part of each lifted block's last column
};

LiftedSolveReport solve_lifted(const LiftedInstance& l, const SdpConfig& cfg = {});

}  // namespace hetquad
