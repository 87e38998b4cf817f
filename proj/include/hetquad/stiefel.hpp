#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetquad/rng.hpp"
#include "hetquad/symmat.hpp"

namespace hetquad {

/// sum_i u_i' M_i u_i
double objective(const ProblemInstance& c, const StiefelPoint& u);

/// 2 [M_1 u_1, ..., M_k u_k]
Matrix euclidean_gradient(const ProblemInstance& c, const Matrix& u);

/// (I - UU')G + U skew(U'G) with G the Euclidean gradient.
Matrix riemannian_gradient(const ProblemInstance& c, const Matrix& u);

struct LambdaMatrix {
  Matrix value;  ///< column i is U' M_i u_i
  double symmetry_residual = 0.0;
};

LambdaMatrix lambda_matrix(const ProblemInstance& c, const Matrix& u);

/// Uniform draw on St(k,d) via QR of a Gaussian matrix.
StiefelPoint random_stiefel(int d, int k, Rng& rng);

enum class StmmStatus { Converged, MaxIters, Stationary };
std::string to_string(StmmStatus s);

struct StmmConfig {
  int max_iters = 2000;
  double grad_tol = 1e-10;
  std::uint64_t seed = 0;

  /// Synthetic CJD sweeps: 2000 iterations.
  static StmmConfig cjd_preset() { return {}; }
  /// HPPCA sweeps: 10000 iterations.
  static StmmConfig hppca_preset() { return {10000, 1e-10, 0}; }
};

struct IterateTrace {
  std::vector<double> objectives;  ///< entry 0 is the starting point
  std::vector<double> grad_norms;
  StiefelPoint final;
  StmmStatus status = StmmStatus::MaxIters;
  int iterations = 0;
  std::vector<int> perturbed_steps;  ///< iterations whose gradient was rank deficient
};

/// Linear-minorizer MM: U <- polar(grad F(U)). Matrices that are not PSD are
/// shifted internally for the step so the minorizer stays valid; the shift
/// does not change the maximizers or the reported objective.
IterateTrace stmm_solve(const ProblemInstance& c, const StiefelPoint& u0, const StmmConfig& cfg = {});

}  // namespace hetquad
