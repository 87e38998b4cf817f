#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hetquad/errors.hpp"

namespace hetquad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Numerical thresholds shared by the ROP / orthogonality / Stiefel checks.
struct Tolerances {
  double orth = 1e-10;           ///< ||U'U - I||_F for a Stiefel point
  double rop = 1e-5;             ///< rank-one property threshold on rop_error
  double orthogonality = 1e-6;   ///< |u_i'u_j| and projector eigenvalue slack
  double tie_gap = 1e-8;         ///< leading-eigenvalue gap below which a block is tied
};

/// Dense real symmetric matrix. Symmetrized as (A + A')/2 on construction.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Matrix& a);

  static SymMat zero(int d);
  static SymMat identity(int d);
  static SymMat diagonal(const Vector& diag);
  static SymMat outer(const Vector& u);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  /// Eigenvalues in ascending order.
  Vector eigenvalues() const;
  double spectral_norm() const;
  double min_eigenvalue() const;
  double max_eigenvalue() const;
  double trace() const { return m_.trace(); }

 private:
  Matrix m_;
};

/// d x k matrix with orthonormal columns.
class StiefelPoint {
 public:
  explicit StiefelPoint(Matrix cols, double orth_tol = Tolerances{}.orth);

  int d() const { return static_cast<int>(u_.rows()); }
  int k() const { return static_cast<int>(u_.cols()); }
  const Matrix& mat() const { return u_; }
  Vector col(int i) const { return u_.col(i); }

  /// ||U'U - I||_F
  double orthonormality_error() const;

 private:
  Matrix u_;
};

/// The k-tuple (M_1, ..., M_k) of d x d symmetric matrices.
///
/// `psd_shift` records the uniform shift c added by shift_to_psd (each M_i
/// became M_i + c I); `scale` records the positive factor applied by
/// normalize_instance. Both default to the identity transformation.
class ProblemInstance {
 public:
  ProblemInstance() = default;
  explicit ProblemInstance(std::vector<SymMat> mats, double psd_shift = 0.0,
                           double scale = 1.0);

  int d() const { return d_; }
  int k() const { return static_cast<int>(mats_.size()); }
  const std::vector<SymMat>& mats() const { return mats_; }
  const SymMat& operator[](int i) const { return mats_[i]; }
  double psd_shift() const { return psd_shift_; }
  double scale() const { return scale_; }

 private:
  int d_ = 0;
  std::vector<SymMat> mats_;
  double psd_shift_ = 0.0;
  double scale_ = 1.0;
};

struct InstanceMetrics {
  double max_commuting_distance = 0.0;
  Matrix pairwise_commutators;  ///< k x k, symmetric, zero diagonal
  Vector spectral_norms;
};

/// ||AB - BA||_2.
double commuting_distance(const SymMat& a, const SymMat& b);

InstanceMetrics instance_metrics(const ProblemInstance& c);

/// max_i ||M_i - Mbar_i||_2.
double instance_distance(const ProblemInstance& c, const ProblemInstance& cbar);

/// Rescale so that max_i ||M_i||_2 = 1. Throws PreconditionViolation when
/// every matrix is zero.
ProblemInstance normalize_instance(const ProblemInstance& c);

/// If some M_i has an eigenvalue below -tol, add the same multiple of the
/// identity to every matrix so the most negative one becomes PSD. The shift
/// only moves the objective by k * shift.
ProblemInstance shift_to_psd(const ProblemInstance& c, double tol = 1e-10);

/// Polar factor of m (closest Stiefel point in Frobenius norm).
StiefelPoint procrustes_project(const Matrix& m);

/// Leading eigenpair and the gap to the second eigenvalue.
struct TopEigen {
  double value = 0.0;
  Vector vector;
  double gap = 0.0;
};
TopEigen top_eigenpair(const SymMat& x);

/// (1/k) sum_i || sorted-descending eig(X_i) - e_1 ||_2^2.
double rop_error(std::span<const SymMat> x_blocks);

/// Leading eigenvectors mutually orthogonal and sum X_i a projector.
/// Requires rop_error(x_blocks) <= tol.rop, else PreconditionViolation.
bool check_rop_orthogonality(std::span<const SymMat> x_blocks,
                             const Tolerances& tol = {});

/// sum_i u_i' M_i u_i
double quadratic_objective(const ProblemInstance& c, const Matrix& u);

}  // namespace hetquad
