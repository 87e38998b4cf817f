#include "hetquad/stiefel.hpp"

#include <algorithm>
#include <cmath>

namespace hetquad {

namespace {

void require_shape(const ProblemInstance& c, const Matrix& u) {
  if (u.rows() != c.d() || u.cols() != c.k())
    throw DimensionMismatch("stiefel: point shape does not match instance");
}

Matrix skew(const Matrix& a) { return 0.5 * (a - a.transpose()); }

// Polar factor and whether the input was numerically rank deficient.
std::pair<Matrix, bool> polar(const Matrix& g) {
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const bool deficient = !(s(0) > 0.0) || s(s.size() - 1) <= 1e-12 * s(0);
  return {svd.matrixU() * svd.matrixV().transpose(), deficient};
}

}  // namespace

double objective(const ProblemInstance& c, const StiefelPoint& u) { return quadratic_objective(c, u.mat()); }

Matrix euclidean_gradient(const ProblemInstance& c, const Matrix& u) {
  require_shape(c, u);
  Matrix g(u.rows(), u.cols());
  for (int i = 0; i < c.k(); ++i) g.col(i) = 2.0 * (c[i].mat() * u.col(i));
  return g;
}

Matrix riemannian_gradient(const ProblemInstance& c, const Matrix& u) {
  const Matrix g = euclidean_gradient(c, u);
  const Matrix utg = u.transpose() * g;
  return (g - u * utg) + u * skew(utg);
}

LambdaMatrix lambda_matrix(const ProblemInstance& c, const Matrix& u) {
  require_shape(c, u);
  LambdaMatrix l;
  l.value.resize(c.k(), c.k());
  for (int i = 0; i < c.k(); ++i) l.value.col(i) = u.transpose() * (c[i].mat() * u.col(i));
  l.symmetry_residual = (l.value - l.value.transpose()).norm();
  return l;
}

StiefelPoint random_stiefel(int d, int k, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(rng.gaussian(d, k));
  Matrix q = qr.householderQ() * Matrix::Identity(d, k);
  const Matrix r = qr.matrixQR().topLeftCorner(k, k);
  for (int j = 0; j < k; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return StiefelPoint(q);
}

std::string to_string(StmmStatus s) {
  switch (s) {
    case StmmStatus::Converged: return "Converged";
    case StmmStatus::MaxIters: return "MaxIters";
    case StmmStatus::Stationary: return "Stationary";
  }
  return "?";
}

IterateTrace stmm_solve(const ProblemInstance& c, const StiefelPoint& u0, const StmmConfig& cfg) {
  require_shape(c, u0.mat());
  double shift = 0.0;
  for (const auto& m : c.mats()) shift = std::max(shift, -m.min_eigenvalue());

  IterateTrace tr{{}, {}, u0, StmmStatus::MaxIters, 0, {}};
  Matrix u = u0.mat();
  Matrix g = euclidean_gradient(c, u);
  auto record = [&] {
    const Matrix utg = u.transpose() * g;
    tr.objectives.push_back(0.5 * (u.cwiseProduct(g)).sum());
    tr.grad_norms.push_back(((g - u * utg) + u * skew(utg)).norm());
  };
  record();
  if (g.norm() == 0.0) {
    tr.status = StmmStatus::Stationary;
    return tr;
  }
  for (int it = 1; it <= cfg.max_iters; ++it) {
    if (tr.grad_norms.back() <= cfg.grad_tol) {
      tr.status = StmmStatus::Converged;
      break;
    }
    Matrix step = g + 2.0 * shift * u;
    auto [next, deficient] = polar(step);
    if (deficient) {
      tr.perturbed_steps.push_back(it);
      next = polar(step + 1e-12 * u).first;
    }
    // Re-orthonormalize to keep ||U'U - I|| at round-off level.
    u = 1.5 * next - 0.5 * next * (next.transpose() * next);
    g = euclidean_gradient(c, u);
    tr.iterations = it;
    record();
  }
  if (tr.status != StmmStatus::Converged && tr.grad_norms.back() <= cfg.grad_tol)
    tr.status = StmmStatus::Converged;
  tr.final = StiefelPoint(u);
  return tr;
}

}  // namespace hetquad
