#include "hetquad/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hetquad {

namespace {

Vector eigvals(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double spectral_norm_of(const Matrix& m) {
  // Commutators are skew-symmetric, so go through the symmetric m'm.
  if (m.size() == 0) return 0.0;
  Vector ev = eigvals(m.transpose() * m);
  return std::sqrt(std::max(0.0, ev.maxCoeff()));
}

void require_same_dim(int a, int b, const char* what) {
  if (a != b)
    throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(a) +
                            " vs " + std::to_string(b));
}

}  // namespace

SymMat::SymMat(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("SymMat: matrix is not square");
  if (a.rows() < 1) throw DimensionMismatch("SymMat: dimension must be >= 1");
  m_ = 0.5 * (a + a.transpose());
}

SymMat SymMat::zero(int d) { return SymMat(Matrix::Zero(d, d)); }
SymMat SymMat::identity(int d) { return SymMat(Matrix::Identity(d, d)); }
SymMat SymMat::diagonal(const Vector& diag) { return SymMat(Matrix(diag.asDiagonal())); }
SymMat SymMat::outer(const Vector& u) { return SymMat(u * u.transpose()); }

Vector SymMat::eigenvalues() const { return eigvals(m_); }

double SymMat::spectral_norm() const {
  Vector ev = eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double SymMat::min_eigenvalue() const { return eigenvalues()(0); }
double SymMat::max_eigenvalue() const {
  Vector ev = eigenvalues();
  return ev(ev.size() - 1);
}

StiefelPoint::StiefelPoint(Matrix cols, double orth_tol) : u_(std::move(cols)) {
  if (u_.cols() < 1 || u_.cols() > u_.rows())
    throw DimensionMismatch("StiefelPoint: need 1 <= k <= d, got d=" +
                            std::to_string(u_.rows()) + " k=" + std::to_string(u_.cols()));
  if (orthonormality_error() > orth_tol)
    throw PreconditionViolation("StiefelPoint: columns are not orthonormal (error " +
                                std::to_string(orthonormality_error()) + ")");
}

double StiefelPoint::orthonormality_error() const {
  return (u_.transpose() * u_ - Matrix::Identity(k(), k())).norm();
}

ProblemInstance::ProblemInstance(std::vector<SymMat> mats, double psd_shift, double scale)
    : mats_(std::move(mats)), psd_shift_(psd_shift), scale_(scale) {
  if (mats_.empty()) throw DimensionMismatch("ProblemInstance: need at least one matrix");
  d_ = mats_.front().dim();
  for (const auto& m : mats_) require_same_dim(d_, m.dim(), "ProblemInstance");
  if (k() > d_) throw DimensionMismatch("ProblemInstance: k must not exceed d");
}

double commuting_distance(const SymMat& a, const SymMat& b) {
  require_same_dim(a.dim(), b.dim(), "commuting_distance");
  const Matrix c = a.mat() * b.mat() - b.mat() * a.mat();
  return spectral_norm_of(c);
}

InstanceMetrics instance_metrics(const ProblemInstance& c) {
  InstanceMetrics m;
  const int k = c.k();
  m.pairwise_commutators = Matrix::Zero(k, k);
  m.spectral_norms.resize(k);
  for (int i = 0; i < k; ++i) {
    m.spectral_norms(i) = c[i].spectral_norm();
    for (int j = i + 1; j < k; ++j) {
      const double v = commuting_distance(c[i], c[j]);
      m.pairwise_commutators(i, j) = m.pairwise_commutators(j, i) = v;
      m.max_commuting_distance = std::max(m.max_commuting_distance, v);
    }
  }
  return m;
}

double instance_distance(const ProblemInstance& c, const ProblemInstance& cbar) {
  require_same_dim(c.d(), cbar.d(), "instance_distance (d)");
  require_same_dim(c.k(), cbar.k(), "instance_distance (k)");
  double best = 0.0;
  for (int i = 0; i < c.k(); ++i)
    best = std::max(best, SymMat(c[i].mat() - cbar[i].mat()).spectral_norm());
  return best;
}

ProblemInstance normalize_instance(const ProblemInstance& c) {
  double mx = 0.0;
  for (const auto& m : c.mats()) mx = std::max(mx, m.spectral_norm());
  if (!(mx > 0.0)) throw PreconditionViolation("normalize_instance: all matrices are zero");
  std::vector<SymMat> out;
  out.reserve(c.k());
  for (const auto& m : c.mats()) out.emplace_back(m.mat() / mx);
  return ProblemInstance(std::move(out), c.psd_shift() / mx, c.scale() / mx);
}

ProblemInstance shift_to_psd(const ProblemInstance& c, double tol) {
  double lo = 0.0;
  for (const auto& m : c.mats()) lo = std::min(lo, m.min_eigenvalue());
  if (lo >= -tol) return c;
  const double shift = -lo;
  std::vector<SymMat> out;
  out.reserve(c.k());
  const Matrix eye = Matrix::Identity(c.d(), c.d());
  for (const auto& m : c.mats()) out.emplace_back(m.mat() + shift * eye);
  return ProblemInstance(std::move(out), c.psd_shift() + shift * c.scale(), c.scale());
}

StiefelPoint procrustes_project(const Matrix& m) {
  if (m.cols() < 1 || m.cols() > m.rows())
    throw DimensionMismatch("procrustes_project: need 1 <= k <= d");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(s.size() - 1) <= 1e-12 * s(0))
    throw RankDeficient("procrustes_project: input is rank deficient");
  Matrix u = svd.matrixU() * svd.matrixV().transpose();
  // One Newton-Schulz style cleanup keeps ||U'U - I|| at round-off level.
  u = 1.5 * u - 0.5 * u * (u.transpose() * u);
  return StiefelPoint(std::move(u));
}

TopEigen top_eigenpair(const SymMat& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x.mat());
  const int d = x.dim();
  TopEigen t;
  t.value = es.eigenvalues()(d - 1);
  t.vector = es.eigenvectors().col(d - 1);
  t.gap = d > 1 ? t.value - es.eigenvalues()(d - 2) : std::abs(t.value);
  return t;
}

double rop_error(std::span<const SymMat> x_blocks) {
  if (x_blocks.empty()) throw DimensionMismatch("rop_error: no blocks");
  const int d = x_blocks.front().dim();
  double total = 0.0;
  for (const auto& x : x_blocks) {
    require_same_dim(d, x.dim(), "rop_error");
    Vector ev = x.eigenvalues().reverse();  // descending
    ev(0) -= 1.0;
    total += ev.squaredNorm();
  }
  return total / static_cast<double>(x_blocks.size());
}

bool check_rop_orthogonality(std::span<const SymMat> x_blocks, const Tolerances& tol) {
  const double err = rop_error(x_blocks);
  if (err > tol.rop)
    throw PreconditionViolation("check_rop_orthogonality: blocks are not rank one (rop_error " +
                                std::to_string(err) + ")");
  const int d = x_blocks.front().dim();
  const int k = static_cast<int>(x_blocks.size());
  Matrix lead(d, k);
  Matrix sum = Matrix::Zero(d, d);
  for (int i = 0; i < k; ++i) {
    lead.col(i) = top_eigenpair(x_blocks[i]).vector;
    sum += x_blocks[i].mat();
  }
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (std::abs(lead.col(i).dot(lead.col(j))) > tol.orthogonality) return false;
  const Vector ev = SymMat(sum).eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    const double v = ev(i);
    if (std::abs(v) > tol.orthogonality && std::abs(v - 1.0) > tol.orthogonality) return false;
  }
  return true;
}

double quadratic_objective(const ProblemInstance& c, const Matrix& u) {
  if (u.rows() != c.d() || u.cols() != c.k())
    throw DimensionMismatch("objective: point shape does not match instance");
  double f = 0.0;
  for (int i = 0; i < c.k(); ++i) f += u.col(i).dot(c[i].mat() * u.col(i));
  return f;
}

}  // namespace hetquad
