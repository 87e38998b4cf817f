#include "hetquad/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetquad/sdp_ipm.hpp"

namespace hetquad {

std::string to_string(CertStatus s) {
  return s == CertStatus::CertifiedGlobal ? "CertifiedGlobal" : "Inconclusive";
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::None: return "None";
    case Classification::SdpNotTight: return "SdpNotTight";
    case Classification::SuboptimalStationary: return "SuboptimalStationary";
    case Classification::Unknown: return "Unknown";
  }
  return "?";
}

namespace {

double lambda_min(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Slacks of the certificate LMIs at nu, in the units of the matrices given.
std::vector<double> slacks(const std::vector<Matrix>& mats, const Matrix& u, const Matrix& lam,
                           const Vector& nu) {
  const int d = static_cast<int>(u.rows());
  const int k = static_cast<int>(u.cols());
  const Matrix core = lam - Matrix(nu.asDiagonal());
  const Matrix y = u * core * u.transpose();
  std::vector<double> out;
  for (int i = 0; i < k; ++i) out.push_back(lambda_min(y + nu(i) * Matrix::Identity(d, d) - mats[i]));
  out.push_back(lambda_min(core));
  out.push_back(nu.minCoeff());
  return out;
}

}  // namespace

CertificateResult certify(const ProblemInstance& c, const StiefelPoint& u_bar, const CertifyOptions& opt,
                          const SolveReport* sdp_report) {
  const int d = c.d();
  const int k = c.k();
  const Matrix& u = u_bar.mat();
  if (u.rows() != d || u.cols() != k) throw DimensionMismatch("certify: point shape does not match instance");

  CertificateResult res;
  const LambdaMatrix lm = lambda_matrix(c, u);
  res.symmetry_residual = lm.symmetry_residual;
  res.grad_norm = riemannian_gradient(c, u).norm();

  double s = 0.0;
  for (const auto& m : c.mats()) s = std::max(s, m.spectral_norm());
  if (!(s > 0.0)) s = 1.0;
  res.precondition_weak = res.grad_norm / s > opt.stationarity_tol || res.symmetry_residual / s > opt.stationarity_tol;

  std::vector<Matrix> mats;
  for (const auto& m : c.mats()) mats.push_back(m.mat() / s);
  const Matrix lam = 0.5 * (lm.value + lm.value.transpose()) / s;

  auto inconclusive = [&](std::string why) {
    res.status = CertStatus::Inconclusive;
    res.message = std::move(why);
    res.classification = classify_inconclusive(c, u_bar, sdp_report);
    return res;
  };

  if (lambda_min(lam) < -opt.lambda_gate) {
    res.t = std::numeric_limits<double>::quiet_NaN();
    return inconclusive("Lambda has a negative eigenvalue");
  }

  // Dual standard form in y = (nu_1..nu_k, t): maximize t subject to
  // C_j - sum_p y_p A_pj PSD for each block j.
  ipm::Problem pr;
  const int m = k + 1;
  for (int i = 0; i < k; ++i) pr.block_sizes.push_back(d);
  pr.block_sizes.push_back(k);
  for (int i = 0; i < k; ++i) pr.block_sizes.push_back(1);
  const Matrix ulu = u * lam * u.transpose();
  for (int i = 0; i < k; ++i) pr.c.push_back(0.5 * (ulu - mats[i] + (ulu - mats[i]).transpose()));
  pr.c.push_back(lam);
  for (int i = 0; i < k; ++i) pr.c.push_back(Matrix::Zero(1, 1));
  pr.a.resize(m);
  for (int j = 0; j < k; ++j) {
    const Matrix uj = u.col(j) * u.col(j).transpose();
    for (int i = 0; i < k; ++i) {
      Matrix a = uj;
      if (i == j) a -= Matrix::Identity(d, d);
      pr.a[j].terms.push_back(ipm::dense_term(i, a));
    }
    pr.a[j].terms.push_back(ipm::BlockTerm{k, {{j, j, 1.0}}});
    pr.a[j].terms.push_back(ipm::BlockTerm{k + 1 + j, {{0, 0, -1.0}}});
  }
  for (int i = 0; i < k; ++i) {
    ipm::BlockTerm t{i, {}};
    for (int a = 0; a < d; ++a) t.entries.push_back({a, a, 1.0});
    pr.a[k].terms.push_back(std::move(t));
  }
  {
    ipm::BlockTerm t{k, {}};
    for (int a = 0; a < k; ++a) t.entries.push_back({a, a, 1.0});
    pr.a[k].terms.push_back(std::move(t));
  }
  pr.b = Vector::Zero(m);
  pr.b(k) = 1.0;

  ipm::Options io;
  io.tol = 1e-9;
  io.gap_abs_tol = 1e-9;
  io.stall_gap_tol = 1e-7;
  const ipm::Result r = ipm::solve(pr, io);
  if (r.y.size() != m || !r.y.allFinite()) throw SolverFailure("certify: LMI solve produced no point");

  const Vector nu = r.y.head(k);
  res.t = r.y(k);
  const std::vector<double> sl = slacks(mats, u, lam, nu);
  const double worst = *std::min_element(sl.begin(), sl.end());
  res.nu_witness = s * nu;
  for (double v : sl) res.min_eig_slacks.push_back(s * v);

  if (worst < -opt.tol) {
    if (r.status != ipm::Status::Optimal)
      throw SolverFailure("certify: LMI solve failed and its last point is not a witness");
    return inconclusive("certificate LMI infeasible at tolerance");
  }

  res.status = CertStatus::CertifiedGlobal;
  res.classification = Classification::None;
  // The primal-dual pair the witness induces, checked in original units.
  const Matrix lam_orig = 0.5 * (lm.value + lm.value.transpose());
  const Vector nu_o = res.nu_witness;
  SdpPrimalSolution p;
  SdpDualSolution q;
  q.y = SymMat(u * (lam_orig - Matrix(nu_o.asDiagonal())) * u.transpose());
  q.nu = nu_o;
  for (int i = 0; i < k; ++i) {
    p.x_blocks.push_back(SymMat::outer(u.col(i)));
    q.z_blocks.emplace_back(q.y.mat() + nu_o(i) * Matrix::Identity(d, d) - c[i].mat());
  }
  p.objective = -quadratic_objective(c, u);
  q.objective = -(q.y.trace() + nu_o.sum());
  res.kkt = check_kkt(c, p, q);
  return res;
}

Classification classify_inconclusive(const ProblemInstance& c, const StiefelPoint& u_bar,
                                     const SolveReport* sdp_report, double rop_tol) {
  if (!sdp_report || sdp_report->status != SolveStatus::Optimal || sdp_report->primal.x_blocks.empty())
    return Classification::Unknown;
  if (rop_error(sdp_report->primal.x_blocks) > rop_tol) return Classification::SdpNotTight;
  if (objective(c, u_bar) < sdp_report->value() - 1e-5) return Classification::SuboptimalStationary;
  return Classification::Unknown;
}

FlopsEstimate certificate_flops_estimate(int d, int k) {
  if (d < 1 || k < 1) throw PreconditionViolation("certificate_flops_estimate: need d, k >= 1");
  const double dd = d, kk = k;
  const double pre = std::sqrt(kk * dd);
  FlopsEstimate f;
  f.cert_flops = pre * kk * kk * dd * dd * dd;
  f.full_dual_flops = pre * kk * std::pow(dd, 6);
  f.ratio = dd * dd * dd / kk;
  return f;
}

}  // namespace hetquad
