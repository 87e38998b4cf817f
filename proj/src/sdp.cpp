#include "hetquad/sdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hetquad/sdp_ipm.hpp"

namespace hetquad {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

double SolveReport::max_kkt() const { return *std::max_element(kkt.begin(), kkt.end()); }

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

double lambda_min(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double lambda_max(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

// Constraints sum_i top-left(X_i)[a,b] + S[a,b] = I[a,b] in the orthonormal
// svec basis, touching blocks 0..k-1 (top-left d x d part) and block k (S).
void add_fantope_constraints(ipm::Problem& pr, int d, int k) {
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      ipm::Constraint con;
      const double v = (a == b) ? 1.0 : kSqrtHalf;
      for (int blk = 0; blk <= k; ++blk) {
        ipm::BlockTerm t{blk, {}};
        ipm::add_sym(t.entries, a, b, v);
        con.terms.push_back(std::move(t));
      }
      pr.a.push_back(std::move(con));
    }
  }
}

void require_builtin(const SdpConfig& cfg) {
  if (cfg.backend != Backend::Builtin)
    throw PreconditionViolation("external conic backend is not available in this build");
}

ipm::Options ipm_options(const SdpConfig& cfg) {
  ipm::Options o;
  o.tol = cfg.tol;
  o.max_iters = cfg.max_iters;
  o.stall_gap_tol = cfg.gap_tol;
  o.gap_abs_tol = std::min(5.0 * cfg.tol, cfg.gap_tol);
  return o;
}

SolveStatus verify(SolveReport& r, ipm::Status st, double scale, const SdpConfig& cfg) {
  if (st == ipm::Status::Infeasible) {
    r.message = "interior-point iterates diverged";
    return SolveStatus::Infeasible;
  }
  if (st == ipm::Status::NumericalFailure) {
    r.message = "interior-point method stalled";
    return SolveStatus::NumericalFailure;
  }
  // Tolerances are applied in the normalized units the solver worked in.
  if (r.gap / scale > cfg.gap_tol) {
    r.message = "duality gap above tolerance";
    return SolveStatus::NumericalFailure;
  }
  if (r.max_kkt() / scale > cfg.kkt_tol) {
    r.message = "KKT residual above tolerance";
    return SolveStatus::NumericalFailure;
  }
  return SolveStatus::Optimal;
}

}  // namespace

KktResiduals check_kkt(const ProblemInstance& c, const SdpPrimalSolution& primal,
                       const SdpDualSolution& dual) {
  const int d = c.d();
  const int k = c.k();
  if (static_cast<int>(primal.x_blocks.size()) != k || static_cast<int>(dual.z_blocks.size()) != k ||
      dual.nu.size() != k || dual.y.dim() != d)
    throw DimensionMismatch("check_kkt: solution shape does not match instance");
  KktResiduals r{};
  const Matrix eye = Matrix::Identity(d, d);
  Matrix sum = Matrix::Zero(d, d);
  for (int i = 0; i < k; ++i) {
    const Matrix& x = primal.x_blocks[i].mat();
    if (x.rows() != d) throw DimensionMismatch("check_kkt: primal block size");
    sum += x;
    r[0] = std::max({r[0], std::abs(x.trace() - 1.0), std::max(0.0, -lambda_min(x))});
  }
  r[0] = std::max(r[0], std::max(0.0, lambda_max(sum) - 1.0));

  const Matrix& y = dual.y.mat();
  r[1] = std::max(0.0, -lambda_min(y));
  for (int i = 0; i < k; ++i) {
    const Matrix& z = dual.z_blocks[i].mat();
    r[1] = std::max(r[1], (y - c[i].mat() - z + dual.nu(i) * eye).norm());
    r[3] = std::max(r[3], std::abs(z.cwiseProduct(primal.x_blocks[i].mat()).sum()));
    r[4] = std::max(r[4], std::max(0.0, -lambda_min(z)));
  }
  r[2] = std::abs((eye - sum).cwiseProduct(y).sum());
  return r;
}

SolveReport solve_sdp(const ProblemInstance& c_in, const SdpConfig& cfg) {
  require_builtin(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const int d = c_in.d();
  const int k = c_in.k();

  // Shift to PSD and normalize; undo both on the way out.
  const ProblemInstance shifted = shift_to_psd(ProblemInstance(c_in.mats()));
  const double tau = shifted.psd_shift();
  double s = 0.0;
  for (const auto& m : shifted.mats()) s = std::max(s, m.spectral_norm());
  if (!(s > 0.0)) s = 1.0;

  ipm::Problem pr;
  for (int i = 0; i < k; ++i) pr.block_sizes.push_back(d);
  pr.block_sizes.push_back(d);
  for (int i = 0; i < k; ++i) pr.c.push_back(-shifted[i].mat() / s);
  pr.c.push_back(Matrix::Zero(d, d));
  for (int i = 0; i < k; ++i) {
    ipm::BlockTerm t{i, {}};
    for (int a = 0; a < d; ++a) t.entries.push_back({a, a, 1.0});
    pr.a.push_back({{std::move(t)}});
  }
  add_fantope_constraints(pr, d, k);
  const int m = static_cast<int>(pr.a.size());
  pr.b = Vector::Zero(m);
  for (int i = 0; i < k; ++i) pr.b(i) = 1.0;
  {
    int p = k;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b, ++p) pr.b(p) = (a == b) ? 1.0 : 0.0;
  }

  // Interior start at the Slater point.
  ipm::Start st;
  const Matrix eye = Matrix::Identity(d, d);
  const double xs = (k < d) ? 1.0 / d : 0.5 / d;
  const double ss = (k < d) ? 1.0 - static_cast<double>(k) / d : 0.5;
  for (int i = 0; i < k; ++i) st.x.push_back(xs * eye);
  st.x.push_back(ss * eye);
  for (int i = 0; i <= k; ++i) st.z.push_back(eye);
  st.y = Vector::Zero(m);

  const ipm::Result res = ipm::solve(pr, ipm_options(cfg), &st);

  SolveReport r;
  r.iterations = res.iterations;
  r.psd_shift = tau;
  r.scale = s;
  if (!res.x.empty()) {
    for (int i = 0; i < k; ++i) r.primal.x_blocks.emplace_back(res.x[i]);
    r.primal.objective = s * res.pobj + k * tau;
    r.dual.y = SymMat(s * res.z[k]);
    r.dual.nu.resize(k);
    for (int i = 0; i < k; ++i) {
      r.dual.nu(i) = -s * res.y(i) - tau;
      r.dual.z_blocks.emplace_back(s * res.z[i]);
    }
    r.dual.objective = -(r.dual.y.trace() + r.dual.nu.sum());
    r.gap = std::abs(r.primal.objective - r.dual.objective);
    r.kkt = check_kkt(c_in, r.primal, r.dual);
  }
  r.status = verify(r, res.status, s, cfg);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Candidate extract_candidate(const SdpPrimalSolution& primal, const Tolerances& tol) {
  const int k = static_cast<int>(primal.x_blocks.size());
  if (k == 0) throw DimensionMismatch("extract_candidate: no blocks");
  const int d = primal.x_blocks.front().dim();
  Matrix raw(d, k);
  std::vector<bool> ties(k, false);
  for (int i = 0; i < k; ++i) {
    const TopEigen te = top_eigenpair(primal.x_blocks[i]);
    Vector v = te.vector;
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    raw.col(i) = v;
    ties[i] = te.gap < tol.tie_gap;
  }
  Eigen::JacobiSVD<Matrix> svd(raw, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const bool degenerate = sv(sv.size() - 1) <= 1e-12 * sv(0);
  Matrix u = svd.matrixU() * svd.matrixV().transpose();
  return Candidate{StiefelPoint(u, 1e-8), rop_error(primal.x_blocks), std::move(ties), std::move(raw),
                   degenerate};
}

std::vector<int> dual_rank_profile(const SdpDualSolution& dual, double rank_tol) {
  std::vector<int> out;
  for (const auto& z : dual.z_blocks) {
    const Vector ev = z.eigenvalues();
    const double nrm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    int r = 0;
    if (nrm > 0.0)
      for (int i = 0; i < ev.size(); ++i) r += ev(i) > rank_tol * nrm;
    out.push_back(r);
  }
  return out;
}

LiftedInstance build_lifted(const ProblemInstance& c, const std::vector<Vector>& linear) {
  const int d = c.d();
  if (static_cast<int>(linear.size()) != c.k())
    throw DimensionMismatch("build_lifted: need one linear term per matrix");
  LiftedInstance l{c, linear, {}};
  for (int i = 0; i < c.k(); ++i) {
    if (linear[i].size() != d) throw DimensionMismatch("build_lifted: linear term length must be d");
    Matrix mt = Matrix::Zero(d + 1, d + 1);
    mt.topLeftCorner(d, d) = c[i].mat();
    mt.block(0, d, d, 1) = 0.5 * linear[i];
    mt.block(d, 0, 1, d) = 0.5 * linear[i].transpose();
    l.lifted_mats.emplace_back(mt);
  }
  return l;
}

LiftedSolveReport solve_lifted(const LiftedInstance& l, const SdpConfig& cfg) {
  require_builtin(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const int d = l.base.d();
  const int k = l.base.k();
  const int n = d + 1;

  double s = 0.0;
  for (const auto& m : l.lifted_mats) s = std::max(s, m.spectral_norm());
  if (!(s > 0.0)) s = 1.0;

  ipm::Problem pr;
  for (int i = 0; i < k; ++i) pr.block_sizes.push_back(n);
  pr.block_sizes.push_back(d);
  for (int i = 0; i < k; ++i) pr.c.push_back(-l.lifted_mats[i].mat() / s);
  pr.c.push_back(Matrix::Zero(d, d));
  for (int i = 0; i < k; ++i) {
    ipm::BlockTerm t{i, {}};
    for (int a = 0; a < d; ++a) t.entries.push_back({a, a, 1.0});
    pr.a.push_back({{std::move(t)}});
  }
  for (int i = 0; i < k; ++i) pr.a.push_back({{ipm::BlockTerm{i, {{d, d, 1.0}}}}});
  add_fantope_constraints(pr, d, k);
  const int m = static_cast<int>(pr.a.size());
  pr.b = Vector::Zero(m);
  for (int i = 0; i < 2 * k; ++i) pr.b(i) = 1.0;
  {
    int p = 2 * k;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b, ++p) pr.b(p) = (a == b) ? 1.0 : 0.0;
  }

  ipm::Start st;
  const double xs = (k < d) ? 1.0 / d : 0.5 / d;
  const double ss = (k < d) ? 1.0 - static_cast<double>(k) / d : 0.5;
  for (int i = 0; i < k; ++i) {
    Matrix x0 = xs * Matrix::Identity(n, n);
    x0(d, d) = 1.0;
    st.x.push_back(x0);
  }
  st.x.push_back(ss * Matrix::Identity(d, d));
  for (int i = 0; i < k; ++i) st.z.push_back(Matrix::Identity(n, n));
  st.z.push_back(Matrix::Identity(d, d));
  st.y = Vector::Zero(m);

  const ipm::Result res = ipm::solve(pr, ipm_options(cfg), &st);

  LiftedSolveReport out;
  SolveReport& r = out.report;
  r.iterations = res.iterations;
  r.scale = s;
  if (!res.x.empty()) {
    out.xi.resize(k);
    out.u_linear.resize(d, k);
    r.dual.nu.resize(k);
    r.dual.y = SymMat(s * res.z[k]);
    const Matrix& y = r.dual.y.mat();
    double full_res = 0.0;
    for (int i = 0; i < k; ++i) {
      out.x_lifted.emplace_back(res.x[i]);
      out.z_lifted.emplace_back(s * res.z[i]);
      r.primal.x_blocks.emplace_back(res.x[i].topLeftCorner(d, d));
      r.dual.z_blocks.emplace_back(s * res.z[i].topLeftCorner(d, d));
      r.dual.nu(i) = -s * res.y(i);
      out.xi(i) = -s * res.y(k + i);
      out.u_linear.col(i) = res.x[i].block(0, d, d, 1);
      // Full lifted dual equality: [[Y + nu I, 0], [0, xi]] = Mt_i + Zt_i.
      Matrix lhs = Matrix::Zero(n, n);
      lhs.topLeftCorner(d, d) = y + r.dual.nu(i) * Matrix::Identity(d, d);
      lhs(d, d) = out.xi(i);
      full_res = std::max(full_res, (lhs - l.lifted_mats[i].mat() - out.z_lifted[i].mat()).norm());
    }
    r.primal.objective = s * res.pobj;
    r.dual.objective = -(r.dual.y.trace() + r.dual.nu.sum() + out.xi.sum());
    r.gap = std::abs(r.primal.objective - r.dual.objective);

    r.kkt = check_kkt(l.base, r.primal, r.dual);
    r.kkt[1] = std::max(r.kkt[1], full_res);
    double corner = 0.0, dres = 0.0, eres = 0.0;
    for (int i = 0; i < k; ++i) {
      corner = std::max(corner, std::abs(res.x[i](d, d) - 1.0));
      corner = std::max(corner, std::max(0.0, -lambda_min(res.x[i])));
      dres = std::max(dres, std::abs(out.z_lifted[i].mat().cwiseProduct(res.x[i]).sum()));
      eres = std::max(eres, std::max(0.0, -lambda_min(out.z_lifted[i].mat())));
    }
    r.kkt[0] = std::max(r.kkt[0], corner);
    r.kkt[3] = dres;
    r.kkt[4] = eres;
  }
  r.status = verify(r, res.status, s, cfg);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace hetquad
