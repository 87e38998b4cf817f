#include "hetquad/diagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hetquad/parallel.hpp"
#include "hetquad/rng.hpp"

namespace hetquad {

std::optional<JointDiagonalization> joint_diagonalize(const ProblemInstance& c, double tol,
                                                      std::uint64_t seed) {
  if (instance_metrics(c).max_commuting_distance > tol) return std::nullopt;
  const int d = c.d();
  Rng rng(seed);
  Matrix q;
  // The eigenbasis of a generic positive combination diagonalizes every
  // member of a commuting family; redraw on a near-degenerate spectrum.
  for (int attempt = 0; attempt < 8; ++attempt) {
    Matrix comb = Matrix::Zero(d, d);
    for (const auto& m : c.mats()) comb += rng.uniform(0.5, 1.5) * m.mat();
    Eigen::SelfAdjointEigenSolver<Matrix> es(comb);
    q = es.eigenvectors();
    const Vector& ev = es.eigenvalues();
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < d; ++i) gap = std::min(gap, ev(i + 1) - ev(i));
    if (gap >= 1e-10) break;
  }
  JointDiagonalization jd{StiefelPoint(q, 1e-8), Matrix(c.k(), d), 0.0};
  for (int i = 0; i < c.k(); ++i) {
    Matrix t = q.transpose() * c[i].mat() * q;
    jd.diag_values.row(i) = t.diagonal().transpose();
    t.diagonal().setZero();
    jd.off_diag_residual = std::max(jd.off_diag_residual, t.norm());
  }
  if (jd.off_diag_residual > 10 * std::max(tol, 1e-12)) return std::nullopt;
  return jd;
}

namespace {

constexpr double kForbidden = 1e30;

// Min-cost assignment of n rows into m >= n columns (shortest augmenting
// path with potentials). Returns column per row.
std::vector<int> min_cost_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) col[p[j] - 1] = j - 1;
  return col;
}

double assignment_value(const Matrix& w, const std::vector<int>& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w(static_cast<int>(i), a[i]);
  return s;
}

// Least y >= 0 with y_j >= y_{a(i)} + w_ij - w_{i a(i)} + eps for j != a(i),
// and y_j = 0 on unassigned columns. Empty optional if infeasible.
std::optional<Vector> difference_dual(const Matrix& w, const std::vector<int>& a, double eps) {
  const int k = static_cast<int>(w.rows());
  const int d = static_cast<int>(w.cols());
  std::vector<char> assigned(d, 0);
  for (int j : a) assigned[j] = 1;
  Vector y = Vector::Zero(d);
  bool changed = true;
  for (int pass = 0; pass <= d + 1 && changed; ++pass) {
    changed = false;
    for (int i = 0; i < k; ++i) {
      const int ji = a[i];
      for (int j = 0; j < d; ++j) {
        if (j == ji) continue;
        const double lb = y(ji) + w(i, j) - w(i, ji) + eps;
        // Round-off slack keeps zero-weight cycles (ties) from looping.
        if (y(j) < lb - 1e-13 * (1.0 + std::abs(lb))) {
          y(j) = lb;
          changed = true;
        }
      }
    }
  }
  if (changed) return std::nullopt;  // positive cycle
  for (int j = 0; j < d; ++j)
    if (!assigned[j] && y(j) > 1e-13) return std::nullopt;
  return y;
}

AssignmentDual dual_from_y(const Matrix& w, const std::vector<int>& a, const Vector& y) {
  const int k = static_cast<int>(w.rows());
  const int d = static_cast<int>(w.cols());
  AssignmentDual out{y, Vector(k), Matrix(k, d)};
  for (int i = 0; i < k; ++i) {
    out.nu(i) = w(i, a[i]) - y(a[i]);
    for (int j = 0; j < d; ++j) out.z(i, j) = y(j) + out.nu(i) - w(i, j);
    out.z(i, a[i]) = 0.0;
  }
  return out;
}

}  // namespace

AssignmentSolution solve_assignment(const Matrix& diag_values, double tie_tol) {
  const int k = static_cast<int>(diag_values.rows());
  const int d = static_cast<int>(diag_values.cols());
  if (k < 1 || k > d) throw DimensionMismatch("solve_assignment: need 1 <= k <= d");
  AssignmentSolution sol;
  const Matrix cost = -diag_values;
  sol.assignment = min_cost_assignment(cost);
  sol.value = assignment_value(diag_values, sol.assignment);

  // Any other assignment drops at least one optimal edge.
  sol.second_best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    if (k == d && d == 1) break;
    Matrix c2 = cost;
    c2(i, sol.assignment[i]) = kForbidden;
    const std::vector<int> alt = min_cost_assignment(c2);
    bool valid = true;
    for (int r = 0; r < k; ++r) valid = valid && c2(r, alt[r]) < kForbidden;
    if (valid) sol.second_best = std::max(sol.second_best, assignment_value(diag_values, alt));
  }
  sol.unique = !(sol.value - sol.second_best <= tie_tol);

  const std::optional<Vector> y = difference_dual(diag_values, sol.assignment, 0.0);
  if (!y) throw SolverFailure("solve_assignment: assignment is not optimal for its dual");
  sol.dual = dual_from_y(diag_values, sol.assignment, *y);
  return sol;
}

std::vector<SymMat> assignment_primal(const Matrix& basis, const std::vector<int>& assignment) {
  std::vector<SymMat> x;
  for (int j : assignment) x.push_back(SymMat::outer(basis.col(j)));
  return x;
}

SdpDualSolution goldman_tucker_dual(const Matrix& diag_values, const AssignmentSolution& primal,
                                    const Matrix* basis, double eps) {
  if (!primal.unique)
    throw TieError("goldman_tucker_dual: optimal assignment is not unique (gap " +
                   std::to_string(primal.value - primal.second_best) + ")");
  const int k = static_cast<int>(diag_values.rows());
  const int d = static_cast<int>(diag_values.cols());
  std::optional<Vector> y;
  for (double e = eps; e >= 1e-12 && !y; e *= 0.5) y = difference_dual(diag_values, primal.assignment, e);
  if (!y) throw TieError("goldman_tucker_dual: no strictly complementary dual found");
  const AssignmentDual ad = dual_from_y(diag_values, primal.assignment, *y);

  const Matrix q = basis ? *basis : Matrix(Matrix::Identity(d, d));
  SdpDualSolution out;
  out.y = SymMat(q * ad.y.asDiagonal() * q.transpose());
  out.nu = ad.nu;
  for (int i = 0; i < k; ++i) {
    const Vector zi = ad.z.row(i).transpose();
    out.z_blocks.emplace_back(q * zi.asDiagonal() * q.transpose());
  }
  out.objective = -(ad.y.sum() + ad.nu.sum());
  return out;
}

SweepResult tightness_sweep(const ProblemInstance& center, double scale, int trials, std::uint64_t seed,
                            const SdpConfig& cfg, int jobs) {
  const int d = center.d();
  const int k = center.k();
  SweepResult res;
  res.trials = trials;
  res.rop_errors.assign(trials, std::numeric_limits<double>::quiet_NaN());
  std::vector<int> tight(trials, 0), failed(trials, 0);
  parallel_for(static_cast<std::size_t>(trials), jobs, [&](std::size_t t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    std::vector<SymMat> mats;
    for (int i = 0; i < k; ++i) {
      Matrix e = rng.gaussian(d, d);
      e = 0.5 * (e + e.transpose());
      const double nrm = SymMat(e).spectral_norm();
      Matrix m = center[i].mat();
      if (nrm > 0.0) m += (scale / nrm) * e;
      mats.emplace_back(m);
    }
    const ProblemInstance inst = normalize_instance(shift_to_psd(ProblemInstance(std::move(mats))));
    const SolveReport r = solve_sdp(inst, cfg);
    if (r.status != SolveStatus::Optimal) {
      failed[t] = 1;
      return;
    }
    const double err = rop_error(r.primal.x_blocks);
    res.rop_errors[t] = err;
    tight[t] = err <= 1e-5 && check_rop_orthogonality(r.primal.x_blocks);
  });
  for (int t = 0; t < trials; ++t) {
    res.tight += tight[t];
    res.failures += failed[t];
  }
  res.fraction_tight = trials > 0 ? static_cast<double>(res.tight) / trials : 0.0;
  return res;
}

}  // namespace hetquad
