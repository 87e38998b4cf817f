#include "hetquad/sdp_ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hetquad::ipm {

void add_sym(std::vector<Entry>& out, int r, int c, double v) {
  out.push_back({r, c, v});
  if (r != c) out.push_back({c, r, v});
}

BlockTerm dense_term(int block, const Matrix& a) {
  BlockTerm t{block, {}};
  for (int c = 0; c < a.cols(); ++c)
    for (int r = 0; r < a.rows(); ++r)
      if (a(r, c) != 0.0) t.entries.push_back({r, c, a(r, c)});
  return t;
}

namespace {

using Blocks = std::vector<Matrix>;

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j].cwiseProduct(b[j]).sum();
  return s;
}

double fro(const Blocks& a) { return std::sqrt(inner(a, a)); }

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Per-block index of which constraints touch the block.
struct Touch {
  int p;
  const BlockTerm* term;
  bool heavy;
  Matrix dense;  // only for heavy terms
};

class Operator {
 public:
  explicit Operator(const Problem& pr) : pr_(pr), touch_(pr.block_sizes.size()) {
    for (int p = 0; p < static_cast<int>(pr.a.size()); ++p) {
      for (const auto& t : pr.a[p].terms) {
        const int n = pr.block_sizes[t.block];
        Touch tc{p, &t, static_cast<int>(t.entries.size()) > 2 * n, {}};
        if (tc.heavy) {
          tc.dense = Matrix::Zero(n, n);
          for (const auto& e : t.entries) tc.dense(e.row, e.col) += e.value;
        }
        touch_[t.block].push_back(std::move(tc));
      }
    }
  }

  Vector apply(const Blocks& x) const {
    Vector out = Vector::Zero(pr_.a.size());
    for (int p = 0; p < static_cast<int>(pr_.a.size()); ++p) {
      double s = 0.0;
      for (const auto& t : pr_.a[p].terms) {
        const Matrix& xb = x[t.block];
        for (const auto& e : t.entries) s += e.value * xb(e.row, e.col);
      }
      out(p) = s;
    }
    return out;
  }

  Blocks adjoint(const Vector& y) const {
    Blocks out;
    out.reserve(pr_.block_sizes.size());
    for (int n : pr_.block_sizes) out.push_back(Matrix::Zero(n, n));
    for (int p = 0; p < static_cast<int>(pr_.a.size()); ++p) {
      if (y(p) == 0.0) continue;
      for (const auto& t : pr_.a[p].terms) {
        Matrix& ob = out[t.block];
        for (const auto& e : t.entries) ob(e.row, e.col) += y(p) * e.value;
      }
    }
    return out;
  }

  // H_pq = sum_j tr(A_p X_j A_q G_j)
  Matrix schur(const Blocks& x, const Blocks& g) const {
    const int m = static_cast<int>(pr_.a.size());
    Matrix h = Matrix::Zero(m, m);
    for (std::size_t j = 0; j < touch_.size(); ++j) {
      const auto& list = touch_[j];
      const Matrix& xb = x[j];
      const Matrix& gb = g[j];
      for (const auto& tq : list) {
        if (!tq.heavy) continue;
        const Matrix pq = xb * tq.dense * gb;
        for (const auto& tp : list) {
          double s = 0.0;
          if (tp.heavy) {
            s = tp.dense.cwiseProduct(pq.transpose()).sum();
          } else {
            for (const auto& e : tp.term->entries) s += e.value * pq(e.col, e.row);
          }
          h(tp.p, tq.p) += s;
          if (!tp.heavy) h(tq.p, tp.p) += s;
        }
      }
      for (std::size_t a = 0; a < list.size(); ++a) {
        if (list[a].heavy) continue;
        const auto& ea = list[a].term->entries;
        for (std::size_t b = a; b < list.size(); ++b) {
          if (list[b].heavy) continue;
          const auto& eb = list[b].term->entries;
          double s = 0.0;
          for (const auto& e : ea)
            for (const auto& f : eb) s += e.value * f.value * xb(e.col, f.row) * gb(f.col, e.row);
          h(list[a].p, list[b].p) += s;
          if (b != a) h(list[b].p, list[a].p) += s;
        }
      }
    }
    return 0.5 * (h + h.transpose());
  }

 private:
  const Problem& pr_;
  std::vector<std::vector<Touch>> touch_;
};

// Largest alpha with x + alpha*dx PSD (infinity if dx keeps x PSD for all alpha).
double max_step(const Blocks& x, const Blocks& dx) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < x.size(); ++j) {
    Eigen::LLT<Matrix> llt(x[j]);
    if (llt.info() != Eigen::Success) return 0.0;
    Matrix l_inv_dx = llt.matrixL().solve(dx[j]);
    Matrix mm = llt.matrixL().solve(l_inv_dx.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym(mm), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    if (lo < 0.0) best = std::min(best, -1.0 / lo);
  }
  return best;
}

struct SchurSolver {
  Eigen::LLT<Matrix> llt;
  Eigen::LDLT<Matrix> ldlt;
  bool use_llt = true;
  bool ok = true;

  explicit SchurSolver(Matrix h) {
    llt.compute(h);
    if (llt.info() == Eigen::Success) return;
    const double reg = 1e-14 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    h.diagonal().array() += reg;
    llt.compute(h);
    if (llt.info() == Eigen::Success) return;
    use_llt = false;
    ldlt.compute(h);
    ok = ldlt.info() == Eigen::Success;
  }

  Vector solve(const Vector& r) const { return use_llt ? Vector(llt.solve(r)) : Vector(ldlt.solve(r)); }
};

Blocks default_x(const Problem& pr) {
  Blocks x;
  for (std::size_t j = 0; j < pr.block_sizes.size(); ++j) {
    const int n = pr.block_sizes[j];
    double xi = std::max(10.0, std::sqrt(static_cast<double>(n)));
    for (std::size_t p = 0; p < pr.a.size(); ++p)
      for (const auto& t : pr.a[p].terms)
        if (t.block == static_cast<int>(j)) {
          double nrm = 0.0;
          for (const auto& e : t.entries) nrm += e.value * e.value;
          xi = std::max(xi, n * (1.0 + std::abs(pr.b(p))) / (1.0 + std::sqrt(nrm)));
        }
    x.push_back(xi * Matrix::Identity(n, n));
  }
  return x;
}

Blocks default_z(const Problem& pr) {
  Blocks z;
  for (std::size_t j = 0; j < pr.block_sizes.size(); ++j) {
    const int n = pr.block_sizes[j];
    double eta = std::max(10.0, std::sqrt(static_cast<double>(n)));
    eta = std::max(eta, pr.c[j].norm());
    for (const auto& con : pr.a)
      for (const auto& t : con.terms)
        if (t.block == static_cast<int>(j)) {
          double nrm = 0.0;
          for (const auto& e : t.entries) nrm += e.value * e.value;
          eta = std::max(eta, std::sqrt(nrm));
        }
    z.push_back(eta * Matrix::Identity(n, n));
  }
  return z;
}

}  // namespace

Result solve(const Problem& pr, const Options& opt, const Start* start) {
  const int nb = static_cast<int>(pr.block_sizes.size());
  const int m = static_cast<int>(pr.a.size());
  if (static_cast<int>(pr.c.size()) != nb || pr.b.size() != m)
    throw std::invalid_argument("ipm::solve: inconsistent problem shapes");

  const Operator op(pr);
  double n_total = 0.0;
  for (int n : pr.block_sizes) n_total += n;
  const double b_norm = pr.b.norm();
  const double c_norm = fro(pr.c);

  Result res;
  Blocks x = start ? start->x : default_x(pr);
  Blocks z = start ? start->z : default_z(pr);
  Vector y = start ? start->y : Vector(Vector::Zero(m));

  int stalls = 0;
  auto evaluate = [&](Result& r) {
    const Vector rp = pr.b - op.apply(x);
    const Blocks aty = op.adjoint(y);
    double rd2 = 0.0;
    for (int j = 0; j < nb; ++j) rd2 += (pr.c[j] - z[j] - aty[j]).squaredNorm();
    r.pobj = inner(pr.c, x);
    r.dobj = pr.b.dot(y);
    r.pinf = rp.norm() / (1.0 + b_norm);
    r.dinf = std::sqrt(rd2) / (1.0 + c_norm);
    r.relgap = std::abs(r.pobj - r.dobj) / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
  };
  auto converged = [&](const Result& r) {
    return r.pinf <= opt.tol && r.dinf <= opt.tol && r.relgap <= opt.tol &&
           std::abs(r.pobj - r.dobj) <= opt.gap_abs_tol;
  };
  auto acceptable = [&](const Result& r) {
    return r.pinf <= 10 * opt.tol && r.dinf <= 10 * opt.tol &&
           std::abs(r.pobj - r.dobj) <= opt.stall_gap_tol;
  };
  auto finish = [&](Status s) {
    res.status = s;
    res.x = x;
    res.z = z;
    res.y = y;
    return res;
  };

  for (int it = 0; it < opt.max_iters; ++it) {
    res.iterations = it;
    evaluate(res);
    if (converged(res)) return finish(Status::Optimal);
    if (!std::isfinite(res.pobj) || !std::isfinite(res.dobj)) return finish(Status::NumericalFailure);
    if (fro(x) > 1e12 || y.norm() > 1e12) return finish(Status::Infeasible);

    const Blocks aty = op.adjoint(y);
    Blocks rd(nb), g(nb);
    for (int j = 0; j < nb; ++j) {
      rd[j] = pr.c[j] - z[j] - aty[j];
      Eigen::LLT<Matrix> llt(z[j]);
      if (llt.info() != Eigen::Success) return finish(acceptable(res) ? Status::Optimal : Status::NumericalFailure);
      g[j] = llt.solve(Matrix::Identity(z[j].rows(), z[j].cols()));
      g[j] = sym(g[j]);
    }
    const double mu = inner(x, z) / n_total;

    const SchurSolver schur(op.schur(x, g));
    if (!schur.ok) return finish(acceptable(res) ? Status::Optimal : Status::NumericalFailure);

    Blocks xrdg(nb);
    for (int j = 0; j < nb; ++j) xrdg[j] = x[j] * rd[j] * g[j];
    const Vector a_g = op.apply(g);
    const Vector base_rhs = pr.b + op.apply(xrdg);

    auto direction = [&](double sigma_mu, const Blocks* second, Blocks& dx, Blocks& dz, Vector& dy) {
      Vector rhs = base_rhs - sigma_mu * a_g;
      if (second) rhs += op.apply(*second);
      dy = schur.solve(rhs);
      const Blocks atdy = op.adjoint(dy);
      dx.resize(nb);
      dz.resize(nb);
      for (int j = 0; j < nb; ++j) {
        dz[j] = sym(rd[j] - atdy[j]);
        Matrix t = sigma_mu * g[j] - x[j] - sym(x[j] * dz[j] * g[j]);
        if (second) t -= sym((*second)[j]);
        dx[j] = sym(t);
      }
    };

    Blocks dxa, dza;
    Vector dya;
    direction(0.0, nullptr, dxa, dza, dya);
    const double ap_a = std::min(1.0, max_step(x, dxa));
    const double ad_a = std::min(1.0, max_step(z, dza));
    double mu_aff = 0.0;
    for (int j = 0; j < nb; ++j)
      mu_aff += (x[j] + ap_a * dxa[j]).cwiseProduct(z[j] + ad_a * dza[j]).sum();
    mu_aff /= n_total;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    Blocks second(nb);
    for (int j = 0; j < nb; ++j) second[j] = dxa[j] * dza[j] * g[j];
    Blocks dx, dz;
    Vector dy;
    direction(sigma * mu, &second, dx, dz, dy);

    const double gamma = 0.9 + 0.09 * std::min(ap_a, ad_a);
    const double ap = std::min(1.0, gamma * max_step(x, dx));
    const double ad = std::min(1.0, gamma * max_step(z, dz));
    if (!(ap > 0.0) || !(ad > 0.0)) return finish(acceptable(res) ? Status::Optimal : Status::NumericalFailure);

    for (int j = 0; j < nb; ++j) {
      x[j] = sym(x[j] + ap * dx[j]);
      z[j] = sym(z[j] + ad * dz[j]);
    }
    y += ad * dy;

    stalls = (std::max(ap, ad) < 1e-6) ? stalls + 1 : 0;
    if (stalls >= 5) {
      evaluate(res);
      return finish(acceptable(res) ? Status::Optimal : Status::NumericalFailure);
    }
  }
  res.iterations = opt.max_iters;
  evaluate(res);
  if (converged(res) || acceptable(res)) return finish(Status::Optimal);
  return finish(Status::NumericalFailure);
}

}  // namespace hetquad::ipm
