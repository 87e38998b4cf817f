#include "hetquad/hppca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hetquad/rng.hpp"

namespace hetquad {

namespace {
constexpr std::uint64_t kStreamSubspace = 0;
constexpr std::uint64_t kStreamGroup = 1;
}  // namespace

int HppcaModel::n() const { return std::accumulate(group_sizes.begin(), group_sizes.end(), 0); }

void HppcaModel::validate() const {
  if (d < 1 || k < 1 || k > d) throw PreconditionViolation("HppcaModel: need 1 <= k <= d");
  if (lambdas.size() != k) throw DimensionMismatch("HppcaModel: need k lambdas");
  if (variances.size() < 1 || static_cast<int>(group_sizes.size()) != variances.size())
    throw DimensionMismatch("HppcaModel: need one group size per variance");
  if ((lambdas.array() <= 0.0).any()) throw PreconditionViolation("HppcaModel: lambdas must be positive");
  if ((variances.array() <= 0.0).any())
    throw PreconditionViolation("HppcaModel: variances must be positive");
  for (int nl : group_sizes)
    if (nl < 1) throw PreconditionViolation("HppcaModel: group sizes must be >= 1");
  if (u_true.rows() != d || u_true.cols() != k)
    throw DimensionMismatch("HppcaModel: u_true must be d x k");
  if ((u_true.transpose() * u_true - Matrix::Identity(k, k)).norm() > 1e-10)
    throw PreconditionViolation("HppcaModel: u_true columns are not orthonormal");
}

bool HppcaModel::distinct_parameters() const {
  auto distinct = [](const Vector& v) {
    for (int i = 0; i < v.size(); ++i)
      for (int j = i + 1; j < v.size(); ++j)
        if (v(i) == v(j)) return false;
    return true;
  };
  return distinct(lambdas) && distinct(variances);
}

HppcaModel make_hppca_model(int d, int k, Vector lambdas, Vector variances,
                            std::vector<int> group_sizes, std::uint64_t seed,
                            std::optional<Matrix> u_true) {
  HppcaModel m;
  m.d = d;
  m.k = k;
  m.lambdas = std::move(lambdas);
  m.variances = std::move(variances);
  m.group_sizes = std::move(group_sizes);
  m.seed = seed;
  if (u_true) {
    m.u_true = *u_true;
  } else {
    if (d < 1 || k < 1 || k > d) throw PreconditionViolation("HppcaModel: need 1 <= k <= d");
    Rng rng(derive_seed(seed, {kStreamSubspace}));
    Eigen::HouseholderQR<Matrix> qr(rng.gaussian(d, k));
    Matrix q = qr.householderQ() * Matrix::Identity(d, k);
    // Fix signs so Q is the Haar-distributed factor.
    const Matrix r = qr.matrixQR().topLeftCorner(k, k);
    for (int j = 0; j < k; ++j)
      if (r(j, j) < 0) q.col(j) = -q.col(j);
    m.u_true = q;
  }
  m.validate();
  return m;
}

Vector default_lambdas(int k) {
  // A single point sits at the upper end, as MATLAB's linspace does.
  if (k == 1) return Vector::Constant(1, 4.0);
  return Vector::LinSpaced(k, 1.0, 4.0);
}

HppcaSample sample(const HppcaModel& model) {
  model.validate();
  HppcaSample s;
  const Vector theta = model.lambdas.array().sqrt();
  const Matrix ut = model.u_true * theta.asDiagonal();
  for (int l = 0; l < model.groups(); ++l) {
    Rng rng(derive_seed(model.seed, {kStreamGroup, static_cast<std::uint64_t>(l)}));
    const int nl = model.group_sizes[l];
    const Matrix z = rng.gaussian(model.k, nl);
    const Matrix eta = rng.gaussian(model.d, nl, std::sqrt(model.variances(l)));
    s.groups.push_back(ut * z + eta);
  }
  return s;
}

Matrix hppca_weights(const HppcaModel& model) {
  const int L = model.groups();
  Matrix w(L, model.k);
  for (int l = 0; l < L; ++l)
    for (int i = 0; i < model.k; ++i)
      w(l, i) = model.lambdas(i) / (model.lambdas(i) + model.variances(l));
  return w;
}

std::vector<SymMat> group_matrices(const HppcaModel& model, const HppcaSample& s) {
  if (static_cast<int>(s.groups.size()) != model.groups())
    throw DimensionMismatch("group_matrices: sample has the wrong number of groups");
  std::vector<SymMat> a;
  for (int l = 0; l < model.groups(); ++l) {
    const Matrix& y = s.groups[l];
    if (y.rows() != model.d) throw DimensionMismatch("group_matrices: sample dimension");
    Matrix g = Matrix::Zero(model.d, model.d);
    g.selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0 / model.variances(l));
    a.emplace_back(Matrix(g.selfadjointView<Eigen::Lower>()));
  }
  return a;
}

ProblemInstance build_instance(const HppcaModel& model, const HppcaSample& s) {
  const std::vector<SymMat> a = group_matrices(model, s);
  const Matrix w = hppca_weights(model);
  std::vector<SymMat> mats;
  for (int i = 0; i < model.k; ++i) {
    Matrix m = Matrix::Zero(model.d, model.d);
    for (int l = 0; l < model.groups(); ++l) m += w(l, i) * a[l].mat();
    mats.emplace_back(m);
  }
  return ProblemInstance(std::move(mats));
}

ProblemInstance expected_instance(const HppcaModel& model) {
  model.validate();
  const Matrix w = hppca_weights(model);
  const double n = model.n();
  const Matrix signal = model.u_true * model.lambdas.asDiagonal() * model.u_true.transpose();
  const Matrix eye = Matrix::Identity(model.d, model.d);
  std::vector<SymMat> mats;
  for (int i = 0; i < model.k; ++i) {
    Matrix m = Matrix::Zero(model.d, model.d);
    for (int l = 0; l < model.groups(); ++l)
      m += w(l, i) * (model.group_sizes[l] / n) * (signal / model.variances(l) + eye);
    mats.emplace_back(m);
  }
  return ProblemInstance(std::move(mats));
}

HppcaStats hppca_stats(const HppcaModel& model, double c_const, double t) {
  model.validate();
  if (!(c_const > 0.0) || !(t > 0.0)) throw PreconditionViolation("hppca_stats: need C > 0 and t > 0");
  const int k = model.k;
  const double n = model.n();
  const double lam_max = model.lambdas.maxCoeff();
  const double lam_sum = model.lambdas.sum();
  HppcaStats st;
  st.sigma_bar = Vector::Zero(k);
  st.xi_bar = Vector::Zero(k);
  st.snr_bounds = Vector::Zero(k);
  for (int i = 0; i < k; ++i) {
    for (int l = 0; l < model.groups(); ++l) {
      const double v = model.variances(l);
      const double snr = model.lambdas(i) / v;
      const double w = snr / (snr + 1.0);
      const double frac = model.group_sizes[l] / n;
      st.sigma_bar(i) += w * frac * (lam_max / v + 1.0);
      st.xi_bar(i) += w * frac * (lam_sum / v + model.d);
      st.snr_bounds(i) += 1.0 / (snr + 1.0);
    }
  }
  const double sigma_top = st.sigma_bar.maxCoeff();
  st.concentration_bounds.resize(k);
  for (int i = 0; i < k; ++i) {
    const double r_eff = st.xi_bar(i) / st.sigma_bar(i);
    const double q = (r_eff * std::log(static_cast<double>(model.d)) + t) / n;
    st.concentration_bounds(i) =
        c_const * (st.sigma_bar(i) / sigma_top) * std::max(std::sqrt(q), q * std::log(n));
  }
  st.bounds = st.snr_bounds.cwiseMin(st.concentration_bounds);
  return st;
}

Vector snr_deviation(const HppcaModel& model, const HppcaSample& s) {
  const std::vector<SymMat> a = group_matrices(model, s);
  const ProblemInstance c = build_instance(model, s);
  const double n = model.n();
  Matrix abar = Matrix::Zero(model.d, model.d);
  for (const auto& al : a) abar += al.mat() / n;
  const double denom = SymMat(abar).spectral_norm();
  Vector out(model.k);
  for (int i = 0; i < model.k; ++i) out(i) = SymMat(c[i].mat() / n - abar).spectral_norm() / denom;
  return out;
}

}  // namespace hetquad
