#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hetquad/symmat.hpp"

namespace hetquad {

/// Heteroscedastic PPCA generative model: group l draws
/// y = U diag(sqrt(lambda)) z + eta, z ~ N(0, I_k), eta ~ N(0, v_l I_d).
struct HppcaModel {
  int d = 0;
  int k = 0;
  Matrix u_true;  ///< d x k, orthonormal columns
  Vector lambdas;
  Vector variances;
  std::vector<int> group_sizes;
  std::uint64_t seed = 0;

  int groups() const { return static_cast<int>(group_sizes.size()); }
  int n() const;
  /// Throws PreconditionViolation on non-positive parameters or a bad u_true.
  void validate() const;
  /// Whether lambdas and variances are pairwise distinct (the setting where
  /// the matrices genuinely differ; not required for sampling).
  bool distinct_parameters() const;
};

/// Builds a model; when `u_true` is absent it is drawn uniformly on St(k,d)
/// from a stream derived from `seed`.
HppcaModel make_hppca_model(int d, int k, Vector lambdas, Vector variances,
                            std::vector<int> group_sizes, std::uint64_t seed,
                            std::optional<Matrix> u_true = std::nullopt);

/// linspace(1, 4, k), endpoints included.
Vector default_lambdas(int k);

struct HppcaSample {
  std::vector<Matrix> groups;  ///< group l is d x n_l, one sample per column
};

/// Each group uses its own generator seeded from (seed, group index).
HppcaSample sample(const HppcaModel& model);

/// w_{l,i} = lambda_i / (lambda_i + v_l), as an L x k array.
Matrix hppca_weights(const HppcaModel& model);

/// A_l = (1/v_l) Y_l Y_l'.
std::vector<SymMat> group_matrices(const HppcaModel& model, const HppcaSample& s);

/// M_i = sum_l w_{l,i} A_l (not divided by n).
ProblemInstance build_instance(const HppcaModel& model, const HppcaSample& s);

/// Mbar_i = sum_l w_{l,i} (n_l/n) ((1/v_l) U Theta^2 U' + I), i.e. the
/// expectation of M_i / n.
ProblemInstance expected_instance(const HppcaModel& model);

struct HppcaStats {
  Vector sigma_bar;             ///< ||Mbar_i||_2
  Vector xi_bar;                ///< tr(Mbar_i)
  Vector snr_bounds;            ///< sum_l 1/(lambda_i/v_l + 1)
  Vector concentration_bounds;  ///< C (sigma_i/sigma_max) max{sqrt(q), q log n}
  Vector bounds;                ///< elementwise min of the two
};

HppcaStats hppca_stats(const HppcaModel& model, double c_const = 1.0, double t = 1.0);

/// ||M_i/n - Abar||_2 / ||Abar||_2 with Abar = (1/n) sum_l A_l, per i.
Vector snr_deviation(const HppcaModel& model, const HppcaSample& s);

}  // namespace hetquad
