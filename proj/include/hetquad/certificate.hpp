#pragma once

#include <string>
#include <vector>

#include "hetquad/sdp.hpp"
#include "hetquad/stiefel.hpp"

namespace hetquad {

enum class CertStatus { CertifiedGlobal, Inconclusive };
enum class Classification { None, SdpNotTight, SuboptimalStationary, Unknown };

std::string to_string(CertStatus s);
std::string to_string(Classification c);

/// Only CertifiedGlobal is a proof. Inconclusive never implies suboptimality.
struct CertificateResult {
  CertStatus status = CertStatus::Inconclusive;
  Vector nu_witness;  ///< set whenever the LMI solve produced a point
  Classification classification = Classification::None;
  /// min eigenvalue of each F_i(nu), then of Lambda - D_nu, then min_i nu_i.
  std::vector<double> min_eig_slacks;
  bool precondition_weak = false;
  double grad_norm = 0.0;
  double symmetry_residual = 0.0;
  double t = 0.0;  ///< optimal common slack of the LMI, in normalized units
  KktResiduals kkt{};  ///< of the constructed primal-dual pair, when certified
  std::string message;
};

struct CertifyOptions {
  double tol = 1e-7;              ///< slack tolerance, normalized units
  double stationarity_tol = 1e-6; ///< below this the precondition is met
  double lambda_gate = 1e-6;      ///< lambda_min(Lambda) below -gate forces Inconclusive
};

/// Solves: max t s.t. U(Lambda - D_nu)U' + nu_i I - M_i >= t I for every i,
/// Lambda - D_nu >= t I, nu >= 0. Certified iff every slack at the returned
/// nu is >= -tol (checked directly, independent of solver status).
/// Throws SolverFailure if the LMI solve fails without a usable point.
CertificateResult certify(const ProblemInstance& c, const StiefelPoint& u_bar,
                          const CertifyOptions& opt = {}, const SolveReport* sdp_report = nullptr);

/// SdpNotTight if the report's blocks are not rank one, SuboptimalStationary
/// if they are and objective(u_bar) < -p* - 1e-5, else Unknown (also when
/// no usable report is supplied).
Classification classify_inconclusive(const ProblemInstance& c, const StiefelPoint& u_bar,
                                     const SolveReport* sdp_report, double rop_tol = 1e-5);

struct FlopsEstimate {
  double cert_flops = 0.0;       ///< sqrt(kd) k^2 d^3
  double full_dual_flops = 0.0;  ///< sqrt(kd) k d^6
  double ratio = 0.0;            ///< d^3 / k
};

FlopsEstimate certificate_flops_estimate(int d, int k);

}  // namespace hetquad
