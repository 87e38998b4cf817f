#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetquad/certificate.hpp"
#include "hetquad/sdp.hpp"
#include "hetquad/stiefel.hpp"

namespace hetquad::harness {

/// A solve counts as tight when it is Optimal, rop_error <= 1e-5 and the
/// leading eigenvectors are orthogonal with sum X_i a projector.
bool is_tight(const SolveReport& r, const Tolerances& tol = {});

struct RopTrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string status;
  double rop_error = 0.0;
  bool orthogonal = false;
  bool tight = false;
  double value = 0.0;
  double gap = 0.0;
  double max_kkt = 0.0;
  double wall_time = 0.0;
  std::string certificate;  ///< empty unless tight trials are certified
  std::string error;
};

struct RopCell {
  std::string family;
  int d = 0;
  int k = 0;
  std::string params;
  int trials = 0;
  int tight = 0;
  int failures = 0;
  double fraction = 0.0;
  std::vector<RopTrialRecord> records;
};

struct HppcaCell {
  int d = 0;
  int k = 0;
  std::vector<int> n;
  std::vector<double> v;
};

struct RopOptions {
  int trials = 50;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool certify_tight = false;  ///< certify extract_candidate of every tight solve
  SdpConfig sdp{};
};

/// HPPCA cell: lambdas linspace(1,4,k), a fresh U, latents and noise per trial.
RopCell run_rop_cell_hppca(const HppcaCell& cell, const RopOptions& opt);
/// RandPSD cell with M_i = A_i A_i', A_i of size d x rank.
RopCell run_rop_cell_randpsd(int d, int k, int rank, const RopOptions& opt);

/// Marker taxonomy of a StMM run: exactly one per trial.
enum class Marker { Certified, NotTight, TightSuboptimal };
std::string to_string(Marker m);

struct CjdTrialRecord {
  double param = 0.0;  ///< sigma (cjd) or n_1 (hppca)
  int trial = 0;
  std::uint64_t seed = 0;
  double commuting_distance = 0.0;
  std::string sdp_status;
  double p_sdp = 0.0;   ///< SDP value of the maximization problem
  double p_stmm = 0.0;  ///< objective at the StMM point
  double gap = 0.0;     ///< p_sdp - p_stmm
  double subspace_distance = 0.0;
  double rop_error = 0.0;
  bool tight = false;
  std::string stmm_status;
  int stmm_iters = 0;
  std::string certificate;
  std::string classification;
  std::string marker;
  std::string error;
};

/// One trial on an already normalized instance.
CjdTrialRecord run_cjd_trial(const ProblemInstance& c, std::uint64_t seed, const SdpConfig& sdp,
                             const StmmConfig& stmm);

struct CjdSweepSpec {
  std::string family = "cjd";  ///< "cjd" sweeps sigma, "hppca" sweeps n_1 with n = [n_1, 4 n_1]
  std::vector<double> params;
  int d = 10;
  int k = 3;
  int r = 3;                         ///< cjd only
  std::vector<double> v{1.0, 4.0};   ///< hppca only
  std::vector<double> lambdas;       ///< hppca only; empty means linspace(1,4,k)
};

struct CjdOptions {
  int trials = 20;
  std::uint64_t seed = 1;
  int jobs = 1;
  SdpConfig sdp{};
  StmmConfig stmm{};
};

std::vector<CjdTrialRecord> run_cjd_sweep(const CjdSweepSpec& spec, const CjdOptions& opt);

struct CjdBucket {
  double param = 0.0;
  int trials = 0;
  int failures = 0;
  double tight_fraction = 0.0;
  double certified_fraction = 0.0;
  double median_commuting_distance = 0.0;
};

std::vector<CjdBucket> summarize_cjd(const std::vector<CjdTrialRecord>& recs);

struct BenchCell {
  int d = 0;
  int k = 0;
  int trials = 0;
  int skipped = 0;  ///< trials not run because the cell exceeded its time budget
  std::vector<double> sdp_times;
  std::vector<double> stmm_times;  ///< StMM + certificate
  double sdp_median = 0.0, sdp_std = 0.0;
  double stmm_median = 0.0, stmm_std = 0.0;
  double ratio = 0.0;  ///< sdp_median / stmm_median
};

struct BenchOptions {
  int trials = 3;
  std::uint64_t seed = 1;
  int stmm_iters = 2000;
  double cell_timeout = 600.0;  ///< seconds per cell
  SdpConfig sdp{};
};

/// HPPCA instances with v = [1,4], n = [100,400]. Both arms use the same
/// instance per trial. StMM runs exactly stmm_iters iterations.
BenchCell run_bench_cell(int d, int k, const BenchOptions& opt);
std::vector<BenchCell> run_bench(const std::vector<int>& d_list, const std::vector<int>& k_list,
                                 const BenchOptions& opt);

double median(std::vector<double> v);
double stddev(const std::vector<double>& v);

// Writers. CSV for tables, JSON lines for raw records, TSV for figure data.
void write_rop_csv(const std::string& path, const std::vector<RopCell>& cells);
void write_rop_jsonl(const std::string& path, const std::vector<RopCell>& cells);
void write_cjd_jsonl(const std::string& path, const std::vector<CjdTrialRecord>& recs);
void write_cjd_tsv(const std::string& path, const std::vector<CjdTrialRecord>& recs);
void write_bench_csv(const std::string& path, const std::vector<BenchCell>& cells);

}  // namespace hetquad::harness
