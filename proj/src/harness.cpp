#include "hetquad/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hetquad/generators.hpp"
#include "hetquad/hppca.hpp"
#include "hetquad/parallel.hpp"
#include "hetquad/rng.hpp"

namespace hetquad::harness {

namespace {

using Json = nlohmann::json;

std::string join(const std::vector<double>& v, char sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? std::string(1, sep) : "") << v[i];
  return os.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out.precision(10);
  return out;
}

RopTrialRecord evaluate_trial(const ProblemInstance& c, int trial, std::uint64_t seed, const RopOptions& opt) {
  RopTrialRecord rec;
  rec.trial = trial;
  rec.seed = seed;
  const SolveReport r = solve_sdp(c, opt.sdp);
  rec.status = to_string(r.status);
  rec.value = r.value();
  rec.gap = r.gap;
  rec.max_kkt = r.max_kkt();
  rec.wall_time = r.wall_time;
  if (r.status != SolveStatus::Optimal) {
    rec.error = r.message;
    return rec;
  }
  rec.rop_error = rop_error(r.primal.x_blocks);
  if (rec.rop_error <= Tolerances{}.rop) rec.orthogonal = check_rop_orthogonality(r.primal.x_blocks);
  rec.tight = rec.orthogonal;
  if (rec.tight && opt.certify_tight) {
    const Candidate cand = extract_candidate(r.primal);
    rec.certificate = to_string(certify(c, cand.u, {}, &r).status);
  }
  return rec;
}

RopCell run_cell(std::string family, int d, int k, std::string params, const RopOptions& opt,
                 const std::function<ProblemInstance(std::uint64_t)>& make) {
  RopCell cell{std::move(family), d, k, std::move(params), opt.trials, 0, 0, 0.0, {}};
  cell.records.resize(opt.trials);
  const std::uint64_t cell_seed =
      derive_seed(opt.seed, {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(k),
                             std::hash<std::string>{}(cell.params)});
  parallel_for(static_cast<std::size_t>(opt.trials), opt.jobs, [&](std::size_t t) {
    const std::uint64_t s = derive_seed(cell_seed, {static_cast<std::uint64_t>(t)});
    try {
      cell.records[t] = evaluate_trial(make(s), static_cast<int>(t), s, opt);
    } catch (const std::exception& e) {
      RopTrialRecord rec;
      rec.trial = static_cast<int>(t);
      rec.seed = s;
      rec.status = "Error";
      rec.error = e.what();
      cell.records[t] = rec;
    }
  });
  for (const auto& r : cell.records) {
    cell.tight += r.tight;
    cell.failures += r.status != "Optimal";
  }
  cell.fraction = opt.trials > 0 ? static_cast<double>(cell.tight) / opt.trials : 0.0;
  return cell;
}

ProblemInstance hppca_instance(int d, int k, const std::vector<int>& n, const std::vector<double>& v,
                               const Vector& lambdas, std::uint64_t seed) {
  const Vector vv = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  const HppcaModel m = make_hppca_model(d, k, lambdas, vv, n, seed);
  return normalize_instance(build_instance(m, sample(m)));
}

}  // namespace

bool is_tight(const SolveReport& r, const Tolerances& tol) {
  if (r.status != SolveStatus::Optimal) return false;
  if (rop_error(r.primal.x_blocks) > tol.rop) return false;
  return check_rop_orthogonality(r.primal.x_blocks, tol);
}

RopCell run_rop_cell_hppca(const HppcaCell& cell, const RopOptions& opt) {
  std::vector<double> nd(cell.n.begin(), cell.n.end());
  const std::string params = "n=" + join(nd, ';') + " v=" + join(cell.v, ';');
  const Vector lambdas = default_lambdas(cell.k);
  return run_cell("hppca", cell.d, cell.k, params, opt, [&](std::uint64_t s) {
    return hppca_instance(cell.d, cell.k, cell.n, cell.v, lambdas, s);
  });
}

RopCell run_rop_cell_randpsd(int d, int k, int rank, const RopOptions& opt) {
  return run_cell("randpsd", d, k, "rank=" + std::to_string(rank), opt,
                  [&](std::uint64_t s) { return gen_random_psd(d, k, rank, s); });
}

std::string to_string(Marker m) {
  switch (m) {
    case Marker::Certified: return "certified";
    case Marker::NotTight: return "not-tight";
    case Marker::TightSuboptimal: return "tight-suboptimal";
  }
  return "?";
}

CjdTrialRecord run_cjd_trial(const ProblemInstance& c, std::uint64_t seed, const SdpConfig& sdp,
                             const StmmConfig& stmm) {
  CjdTrialRecord rec;
  rec.seed = seed;
  rec.commuting_distance = instance_metrics(c).max_commuting_distance;
  const SolveReport r = solve_sdp(c, sdp);
  rec.sdp_status = to_string(r.status);
  rec.p_sdp = r.value();
  if (r.status == SolveStatus::Optimal) {
    rec.rop_error = rop_error(r.primal.x_blocks);
    rec.tight = is_tight(r);
  } else {
    rec.error = r.message;
  }

  Rng rng(derive_seed(seed, {7}));
  const StiefelPoint u0 = random_stiefel(c.d(), c.k(), rng);
  const IterateTrace tr = stmm_solve(c, u0, stmm);
  rec.stmm_status = to_string(tr.status);
  rec.stmm_iters = tr.iterations;
  rec.p_stmm = tr.objectives.back();
  rec.gap = rec.p_sdp - rec.p_stmm;
  if (!r.primal.x_blocks.empty()) {
    const Candidate cand = extract_candidate(r.primal);
    const Matrix overlap = (tr.final.mat().transpose() * cand.u.mat()).cwiseAbs();
    rec.subspace_distance = (overlap - Matrix::Identity(c.k(), c.k())).norm() / std::sqrt(c.k());
  }

  bool certified = false;
  try {
    const CertificateResult cert = certify(c, tr.final, {}, r.status == SolveStatus::Optimal ? &r : nullptr);
    rec.certificate = to_string(cert.status);
    rec.classification = to_string(cert.classification);
    certified = cert.status == CertStatus::CertifiedGlobal;
  } catch (const std::exception& e) {
    rec.certificate = "Error";
    rec.error += (rec.error.empty() ? "" : "; ") + std::string(e.what());
  }
  const Marker mk = certified ? Marker::Certified : (!rec.tight ? Marker::NotTight : Marker::TightSuboptimal);
  rec.marker = to_string(mk);
  return rec;
}

std::vector<CjdTrialRecord> run_cjd_sweep(const CjdSweepSpec& spec, const CjdOptions& opt) {
  if (spec.family != "cjd" && spec.family != "hppca")
    throw PreconditionViolation("run_cjd_sweep: family must be cjd or hppca");
  const std::size_t per = static_cast<std::size_t>(opt.trials);
  std::vector<CjdTrialRecord> recs(spec.params.size() * per);
  const Vector lambdas = spec.lambdas.empty()
                             ? default_lambdas(spec.k)
                             : Vector(Eigen::Map<const Vector>(spec.lambdas.data(),
                                                               static_cast<Eigen::Index>(spec.lambdas.size())));
  parallel_for(recs.size(), opt.jobs, [&](std::size_t idx) {
    const std::size_t b = idx / per;
    const int t = static_cast<int>(idx % per);
    const double param = spec.params[b];
    const std::uint64_t s = derive_seed(opt.seed, {b, static_cast<std::uint64_t>(t)});
    CjdTrialRecord rec;
    try {
      ProblemInstance c;
      if (spec.family == "cjd") {
        c = gen_cjd(spec.d, spec.k, spec.r, param, s);
      } else {
        const int n1 = static_cast<int>(std::lround(param));
        c = hppca_instance(spec.d, spec.k, {n1, 4 * n1}, spec.v, lambdas, s);
      }
      rec = run_cjd_trial(c, s, opt.sdp, opt.stmm);
    } catch (const std::exception& e) {
      rec.seed = s;
      rec.error = e.what();
      rec.marker = to_string(Marker::NotTight);
    }
    rec.param = param;
    rec.trial = t;
    recs[idx] = rec;
  });
  return recs;
}

std::vector<CjdBucket> summarize_cjd(const std::vector<CjdTrialRecord>& recs) {
  std::map<double, std::vector<const CjdTrialRecord*>> by;
  for (const auto& r : recs) by[r.param].push_back(&r);
  std::vector<CjdBucket> out;
  for (const auto& [param, list] : by) {
    CjdBucket b;
    b.param = param;
    b.trials = static_cast<int>(list.size());
    int tight = 0, cert = 0;
    std::vector<double> dist;
    for (const auto* r : list) {
      tight += r->tight;
      cert += r->marker == "certified";
      b.failures += r->sdp_status != "Optimal";
      dist.push_back(r->commuting_distance);
    }
    b.tight_fraction = static_cast<double>(tight) / b.trials;
    b.certified_fraction = static_cast<double>(cert) / b.trials;
    b.median_commuting_distance = median(dist);
    out.push_back(b);
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

BenchCell run_bench_cell(int d, int k, const BenchOptions& opt) {
  BenchCell cell;
  cell.d = d;
  cell.k = k;
  cell.trials = opt.trials;
  const Vector lambdas = default_lambdas(k);
  StmmConfig sc;
  sc.max_iters = opt.stmm_iters;
  sc.grad_tol = 0.0;  // fixed iteration budget
  double spent = 0.0;
  for (int t = 0; t < opt.trials; ++t) {
    if (spent > opt.cell_timeout) {
      ++cell.skipped;
      continue;
    }
    const std::uint64_t s = derive_seed(opt.seed, {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(k),
                                                   static_cast<std::uint64_t>(t)});
    const ProblemInstance c = hppca_instance(d, k, {100, 400}, {1.0, 4.0}, lambdas, s);

    const SolveReport r = solve_sdp(c, opt.sdp);
    cell.sdp_times.push_back(r.wall_time);

    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(derive_seed(s, {7}));
    const IterateTrace tr = stmm_solve(c, random_stiefel(d, k, rng), sc);
    try {
      (void)certify(c, tr.final);
    } catch (const SolverFailure&) {
      // Timing is still meaningful; the outcome is not part of this table.
    }
    const double st = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cell.stmm_times.push_back(st);
    spent += r.wall_time + st;
  }
  cell.sdp_median = median(cell.sdp_times);
  cell.sdp_std = stddev(cell.sdp_times);
  cell.stmm_median = median(cell.stmm_times);
  cell.stmm_std = stddev(cell.stmm_times);
  cell.ratio = cell.stmm_median > 0.0 ? cell.sdp_median / cell.stmm_median : 0.0;
  return cell;
}

std::vector<BenchCell> run_bench(const std::vector<int>& d_list, const std::vector<int>& k_list,
                                 const BenchOptions& opt) {
  std::vector<BenchCell> out;
  for (int k : k_list)
    for (int d : d_list)
      if (k <= d) out.push_back(run_bench_cell(d, k, opt));
  return out;
}

void write_rop_csv(const std::string& path, const std::vector<RopCell>& cells) {
  auto out = open_out(path);
  out << "family,d,k,params,trials,tight,failures,fraction\n";
  for (const auto& c : cells)
    out << c.family << ',' << c.d << ',' << c.k << ",\"" << c.params << "\"," << c.trials << ',' << c.tight << ','
        << c.failures << ',' << c.fraction << '\n';
}

void write_rop_jsonl(const std::string& path, const std::vector<RopCell>& cells) {
  auto out = open_out(path);
  for (const auto& c : cells)
    for (const auto& r : c.records) {
      Json j{{"family", c.family}, {"d", c.d},           {"k", c.k},
             {"params", c.params}, {"trial", r.trial},   {"seed", r.seed},
             {"status", r.status}, {"rop_error", r.rop_error}, {"orthogonal", r.orthogonal},
             {"tight", r.tight},   {"value", r.value},   {"gap", r.gap},
             {"max_kkt", r.max_kkt}, {"wall_time", r.wall_time}, {"certificate", r.certificate},
             {"error", r.error}};
      out << j.dump() << '\n';
    }
}

void write_cjd_jsonl(const std::string& path, const std::vector<CjdTrialRecord>& recs) {
  auto out = open_out(path);
  for (const auto& r : recs) {
    Json j{{"param", r.param},
           {"trial", r.trial},
           {"seed", r.seed},
           {"commuting_distance", r.commuting_distance},
           {"sdp_status", r.sdp_status},
           {"p_sdp", r.p_sdp},
           {"p_stmm", r.p_stmm},
           {"gap", r.gap},
           {"subspace_distance", r.subspace_distance},
           {"rop_error", r.rop_error},
           {"tight", r.tight},
           {"stmm_status", r.stmm_status},
           {"stmm_iters", r.stmm_iters},
           {"certificate", r.certificate},
           {"classification", r.classification},
           {"marker", r.marker},
           {"error", r.error}};
    out << j.dump() << '\n';
  }
}

void write_cjd_tsv(const std::string& path, const std::vector<CjdTrialRecord>& recs) {
  auto out = open_out(path);
  out << "# param\tcommuting_distance\tgap\tsubspace_distance\tmarker\n";
  for (const auto& r : recs)
    out << r.param << '\t' << r.commuting_distance << '\t' << r.gap << '\t' << r.subspace_distance << '\t'
        << r.marker << '\n';
}

void write_bench_csv(const std::string& path, const std::vector<BenchCell>& cells) {
  auto out = open_out(path);
  out << "d,k,trials,skipped,sdp_median,sdp_std,stmm_cert_median,stmm_cert_std,ratio\n";
  for (const auto& c : cells)
    out << c.d << ',' << c.k << ',' << c.trials << ',' << c.skipped << ',' << c.sdp_median << ',' << c.sdp_std << ','
        << c.stmm_median << ',' << c.stmm_std << ',' << c.ratio << '\n';
}

}  // namespace hetquad::harness
