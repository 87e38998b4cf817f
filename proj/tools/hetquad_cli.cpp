// Command-line front end: instance generation, single solves, certification
// and the experiment sweeps.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "hetquad/diagonal.hpp"
#include "hetquad/generators.hpp"
#include "hetquad/harness.hpp"
#include "hetquad/io.hpp"
#include "hetquad/parallel.hpp"
#include "hetquad/rng.hpp"

using namespace hetquad;
namespace fs = std::filesystem;

namespace {

struct Global {
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir = ".";
  bool tolerate_failures = false;
  int failures = 0;
};

std::string in_dir(const Global& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

io::Json parse_params(const std::string& s) {
  if (s.empty()) return io::Json::object();
  try {
    return io::Json::parse(s);
  } catch (const io::Json::parse_error& e) {
    throw FormatError(std::string("--params: ") + e.what());
  }
}

void cmd_gen(const std::string& family, const std::string& params_s, const std::string& out, Global& g) {
  const io::Json p = parse_params(params_s);
  const std::uint64_t seed = p.value("seed", g.seed);
  io::Json doc;
  if (family == "hppca") {
    io::Json mj = p;
    mj["seed"] = seed;
    if (!mj.contains("lambdas")) {
      const Vector l = default_lambdas(mj.at("k").get<int>());
      mj["lambdas"] = std::vector<double>(l.data(), l.data() + l.size());
    }
    if (!mj.contains("variances")) mj["variances"] = {1.0, 4.0};
    if (!mj.contains("group_sizes")) mj["group_sizes"] = {100, 400};
    const HppcaModel m = io::model_from_json(mj);
    ProblemInstance c = build_instance(m, sample(m));
    if (p.value("normalize", true)) c = normalize_instance(c);
    doc = io::instance_to_json(c, {{"family", "hppca"}, {"model", io::model_to_json(m)}});
  } else if (family == "randpsd") {
    const int d = p.at("d"), k = p.at("k");
    doc = io::instance_to_json(gen_random_psd(d, k, p.value("rank", k), seed),
                               {{"family", "randpsd"}, {"seed", seed}});
  } else if (family == "cjd") {
    const int d = p.at("d"), k = p.at("k");
    doc = io::instance_to_json(
        gen_cjd(d, k, p.value("r", 3), p.value("sigma", 1e-3), seed, p.value("literal_index", false)),
        {{"family", "cjd"}, {"seed", seed}, {"params", p}});
  } else if (family == "nested") {
    const int d = p.at("d"), k = p.at("k");
    NestedInstance e = p.contains("coeffs")
                              ? gen_nested(d, k, io::matrix_from_json(p["coeffs"], k, k), seed)
                              : gen_nested(d, k, seed);
    doc = io::instance_to_json(e.instance, {{"family", "nested"}, {"seed", seed}, {"known_optimum", e.known_optimum}});
  } else if (family == "fixture") {
    auto [x1, x2] = non_rank_one_fixture();
    doc = io::instance_to_json(ProblemInstance({x1, x2}), {{"family", "fixture"}, {"note", "primal blocks X1, X2"}});
  } else {
    throw PreconditionViolation("gen: unknown family " + family);
  }
  io::write_json_file(out, doc);
}

void cmd_solve_sdp(const std::string& inst, const std::string& out, const std::string& backend, double tol,
                   Global& g) {
  SdpConfig cfg;
  cfg.tol = tol;
  cfg.backend = backend == "external" ? Backend::External : Backend::Builtin;
  const ProblemInstance c = io::instance_from_json(io::read_json_file(inst));
  const SolveReport r = solve_sdp(c, cfg);
  io::write_json_file(out, io::report_to_json(r));
  std::cout << to_string(r.status) << " value=" << r.value() << " gap=" << r.gap
            << " rop_error=" << (r.primal.x_blocks.empty() ? 0.0 : rop_error(r.primal.x_blocks)) << '\n';
  if (r.status == SolveStatus::NumericalFailure) ++g.failures;
}

void cmd_solve_stmm(const std::string& inst, int restarts, int max_iters, double grad_tol, const std::string& out,
                    const std::string& trace_csv, Global& g) {
  const ProblemInstance c = io::instance_from_json(io::read_json_file(inst));
  StmmConfig cfg{max_iters, grad_tol, g.seed};
  io::Json runs = io::Json::array();
  int best = -1;
  double best_obj = -std::numeric_limits<double>::infinity();
  std::vector<std::optional<IterateTrace>> traces(restarts);
  parallel_for(static_cast<std::size_t>(restarts), g.jobs, [&](std::size_t r) {
    Rng rng(derive_seed(g.seed, {r}));
    traces[r] = stmm_solve(c, random_stiefel(c.d(), c.k(), rng), cfg);
  });
  for (int r = 0; r < restarts; ++r) {
    const auto& tr = *traces[r];
    runs.push_back({{"restart", r},
                    {"status", to_string(tr.status)},
                    {"iterations", tr.iterations},
                    {"objective", tr.objectives.back()},
                    {"grad_norm", tr.grad_norms.back()},
                    {"perturbed_steps", tr.perturbed_steps},
                    {"point", io::point_to_json(tr.final)}});
    if (tr.objectives.back() > best_obj) {
      best_obj = tr.objectives.back();
      best = r;
    }
  }
  io::write_json_file(out, {{"runs", runs}, {"best", best}, {"best_point", runs[best]["point"]}, {"d", c.d()},
                            {"k", c.k()}, {"u", runs[best]["point"]["u"]}});
  if (!trace_csv.empty()) {
    std::ofstream t(trace_csv);
    t.precision(15);
    t << "restart,iter,objective,grad_norm\n";
    for (int r = 0; r < restarts; ++r)
      for (std::size_t i = 0; i < traces[r]->objectives.size(); ++i)
        t << r << ',' << i << ',' << traces[r]->objectives[i] << ',' << traces[r]->grad_norms[i] << '\n';
  }
  std::cout << "best objective=" << best_obj << " (restart " << best << ")\n";
}

void cmd_certify(const std::string& inst, const std::string& cand, const std::string& report, const std::string& out,
                 Global&) {
  const ProblemInstance c = io::instance_from_json(io::read_json_file(inst));
  const StiefelPoint u = io::point_from_json(io::read_json_file(cand));
  std::optional<SolveReport> rep;
  if (!report.empty()) rep = io::report_from_json(io::read_json_file(report));
  const CertificateResult res = certify(c, u, {}, rep ? &*rep : nullptr);
  io::write_json_file(out, io::certificate_to_json(res));
  std::cout << to_string(res.status) << " classification=" << to_string(res.classification) << '\n';
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_list(s)) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sums of heterogeneous quadratic forms on the Stiefel manifold"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--jobs", g.jobs, "Worker threads for trial-level parallelism");
  app.add_option("--out-dir", g.out_dir, "Directory for sweep outputs");
  app.add_flag("--tolerate-failures", g.tolerate_failures, "Exit 0 even if some solve failed numerically");

  std::string family, params, out, instance, backend = "builtin", candidate, report, trace_csv, center;
  double tol = 1e-8, grad_tol = 1e-10;
  int restarts = 10, max_iters = 2000, trials = 0, rank = 0, r = 3;
  std::string d_list, k_list, n_list, v_list = "1,4", scales, plist;
  bool fast = false, certify_tight = false;

  auto* gen = app.add_subcommand("gen", "Generate an instance");
  gen->add_option("--family", family, "hppca|randpsd|cjd|nested|fixture")->required();
  gen->add_option("--params", params, "JSON object of generator parameters");
  gen->add_option("--out", out)->required();

  auto* ssdp = app.add_subcommand("solve-sdp", "Solve the SDP relaxation");
  ssdp->add_option("--instance", instance)->required();
  ssdp->add_option("--out", out)->required();
  ssdp->add_option("--backend", backend)->check(CLI::IsMember({"builtin", "external"}));
  ssdp->add_option("--tol", tol);

  auto* sst = app.add_subcommand("solve-stmm", "Run StMM from random starts");
  sst->add_option("--instance", instance)->required();
  sst->add_option("--restarts", restarts);
  sst->add_option("--max-iters", max_iters);
  sst->add_option("--grad-tol", grad_tol);
  sst->add_option("--out", out)->required();
  sst->add_option("--trace-csv", trace_csv);

  auto* cert = app.add_subcommand("certify", "Check global optimality of a candidate");
  cert->add_option("--instance", instance)->required();
  cert->add_option("--candidate", candidate, "JSON with d, k, u (row-major)")->required();
  cert->add_option("--sdp-report", report);
  cert->add_option("--out", out)->required();

  auto* rop = app.add_subcommand("rop-table", "Fraction of trials with rank-one solutions");
  rop->add_option("--family", family)->check(CLI::IsMember({"hppca", "randpsd"}))->required();
  rop->add_option("--d", d_list, "Comma list")->required();
  rop->add_option("--k", k_list, "Comma list")->required();
  rop->add_option("--n", n_list, "Comma list of group sizes (hppca)");
  rop->add_option("--v", v_list, "Comma list of variances (hppca)");
  rop->add_option("--rank", rank, "Factor rank (randpsd, default k)");
  rop->add_option("--trials", trials);
  rop->add_flag("--fast", fast, "10 trials, d <= 30");
  rop->add_flag("--certify", certify_tight, "Certify the candidate of every tight solve");

  auto* cjd = app.add_subcommand("cjd-sweep", "SDP vs StMM over a sigma or n sweep");
  cjd->add_option("--family", family)->check(CLI::IsMember({"cjd", "hppca"}))->required();
  cjd->add_option("--params", plist, "Comma list of sigma (cjd) or n_1 (hppca)")->required();
  cjd->add_option("--d", d_list);
  cjd->add_option("--k", k_list);
  cjd->add_option("--r", r);
  cjd->add_option("--v", v_list);
  cjd->add_option("--trials", trials);
  cjd->add_option("--max-iters", max_iters);
  cjd->add_flag("--fast", fast);

  auto* diag = app.add_subcommand("diag-sweep", "Tightness around a diagonal center");
  diag->add_option("--center", center)->required();
  diag->add_option("--scales", scales)->required();
  diag->add_option("--trials", trials);
  diag->add_option("--out", out)->required();

  auto* bench = app.add_subcommand("bench", "Full SDP vs StMM + certificate timings");
  bench->add_option("--d", d_list)->required();
  bench->add_option("--k", k_list)->required();
  bench->add_option("--trials", trials);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      cmd_gen(family, params, out, g);
    } else if (*ssdp) {
      cmd_solve_sdp(instance, out, backend, tol, g);
    } else if (*sst) {
      cmd_solve_stmm(instance, restarts, max_iters, grad_tol, out, trace_csv, g);
    } else if (*cert) {
      cmd_certify(instance, candidate, report, out, g);
    } else if (*rop) {
      harness::RopOptions o;
      o.trials = trials > 0 ? trials : (fast ? 10 : 50);
      o.seed = g.seed;
      o.jobs = g.jobs;
      o.certify_tight = certify_tight;
      std::vector<harness::RopCell> cells;
      for (int k : parse_ints(k_list))
        for (int d : parse_ints(d_list)) {
          if (k > d || (fast && d > 30)) continue;
          harness::RopCell c =
              family == "hppca"
                  ? harness::run_rop_cell_hppca({d, k, parse_ints(n_list.empty() ? "100,400" : n_list), parse_list(v_list)}, o)
                  : harness::run_rop_cell_randpsd(d, k, rank > 0 ? rank : k, o);
          std::cout << c.family << " d=" << d << " k=" << k << " " << c.params << " fraction=" << c.fraction
                    << " failures=" << c.failures << '\n';
          g.failures += c.failures;
          cells.push_back(std::move(c));
        }
      harness::write_rop_csv(in_dir(g, "rop_table.csv"), cells);
      harness::write_rop_jsonl(in_dir(g, "rop_trials.jsonl"), cells);
    } else if (*cjd) {
      harness::CjdSweepSpec spec;
      spec.family = family;
      spec.params = parse_list(plist);
      if (!d_list.empty()) spec.d = parse_ints(d_list).front();
      if (!k_list.empty()) spec.k = parse_ints(k_list).front();
      spec.r = r;
      spec.v = parse_list(v_list);
      harness::CjdOptions o;
      o.trials = trials > 0 ? trials : (fast ? 10 : 20);
      o.seed = g.seed;
      o.jobs = g.jobs;
      o.stmm = family == "hppca" ? StmmConfig::hppca_preset() : StmmConfig::cjd_preset();
      if (cjd->count("--max-iters")) o.stmm.max_iters = max_iters;
      const auto recs = harness::run_cjd_sweep(spec, o);
      for (const auto& b : harness::summarize_cjd(recs)) {
        std::cout << "param=" << b.param << " median_delta=" << b.median_commuting_distance
                  << " tight=" << b.tight_fraction << " certified=" << b.certified_fraction
                  << " failures=" << b.failures << '\n';
        g.failures += b.failures;
      }
      harness::write_cjd_jsonl(in_dir(g, "cjd_trials.jsonl"), recs);
      harness::write_cjd_tsv(in_dir(g, "cjd_figure.tsv"), recs);
    } else if (*diag) {
      const ProblemInstance c = io::instance_from_json(io::read_json_file(center));
      std::ofstream csv(out);
      csv << "scale,trials,tight,failures,fraction_tight\n";
      for (double s : parse_list(scales)) {
        const SweepResult res = tightness_sweep(c, s, trials > 0 ? trials : 50, g.seed, {}, g.jobs);
        csv << s << ',' << res.trials << ',' << res.tight << ',' << res.failures << ',' << res.fraction_tight << '\n';
        std::cout << "scale=" << s << " fraction_tight=" << res.fraction_tight << " failures=" << res.failures << '\n';
        g.failures += res.failures;
      }
    } else if (*bench) {
      harness::BenchOptions o;
      o.trials = trials > 0 ? trials : 3;
      o.seed = g.seed;
      const auto cells = harness::run_bench(parse_ints(d_list), parse_ints(k_list), o);
      for (const auto& c : cells)
        std::cout << "d=" << c.d << " k=" << c.k << " sdp=" << c.sdp_median << "s stmm+cert=" << c.stmm_median
                  << "s ratio=" << c.ratio << '\n';
      harness::write_bench_csv(in_dir(g, "bench.csv"), cells);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  if (g.failures > 0 && !g.tolerate_failures) {
    std::cerr << g.failures << " solve(s) failed numerically\n";
    return 1;
  }
  return 0;
}
