// Acceptance checks. Prints one PASS/FAIL line per criterion on stdout,
// progress on stderr. Pass criterion numbers as arguments to run a subset.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dpdlab/dpdlab.hpp"
#include "dpdlab/runner.hpp"
#include "oracles.hpp"

using namespace dpdlab;

namespace {

// Pinned tolerances.
constexpr double kPairedGapTol = 1e-9;
constexpr double kConservationTol = 1e-9;
constexpr double kMultiplierSlack = 1e-8;
constexpr double kCostErrTarget = 1e-2;
constexpr double kCouplingTol = 1e-6;
constexpr double kRhoTol = 1e-6;
constexpr double kRateSlack = 1e-3;   // times |f*|
constexpr double kLpObjTol = 1e-7;
constexpr double kKktTol = 1e-8;
constexpr double kPiSumTol = 1e-10;

constexpr int kBasicSeeds = 20;
constexpr std::int64_t kBasicRounds = 50000;
constexpr int kBasicSeedsNeeded = 18;
constexpr int kPevSeeds = 10;
constexpr int kPevN = 50;
constexpr std::int64_t kPevRounds = 500;
constexpr int kPevSeedsNeeded = 8;
constexpr std::int64_t kRhoCap = 3000;
constexpr std::int64_t kProxyRounds = 1000000;
constexpr std::int64_t kConstRounds = 100000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string name;
  std::string detail;
};

std::map<int, Outcome> results;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  results[id] = {pass, name, detail};
  std::fprintf(stderr, "  -> %s %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
}

// Worst conservation error and multiplier excess over every allocation run.
struct Watch {
  double sum_y = 0.0;
  double mu_excess = -std::numeric_limits<double>::infinity();
  int runs = 0;
  std::set<std::string> covered;

  void round(const RoundTrace& tr, double M) {
    sum_y = std::max(sum_y, tr.sum_y_inf);
    mu_excess = std::max(mu_excess, tr.max_mu_l1() - M);
  }
  void finish(const std::vector<VectorXd>& y, const std::string& tag) {
    sum_y = std::max(sum_y, allocation_sum(y).lpNorm<Eigen::Infinity>());
    ++runs;
    covered.insert(tag);
  }
} watch;

std::map<std::string, double> f_star_cache;

double f_star(const Instance& inst, const std::string& key) {
  auto it = f_star_cache.find(key);
  if (it != f_star_cache.end()) return it->second;
  const double f = centralized_reference(inst.problem).f_star;
  f_star_cache[key] = f;
  return f;
}

std::string basic_key(std::uint64_t s) { return "basic/" + std::to_string(s); }
std::string pev_key(std::uint64_t s) { return "pev50/" + std::to_string(s); }

// ---------------------------------------------------------------------------

void criterion1() {
  const auto t0 = Clock::now();
  const auto inst = gen_basic(1);
  double worst = 0.0;
  for (InitPreset y0 : {InitPreset::zero, InitPreset::asym}) {
    const auto z0 = lift(init_state(inst.problem, y0).y, inst.network.graph);
    PairedRun run(inst.problem, inst.network, inst.defaults.schedule, inst.defaults.M, z0);
    worst = std::max(worst, run.gap());
    for (int t = 0; t < 200; ++t) {
      worst = std::max(worst, run.step());
      watch.round(run.dpd_trace(), inst.defaults.M);
    }
    watch.finish(run.dpd().allocations(), "basic/paired");
  }
  const double secs = seconds_since(t0);
  report(1, "oracle equivalence", worst <= kPairedGapTol && secs < 30.0,
         fmt("max_t ||y - Pi z||_inf = %.3g (tol %.0e) over 2 x 200 rounds in %.1f s (limit 30 s)", worst,
             kPairedGapTol, secs));
}

void criterion4() {
  int ok = 0;
  std::vector<double> finals;
  for (int s = 1; s <= kBasicSeeds; ++s) {
    const auto inst = gen_basic(s);
    const double fs = f_star(inst, basic_key(s));
    DpdEngine eng(inst.problem, inst.network, inst.defaults.schedule, inst.defaults.M,
                  init_state(inst.problem, inst.defaults.y0));
    double best_err = std::numeric_limits<double>::infinity();
    RoundTrace last;
    while (eng.t() < kBasicRounds) {
      last = eng.run_round();
      watch.round(last, inst.defaults.M);
      best_err = std::min(best_err, normalized_error(last.cost, fs));
    }
    watch.finish(eng.allocations(), "basic/dpd");
    const bool pass = best_err < kCostErrTarget && last.max_coupling() <= kCouplingTol;
    ok += pass;
    finals.push_back(normalized_error(last.cost, fs));
    std::fprintf(stderr, "  basic seed %d: best err %.4g, final err %.4g, final coupling %.3g\n", s, best_err,
                 finals.back(), last.max_coupling());
  }
  std::sort(finals.begin(), finals.end());
  report(4, "basic example convergence", ok >= kBasicSeedsNeeded,
         fmt("%d/%d seeds reach err < %.0e within %lld rounds with final coupling <= %.0e (need %d); final err "
             "min %.4g median %.4g max %.4g",
             ok, kBasicSeeds, kCostErrTarget, static_cast<long long>(kBasicRounds), kCouplingTol, kBasicSeedsNeeded,
             finals.front(), finals[finals.size() / 2], finals.back()));
}

void pev_conservation_runs(int first, int last) {
  // Extra charging runs so that conservation covers 20 seeds.
  for (int s = first; s <= last; ++s) {
    const auto inst = gen_pev(s, kPevN);
    DpdEngine eng(inst.problem, inst.network, inst.defaults.schedule, inst.defaults.M,
                  init_state(inst.problem, InitPreset::asym));
    while (eng.t() < 100) watch.round(eng.run_round(), inst.defaults.M);
    watch.finish(eng.allocations(), "pev/dpd");
  }
}

void criterion5() {
  int dpd_ok = 0, dual_ok = 0;
  std::string rounds;
  for (int s = 1; s <= kPevSeeds; ++s) {
    const auto inst = gen_pev(s, kPevN);
    std::int64_t dpd_first = -1, dual_first = -1;
    DpdEngine eng(inst.problem, inst.network, inst.defaults.schedule, inst.defaults.M,
                  init_state(inst.problem, inst.defaults.y0));
    while (eng.t() < kPevRounds) {
      const auto& tr = eng.run_round();
      watch.round(tr, inst.defaults.M);
      if (dpd_first < 0 && tr.max_coupling() <= kCouplingTol) dpd_first = tr.t;
    }
    watch.finish(eng.allocations(), "pev/dpd");
    DualSubgradient ds(inst.problem, inst.network, inst.defaults.schedule);
    for (std::int64_t t = 0; t < kPevRounds && dual_first < 0; ++t) {
      const auto& tr = ds.run_round();
      if (tr.max_coupling() <= kCouplingTol) dual_first = tr.t;
    }
    dpd_ok += dpd_first >= 0;
    dual_ok += dual_first >= 0;
    rounds += fmt(" %lld/%lld", static_cast<long long>(dpd_first), static_cast<long long>(dual_first));
    std::fprintf(stderr, "  pev seed %d: first feasible dpd %lld, dual %lld\n", s, static_cast<long long>(dpd_first),
                 static_cast<long long>(dual_first));
  }
  report(5, "PEV feasibility",
         dpd_ok >= kPevSeedsNeeded && dual_ok >= kPevSeedsNeeded,
         fmt("feasible within %lld rounds: dpd %d/%d, dual %d/%d (need %d each); first rounds dpd/dual:%s",
             static_cast<long long>(kPevRounds), dpd_ok, kPevSeeds, dual_ok, kPevSeeds, kPevSeedsNeeded,
             rounds.c_str()));
}

void criterion6() {
  const auto t0 = Clock::now();
  const auto inst = gen_basic(1);
  const double fs = f_star(inst, basic_key(1));
  const double M = inst.defaults.M;
  const auto& sigma = inst.network.activation.sigma();
  const double C = subgradient_bound(inst.problem.s_dim, M, sigma).C;
  const BlockVector z0(inst.network.graph.num_edges(), inst.problem.s_dim);

  auto run = [&](const StepSchedule& sched, std::int64_t T, BlockVector* z_end) {
    std::vector<MetricRow> rows;
    rows.reserve(T);
    BlockMethod bm(inst.problem, inst.network, sched, M, z0);
    double best = std::numeric_limits<double>::infinity();
    while (bm.t() < T) {
      const auto& tr = bm.run_round();
      watch.round(tr, M);
      best = std::min(best, tr.cost);
      MetricRow r;
      r.t = tr.t;
      r.cost = tr.cost;
      r.f_best = best;
      rows.push_back(r);
    }
    watch.finish(project_down(bm.z(), inst.network.graph), "basic/block");
    if (z_end) *z_end = bm.z();
    return rows;
  };

  // The harmonic run doubles as the z* proxy.
  BlockVector z_proxy;
  const auto harm = StepSchedule::harmonic(0.5);
  const auto harm_rows = run(harm, kProxyRounds, &z_proxy);
  const double proxy_value = block_subgradient(z_proxy, inst.problem, inst.network.graph, M).p_tilde;
  const std::string proxy = fmt("final z of a %lld-round harm:0.5 block run from z0 = 0, seed 1",
                                static_cast<long long>(kProxyRounds));
  const auto harm_rep = rate_bounds(harm_rows, fs, harm, z0, z_proxy, sigma, C, proxy);

  const auto cnst = StepSchedule::constant(0.01);
  const auto const_rows = run(cnst, kConstRounds, nullptr);
  const auto const_rep = rate_bounds(const_rows, fs, cnst, z0, z_proxy, sigma, C, proxy);

  // Exact minimizer of p~: lift of the allocation y_i = g_i(x_i*) - s/N with
  // s = sum_i g_i(x_i*) <= 0, so every agent stays feasible with rho = 0.
  const auto ref = centralized_reference(inst.problem);
  std::vector<VectorXd> y_star;
  for (int i = 0; i < inst.problem.num_agents(); ++i) {
    y_star.push_back(inst.problem.agents[i].coupling(ref.x[i].head(inst.problem.agents[i].dim())));
  }
  const VectorXd shift = allocation_sum(y_star) / inst.problem.num_agents();
  for (auto& y : y_star) y -= shift;
  const auto z_exact = lift(y_star, inst.network.graph);
  const double exact_value = block_subgradient(z_exact, inst.problem, inst.network.graph, M).p_tilde;
  const std::string exact = "lift of the centralized optimal allocation";
  const auto harm_exact = rate_bounds(harm_rows, fs, harm, z0, z_exact, sigma, C, exact);
  const auto const_exact = rate_bounds(const_rows, fs, cnst, z0, z_exact, sigma, C, exact);

  const double slack = kRateSlack * std::abs(fs);
  const bool exact_is_minimizer = std::abs(exact_value - fs) <= 1e-6 * std::abs(fs);
  report(6, "rate bounds", exact_is_minimizer && const_exact.holds(slack) && harm_exact.holds(slack),
         fmt("max(f_best - f* - bound) with exact z* (p~ - f* = %.2g, ||z0 - z*||_W^2 = %.4g): const:0.01 %.4g "
             "over %lld rounds, harm:0.5 %.4g over %lld rounds; slack %.4g, C = %.4g. With the long-run proxy "
             "(p~ - f* = %.3g, ||z0 - z*||_W^2 = %.4g): const %.4g, harm %.4g (%.0f s)",
             exact_value - fs, const_exact.dist_sq, const_exact.max_excess, static_cast<long long>(kConstRounds),
             harm_exact.max_excess, static_cast<long long>(kProxyRounds), slack, C, proxy_value - fs,
             const_rep.dist_sq, const_rep.max_excess, harm_rep.max_excess, seconds_since(t0)));
}

void criterion7() {
  int ok = 0;
  std::string detail;
  for (int s = 1; s <= kPevSeeds; ++s) {
    const auto inst = gen_pev(s, kPevN);
    const auto init = init_state(inst.problem, InitPreset::asym);
    std::vector<std::int64_t> first;
    for (double M : {10.0, 20.0, 30.0}) {
      DpdEngine eng(inst.problem, inst.network, inst.defaults.schedule, M, init);
      std::int64_t hit = -1;
      while (eng.t() < kRhoCap && hit < 0) {
        const auto& tr = eng.run_round();
        watch.round(tr, M);
        if (tr.max_rho() <= kRhoTol) hit = tr.t;
      }
      first.push_back(hit);
    }
    auto key = [](std::int64_t r) { return r < 0 ? std::numeric_limits<std::int64_t>::max() : r; };
    const bool mono = first[2] >= 0 && key(first[0]) >= key(first[1]) && key(first[1]) >= key(first[2]);
    ok += mono;
    auto show = [](std::int64_t r) { return r < 0 ? std::string("never") : std::to_string(r); };
    detail += fmt(" [%s,%s,%s]", show(first[0]).c_str(), show(first[1]).c_str(), show(first[2]).c_str());
    std::fprintf(stderr, "  pev seed %d asym: max rho <= %.0e first at M=10 %s, M=20 %s, M=30 %s\n", s, kRhoTol,
                 show(first[0]).c_str(), show(first[1]).c_str(), show(first[2]).c_str());
  }
  report(7, "monotone effect of M", 2 * ok > kPevSeeds,
         fmt("%d/%d seeds non-increasing over M = 10, 20, 30 (cap %lld rounds, never counts as later than any "
             "round); rounds:%s",
             ok, kPevSeeds, static_cast<long long>(kRhoCap), detail.c_str()));
}

void criterion8() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nv(1, 8);
  double worst_obj = 0.0, worst_kkt = 0.0;
  int solved = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = nv(rng);
    const int rows = std::uniform_int_distribution<int>(n + 1, 12)(rng);
    const auto lp = oracle::random_lp(rng, n, rows);
    const auto ref = oracle::vertex_enumeration(lp);
    const auto sol = lp::solve(lp);
    if (!ref || sol.status != lp::Status::optimal) continue;
    ++solved;
    worst_obj = std::max(worst_obj, std::abs(sol.objective - ref->objective) / (1.0 + std::abs(ref->objective)));
    worst_kkt = std::max(worst_kkt, lp::kkt_check(lp, sol).max());
  }
  report(8, "LP kernel", solved == 100 && worst_obj <= kLpObjTol && worst_kkt <= kKktTol,
         fmt("%d/100 optimal; worst |obj - vertex oracle|/(1+|obj|) %.3g (tol %.0e), worst KKT %.3g (tol %.0e)", solved,
             worst_obj, kLpObjTol, worst_kkt, kKktTol));
}

void criterion9() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd(0.0, 10.0);
  const auto basic = gen_basic(1);
  double worst_sum = 0.0;
  for (int k = 0; k < 1000; ++k) {
    BlockVector z(basic.network.graph.num_edges(), 3);
    for (int e = 0; e < z.data.size(); ++e) z.data[e] = nd(rng);
    worst_sum = std::max(worst_sum, allocation_sum(project_down(z, basic.network.graph)).lpNorm<Eigen::Infinity>());
  }
  int rank_ok = 0, kernel_ok = 0;
  for (int k = 0; k < 10; ++k) {
    const int N = 2 + 2 * k, S = 1 + k % 3;
    const auto g = erdos_renyi_connected(N, 0.3, rng);
    const MatrixXd gamma = incidence_matrix(g).cast<double>();
    rank_ok += oracle::gaussian_rank(gamma) == N - 1;
    // Pi' = Gamma kron I_S, kernel counted from singular values.
    MatrixXd pit = MatrixXd::Zero(g.num_edges() * S, N * S);
    for (int l = 0; l < g.num_edges(); ++l)
      for (int i = 0; i < N; ++i) pit.block(l * S, i * S, S, S) = gamma(l, i) * MatrixXd::Identity(S, S);
    Eigen::JacobiSVD<MatrixXd> svd(pit);
    const auto& sv = svd.singularValues();
    int kernel = static_cast<int>(pit.cols() - sv.size());
    for (int j = 0; j < sv.size(); ++j) kernel += sv[j] <= 1e-9;
    kernel_ok += kernel == S;
  }
  report(9, "Pi properties", worst_sum <= kPiSumTol && rank_ok == 10 && kernel_ok == 10,
         fmt("max ||sum_i [Pi z]_i||_inf = %.3g over 1000 draws (tol %.0e); rank(Gamma) = N-1 on %d/10 graphs, "
             "dim Ker(Pi') = S on %d/10 graphs (N up to 20)",
             worst_sum, kPiSumTol, rank_ok, kernel_ok));
}

void criterion10() {
  const auto inst = gen_pev(3, kPevN);
  const double fs = f_star(inst, pev_key(3));
  bool same = true;
  std::string detail;
  for (Algorithm alg : {Algorithm::dpd, Algorithm::block, Algorithm::dual, Algorithm::paired}) {
    std::string csv[2];
    int k = 0;
    for (int workers : {1, 4}) {
      RunConfig cfg;
      cfg.alg = alg;
      cfg.T = 60;
      cfg.workers = workers;
      cfg.y0 = InitPreset::asym;
      std::ostringstream os;
      run_instance(inst, cfg, os, fs);
      csv[k++] = os.str();
    }
    const bool eq = csv[0] == csv[1] && !csv[0].empty();
    same = same && eq;
    detail += fmt(" %s:%s(%zu bytes)", to_string(alg), eq ? "identical" : "DIFFERENT", csv[0].size());
  }
  report(10, "determinism", same, fmt("trace CSV with 1 vs 4 workers, PEV N=50 seed 3, 60 rounds:%s", detail.c_str()));
}

void criteria2and3(bool ran_all) {
  std::string covered;
  for (const auto& c : watch.covered) covered += " " + c;
  const std::string note = ran_all ? "" : " (subset run)";
  report(2, "conservation", watch.runs > 0 && watch.sum_y <= kConservationTol,
         fmt("max_t ||sum_i y_i||_inf = %.3g (tol %.0e) over %d allocation runs:%s; dual has no allocations%s",
             watch.sum_y, kConservationTol, watch.runs, covered.c_str(), note.c_str()));
  report(3, "multiplier bound", watch.runs > 0 && watch.mu_excess <= kMultiplierSlack,
         fmt("max(||mu_i||_1 - M) = %.3g (slack %.0e) over the same runs%s", watch.mu_excess, kMultiplierSlack,
             note.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
  auto want = [&](int id) { return only.empty() || only.count(id); };

  const std::vector<std::pair<int, std::function<void()>>> steps = {
      {8, criterion8}, {9, criterion9}, {1, criterion1}, {10, criterion10}, {5, criterion5},
      {7, criterion7}, {4, criterion4}, {6, criterion6}};
  const auto t0 = Clock::now();
  for (const auto& [id, fn] : steps) {
    if (!want(id)) continue;
    std::fprintf(stderr, "criterion %d ...\n", id);
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, "error", false, std::string("exception: ") + e.what());
    }
  }
  if (want(2) || want(3)) {
    std::fprintf(stderr, "criteria 2 and 3 ...\n");
    if (watch.covered.count("basic/dpd") == 0) {
      for (int s = 1; s <= kBasicSeeds; ++s) {
        const auto inst = gen_basic(s);
        DpdEngine eng(inst.problem, inst.network, inst.defaults.schedule, inst.defaults.M,
                      init_state(inst.problem, InitPreset::asym));
        while (eng.t() < 2000) watch.round(eng.run_round(), inst.defaults.M);
        watch.finish(eng.allocations(), "basic/dpd");
      }
    }
    pev_conservation_runs(want(5) ? kPevSeeds + 1 : 1, 2 * kPevSeeds);
    // Block runs on both instances from asymmetric starts.
    for (int s = 1; s <= kBasicSeeds; ++s) {
      const auto inst = gen_basic(s);
      BlockMethod bm(inst.problem, inst.network, inst.defaults.schedule, inst.defaults.M,
                     lift(init_state(inst.problem, InitPreset::asym).y, inst.network.graph));
      while (bm.t() < 1000) watch.round(bm.run_round(), inst.defaults.M);
      watch.finish(project_down(bm.z(), inst.network.graph), "basic/block");
    }
    for (int s = 1; s <= 2 * kPevSeeds; ++s) {
      const auto inst = gen_pev(s, kPevN);
      BlockMethod bm(inst.problem, inst.network, inst.defaults.schedule, inst.defaults.M,
                     lift(init_state(inst.problem, InitPreset::asym).y, inst.network.graph));
      while (bm.t() < 50) watch.round(bm.run_round(), inst.defaults.M);
      watch.finish(project_down(bm.z(), inst.network.graph), "pev/block");
    }
    criteria2and3(only.empty());
  }

  int failures = 0;
  for (const auto& [id, o] : results) {
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, o.name.c_str(), o.detail.c_str());
    failures += !o.pass;
  }
  std::printf("%d/%zu criteria passed in %.0f s\n", static_cast<int>(results.size()) - failures, results.size(),
              seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
