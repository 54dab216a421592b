#pragma once

// One configured run of any algorithm: CSV trace plus exact summary.

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "dpdlab/baseline.hpp"
#include "dpdlab/blocksub.hpp"
#include "dpdlab/dpd.hpp"
#include "dpdlab/instances.hpp"
#include "dpdlab/parallel.hpp"
#include "dpdlab/trace.hpp"

namespace dpdlab {

enum class Algorithm { dpd, block, dual, paired };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::dpd: return "dpd";
    case Algorithm::block: return "block";
    case Algorithm::dual: return "dual";
    case Algorithm::paired: return "paired";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "dpd") return Algorithm::dpd;
  if (s == "block") return Algorithm::block;
  if (s == "dual") return Algorithm::dual;
  if (s == "paired") return Algorithm::paired;
  throw Error(Errc::parse_error, "unknown algorithm " + s);
}

struct RunConfig {
  Algorithm alg = Algorithm::dpd;
  std::optional<StepSchedule> schedule;   // instance default when empty
  std::optional<double> M;                // instance default when empty and !auto_M
  bool auto_M = false;
  double margin = 3.0;
  std::int64_t T = 1000;
  int workers = 1;
  std::int64_t stride = 10;
  std::optional<InitPreset> y0;
};

struct ChosenM {
  double M = 0.0;
  std::string source;   // "explicit", "default" or "auto"
  std::optional<double> threshold;
};

/// Auto-M is threshold times margin, floored at 1.
inline ChosenM choose_m(const Instance& inst, const RunConfig& cfg) {
  ChosenM out;
  if (cfg.auto_M) {
    if (inst.slater.points.empty()) throw Error(Errc::invalid_argument, "auto M needs a Slater point");
    const auto mb = m_lower_bound(inst.problem, inst.slater);
    out.threshold = mb.threshold;
    out.M = std::max(mb.threshold * cfg.margin, 1.0);
    out.source = "auto";
  } else if (cfg.M) {
    out.M = *cfg.M;
    out.source = "explicit";
  } else {
    out.M = inst.defaults.M;
    out.source = "default";
  }
  if (!(out.M > 0.0)) throw Error(Errc::invalid_argument, "penalty M must be positive");
  return out;
}

struct RunResult {
  RunSummary summary;
  nlohmann::json config;
};

/// Runs cfg.T rounds and streams the trace. f_star is solved centrally
/// unless supplied.
inline RunResult run_instance(const Instance& inst, const RunConfig& cfg, std::ostream& csv,
                              std::optional<double> f_star = std::nullopt) {
  if (cfg.T < 1) throw Error(Errc::invalid_argument, "T must be at least 1");
  if (inst.network.graph.num_agents() != inst.problem.num_agents()) {
    throw Error(Errc::invalid_argument, "instance has no matching network");
  }
  const auto chosen = choose_m(inst, cfg);
  const StepSchedule sched = cfg.schedule.value_or(inst.defaults.schedule);
  const InitPreset y0 = cfg.y0.value_or(inst.defaults.y0);
  const auto init = init_state(inst.problem, y0);

  RunResult res;
  res.summary.f_star = f_star ? *f_star : centralized_reference(inst.problem).f_star;
  res.config = {{"instance", inst.name},
                {"provenance", inst.provenance},
                {"alg", to_string(cfg.alg)},
                {"sched", sched.to_string()},
                {"M", chosen.M},
                {"M_source", chosen.source},
                {"T", cfg.T},
                {"workers", cfg.workers},
                {"stride", cfg.stride},
                {"y0", to_string(y0)}};
  if (chosen.threshold) {
    res.config["M_threshold"] = *chosen.threshold;
    res.config["M_margin"] = cfg.margin;
  }
  if (cfg.alg == Algorithm::paired) res.config["dpd_sched"] = sched.scaled(2.0).to_string();

  std::unique_ptr<WorkerPool> pool;
  if (cfg.workers > 1) pool = std::make_unique<WorkerPool>(cfg.workers);
  const TraceLayout layout = cfg.alg == Algorithm::paired ? TraceLayout::paired
                             : cfg.alg == Algorithm::dual ? TraceLayout::dual
                                                          : TraceLayout::plain;
  CsvTrace out(csv, layout, cfg.stride);
  auto& summary = res.summary;

  auto emit = [&](const RoundTrace& tr, std::optional<double> pz_gap) {
    TraceRow row{tr.t, tr.cost, normalized_error(tr.cost, summary.f_star), tr.max_coupling(), tr.max_rho(),
                 tr.sum_y_inf, tr.active_edges, pz_gap, ""};
    summary.observe(row, tr.max_mu_l1());
    out.offer(row, tr.t + 1 == cfg.T);
  };

  switch (cfg.alg) {
    case Algorithm::dpd: {
      DpdEngine eng(inst.problem, inst.network, sched, chosen.M, init, pool.get());
      while (eng.t() < cfg.T) emit(eng.run_round(), std::nullopt);
      break;
    }
    case Algorithm::block: {
      BlockMethod bm(inst.problem, inst.network, sched, chosen.M, lift(init.y, inst.network.graph), 0, pool.get());
      while (bm.t() < cfg.T) emit(bm.run_round(), std::nullopt);
      break;
    }
    case Algorithm::paired: {
      PairedRun run(inst.problem, inst.network, sched, chosen.M, lift(init.y, inst.network.graph), pool.get());
      for (std::int64_t t = 0; t < cfg.T; ++t) {
        const double gap = run.step();
        emit(run.dpd_trace(), gap);
      }
      break;
    }
    case Algorithm::dual: {
      DualSubgradient ds(inst.problem, inst.network, sched, pool.get());
      for (std::int64_t t = 0; t < cfg.T; ++t) {
        const auto& tr = ds.run_round();
        TraceRow row{tr.t, tr.cost, normalized_error(tr.cost, summary.f_star), tr.max_coupling(), 0.0, 0.0,
                     tr.active_edges, std::nullopt, "dual"};
        summary.observe(row, 0.0);
        out.offer(row, tr.t + 1 == cfg.T);
      }
      break;
    }
  }
  out.flush();
  return res;
}

}  // namespace dpdlab
