#pragma once

// Per-round metrics and the sublinear rate bounds for the block method.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dpdlab/blocksub.hpp"
#include "dpdlab/dpd.hpp"
#include "dpdlab/error.hpp"
#include "dpdlab/instances.hpp"
#include "dpdlab/schedule.hpp"
#include "dpdlab/trace.hpp"

namespace dpdlab {

struct MetricRow {
  std::int64_t t = 0;
  double cost = 0.0;
  double cost_err = 0.0;
  double max_coupling = 0.0;
  double max_rho = 0.0;
  double sum_rho = 0.0;
  double f_best = 0.0;   // running minimum of cost
};

inline std::vector<MetricRow> metrics(const std::vector<RoundTrace>& trace, double f_star) {
  std::vector<MetricRow> rows;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tr : trace) {
    best = std::min(best, tr.cost);
    rows.push_back({tr.t, tr.cost, normalized_error(tr.cost, f_star), tr.max_coupling(), tr.max_rho(), tr.sum_rho(),
                    best});
  }
  return rows;
}

struct RateReport {
  std::vector<std::int64_t> t;
  std::vector<double> f_best_gap;   // f_best^t - f*
  std::vector<double> bound;
  double dist_sq = 0.0;             // ||z0 - z*||_W^2 with the proxy z*
  double C = 0.0;
  std::string proxy;                // provenance of z*
  double max_excess = -std::numeric_limits<double>::infinity();   // max_t gap - bound

  bool holds(double slack) const { return max_excess <= slack; }
};

/// Constant step a: ||z0 - z*||_W^2 / (2 a (t+1)) + C a / 2.
/// Harmonic K/(t+1): (||z0 - z*||_W^2 + C K^2) / (2 K log(t+2)).
inline double rate_bound(const StepSchedule& s, std::int64_t t, double dist_sq, double C) {
  const double tp = static_cast<double>(t);
  switch (s.kind) {
    case StepSchedule::Kind::constant: return dist_sq / (2.0 * s.K * (tp + 1.0)) + C * s.K / 2.0;
    case StepSchedule::Kind::harmonic: return (dist_sq + C * s.K * s.K) / (2.0 * s.K * std::log(tp + 2.0));
    case StepSchedule::Kind::power: break;
  }
  throw Error(Errc::schedule_unsupported, "rate bounds need a constant or harmonic step");
}

inline RateReport rate_bounds(const std::vector<MetricRow>& rows, double f_star, const StepSchedule& schedule,
                              const BlockVector& z0, const BlockVector& z_star, const std::vector<double>& sigma,
                              double C, std::string proxy) {
  if (schedule.kind == StepSchedule::Kind::power) {
    throw Error(Errc::schedule_unsupported, "rate bounds need a constant or harmonic step");
  }
  RateReport rep;
  BlockVector diff = z0;
  diff.data -= z_star.data;
  rep.dist_sq = w_norm_sq(diff, sigma);
  rep.C = C;
  rep.proxy = std::move(proxy);
  for (const auto& r : rows) {
    const double gap = r.f_best - f_star;
    const double b = rate_bound(schedule, r.t, rep.dist_sq, C);
    rep.t.push_back(r.t);
    rep.f_best_gap.push_back(gap);
    rep.bound.push_back(b);
    rep.max_excess = std::max(rep.max_excess, gap - b);
  }
  return rep;
}

}  // namespace dpdlab
