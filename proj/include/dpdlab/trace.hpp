#pragma once

// CSV traces and run summaries.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

namespace dpdlab {

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Feasibility tolerance on max_s [sum_i g_i]_s and on rho.
inline constexpr double kFeasTol = 1e-6;

struct TraceRow {
  std::int64_t t = 0;
  double cost = 0.0;
  double cost_err = 0.0;
  double max_coupling = 0.0;
  double max_rho = 0.0;
  double sum_y_inf = 0.0;
  int active_edges = 0;
  std::optional<double> pz_gap;
  std::string algorithm;
};

inline double normalized_error(double cost, double f_star) {
  return std::abs(cost - f_star) / std::max(std::abs(f_star), std::numeric_limits<double>::min());
}

enum class TraceLayout { plain, paired, dual };

/// Writes every round below `dense_until`, then every `stride` rounds. The
/// caller forces the final row.
class CsvTrace {
 public:
  CsvTrace(std::ostream& out, TraceLayout layout, std::int64_t stride = 10, std::int64_t dense_until = 10000)
      : out_(&out), layout_(layout), stride_(stride < 1 ? 1 : stride), dense_until_(dense_until) {
    *out_ << "t,cost,cost_err,max_coupling,max_rho,sum_y_inf,active_edges";
    if (layout_ == TraceLayout::paired) *out_ << ",pz_gap";
    if (layout_ == TraceLayout::dual) *out_ << ",algorithm";
    *out_ << '\n';
  }

  bool due(std::int64_t t) const { return t < dense_until_ || t % stride_ == 0; }

  void offer(const TraceRow& r, bool force = false) {
    if (force || due(r.t)) write(r);
  }

  void write(const TraceRow& r) {
    if (r.t == last_written_) return;
    last_written_ = r.t;
    *out_ << r.t << ',' << format_double(r.cost) << ',' << format_double(r.cost_err) << ','
          << format_double(r.max_coupling) << ',' << format_double(r.max_rho) << ',' << format_double(r.sum_y_inf)
          << ',' << r.active_edges;
    if (layout_ == TraceLayout::paired) *out_ << ',' << format_double(r.pz_gap.value_or(0.0));
    if (layout_ == TraceLayout::dual) *out_ << ',' << r.algorithm;
    *out_ << '\n';
  }

  void flush() { out_->flush(); }

 private:
  std::ostream* out_;
  TraceLayout layout_;
  std::int64_t stride_;
  std::int64_t dense_until_;
  std::int64_t last_written_ = -1;
};

/// Exact per-run aggregates, independent of the trace stride.
struct RunSummary {
  double f_star = 0.0;
  std::int64_t rounds = 0;
  double final_cost = 0.0;
  double final_cost_err = 0.0;
  double final_max_coupling = 0.0;
  double final_max_rho = 0.0;
  std::int64_t first_feasible_round = -1;
  std::int64_t first_rho_zero_round = -1;
  double max_sum_y = 0.0;
  double max_mu_l1 = 0.0;
  std::optional<double> max_pz_gap;
  double best_cost = std::numeric_limits<double>::infinity();

  void observe(const TraceRow& r, double mu_l1) {
    rounds = r.t + 1;
    final_cost = r.cost;
    final_cost_err = r.cost_err;
    final_max_coupling = r.max_coupling;
    final_max_rho = r.max_rho;
    if (first_feasible_round < 0 && r.max_coupling <= kFeasTol) first_feasible_round = r.t;
    if (first_rho_zero_round < 0 && r.max_rho <= kFeasTol) first_rho_zero_round = r.t;
    max_sum_y = std::max(max_sum_y, r.sum_y_inf);
    max_mu_l1 = std::max(max_mu_l1, mu_l1);
    if (r.pz_gap) max_pz_gap = std::max(max_pz_gap.value_or(0.0), *r.pz_gap);
    best_cost = std::min(best_cost, r.cost);
  }

  nlohmann::json to_json(const nlohmann::json& config) const {
    auto round_or_null = [](std::int64_t r) { return r < 0 ? nlohmann::json(nullptr) : nlohmann::json(r); };
    nlohmann::json j = {{"f_star", f_star},
                        {"rounds", rounds},
                        {"final_cost", final_cost},
                        {"final_cost_err", final_cost_err},
                        {"final_max_coupling", final_max_coupling},
                        {"final_max_rho", final_max_rho},
                        {"first_feasible_round", round_or_null(first_feasible_round)},
                        {"first_rho_zero_round", round_or_null(first_rho_zero_round)},
                        {"max_sum_y", max_sum_y},
                        {"max_mu_l1", max_mu_l1},
                        {"best_cost", best_cost},
                        {"feasibility_tol", kFeasTol},
                        {"config", config}};
    if (max_pz_gap) j["max_pz_gap"] = *max_pz_gap;
    return j;
  }
};

}  // namespace dpdlab
