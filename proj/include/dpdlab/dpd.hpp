#pragma once

// Round-synchronous simulation of distributed primal decomposition. Each
// round every agent solves its relaxed subproblem with its own allocation,
// then agents exchange multipliers over the active edges and update
//
//   y_i <- y_i + alpha^t * sum_{j in N_i^t} (mu_i - mu_j).

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dpdlab/error.hpp"
#include "dpdlab/graph.hpp"
#include "dpdlab/local.hpp"
#include "dpdlab/model.hpp"
#include "dpdlab/parallel.hpp"
#include "dpdlab/schedule.hpp"

namespace dpdlab {

enum class InitPreset { zero, asym };

inline constexpr double kZeroSumTol = 1e-12;

struct AllocationState {
  std::int64_t t = 0;
  std::vector<VectorXd> y;
  VectorXd sum_y0;
};

inline VectorXd allocation_sum(const std::vector<VectorXd>& y) {
  VectorXd s = VectorXd::Zero(y.empty() ? 0 : y.front().size());
  for (const auto& v : y) s += v;
  return s;
}

/// y_i = 5 (N + 1 - 2i) 1 with 1-based i, which sums to zero.
inline std::vector<VectorXd> asym_allocation(int N, int S) {
  std::vector<VectorXd> y;
  for (int i = 1; i <= N; ++i) y.push_back(VectorXd::Constant(S, 5.0 * (N + 1 - 2 * i)));
  return y;
}

inline AllocationState init_state(const CoupledProblem& p, std::vector<VectorXd> y0) {
  if (static_cast<int>(y0.size()) != p.num_agents()) {
    throw Error(Errc::invalid_argument, "initial allocation needs one vector per agent");
  }
  for (const auto& v : y0) {
    if (v.size() != p.s_dim || !v.allFinite()) throw Error(Errc::invalid_argument, "bad initial allocation");
  }
  AllocationState st;
  st.sum_y0 = allocation_sum(y0);
  if (st.sum_y0.lpNorm<Eigen::Infinity>() > kZeroSumTol) {
    throw Error(Errc::non_zero_sum, "initial allocations must sum to zero");
  }
  st.y = std::move(y0);
  return st;
}

inline AllocationState init_state(const CoupledProblem& p, InitPreset preset) {
  if (preset == InitPreset::asym) return init_state(p, asym_allocation(p.num_agents(), p.s_dim));
  return init_state(p, std::vector<VectorXd>(p.num_agents(), VectorXd::Zero(p.s_dim)));
}

struct RoundTrace {
  std::int64_t t = 0;
  double alpha = 0.0;
  std::vector<double> p_value, rho, mu_l1;
  int active_edges = 0;
  double cost = 0.0;          // sum_i f_i(x_i) + M rho_i
  VectorXd coupling;          // sum_i g_i(x_i)
  double sum_y_inf = 0.0;     // ||sum_i y_i||_inf of the allocations used this round

  double max_coupling() const { return coupling.maxCoeff(); }
  double max_rho() const {
    double m = 0.0;
    for (double r : rho) m = std::max(m, r);
    return m;
  }
  double sum_rho() const {
    double s = 0.0;
    for (double r : rho) s += r;
    return s;
  }
  double max_mu_l1() const {
    double m = 0.0;
    for (double v : mu_l1) m = std::max(m, v);
    return m;
  }
};

/// Builds the trace of one round from the local solutions.
inline RoundTrace summarize_round(const CoupledProblem& p, const std::vector<LocalSolution>& sols, double M,
                                  std::int64_t t, double alpha, int active_edges, double sum_y_inf) {
  RoundTrace tr;
  tr.t = t;
  tr.alpha = alpha;
  tr.active_edges = active_edges;
  tr.sum_y_inf = sum_y_inf;
  tr.coupling = VectorXd::Zero(p.s_dim);
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto& s = sols[i];
    tr.p_value.push_back(s.p_value);
    tr.rho.push_back(s.rho);
    tr.mu_l1.push_back(s.mu.lpNorm<1>());
    tr.cost += p.agents[i].cost(s.x) + M * s.rho;
    tr.coupling += p.agents[i].coupling(s.x);
  }
  return tr;
}

/// One network node. It owns its allocation and sees other agents only
/// through the multipliers handed to update().
class Agent {
 public:
  Agent(const AgentModel& model, VectorXd y0) : model_(&model), y_(std::move(y0)) {}

  const LocalSolution& compute(double M, const lp::SolverOptions& opts) {
    sol_ = solve_local(*model_, y_, M, opts);
    return sol_;
  }

  /// What neighbors receive.
  const VectorXd& message() const { return sol_.mu; }

  /// neighbor_mu must be in ascending neighbor order.
  void update(double alpha, const std::vector<const VectorXd*>& neighbor_mu) {
    if (neighbor_mu.empty()) return;
    VectorXd acc = VectorXd::Zero(y_.size());
    for (const VectorXd* mu_j : neighbor_mu) acc += sol_.mu - *mu_j;
    y_ += alpha * acc;
  }

  const VectorXd& allocation() const { return y_; }
  const LocalSolution& solution() const { return sol_; }

 private:
  const AgentModel* model_;
  VectorXd y_;
  LocalSolution sol_;
};

class DpdEngine {
 public:
  DpdEngine(const CoupledProblem& p, const Network& net, const StepSchedule& schedule, double M,
            const AllocationState& init, WorkerPool* pool = nullptr, lp::SolverOptions opts = {})
      : p_(&p), net_(&net), schedule_(schedule), M_(M), t_(init.t), pool_(pool), opts_(opts) {
    if (!(M > 0.0)) throw Error(Errc::invalid_argument, "penalty M must be positive");
    if (net.graph.num_agents() != p.num_agents()) {
      throw Error(Errc::invalid_argument, "graph size differs from agent count");
    }
    for (int i = 0; i < p.num_agents(); ++i) agents_.emplace_back(p.agents[i], init.y[i]);
    sols_.resize(agents_.size());
  }

  /// Runs round t: all agents solve, then exchange and update.
  const RoundTrace& run_round() {
    const double sum_y = allocation_sum(allocations()).lpNorm<Eigen::Infinity>();
    auto solve = [this](std::size_t i) { sols_[i] = agents_[i].compute(M_, opts_); };
    if (pool_) {
      pool_->for_each(agents_.size(), solve);
    } else {
      for (std::size_t i = 0; i < agents_.size(); ++i) solve(i);
    }

    const auto round = sample_round(net_->activation, net_->graph, t_);
    const double alpha = schedule_(t_);
    staged_.assign(agents_.size(), {});
    for (std::size_t i = 0; i < agents_.size(); ++i)
      for (int j : round.neighbors[i]) staged_[i].push_back(&agents_[j].message());
    // Messages are the multipliers computed above, so updating in place is
    // safe: no agent's message changes during the exchange.
    for (std::size_t i = 0; i < agents_.size(); ++i) agents_[i].update(alpha, staged_[i]);

    trace_ = summarize_round(*p_, sols_, M_, t_, alpha, static_cast<int>(round.active_edges.size()), sum_y);
    ++t_;
    return trace_;
  }

  std::int64_t t() const { return t_; }
  double M() const { return M_; }
  const std::vector<LocalSolution>& solutions() const { return sols_; }

  std::vector<VectorXd> allocations() const {
    std::vector<VectorXd> y;
    for (const auto& a : agents_) y.push_back(a.allocation());
    return y;
  }

 private:
  const CoupledProblem* p_;
  const Network* net_;
  StepSchedule schedule_;
  double M_;
  std::int64_t t_;
  WorkerPool* pool_;
  lp::SolverOptions opts_;
  std::vector<Agent> agents_;
  std::vector<LocalSolution> sols_;
  std::vector<std::vector<const VectorXd*>> staged_;
  RoundTrace trace_;
};

/// Called after every round; return false to stop early.
using RoundSink = std::function<bool(const RoundTrace&, const std::vector<LocalSolution>&)>;

/// Runs up to T rounds. Stopping never alters the iterates.
inline std::int64_t run_dpd(const CoupledProblem& p, const Network& net, const StepSchedule& schedule, double M,
                            const AllocationState& init, std::int64_t T, const RoundSink& sink,
                            WorkerPool* pool = nullptr, lp::SolverOptions opts = {}) {
  DpdEngine eng(p, net, schedule, M, init, pool, opts);
  while (eng.t() < init.t + T) {
    const auto& tr = eng.run_round();
    if (sink && !sink(tr, eng.solutions())) break;
  }
  return eng.t();
}

}  // namespace dpdlab
