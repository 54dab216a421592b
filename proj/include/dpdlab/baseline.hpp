#pragma once

// Distributed dual subgradient with running-average primal recovery. Per
// round: one Metropolis consensus step on the multipliers over the active
// edges, Lagrangian minimization, projected ascent, and averaging.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "dpdlab/dpd.hpp"
#include "dpdlab/graph.hpp"
#include "dpdlab/local.hpp"
#include "dpdlab/model.hpp"
#include "dpdlab/parallel.hpp"
#include "dpdlab/schedule.hpp"

namespace dpdlab {

struct DualState {
  std::int64_t t = 0;
  std::vector<VectorXd> lambda;
  std::vector<VectorXd> xbar;   // average of x^0 .. x^{t-1}
};

struct DualTrace {
  std::int64_t t = 0;
  double alpha = 0.0;
  int active_edges = 0;
  double cost = 0.0;            // sum_i f_i(xbar_i) after this round
  VectorXd coupling;            // sum_i g_i(xbar_i) after this round
  double max_lambda_l1 = 0.0;

  double max_coupling() const { return coupling.maxCoeff(); }
};

/// Metropolis-Hastings weights on the active subgraph, applied to lambda.
inline std::vector<VectorXd> metropolis_mix(const std::vector<VectorXd>& lambda, const RoundActivation& round) {
  const std::size_t N = lambda.size();
  std::vector<VectorXd> out(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double di = static_cast<double>(round.neighbors[i].size());
    VectorXd acc = VectorXd::Zero(lambda[i].size());
    double self = 1.0;
    for (int j : round.neighbors[i]) {
      const double w = 1.0 / (1.0 + std::max(di, static_cast<double>(round.neighbors[j].size())));
      acc += w * lambda[j];
      self -= w;
    }
    out[i] = self * lambda[i] + acc;
  }
  return out;
}

/// q(lambda) = sum_i min_{X_i} f_i + lambda' g_i, a lower bound on f*.
inline double dual_value(const CoupledProblem& p, const VectorXd& lambda, lp::SolverOptions opts = {}) {
  double q = 0.0;
  for (const auto& a : p.agents) q += minimize_lagrangian(a, lambda, opts).value;
  return q;
}

class DualSubgradient {
 public:
  DualSubgradient(const CoupledProblem& p, const Network& net, const StepSchedule& schedule,
                  WorkerPool* pool = nullptr, lp::SolverOptions opts = {})
      : p_(&p), net_(&net), schedule_(schedule), pool_(pool), opts_(opts) {
    if (net.graph.num_agents() != p.num_agents()) {
      throw Error(Errc::invalid_argument, "graph size differs from agent count");
    }
    for (const auto& a : p.agents) {
      state_.lambda.push_back(VectorXd::Zero(p.s_dim));
      state_.xbar.push_back(VectorXd::Zero(a.dim()));
    }
    x_.resize(p.agents.size());
  }

  const DualTrace& run_round() {
    const std::int64_t t = state_.t;
    const auto round = sample_round(net_->activation, net_->graph, t);
    const double alpha = schedule_(t);
    const auto mixed = metropolis_mix(state_.lambda, round);
    auto solve = [&](std::size_t i) { x_[i] = minimize_lagrangian(p_->agents[i], mixed[i], opts_).x; };
    if (pool_) {
      pool_->for_each(x_.size(), solve);
    } else {
      for (std::size_t i = 0; i < x_.size(); ++i) solve(i);
    }
    trace_ = DualTrace{};
    trace_.t = t;
    trace_.alpha = alpha;
    trace_.active_edges = static_cast<int>(round.active_edges.size());
    trace_.coupling = VectorXd::Zero(p_->s_dim);
    const double tt = static_cast<double>(t);
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const auto& a = p_->agents[i];
      state_.lambda[i] = (mixed[i] + alpha * a.coupling(x_[i])).cwiseMax(0.0);
      state_.xbar[i] = (tt * state_.xbar[i] + x_[i]) / (tt + 1.0);
      trace_.cost += a.cost(state_.xbar[i]);
      trace_.coupling += a.coupling(state_.xbar[i]);
      trace_.max_lambda_l1 = std::max(trace_.max_lambda_l1, state_.lambda[i].lpNorm<1>());
    }
    ++state_.t;
    return trace_;
  }

  const DualState& state() const { return state_; }
  /// Primal iterates of the last round (before averaging).
  const std::vector<VectorXd>& iterates() const { return x_; }

 private:
  const CoupledProblem* p_;
  const Network* net_;
  StepSchedule schedule_;
  WorkerPool* pool_;
  lp::SolverOptions opts_;
  DualState state_;
  std::vector<VectorXd> x_;
  DualTrace trace_;
};

}  // namespace dpdlab
