#pragma once

// Centralized randomized block subgradient method on edge variables. Each
// undirected edge l = (i, j), i < j, owns the block z_l = (z_(ij), z_(ji)) of
// size 2S; allocations are recovered as y_i = sum_j (z_(ij) - z_(ji)).
// With step alpha this reproduces DPD run with step 2 alpha.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "dpdlab/dpd.hpp"
#include "dpdlab/error.hpp"
#include "dpdlab/graph.hpp"
#include "dpdlab/local.hpp"
#include "dpdlab/model.hpp"
#include "dpdlab/parallel.hpp"
#include "dpdlab/schedule.hpp"

namespace dpdlab {

struct BlockVector {
  int S = 0;
  VectorXd data;   // blocks in edge order, each [z_(ij); z_(ji)]

  BlockVector() = default;
  BlockVector(int num_blocks, int s_dim) : S(s_dim), data(VectorXd::Zero(2 * s_dim * num_blocks)) {}

  int num_blocks() const { return S == 0 ? 0 : static_cast<int>(data.size()) / (2 * S); }
  auto block(int l) { return data.segment(2 * S * l, 2 * S); }
  auto block(int l) const { return data.segment(2 * S * l, 2 * S); }
  auto forward(int l) { return data.segment(2 * S * l, S); }
  auto forward(int l) const { return data.segment(2 * S * l, S); }
  auto backward(int l) { return data.segment(2 * S * l + S, S); }
  auto backward(int l) const { return data.segment(2 * S * l + S, S); }
};

/// y = Pi z.
inline std::vector<VectorXd> project_down(const BlockVector& z, const UnderlyingGraph& g) {
  if (z.num_blocks() != g.num_edges()) throw Error(Errc::invalid_argument, "block count differs from edge count");
  std::vector<VectorXd> y(g.num_agents(), VectorXd::Zero(z.S));
  for (int l = 0; l < g.num_edges(); ++l) {
    const VectorXd w = z.forward(l) - z.backward(l);
    y[g.edge(l).i] += w;
    y[g.edge(l).j] -= w;
  }
  return y;
}

/// Minimum-norm z with Pi z = y. Throws NonZeroSum unless sum_i y_i = 0.
inline BlockVector lift(const std::vector<VectorXd>& y, const UnderlyingGraph& g) {
  const int N = g.num_agents();
  if (static_cast<int>(y.size()) != N) throw Error(Errc::invalid_argument, "one allocation per agent required");
  const int S = static_cast<int>(y.front().size());
  if (allocation_sum(y).lpNorm<Eigen::Infinity>() > 1e-10) {
    throw Error(Errc::non_zero_sum, "allocations must sum to zero");
  }
  // Pi Pi' = 2 (L kron I); on zero-sum vectors L^+ = (L + J/N)^{-1}.
  const MatrixXd gamma = incidence_matrix(g).cast<double>();
  const MatrixXd shifted = gamma.transpose() * gamma + MatrixXd::Constant(N, N, 1.0 / N);
  const Eigen::LDLT<MatrixXd> ldlt(shifted);
  MatrixXd Y(N, S);
  for (int i = 0; i < N; ++i) Y.row(i) = y[i].transpose();
  const MatrixXd node = ldlt.solve(Y) / 2.0;
  const MatrixXd edge = gamma * node;   // one row per edge: z_(ij) = w, z_(ji) = -w
  BlockVector z(g.num_edges(), S);
  for (int l = 0; l < g.num_edges(); ++l) {
    z.forward(l) = edge.row(l).transpose();
    z.backward(l) = -edge.row(l).transpose();
  }
  return z;
}

/// ||z||_W^2 = sum_l ||z_l||^2 / sigma_l.
inline double w_norm_sq(const BlockVector& z, const std::vector<double>& sigma) {
  double s = 0.0;
  for (int l = 0; l < z.num_blocks(); ++l) s += z.block(l).squaredNorm() / sigma[l];
  return s;
}

struct SubgradientBound {
  std::vector<double> per_block;   // C_l = 2 sqrt(S) M
  double C = 0.0;                  // sum_l C_l^2 / sigma_l
};

inline SubgradientBound subgradient_bound(int S, double M, const std::vector<double>& sigma) {
  SubgradientBound b;
  for (double s : sigma) {
    const double cl = 2.0 * std::sqrt(static_cast<double>(S)) * M;
    b.per_block.push_back(cl);
    b.C += cl * cl / s;
  }
  return b;
}

struct BlockSubgradient {
  BlockVector grad;
  std::vector<LocalSolution> sols;
  double p_tilde = 0.0;   // sum_i p_i([Pi z]_i)
};

/// Full subgradient of p~(z) = p(Pi z); block l = (mu_j - mu_i, mu_i - mu_j).
inline BlockSubgradient block_subgradient(const BlockVector& z, const CoupledProblem& p, const UnderlyingGraph& g,
                                          double M, WorkerPool* pool = nullptr, lp::SolverOptions opts = {}) {
  const auto y = project_down(z, g);
  BlockSubgradient out;
  out.sols.resize(y.size());
  auto solve = [&](std::size_t i) { out.sols[i] = solve_local(p.agents[i], y[i], M, opts); };
  if (pool) {
    pool->for_each(y.size(), solve);
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) solve(i);
  }
  for (const auto& s : out.sols) out.p_tilde += s.p_value;
  out.grad = BlockVector(g.num_edges(), z.S);
  for (int l = 0; l < g.num_edges(); ++l) {
    const auto& mi = out.sols[g.edge(l).i].mu;
    const auto& mj = out.sols[g.edge(l).j].mu;
    out.grad.forward(l) = mj - mi;
    out.grad.backward(l) = mi - mj;
  }
  return out;
}

class BlockMethod {
 public:
  BlockMethod(const CoupledProblem& p, const Network& net, const StepSchedule& schedule, double M, BlockVector z0,
              std::int64_t t0 = 0, WorkerPool* pool = nullptr, lp::SolverOptions opts = {})
      : p_(&p), net_(&net), schedule_(schedule), M_(M), z_(std::move(z0)), t_(t0), pool_(pool), opts_(opts) {
    if (!(M > 0.0)) throw Error(Errc::invalid_argument, "penalty M must be positive");
    if (z_.num_blocks() != net.graph.num_edges()) {
      throw Error(Errc::invalid_argument, "block count differs from edge count");
    }
  }

  /// Blocks of active edges take a subgradient step; the rest stay put.
  const RoundTrace& run_round() {
    const auto sg = block_subgradient(z_, *p_, net_->graph, M_, pool_, opts_);
    const double sum_y = allocation_sum(project_down(z_, net_->graph)).lpNorm<Eigen::Infinity>();
    const double alpha = schedule_(t_);
    int active = 0;
    for (int l = 0; l < z_.num_blocks(); ++l) {
      if (!net_->activation.active(l, t_)) continue;
      z_.block(l) -= alpha * sg.grad.block(l);
      ++active;
    }
    sols_ = sg.sols;
    trace_ = summarize_round(*p_, sols_, M_, t_, alpha, active, sum_y);
    ++t_;
    return trace_;
  }

  std::int64_t t() const { return t_; }
  const BlockVector& z() const { return z_; }
  const std::vector<LocalSolution>& solutions() const { return sols_; }

 private:
  const CoupledProblem* p_;
  const Network* net_;
  StepSchedule schedule_;
  double M_;
  BlockVector z_;
  std::int64_t t_;
  WorkerPool* pool_;
  lp::SolverOptions opts_;
  std::vector<LocalSolution> sols_;
  RoundTrace trace_;
};

inline BlockVector run_block_method(const CoupledProblem& p, const Network& net, const StepSchedule& schedule,
                                    double M, BlockVector z0, std::int64_t T, const RoundSink& sink,
                                    WorkerPool* pool = nullptr, lp::SolverOptions opts = {}) {
  BlockMethod bm(p, net, schedule, M, std::move(z0), 0, pool, opts);
  while (bm.t() < T) {
    const auto& tr = bm.run_round();
    if (sink && !sink(tr, bm.solutions())) break;
  }
  return bm.z();
}

/// DPD with step 2 alpha next to the block method with step alpha, on the
/// same activation replay.
class PairedRun {
 public:
  PairedRun(const CoupledProblem& p, const Network& net, const StepSchedule& schedule, double M,
            const BlockVector& z0, WorkerPool* pool = nullptr, lp::SolverOptions opts = {})
      : graph_(&net.graph),
        block_(p, net, schedule, M, z0, 0, pool, opts),
        dpd_(p, net, schedule.scaled(2.0), M, init_state(p, project_down(z0, net.graph)), pool, opts) {}

  double gap() const {
    const auto y = dpd_.allocations();
    const auto pz = project_down(block_.z(), *graph_);
    double g = 0.0;
    for (size_t i = 0; i < y.size(); ++i) g = std::max(g, (y[i] - pz[i]).lpNorm<Eigen::Infinity>());
    return g;
  }

  const DpdEngine& dpd() const { return dpd_; }
  const BlockMethod& block() const { return block_; }
  const RoundTrace& dpd_trace() const { return dpd_trace_; }

  /// Advances both methods; returns ||y_dpd - Pi z||_inf after the update.
  double step() {
    dpd_trace_ = dpd_.run_round();
    block_.run_round();
    return gap();
  }

 private:
  const UnderlyingGraph* graph_;
  BlockMethod block_;
  DpdEngine dpd_;
  RoundTrace dpd_trace_;
};

}  // namespace dpdlab
