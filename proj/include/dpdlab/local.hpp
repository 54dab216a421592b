#pragma once

// Per-agent subproblem for a given resource allocation y_i:
//
//   p_i(y_i) = min  f_i(x_i) + M rho_i
//              s.t. g_i(x_i) <= y_i + rho_i 1   (multiplier mu_i)
//                   x_i in X_i, rho_i >= 0
//
// Always feasible thanks to rho_i. -mu_i is a subgradient of p_i at y_i.

#include <Eigen/Dense>

#include <string>

#include "dpdlab/error.hpp"
#include "dpdlab/lp.hpp"
#include "dpdlab/model.hpp"

namespace dpdlab {

struct LocalSolution {
  VectorXd x;
  double rho = 0.0;
  VectorXd mu;
  double p_value = 0.0;   // f_i(x_i) + M rho_i
};

namespace detail {

inline lp::StandardLP relaxed_local_lp(const AgentModel& agent, const VectorXd& y, double M, int& coupling_row,
                                       int& rho_col) {
  const int S = agent.s_dim();
  auto built = agent_cost_lp(agent, 1, S + 1);
  auto& lp = built.lp;
  rho_col = built.extra_col;
  coupling_row = built.extra_row;
  lp.c[rho_col] = M;
  lp.G.block(coupling_row, 0, S, agent.dim()) = agent.A;
  lp.G.block(coupling_row, rho_col, S, 1).setConstant(-1.0);
  lp.h.segment(coupling_row, S) = y + agent.b;
  lp.G(coupling_row + S, rho_col) = -1.0;
  return lp;
}

}  // namespace detail

inline LocalSolution solve_local(const AgentModel& agent, const VectorXd& y, double M,
                                 const lp::SolverOptions& opts = {}) {
  if (!(M > 0.0)) throw Error(Errc::invalid_argument, "penalty M must be positive");
  if (y.size() != agent.s_dim()) throw Error(Errc::invalid_argument, "allocation dimension mismatch");
  int coupling_row = 0, rho_col = 0;
  const auto lp = detail::relaxed_local_lp(agent, y, M, coupling_row, rho_col);
  const auto sol = lp::solve(lp, opts);
  if (sol.status != lp::Status::optimal) {
    throw Error(Errc::solver_failure, std::string("local subproblem: ") + lp::to_string(sol.status));
  }
  LocalSolution out;
  out.x = sol.x.head(agent.dim());
  out.rho = sol.x[rho_col];
  out.mu = sol.lambda.segment(coupling_row, agent.s_dim());
  out.p_value = agent.cost(out.x) + M * out.rho;
  return out;
}

/// Subgradient of p_i at the allocation that produced `sol`.
inline VectorXd p_subgradient(const LocalSolution& sol) { return -sol.mu; }

struct LagrangianSolution {
  VectorXd x;
  double value = 0.0;   // f_i(x) + lambda' g_i(x)
};

/// min over X_i of f_i(x) + lambda' g_i(x).
inline LagrangianSolution minimize_lagrangian(const AgentModel& agent, const VectorXd& lambda,
                                              const lp::SolverOptions& opts = {}) {
  auto built = detail::agent_cost_lp(agent, 0, 0);
  built.lp.c.head(agent.dim()) += agent.A.transpose() * lambda;
  const auto sol = lp::solve(built.lp, opts);
  if (sol.status != lp::Status::optimal) {
    throw Error(Errc::solver_failure, std::string("Lagrangian subproblem: ") + lp::to_string(sol.status));
  }
  LagrangianSolution out;
  out.x = sol.x.head(agent.dim());
  out.value = agent.cost(out.x) + lambda.dot(agent.coupling(out.x));
  return out;
}

}  // namespace dpdlab
