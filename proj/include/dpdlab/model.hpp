#pragma once

// Constraint-coupled problem
//
//   minimize    sum_i f_i(x_i)
//   subject to  sum_i g_i(x_i) <= 0,   x_i in X_i,
//
// with f_i(x) = c_i'x + sum_k ||x - r_ik||_1, g_i(x) = A_i x - b_i and
// X_i = {x : G_i x <= h_i}. The L1 terms enter every LP through epigraph
// variables e >= |x - r|.

#include <Eigen/Dense>
#include <json.hpp>

#include <string>
#include <vector>

#include "dpdlab/error.hpp"
#include "dpdlab/lp.hpp"

namespace dpdlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct AgentModel {
  VectorXd c;                      // linear cost
  std::vector<VectorXd> l1_refs;   // one reference vector per ||x - r||_1 term
  MatrixXd A;                      // coupling g(x) = A x - b, S x n
  VectorXd b;
  MatrixXd G;                      // local polyhedron G x <= h
  VectorXd h;

  int dim() const { return static_cast<int>(c.size()); }
  int s_dim() const { return static_cast<int>(b.size()); }
  int num_epigraph() const { return dim() * static_cast<int>(l1_refs.size()); }

  double cost(const VectorXd& x) const {
    double f = c.dot(x);
    for (const auto& r : l1_refs) f += (x - r).lpNorm<1>();
    return f;
  }

  VectorXd coupling(const VectorXd& x) const { return A * x - b; }

  bool in_local_set(const VectorXd& x, double tol = 1e-9) const {
    return h.size() == 0 || ((G * x - h).array() <= tol).all();
  }
};

struct CoupledProblem {
  std::vector<AgentModel> agents;
  int s_dim = 0;

  int num_agents() const { return static_cast<int>(agents.size()); }
};

struct SlaterPoint {
  std::vector<VectorXd> points;
};

/// Dimension checks; throws InvalidArgument.
inline void check_dimensions(const CoupledProblem& p) {
  if (p.agents.empty()) throw Error(Errc::invalid_argument, "problem has no agents");
  if (p.s_dim <= 0) throw Error(Errc::invalid_argument, "coupling dimension must be positive");
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto& a = p.agents[i];
    const int n = a.dim();
    const bool ok = n > 0 && a.A.rows() == p.s_dim && a.A.cols() == n && a.b.size() == p.s_dim &&
                    a.G.cols() == n && a.G.rows() == a.h.size();
    bool refs_ok = true;
    for (const auto& r : a.l1_refs) refs_ok = refs_ok && r.size() == n;
    if (!ok || !refs_ok) {
      throw Error(Errc::invalid_argument, "inconsistent dimensions for agent " + std::to_string(i), i);
    }
  }
}

namespace detail {

/// LP over [x | e | extra] holding the local rows and the L1 epigraph rows.
/// `extra_rows` zero rows are appended after them for the caller to fill.
struct AgentLp {
  lp::StandardLP lp;
  int epi_offset = 0;    // first epigraph column
  int extra_col = 0;     // first extra column
  int extra_row = 0;     // first caller-owned row
};

inline AgentLp agent_cost_lp(const AgentModel& a, int extra_vars, int extra_rows) {
  const int n = a.dim();
  const int ne = a.num_epigraph();
  const int local_rows = static_cast<int>(a.h.size());
  const int cols = n + ne + extra_vars;
  const int rows = local_rows + 2 * ne + extra_rows;
  AgentLp out;
  out.epi_offset = n;
  out.extra_col = n + ne;
  out.extra_row = local_rows + 2 * ne;
  auto& lp = out.lp;
  lp.c = VectorXd::Zero(cols);
  lp.c.head(n) = a.c;
  lp.c.segment(n, ne).setOnes();
  lp.G = MatrixXd::Zero(rows, cols);
  lp.h = VectorXd::Zero(rows);
  lp.G.topLeftCorner(local_rows, n) = a.G;
  lp.h.head(local_rows) = a.h;
  int row = local_rows;
  for (size_t k = 0; k < a.l1_refs.size(); ++k) {
    for (int j = 0; j < n; ++j) {
      const int e = n + static_cast<int>(k) * n + j;
      lp.G(row, j) = 1.0;
      lp.G(row, e) = -1.0;
      lp.h[row++] = a.l1_refs[k][j];
      lp.G(row, j) = -1.0;
      lp.G(row, e) = -1.0;
      lp.h[row++] = -a.l1_refs[k][j];
    }
  }
  return out;
}

}  // namespace detail

/// min f_i over X_i.
inline lp::LPSolution local_minimum(const AgentModel& a, const lp::SolverOptions& opts = {}) {
  return lp::solve(detail::agent_cost_lp(a, 0, 0).lp, opts);
}

/// Nonempty and bounded X_i (2n coordinate LPs). Throws InvalidArgument.
inline void check_local_set(const AgentModel& a, int index, const lp::SolverOptions& opts = {}) {
  lp::StandardLP probe{VectorXd::Zero(a.dim()), a.G, a.h};
  for (int k = 0; k < a.dim(); ++k) {
    for (double dir : {1.0, -1.0}) {
      probe.c.setZero();
      probe.c[k] = dir;
      const auto sol = lp::solve(probe, opts);
      if (sol.status == lp::Status::infeasible) {
        throw Error(Errc::invalid_argument, "local set of agent " + std::to_string(index) + " is empty", index);
      }
      if (sol.status != lp::Status::optimal) {
        throw Error(Errc::invalid_argument, "local set of agent " + std::to_string(index) + " is unbounded",
                    index);
      }
    }
  }
}

inline void validate(const CoupledProblem& p, const lp::SolverOptions& opts = {}) {
  check_dimensions(p);
  for (int i = 0; i < p.num_agents(); ++i) check_local_set(p.agents[i], i, opts);
}

struct SlaterSlack {
  VectorXd per_component;  // -sum_i g_i(xbar_i)
  double gamma = 0.0;      // min over components
};

inline SlaterSlack validate_slater(const CoupledProblem& p, const SlaterPoint& sp, double set_tol = 1e-9) {
  if (static_cast<int>(sp.points.size()) != p.num_agents()) {
    throw Error(Errc::invalid_argument, "Slater point needs one vector per agent");
  }
  VectorXd total = VectorXd::Zero(p.s_dim);
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto& a = p.agents[i];
    if (sp.points[i].size() != a.dim()) throw Error(Errc::invalid_argument, "Slater point dimension", i);
    if (!a.in_local_set(sp.points[i], set_tol)) {
      throw Error(Errc::not_in_local_set, "Slater point outside X_" + std::to_string(i), i);
    }
    total += a.coupling(sp.points[i]);
  }
  for (int s = 0; s < p.s_dim; ++s) {
    if (!(total[s] < 0.0)) {
      throw Error(Errc::not_strictly_feasible, "coupling component " + std::to_string(s) + " not strict", s);
    }
  }
  SlaterSlack out;
  out.per_component = -total;
  out.gamma = out.per_component.minCoeff();
  return out;
}

struct MBound {
  double threshold = 0.0;           // any M strictly above this is valid
  double gamma = 0.0;
  std::vector<double> agent_gap;    // f_i(xbar_i) - min_{X_i} f_i
};

/// Sufficient penalty level from a Slater point:
/// (1/gamma) * sum_i (f_i(xbar_i) - min_{X_i} f_i).
inline MBound m_lower_bound(const CoupledProblem& p, const SlaterPoint& sp, const lp::SolverOptions& opts = {}) {
  const auto slack = validate_slater(p, sp);
  MBound out;
  out.gamma = slack.gamma;
  double total = 0.0;
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto sol = local_minimum(p.agents[i], opts);
    if (sol.status != lp::Status::optimal) {
      throw Error(Errc::local_min_failed, "local minimum of agent " + std::to_string(i), i);
    }
    const double gap = std::max(0.0, p.agents[i].cost(sp.points[i]) - sol.objective);
    out.agent_gap.push_back(gap);
    total += gap;
  }
  out.threshold = total / slack.gamma;
  return out;
}

struct CentralizedSolution {
  std::vector<VectorXd> x;
  double f_star = 0.0;
  VectorXd mu;               // multiplier of the coupling rows
  double kkt_residual = 0.0;
};

/// Solves the full problem as one stacked LP.
inline CentralizedSolution centralized_reference(const CoupledProblem& p, const lp::SolverOptions& opts = {}) {
  check_dimensions(p);
  const int N = p.num_agents();
  const int S = p.s_dim;
  std::vector<detail::AgentLp> parts;
  int cols = 0, rows = 0;
  for (const auto& a : p.agents) {
    parts.push_back(detail::agent_cost_lp(a, 0, 0));
    cols += parts.back().lp.num_vars();
    rows += parts.back().lp.num_rows();
  }
  lp::StandardLP big;
  big.c = VectorXd::Zero(cols);
  big.G = MatrixXd::Zero(rows + S, cols);
  big.h = VectorXd::Zero(rows + S);
  std::vector<int> col_off(N);
  int c0 = 0, r0 = 0;
  for (int i = 0; i < N; ++i) {
    const auto& part = parts[i].lp;
    col_off[i] = c0;
    big.c.segment(c0, part.num_vars()) = part.c;
    big.G.block(r0, c0, part.num_rows(), part.num_vars()) = part.G;
    big.h.segment(r0, part.num_rows()) = part.h;
    big.G.block(rows, c0, S, p.agents[i].dim()) = p.agents[i].A;
    big.h.tail(S) += p.agents[i].b;
    c0 += part.num_vars();
    r0 += part.num_rows();
  }
  const auto sol = lp::solve(big, opts);
  if (sol.status != lp::Status::optimal) {
    throw Error(Errc::solver_failure, std::string("centralized LP: ") + lp::to_string(sol.status));
  }
  CentralizedSolution out;
  out.kkt_residual = sol.kkt_residual;
  out.mu = sol.lambda.tail(S);
  for (int i = 0; i < N; ++i) {
    out.x.push_back(sol.x.segment(col_off[i], p.agents[i].dim()));
    out.f_star += p.agents[i].cost(out.x.back());
  }
  return out;
}

// JSON: {"schema_version": 1, "s_dim": S, "agents": [{c, l1_terms, A, b, G, h}]}

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline nlohmann::json to_json(const VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline nlohmann::json to_json(const MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(VectorXd(m.row(r).transpose())));
  return rows;
}

inline VectorXd vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline MatrixXd matrix_from_json(const nlohmann::json& j, int cols) {
  MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    const VectorXd row = vector_from_json(j[r]);
    if (row.size() != cols) throw Error(Errc::parse_error, "ragged matrix row");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

}  // namespace detail

inline nlohmann::json problem_to_json(const CoupledProblem& p) {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : p.agents) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& r : a.l1_refs) terms.push_back(detail::to_json(r));
    agents.push_back({{"c", detail::to_json(a.c)},
                      {"l1_terms", terms},
                      {"A", detail::to_json(a.A)},
                      {"b", detail::to_json(a.b)},
                      {"G", detail::to_json(a.G)},
                      {"h", detail::to_json(a.h)}});
  }
  return {{"schema_version", kSchemaVersion}, {"s_dim", p.s_dim}, {"agents", agents}};
}

inline CoupledProblem problem_from_json(const nlohmann::json& doc) {
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw Error(Errc::parse_error, "unsupported schema_version " + std::to_string(version));
    }
    CoupledProblem p;
    p.s_dim = doc.at("s_dim").get<int>();
    for (const auto& ja : doc.at("agents")) {
      AgentModel a;
      a.c = detail::vector_from_json(ja.at("c"));
      const int n = a.dim();
      for (const auto& r : ja.value("l1_terms", nlohmann::json::array())) a.l1_refs.push_back(detail::vector_from_json(r));
      a.A = detail::matrix_from_json(ja.at("A"), n);
      a.b = detail::vector_from_json(ja.at("b"));
      a.G = detail::matrix_from_json(ja.at("G"), n);
      a.h = detail::vector_from_json(ja.at("h"));
      p.agents.push_back(std::move(a));
    }
    check_dimensions(p);
    return p;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::parse_error, ex.what());
  }
}

inline nlohmann::json slater_to_json(const SlaterPoint& sp) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& x : sp.points) pts.push_back(detail::to_json(x));
  return pts;
}

inline SlaterPoint slater_from_json(const nlohmann::json& j) {
  SlaterPoint sp;
  for (const auto& x : j) sp.points.push_back(detail::vector_from_json(x));
  return sp;
}

}  // namespace dpdlab
