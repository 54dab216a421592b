#pragma once

// Dense linear programming kernel.
//
//   minimize    c'x
//   subject to  G x <= h
//
// Solved with a homogeneous self-dual primal-dual interior point method
// (Mehrotra predictor-corrector). The embedding yields either an optimal
// primal-dual pair or a Farkas certificate of infeasibility/unboundedness.
// Multipliers are read off the final interior iterate, so for LPs with a
// non-unique dual the returned multiplier is (close to) the analytic center
// of the optimal dual face.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dpdlab::lp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct StandardLP {
  VectorXd c;
  MatrixXd G;
  VectorXd h;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(h.size()); }
};

enum class Status { optimal, infeasible, unbounded, max_iterations };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::max_iterations: return "max_iterations";
  }
  return "unknown";
}

struct KktReport {
  double stationarity = 0.0;        // ||c + G'lambda||_inf
  double primal_feasibility = 0.0;  // ||max(Gx - h, 0)||_inf
  double dual_feasibility = 0.0;    // ||min(lambda, 0)||_inf
  double complementarity = 0.0;     // max_k |lambda_k (G_k x - h_k)|

  double max() const {
    return std::max({stationarity, primal_feasibility, dual_feasibility, complementarity});
  }
};

struct LPSolution {
  VectorXd x;
  VectorXd lambda;
  Status status = Status::max_iterations;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double kkt_residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 200;
};

/// Residuals of the four KKT conditions at (sol.x, sol.lambda). Pure
/// recomputation from the problem data; does not trust any solver field.
inline KktReport kkt_check(const StandardLP& lp, const LPSolution& sol) {
  KktReport r;
  if (lp.num_vars() > 0) {
    r.stationarity = (lp.c + lp.G.transpose() * sol.lambda).lpNorm<Eigen::Infinity>();
  }
  if (lp.num_rows() == 0) return r;
  const VectorXd viol = lp.G * sol.x - lp.h;
  r.primal_feasibility = std::max(0.0, viol.maxCoeff());
  r.dual_feasibility = std::max(0.0, -sol.lambda.minCoeff());
  r.complementarity = sol.lambda.cwiseProduct(viol).lpNorm<Eigen::Infinity>();
  return r;
}

namespace detail {

// Largest step in (0, 1] keeping v + a*dv >= 0.
inline double max_step(const VectorXd& v, const VectorXd& dv, double a_max = 1.0) {
  double a = a_max;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (dv[k] < 0.0) a = std::min(a, -v[k] / dv[k]);
  }
  return a;
}

inline double max_step(double v, double dv, double a_max) {
  return dv < 0.0 ? std::min(a_max, -v / dv) : a_max;
}

// Solves [0 G'; G -D][a; b] = [p; q] with D = diag(s./z) through the normal
// equations (G' D^-1 G) a = p + G' D^-1 q.
class ReducedKkt {
 public:
  ReducedKkt(const MatrixXd& G) : G_(G) {}

  bool factor(const VectorXd& dinv) {
    dinv_ = dinv;
    scaled_ = dinv.cwiseSqrt().asDiagonal() * G_;
    normal_.noalias() = scaled_.transpose() * scaled_;
    llt_.compute(normal_);
    if (llt_.info() == Eigen::Success) return true;
    // Rank-deficient G: tiny Tikhonov shift keeps the direction usable.
    const double shift = 1e-14 * std::max(1.0, normal_.diagonal().maxCoeff());
    normal_.diagonal().array() += shift;
    llt_.compute(normal_);
    return llt_.info() == Eigen::Success;
  }

  void solve(const VectorXd& p, const VectorXd& q, VectorXd& a, VectorXd& b) const {
    a = llt_.solve(p + G_.transpose() * dinv_.cwiseProduct(q));
    b = dinv_.cwiseProduct(G_ * a - q);
    // One step of iterative refinement on the unreduced system.
    const VectorXd rp = p - G_.transpose() * b;
    const VectorXd rq = q - (G_ * a - b.cwiseQuotient(dinv_));
    const VectorXd da = llt_.solve(rp + G_.transpose() * dinv_.cwiseProduct(rq));
    a += da;
    b += dinv_.cwiseProduct(G_ * da - rq);
  }

 private:
  const MatrixXd& G_;
  VectorXd dinv_;
  MatrixXd scaled_;
  MatrixXd normal_;
  Eigen::LLT<MatrixXd> llt_;
};

// Projects an optimal interior point onto its guessed active set: the
// minimum-norm corrections making those rows tight and stationarity exact.
// Kept only if the KKT residual does not grow.
inline void polish(const StandardLP& lp, LPSolution& sol) {
  const int n = lp.num_vars();
  const VectorXd slack = lp.h - lp.G * sol.x;
  std::vector<int> active;
  for (int k = 0; k < lp.num_rows(); ++k) {
    if (sol.lambda[k] > slack[k]) active.push_back(k);
  }
  const int na = static_cast<int>(active.size());
  MatrixXd GA(na, n);
  VectorXd hA(na), lamA(na);
  for (int r = 0; r < na; ++r) {
    GA.row(r) = lp.G.row(active[r]);
    hA[r] = lp.h[active[r]];
    lamA[r] = sol.lambda[active[r]];
  }
  LPSolution cand = sol;
  if (na > 0) {
    cand.x += Eigen::CompleteOrthogonalDecomposition<MatrixXd>(GA).solve(hA - GA * sol.x);
    const MatrixXd GAt = GA.transpose();
    lamA += Eigen::CompleteOrthogonalDecomposition<MatrixXd>(GAt).solve(-lp.c - GAt * lamA);
    if (lamA.size() > 0 && lamA.minCoeff() < 0.0) return;
  }
  cand.lambda.setZero();
  for (int r = 0; r < na; ++r) cand.lambda[active[r]] = lamA[r];
  if (!cand.x.allFinite() || !cand.lambda.allFinite()) return;
  cand.objective = lp.c.dot(cand.x);
  cand.kkt_residual = kkt_check(lp, cand).max();
  if (cand.kkt_residual <= sol.kkt_residual) sol = std::move(cand);
}

}  // namespace detail

inline LPSolution solve(const StandardLP& lp, const SolverOptions& opts = {}) {
  const int n = lp.num_vars();
  const int m = lp.num_rows();
  const MatrixXd& G = lp.G;
  const VectorXd& c = lp.c;
  const VectorXd& h = lp.h;

  LPSolution out;
  if (m == 0) {
    out.x = VectorXd::Zero(n);
    out.lambda = VectorXd::Zero(0);
    out.status = c.isZero(0.0) ? Status::optimal : Status::unbounded;
    out.objective = 0.0;
    out.kkt_residual = kkt_check(lp, out).max();
    return out;
  }

  // Starting point: least-squares x, least-norm dual, both shifted into the
  // positive orthant.
  VectorXd x, s, z;
  {
    detail::ReducedKkt init(G);
    init.factor(VectorXd::Ones(m));
    VectorXd a, b;
    init.solve(VectorXd::Zero(n), h, a, b);  // a = argmin ||Gx - h||, b = Ga - h
    x = a;
    s = -b;
    init.solve(-c, VectorXd::Zero(m), a, b);  // b = -G (G'G)^-1 c, G'b = -c
    z = b;
    const double ps = -s.minCoeff();
    if (ps >= 0.0) s.array() += 1.0 + ps;
    const double pz = -z.minCoeff();
    if (pz >= 0.0) z.array() += 1.0 + pz;
  }
  double tau = 1.0;
  double kappa = 1.0;

  const double tol = opts.tol;
  detail::ReducedKkt kkt(G);
  VectorXd dx1, dz1, dx2, dz2, dx, dz, ds;
  VectorXd rx, rz;

  auto evaluate_candidate = [&](LPSolution& cand) {
    cand.x = x / tau;
    cand.lambda = z / tau;
    cand.objective = c.dot(cand.x);
    cand.kkt_residual = kkt_check(lp, cand).max();
  };

  int stalls = 0;
  for (int it = 0; it <= opts.max_iterations; ++it) {
    out.iterations = it;
    rx = G.transpose() * z + c * tau;
    rz = G * x + s - h * tau;
    const double rtau = kappa + c.dot(x) + h.dot(z);
    const double mu = (s.dot(z) + tau * kappa) / (m + 1);

    // Optimality on the de-homogenized point.
    {
      const double stat = rx.lpNorm<Eigen::Infinity>() / tau;
      const double pres = rz.lpNorm<Eigen::Infinity>() / tau;
      const double gap = s.dot(z) / (tau * tau);
      const double compl_max = s.cwiseProduct(z).maxCoeff() / (tau * tau);
      const double pobj = c.dot(x) / tau;
      if (stat <= 0.1 * tol && pres <= 0.1 * tol && compl_max <= 0.1 * tol &&
          gap <= tol * (1.0 + std::abs(pobj))) {
        evaluate_candidate(out);
        if (out.kkt_residual <= tol) {
          out.status = Status::optimal;
          detail::polish(lp, out);
          return out;
        }
      }
    }
    // Certificates.
    {
      const double hz = h.dot(z);
      if (hz < 0.0 && (G.transpose() * z).lpNorm<Eigen::Infinity>() <= tol * (-hz) &&
          tau < kappa) {
        out.status = Status::infeasible;
        out.x = VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
        out.lambda = z / (-hz);
        out.kkt_residual = std::numeric_limits<double>::infinity();
        return out;
      }
      const double cx = c.dot(x);
      if (cx < 0.0 && (G * x + s).lpNorm<Eigen::Infinity>() <= tol * (-cx) && tau < kappa) {
        out.status = Status::unbounded;
        out.x = x / (-cx);
        out.lambda = VectorXd::Constant(m, std::numeric_limits<double>::quiet_NaN());
        out.kkt_residual = std::numeric_limits<double>::infinity();
        return out;
      }
    }
    if (it == opts.max_iterations || stalls >= 5) break;

    const VectorXd dinv = z.cwiseQuotient(s);
    if (!kkt.factor(dinv)) break;
    kkt.solve(-c, h, dx1, dz1);
    const double denom_base = c.dot(dx1) + h.dot(dz1);

    // Returns the step-size-free direction for target (eta, ds_rhs, dk_rhs).
    double dtau = 0.0, dkappa = 0.0;
    auto direction = [&](double eta, const VectorXd& ds_rhs, double dk_rhs) {
      const VectorXd p = -eta * rx;
      const VectorXd q = -eta * rz - ds_rhs.cwiseQuotient(z);
      const double r3 = -eta * rtau - dk_rhs / tau;
      kkt.solve(p, q, dx2, dz2);
      dtau = (r3 - c.dot(dx2) - h.dot(dz2)) / (denom_base - kappa / tau);
      dx = dx2 + dtau * dx1;
      dz = dz2 + dtau * dz1;
      ds = (ds_rhs - s.cwiseProduct(dz)).cwiseQuotient(z);
      dkappa = (dk_rhs - kappa * dtau) / tau;
    };

    // Predictor.
    const VectorXd ds_aff_rhs = -s.cwiseProduct(z);
    direction(1.0, ds_aff_rhs, -tau * kappa);
    double a_aff = detail::max_step(s, ds);
    a_aff = detail::max_step(z, dz, a_aff);
    a_aff = detail::max_step(tau, dtau, a_aff);
    a_aff = detail::max_step(kappa, dkappa, a_aff);
    const double mu_aff =
        ((s + a_aff * ds).dot(z + a_aff * dz) + (tau + a_aff * dtau) * (kappa + a_aff * dkappa)) /
        (m + 1);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector.
    const VectorXd ds_cc_rhs = -s.cwiseProduct(z) + VectorXd::Constant(m, sigma * mu) -
                               ds.cwiseProduct(dz);
    const double dk_cc_rhs = -tau * kappa + sigma * mu - dtau * dkappa;
    direction(1.0 - sigma, ds_cc_rhs, dk_cc_rhs);
    double a = detail::max_step(s, ds, 1e300);
    a = detail::max_step(z, dz, a);
    a = detail::max_step(tau, dtau, a);
    a = detail::max_step(kappa, dkappa, a);
    a = std::min(1.0, 0.99 * a);
    stalls = (a < 1e-10) ? stalls + 1 : 0;

    x += a * dx;
    s += a * ds;
    z += a * dz;
    tau += a * dtau;
    kappa += a * dkappa;

    // Keep the homogeneous variables from drifting into overflow.
    const double scale = std::max(tau, kappa);
    if (scale > 1e8) {
      x /= scale;
      s /= scale;
      z /= scale;
      tau /= scale;
      kappa /= scale;
    }
  }

  evaluate_candidate(out);
  out.status = out.kkt_residual <= tol ? Status::optimal : Status::max_iterations;
  return out;
}

inline LPSolution solve(const StandardLP& lp, double tol) {
  SolverOptions opts;
  opts.tol = tol;
  return solve(lp, opts);
}

}  // namespace dpdlab::lp
