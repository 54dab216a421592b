#pragma once

// Generators for the two benchmark problems: the 5-agent L1 example and the
// charge-only electric vehicle scheduling LP.

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "dpdlab/dpd.hpp"
#include "dpdlab/graph.hpp"
#include "dpdlab/model.hpp"
#include "dpdlab/schedule.hpp"

namespace dpdlab {

struct RunDefaults {
  double M = 1.0;
  StepSchedule schedule = StepSchedule::power(1.0, 0.6);
  InitPreset y0 = InitPreset::zero;
};

struct Instance {
  std::string name;
  CoupledProblem problem;
  Network network;
  SlaterPoint slater;
  RunDefaults defaults;
  nlohmann::json provenance;   // generator parameters and seeds
};

/// N = 5 agents, x_i in [-10, 10]^3, f_i = ||x_i - r_i||_1 with r_i uniform in
/// [15, 20]^3, coupling sum_i i * x_i <= 0 (1-based i).
inline Instance gen_basic(std::uint64_t seed) {
  constexpr int N = 5, S = 3, n = 3;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ref(15.0, 20.0);
  Instance inst;
  inst.name = "basic";
  inst.problem.s_dim = S;
  MatrixXd box(2 * n, n);
  box << MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
  for (int i = 0; i < N; ++i) {
    AgentModel a;
    a.c = VectorXd::Zero(n);
    VectorXd r(n);
    for (int k = 0; k < n; ++k) r[k] = ref(rng);
    a.l1_refs.push_back(r);
    a.A = (i + 1.0) * MatrixXd::Identity(S, n);
    a.b = VectorXd::Zero(S);
    a.G = box;
    a.h = VectorXd::Constant(2 * n, 10.0);
    inst.problem.agents.push_back(std::move(a));
    inst.slater.points.push_back(VectorXd::Constant(n, -10.0));
  }
  inst.network.graph = build_graph(N, {{0, 3}, {0, 4}, {1, 2}, {1, 4}});
  inst.network.activation = ActivationModel({0.5, 0.6, 0.4, 0.7}, seed);
  inst.defaults = {6.0, StepSchedule::power(1.0, 0.6), InitPreset::zero};
  inst.provenance = {{"generator", "basic"}, {"seed", seed}};
  return inst;
}

/// Ranges for the vehicle parameters the charging benchmark draws uniformly.
struct PevConfig {
  int slots = 12;
  double slot_hours = 40.0 / 60.0;
  double rate_kw[2] = {3.0, 5.0};             // charger rating P_i
  double efficiency[2] = {0.85, 0.95};
  double capacity_kwh[2] = {10.0, 16.0};      // E_i^max
  double init_frac[2] = {0.2, 0.4};           // E_i^init / E_i^max
  double ref_frac[2] = {0.4, 0.55};           // E_i^ref / E_i^max
  double price[2] = {19.0, 35.0};             // cents per kWh, one profile shared by all vehicles
  double budget_scale = 1.0;                  // P^max = budget_scale * N / 2 kW
  double power_unit_kw = 0.001;               // coupling rows are written in this unit (W)
  double er_probability = 0.2;
  double sigma[2] = {0.3, 0.9};
};

inline nlohmann::json to_json(const PevConfig& c) {
  auto range = [](const double (&r)[2]) { return nlohmann::json::array({r[0], r[1]}); };
  return {{"slots", c.slots},
          {"slot_hours", c.slot_hours},
          {"rate_kw", range(c.rate_kw)},
          {"efficiency", range(c.efficiency)},
          {"capacity_kwh", range(c.capacity_kwh)},
          {"init_frac", range(c.init_frac)},
          {"ref_frac", range(c.ref_frac)},
          {"price", range(c.price)},
          {"budget_scale", c.budget_scale},
          {"power_unit_kw", c.power_unit_kw},
          {"er_probability", c.er_probability},
          {"sigma", range(c.sigma)}};
}

/// Erdos-Renyi G(N, p), redrawn until connected.
inline UnderlyingGraph erdos_renyi_connected(int N, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  while (true) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j)
        if (coin(rng)) edges.emplace_back(i, j);
    std::vector<Edge> probe;
    for (auto [a, b] : edges) probe.push_back({a, b});
    if (is_connected(N, probe)) return build_graph(N, edges);
  }
}

/// Charge-only PEV scheduling: x_i = charging level u_i(k) in [0, 1] per slot,
/// power drawn P_i u_i(k), energy dynamics E_init + eta P_i dT sum u <= E_max
/// at every slot and >= E_ref at the end, shared grid limit
/// sum_i P_i u_i(k) <= P^max split evenly as b_i = P^max / N.
inline Instance gen_pev(std::uint64_t seed, int N, const PevConfig& cfg = {}) {
  if (N < 2) throw Error(Errc::invalid_argument, "PEV instance needs N >= 2");
  const int T = cfg.slots;
  std::mt19937_64 rng(seed);
  auto draw = [&rng](const double (&r)[2]) { return std::uniform_real_distribution<double>(r[0], r[1])(rng); };

  VectorXd price(T);
  for (int k = 0; k < T; ++k) price[k] = draw(cfg.price);
  const double pmax = cfg.budget_scale * N / 2.0;

  Instance inst;
  inst.name = "pev";
  inst.problem.s_dim = T;
  nlohmann::json vehicles = nlohmann::json::array();
  double slater_load = 0.0;
  for (int i = 0; i < N; ++i) {
    const double rate = draw(cfg.rate_kw);
    const double eta = draw(cfg.efficiency);
    const double cap = draw(cfg.capacity_kwh);
    const double e_init = draw(cfg.init_frac) * cap;
    const double e_ref = std::max(e_init, draw(cfg.ref_frac) * cap);
    const double gain = eta * rate * cfg.slot_hours;   // kWh stored per unit of u in one slot

    AgentModel a;
    a.c = rate * cfg.slot_hours * price;
    a.A = (rate / cfg.power_unit_kw) * MatrixXd::Identity(T, T);
    a.b = VectorXd::Constant(T, pmax / N / cfg.power_unit_kw);
    a.G = MatrixXd::Zero(3 * T + 1, T);
    a.h = VectorXd::Zero(3 * T + 1);
    a.G.topRows(T) = MatrixXd::Identity(T, T);
    a.h.head(T).setOnes();
    a.G.middleRows(T, T) = -MatrixXd::Identity(T, T);
    for (int k = 0; k < T; ++k) {
      a.G.row(2 * T + k).head(k + 1).setConstant(gain);
      a.h[2 * T + k] = cap - e_init;
    }
    a.G.row(3 * T).setConstant(-gain);
    a.h[3 * T] = -(e_ref - e_init);
    inst.problem.agents.push_back(std::move(a));

    const double level = (e_ref - e_init) / (gain * T);
    inst.slater.points.push_back(VectorXd::Constant(T, level));
    slater_load += rate * level;
    vehicles.push_back({{"rate_kw", rate}, {"efficiency", eta}, {"capacity_kwh", cap},
                        {"e_init", e_init}, {"e_ref", e_ref}});
  }
  if (!(slater_load < pmax)) {
    throw Error(Errc::not_strictly_feasible, "uniform charging exceeds the grid limit for seed " +
                                                 std::to_string(seed));
  }

  inst.network.graph = erdos_renyi_connected(N, cfg.er_probability, rng);
  std::vector<double> sigma;
  for (int e = 0; e < inst.network.graph.num_edges(); ++e) sigma.push_back(draw(cfg.sigma));
  inst.network.activation = ActivationModel(std::move(sigma), seed);
  inst.defaults = {30.0, StepSchedule::power(1.0, 0.6), InitPreset::zero};
  inst.provenance = {{"generator", "pev"}, {"seed", seed}, {"N", N}, {"config", to_json(cfg)},
                     {"price", detail::to_json(price)}, {"pmax_kw", pmax}, {"vehicles", vehicles}};
  return inst;
}

inline const char* to_string(InitPreset p) { return p == InitPreset::zero ? "zero" : "asym"; }

inline InitPreset init_preset_from_string(const std::string& s) {
  if (s == "zero") return InitPreset::zero;
  if (s == "asym") return InitPreset::asym;
  throw Error(Errc::parse_error, "unknown initial allocation " + s);
}

/// {"problem", "network", "slater"?, "defaults"?, "provenance"?}.
inline nlohmann::json instance_to_json(const Instance& inst) {
  return {{"name", inst.name},
          {"problem", problem_to_json(inst.problem)},
          {"network", network_to_json(inst.network)},
          {"slater", slater_to_json(inst.slater)},
          {"defaults",
           {{"M", inst.defaults.M}, {"sched", inst.defaults.schedule.to_string()}, {"y0", to_string(inst.defaults.y0)}}},
          {"provenance", inst.provenance}};
}

inline Instance instance_from_json(const nlohmann::json& doc) {
  try {
    Instance inst;
    inst.name = doc.value("name", std::string("file"));
    inst.problem = problem_from_json(doc.at("problem"));
    if (doc.contains("network")) inst.network = network_from_json(doc.at("network"));
    if (doc.contains("slater")) inst.slater = slater_from_json(doc.at("slater"));
    if (doc.contains("defaults")) {
      const auto& d = doc.at("defaults");
      inst.defaults.M = d.value("M", inst.defaults.M);
      if (d.contains("sched")) inst.defaults.schedule = StepSchedule::parse(d.at("sched").get<std::string>());
      if (d.contains("y0")) inst.defaults.y0 = init_preset_from_string(d.at("y0").get<std::string>());
    }
    inst.provenance = doc.value("provenance", nlohmann::json::object());
    return inst;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::parse_error, ex.what());
  }
}

}  // namespace dpdlab
