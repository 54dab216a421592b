// dpdlab: generate instances, compute M thresholds, and run the algorithms.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "dpdlab/dpdlab.hpp"
#include "dpdlab/runner.hpp"

namespace fs = std::filesystem;
using namespace dpdlab;

namespace {

constexpr int kExitSolver = 2;
constexpr int kExitConfig = 3;

struct InstanceArgs {
  std::string gen;
  std::string instance;
  std::string graph;
  std::uint64_t seed = 1;
  int N = 50;
};

void add_instance_flags(CLI::App* cmd, InstanceArgs& a) {
  cmd->add_option("--gen", a.gen, "Generator")->check(CLI::IsMember({"basic", "pev"}));
  cmd->add_option("--instance", a.instance, "Instance JSON file");
  cmd->add_option("--graph", a.graph, "Network JSON file, overrides the instance network");
  cmd->add_option("--seed", a.seed, "Generator seed (DPDLAB_SEED wins)");
  cmd->add_option("--N", a.N, "Vehicles for --gen pev");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::parse_error, path + ": " + ex.what());
  }
}

Instance load_instance(InstanceArgs a) {
  if (const char* env = std::getenv("DPDLAB_SEED")) {
    try {
      a.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw Error(Errc::parse_error, std::string("DPDLAB_SEED is not a number: ") + env);
    }
  }
  if (a.gen.empty() == a.instance.empty()) throw Error(Errc::invalid_argument, "give exactly one of --gen, --instance");
  Instance inst = a.gen == "basic" ? gen_basic(a.seed)
                  : a.gen == "pev" ? gen_pev(a.seed, a.N)
                                   : instance_from_json(read_json(a.instance));
  if (!a.graph.empty()) inst.network = network_from_json(read_json(a.graph));
  return inst;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(Errc::invalid_argument, "cannot write " + path.string());
  f << text;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case Errc::solver_failure:
    case Errc::local_min_failed: return kExitSolver;
    default: return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed primal decomposition lab"};
  app.require_subcommand(1);

  InstanceArgs inst_args;
  RunConfig cfg;
  std::string alg = "dpd", sched, m_text, y0, out_dir = "out";

  auto* run = app.add_subcommand("run", "Run an algorithm and write trace.csv and summary.json");
  add_instance_flags(run, inst_args);
  run->add_option("--alg", alg, "dpd, block, dual or paired")->check(CLI::IsMember({"dpd", "block", "dual", "paired"}));
  run->add_option("--sched", sched, "const:a, pow:K,p or harm:K");
  run->add_option("--M", m_text, "Penalty weight or 'auto'");
  run->add_option("--margin", cfg.margin, "Multiplier on the threshold for --M auto");
  run->add_option("--T", cfg.T, "Rounds");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--stride", cfg.stride, "Trace stride beyond 10^4 rounds")->check(CLI::PositiveNumber);
  run->add_option("--y0", y0, "zero or asym")->check(CLI::IsMember({"zero", "asym"}));

  auto* mbound = app.add_subcommand("mbound", "Print the M threshold and the auto choice");
  add_instance_flags(mbound, inst_args);
  mbound->add_option("--margin", cfg.margin, "Multiplier on the threshold");

  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Write a generated instance as JSON");
  add_instance_flags(gen, inst_args);
  gen->add_option("--out", gen_out, "Output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const Instance inst = load_instance(inst_args);

    if (*gen) {
      const std::string text = instance_to_json(inst).dump(1) + "\n";
      if (gen_out.empty()) {
        std::cout << text;
      } else {
        write_file(gen_out, text);
      }
      return 0;
    }

    if (*mbound) {
      cfg.auto_M = true;
      const auto chosen = choose_m(inst, cfg);
      const auto mb = m_lower_bound(inst.problem, inst.slater);
      nlohmann::json j = {{"threshold", *chosen.threshold}, {"margin", cfg.margin}, {"M", chosen.M},
                          {"gamma", mb.gamma}, {"agent_gap", mb.agent_gap}};
      std::cout << j.dump(1) << "\n";
      return 0;
    }

    cfg.alg = algorithm_from_string(alg);
    if (!sched.empty()) cfg.schedule = StepSchedule::parse(sched);
    if (m_text == "auto") {
      cfg.auto_M = true;
    } else if (!m_text.empty()) {
      try {
        cfg.M = std::stod(m_text);
      } catch (const std::exception&) {
        throw Error(Errc::parse_error, "--M expects a number or 'auto'");
      }
    }
    if (!y0.empty()) cfg.y0 = init_preset_from_string(y0);

    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "trace.csv");
    if (!csv) throw Error(Errc::invalid_argument, "cannot write into " + out_dir);
    const auto res = run_instance(inst, cfg, csv);
    write_file(fs::path(out_dir) / "summary.json", res.summary.to_json(res.config).dump(1) + "\n");
    std::cerr << "rounds " << res.summary.rounds << ", final cost_err " << res.summary.final_cost_err
              << ", max coupling " << res.summary.final_max_coupling << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "dpdlab: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "dpdlab: " << e.what() << "\n";
    return kExitConfig;
  }
}
