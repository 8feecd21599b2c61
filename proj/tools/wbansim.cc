// Command-line front end: run experiment families, validate scenario files,
// dump event traces.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "wban/experiment.h"
#include "wban/scenario.h"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFault = 2;

constexpr const char* kSeedBaseEnv = "WBAN_SEED_BASE";

wban::Scenario load(const std::string& path) {
  wban::Scenario s = wban::load_scenario(path);
  if (const char* env = std::getenv(kSeedBaseEnv)) {
    try {
      std::size_t used = 0;
      s.seed_base = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw wban::ScenarioError({fmt::format("{}: '{}' is not an unsigned integer", kSeedBaseEnv, env)});
    }
  }
  return s;
}

int cmd_run(const std::string& path, const std::string& which, const std::string& out_dir,
            unsigned jobs, bool quiet) {
  const auto exp = wban::parse_experiment(which);
  if (!exp) {
    std::cerr << fmt::format("unknown experiment '{}' (expected E1..E6)\n", which);
    return kInvalid;
  }
  const wban::Scenario s = load(path);
  std::filesystem::create_directories(out_dir);

  wban::RunnerOptions opt;
  opt.jobs = jobs;
  if (!quiet) {
    opt.progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 100 == 0)
        std::cerr << fmt::format("\r{} / {} runs", done, total) << (done == total ? "\n" : "")
                  << std::flush;
    };
  }
  const wban::ExperimentResult r = wban::run_experiment(s, *exp, opt);

  const auto name = std::string(wban::to_string(*exp));
  const auto csv = std::filesystem::path(out_dir) / (name + ".csv");
  std::ofstream f(csv);
  wban::write_csv(f, r);
  if (*exp == wban::Experiment::kE2 || *exp == wban::Experiment::kE3) {
    std::ofstream nodes(std::filesystem::path(out_dir) / (name + "_nodes.csv"));
    wban::write_node_csv(nodes, r);
    if (!nodes) throw std::runtime_error("failed writing per-node CSV in " + out_dir);
  }
  if (!f) throw std::runtime_error("failed writing " + csv.string());
  if (!quiet) std::cerr << "wrote " << csv.string() << '\n';
  return kOk;
}

int cmd_validate(const std::string& path) {
  const wban::Scenario s = load(path);
  std::cout << fmt::format("{}: ok ({} strategies, {} rate strategies, {} seeds)\n", path,
                           s.strategies.size(), s.rate_strategies.size(), s.seeds);
  return kOk;
}

struct ReplayArgs {
  std::uint64_t seed = 1;
  std::string strategy = "flooding";
  std::string posture;
  int ttl = 0;
  double rate = 0;
  std::string out;
};

int cmd_replay(const std::string& path, const ReplayArgs& a) {
  const wban::Scenario s = load(path);
  wban::StrategyParams p = s.defaults;
  const auto kind = wban::parse_strategy(a.strategy);
  if (!kind) {
    std::cerr << fmt::format("unknown strategy '{}'\n", a.strategy);
    return kInvalid;
  }
  p.kind = *kind;
  if (a.ttl > 0) p.ttl_init = a.ttl;
  wban::Posture posture = s.posture;
  if (!a.posture.empty()) {
    const auto parsed = wban::parse_posture(a.posture);
    if (!parsed) {
      std::cerr << fmt::format("unknown posture '{}'\n", a.posture);
      return kInvalid;
    }
    posture = *parsed;
  }
  if (const auto v = p.violations(); !v.empty()) throw wban::ScenarioError(v);

  wban::RunConfig c = a.rate > 0 ? wban::rate_run(s, p, a.rate, s.mac.queue_capacity, a.seed)
                                 : wban::single_packet_run(s, p, posture, a.seed);
  c.posture = posture;

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw std::runtime_error("cannot write " + a.out);
    out = &file;
  }
  wban::Simulation sim(c);
  sim.set_trace(out);
  sim.run();
  out->flush();
  if (!*out) throw std::runtime_error("failed writing trace");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broadcast strategies on a seven-node body area network"};
  app.require_subcommand(1);

  std::string scenario;
  std::string experiment;
  std::string out_dir = "results";
  unsigned jobs = 0;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run one experiment family and write CSV");
  run->add_option("scenario", scenario, "Scenario YAML file")->required();
  run->add_option("--experiment,-e", experiment, "E1..E6")->required();
  run->add_option("--out,-o", out_dir, "Output directory");
  run->add_option("--jobs,-j", jobs, "Worker threads (0 = all cores)");
  run->add_flag("--quiet,-q", quiet, "No progress output");

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", scenario, "Scenario YAML file")->required();

  ReplayArgs ra;
  auto* replay = app.add_subcommand("replay", "Print the event trace of a single run");
  replay->add_option("scenario", scenario, "Scenario YAML file")->required();
  replay->add_option("--seed", ra.seed, "Run seed")->required();
  replay->add_option("--strategy", ra.strategy, "Strategy name");
  replay->add_option("--posture", ra.posture, "Posture (default: scenario posture)");
  replay->add_option("--ttl", ra.ttl, "Initial TTL (default: scenario default)");
  replay->add_option("--rate", ra.rate, "Packets per second; omit for a single packet");
  replay->add_option("--out,-o", ra.out, "Write the trace to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) return cmd_run(scenario, experiment, out_dir, jobs, quiet);
    if (*validate) return cmd_validate(scenario);
    if (*replay) return cmd_replay(scenario, ra);
  } catch (const wban::ScenarioIoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFault;
  } catch (const wban::ScenarioError& e) {
    std::cerr << scenario << ": invalid scenario\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "fault: " << e.what() << '\n';
    return kFault;
  }
  return kFault;
}
