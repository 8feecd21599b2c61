#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "wban/body.h"
#include "wban/channel.h"
#include "wban/mac.h"
#include "wban/simulation.h"
#include "wban/strategy.h"

namespace wban {

/// Everything an experiment family needs: channel, MAC, strategy sets and the
/// swept value lists. Loaded from YAML; see scenarios/default.yaml.
struct Scenario {
  std::string id = "default";
  std::uint64_t seed_base = 1;
  int seeds = 50;

  ChannelConfig channel = default_channel_config();
  /// Posture of the single-posture families (TTL, rate, queue, timer sweeps).
  Posture posture = Posture::kWalk;
  /// Postures of the per-posture families.
  std::vector<Posture> postures{kAllPostures.begin(), kAllPostures.end()};

  MacParams mac;
  /// Template for every strategy entry; entries override individual fields.
  StrategyParams defaults;
  std::vector<StrategyParams> strategies;
  std::vector<StrategyParams> rate_strategies;

  /// Cap for single-packet runs; they normally end on quiescence first.
  SimTime duration = SimTime::seconds(10.0);
  /// Cap after the end of the origination window in rate mode.
  SimTime rate_drain = SimTime::seconds(5.0);

  std::vector<int> ttl_sweep{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> rates{1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
  SimTime rate_window = SimTime::seconds(1.0);
  std::vector<std::size_t> queue_capacities{1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 10000};
  double queue_study_rate = 100.0;
  std::vector<double> mbp_timers_s;

  /// Seed of the i-th replicate.
  std::uint64_t seed(int i) const { return seed_base + static_cast<std::uint64_t>(i); }
};

/// Shipped defaults, identical to scenarios/default.yaml.
Scenario default_scenario();

/// 15 log-spaced values from 0.005 s to 1 s.
std::vector<double> default_mbp_timers();

/// File could not be read or is not YAML at all.
class ScenarioIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// YAML parsed but the content is malformed or breaks a rule.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Parses and validates. Throws ScenarioIoError or ScenarioError.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& yaml_text,
                        const std::filesystem::path& base_dir = {});

/// Rule violations of an in-memory scenario. The quiescence check runs
/// Flooding at the largest swept TTL and is skipped when `run_checks` is false.
std::vector<std::string> validate_scenario(const Scenario& s, bool run_checks = true);

/// Run configuration for one replicate of a single-packet point.
RunConfig single_packet_run(const Scenario& s, const StrategyParams& p, Posture posture,
                            std::uint64_t seed);
/// Run configuration for one replicate of a rate-mode point.
RunConfig rate_run(const Scenario& s, const StrategyParams& p, double rate_pps,
                   std::size_t queue_capacity, std::uint64_t seed);

}  // namespace wban
