#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "wban/metrics.h"
#include "wban/scenario.h"

namespace wban {

/// E1 coverage vs TTL; E2 delay per node and posture; E3 tx/rx per node and
/// posture; E4 load (rate) study; E5 MAC queue study; E6 MBP timer study.
enum class Experiment : std::uint8_t { kE1 = 1, kE2, kE3, kE4, kE5, kE6 };

std::string_view to_string(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);

/// One row of output: a fully specified configuration aggregated over seeds.
struct SweepPoint {
  StrategyParams strategy;
  Posture posture = Posture::kWalk;
  SourceMode mode = SourceMode::kSinglePacket;
  double rate_pps = 0.0;
  std::size_t queue_capacity = 0;

  /// Unique within an experiment; used as the aggregation key.
  std::string key() const;
  RunConfig run_config(const Scenario& s, std::uint64_t seed) const;
};

std::vector<SweepPoint> sweep_points(const Scenario& s, Experiment e);

struct PointResult {
  SweepPoint point;
  AggregateResult stats;
  /// Per-seed summaries in seed order.
  std::vector<RunSummary> runs;
};

struct ExperimentResult {
  Experiment experiment = Experiment::kE1;
  std::string scenario_id;
  std::vector<PointResult> points;
};

struct RunnerOptions {
  /// Worker threads; 0 means one per hardware thread.
  unsigned jobs = 1;
  /// Called after each finished run with (done, total); may be invoked from
  /// worker threads, but never concurrently.
  std::function<void(std::size_t, std::size_t)> progress;
};

/// Runs every (point, seed) pair and aggregates per point. Output order and
/// content do not depend on the number of jobs.
ExperimentResult run_experiment(const Scenario& s, Experiment e, const RunnerOptions& opt = {});
std::vector<PointResult> run_points(const Scenario& s, const std::vector<SweepPoint>& points,
                                    const RunnerOptions& opt = {});

/// Fixed column order, header first.
std::string csv_header();
void write_csv(std::ostream& out, const ExperimentResult& r);
/// Per-node delay and tx+rx rows (families E2 and E3).
std::string node_csv_header();
void write_node_csv(std::ostream& out, const ExperimentResult& r);

}  // namespace wban
