#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wban/channel.h"
#include "wban/engine.h"
#include "wban/mac.h"
#include "wban/metrics.h"
#include "wban/strategy.h"

namespace wban {

enum class SourceMode : std::uint8_t { kSinglePacket, kRate };

struct SourceConfig {
  SourceMode mode = SourceMode::kSinglePacket;
  double rate_pps = 10.0;
  /// First origination.
  SimTime start;
  /// Rate mode: originations happen during [start, start + window).
  SimTime window = SimTime::seconds(1.0);

  /// Number of messages the sink originates.
  std::uint32_t message_count() const;
  SimTime origination_time(std::uint32_t seq) const;
};

struct RunConfig {
  std::string scenario_key;
  ChannelConfig channel = default_channel_config();
  Posture posture = Posture::kWalk;
  StrategyParams strategy;
  MacParams mac;
  SourceConfig source;
  /// Hard cap, counted from the end of the origination window.
  SimTime duration = SimTime::seconds(20.0);
  std::uint64_t seed = 1;
};

/// One transmission as seen on the air.
struct TxRecord {
  SimTime at;
  Frame frame;
};

/// A complete network: engine, medium, seven MACs and seven strategy
/// instances wired together. Single use: construct, run(), inspect.
class Simulation {
 public:
  explicit Simulation(RunConfig config);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Human-readable event trace, one line per event or reception outcome.
  void set_trace(std::ostream* out) { trace_ = out; }
  /// Keep every transmitted frame (for tests and audits).
  void keep_tx_log(bool on) { keep_tx_log_ = on; }

  MetricsRecord run();

  /// No origination pending, all queues empty, no strategy timer armed and
  /// no strategy holding a message.
  bool quiescent() const;
  bool finished_quiescent() const { return finished_quiescent_; }

  const Engine& engine() const { return engine_; }
  const Channel& channel() const { return channel_; }
  const Mac& mac(Site s) const { return *macs_[index(s)]; }
  const Strategy& strategy(Site s) const { return *nodes_[index(s)].strategy; }
  const std::vector<TxRecord>& tx_log() const { return tx_log_; }
  const MetricsRecord& metrics() const { return metrics_; }
  const RunConfig& config() const { return config_; }

 private:
  struct Node {
    std::unique_ptr<Strategy> strategy;
    RngStream rng;
    std::map<TimerKey, EventHandle> timers;
  };

  void apply(Site node, Actions actions);
  void on_tx_end(const Frame& frame, const std::vector<Reception>& rx);
  void fire_timer(Site node, TimerKey key);
  void schedule_resample();
  void originate(std::uint32_t seq);
  NodeContext context(Site s) { return NodeContext{s, engine_.now(), nodes_[index(s)].rng}; }

  void trace(int target, std::string_view what, std::string_view detail);

  RunConfig config_;
  Engine engine_;
  Channel channel_;
  std::vector<Node> nodes_;
  std::vector<std::unique_ptr<Mac>> macs_;
  MetricsRecord metrics_;
  std::ostream* trace_ = nullptr;
  bool keep_tx_log_ = false;
  std::vector<TxRecord> tx_log_;
  std::uint64_t next_uid_ = 1;
  std::uint32_t originated_ = 0;
  bool finished_quiescent_ = false;
};

}  // namespace wban
