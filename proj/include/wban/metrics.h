#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wban/body.h"
#include "wban/frame.h"
#include "wban/mac.h"
#include "wban/sim_time.h"

namespace wban {

struct NodeStats {
  std::uint64_t data_tx = 0;
  std::uint64_t data_rx = 0;
  std::uint64_t control_tx = 0;
  std::uint64_t control_rx = 0;
  std::uint64_t drops_queue = 0;
  std::uint64_t drops_csma = 0;
  /// Distinct messages received.
  std::uint64_t received = 0;
  /// First receptions that arrived after a higher sequence number.
  std::uint64_t out_of_order = 0;
  std::int64_t max_seq_seen = -1;
  std::map<MessageId, SimTime> first_rx;

  std::uint64_t txrx() const { return data_tx + data_rx + control_tx + control_rx; }
};

struct Desequencing {
  std::array<std::optional<double>, kNumSites> per_node{};
  double network_pct = 0.0;
  bool no_data = true;
};

/// Observations of a single run.
class MetricsRecord {
 public:
  explicit MetricsRecord(std::string scenario_key = {}) : key_(std::move(scenario_key)) {}

  void record_origination(const MessageId& id, SimTime at);
  void record_tx(Site node, const Frame& frame);
  /// An intact reception of `frame` at `node`.
  void record_rx(Site node, const Frame& frame, SimTime at);
  void record_drop(Site node, DropReason reason);

  const NodeStats& node(Site s) const { return nodes_[index(s)]; }
  const std::map<MessageId, SimTime>& originations() const { return originated_; }
  const std::string& scenario_key() const { return key_; }

  /// Mean over non-sink nodes of the share of originated messages received.
  double coverage_pct() const;
  /// Mean first-reception delay over every (node, message) reception;
  /// nodes that never got a message do not contribute.
  std::optional<double> mean_delay_s() const;
  std::optional<double> node_mean_delay_s(Site s) const;
  Desequencing desequencing() const;

  std::uint64_t tx_total() const;
  std::uint64_t rx_total() const;
  std::uint64_t data_tx() const;
  std::uint64_t data_rx() const;
  std::uint64_t drops() const;

 private:
  std::string key_;
  std::array<NodeStats, kNumSites> nodes_{};
  std::map<MessageId, SimTime> originated_;
  // Double-counting checks; only populated in debug builds.
  std::map<std::uint64_t, SiteSet> rx_seen_;
  std::set<std::uint64_t> tx_seen_;
};

/// Scalars extracted from one run; the unit of cross-seed aggregation.
struct RunSummary {
  std::string scenario_key;
  double coverage_pct = 0.0;
  std::optional<double> delay_s;
  double tx = 0.0;
  double rx = 0.0;
  double data_tx = 0.0;
  double data_rx = 0.0;
  double deseq_pct = 0.0;
  double drops = 0.0;
  std::array<std::optional<double>, kNumSites> node_delay_s{};
  std::array<double, kNumSites> node_txrx{};
};

RunSummary summarize(const MetricsRecord& record);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  std::size_t n = 0;
};

/// Sorted-sum mean and sample standard deviation, independent of input order.
Stat make_stat(std::vector<double> values);

struct AggregateResult {
  std::string scenario_key;
  std::size_t seeds = 0;
  Stat coverage_pct;
  Stat delay_s;
  Stat tx;
  Stat rx;
  Stat data_tx;
  Stat data_rx;
  Stat deseq_pct;
  Stat drops;
  std::array<Stat, kNumSites> node_delay_s{};
  std::array<Stat, kNumSites> node_txrx{};
};

/// Throws std::invalid_argument on an empty input or mixed scenario keys.
AggregateResult aggregate(std::span<const RunSummary> runs);
AggregateResult aggregate(std::span<const MetricsRecord> records);

}  // namespace wban
