#include "wban/metrics.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wban {

void MetricsRecord::record_origination(const MessageId& id, SimTime at) {
  originated_.emplace(id, at);
}

void MetricsRecord::record_tx(Site node, const Frame& frame) {
#ifndef NDEBUG
  const bool fresh = tx_seen_.insert(frame.uid).second;
  assert(fresh);
  (void)fresh;
#endif
  NodeStats& n = nodes_[index(node)];
  if (frame.is_control())
    ++n.control_tx;
  else
    ++n.data_tx;
}

void MetricsRecord::record_rx(Site node, const Frame& frame, SimTime at) {
#ifndef NDEBUG
  SiteSet& seen = rx_seen_[frame.uid];
  assert(!seen.contains(node));
  seen.insert(node);
#endif
  NodeStats& n = nodes_[index(node)];
  if (frame.is_control()) {
    ++n.control_rx;
    return;
  }
  ++n.data_rx;
  const MessageId& id = frame.msg.id;
  if (id.origin == node) return;
  if (!n.first_rx.emplace(id, at).second) return;
  ++n.received;
  const auto seq = static_cast<std::int64_t>(id.seq);
  if (n.max_seq_seen > seq)
    ++n.out_of_order;
  else
    n.max_seq_seen = seq;
}

void MetricsRecord::record_drop(Site node, DropReason reason) {
  NodeStats& n = nodes_[index(node)];
  if (reason == DropReason::kQueueFull)
    ++n.drops_queue;
  else
    ++n.drops_csma;
}

double MetricsRecord::coverage_pct() const {
  std::size_t sink_msgs = 0;
  for (const auto& [id, t] : originated_)
    if (id.origin == kSink) ++sink_msgs;
  if (sink_msgs == 0) return 0.0;
  double sum = 0.0;
  for (Site s : kAllSites) {
    if (s == kSink) continue;
    std::size_t got = 0;
    for (const auto& [id, t] : nodes_[index(s)].first_rx)
      if (id.origin == kSink && originated_.contains(id)) ++got;
    sum += static_cast<double>(got) / static_cast<double>(sink_msgs);
  }
  return 100.0 * sum / (kNumSites - 1);
}

std::optional<double> MetricsRecord::node_mean_delay_s(Site s) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [id, t] : nodes_[index(s)].first_rx) {
    auto it = originated_.find(id);
    if (it == originated_.end()) continue;
    sum += (t - it->second).sec();
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> MetricsRecord::mean_delay_s() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (Site s : kAllSites) {
    for (const auto& [id, t] : nodes_[index(s)].first_rx) {
      auto it = originated_.find(id);
      if (it == originated_.end()) continue;
      sum += (t - it->second).sec();
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

Desequencing MetricsRecord::desequencing() const {
  Desequencing d;
  double sum = 0.0;
  int counted = 0;
  for (Site s : kAllSites) {
    if (s == kSink) continue;
    const NodeStats& n = nodes_[index(s)];
    if (n.received == 0) continue;
    const double pct =
        100.0 * static_cast<double>(n.out_of_order) / static_cast<double>(n.received);
    d.per_node[index(s)] = pct;
    sum += pct;
    ++counted;
  }
  if (counted > 0) {
    d.no_data = false;
    d.network_pct = sum / counted;
  }
  return d;
}

namespace {
template <typename F>
std::uint64_t sum_nodes(const std::array<NodeStats, kNumSites>& nodes, F f) {
  std::uint64_t total = 0;
  for (const NodeStats& n : nodes) total += f(n);
  return total;
}
}  // namespace

std::uint64_t MetricsRecord::tx_total() const {
  return sum_nodes(nodes_, [](const NodeStats& n) { return n.data_tx + n.control_tx; });
}
std::uint64_t MetricsRecord::rx_total() const {
  return sum_nodes(nodes_, [](const NodeStats& n) { return n.data_rx + n.control_rx; });
}
std::uint64_t MetricsRecord::data_tx() const {
  return sum_nodes(nodes_, [](const NodeStats& n) { return n.data_tx; });
}
std::uint64_t MetricsRecord::data_rx() const {
  return sum_nodes(nodes_, [](const NodeStats& n) { return n.data_rx; });
}
std::uint64_t MetricsRecord::drops() const {
  return sum_nodes(nodes_, [](const NodeStats& n) { return n.drops_queue + n.drops_csma; });
}

RunSummary summarize(const MetricsRecord& r) {
  RunSummary s;
  s.scenario_key = r.scenario_key();
  s.coverage_pct = r.coverage_pct();
  s.delay_s = r.mean_delay_s();
  s.tx = static_cast<double>(r.tx_total());
  s.rx = static_cast<double>(r.rx_total());
  s.data_tx = static_cast<double>(r.data_tx());
  s.data_rx = static_cast<double>(r.data_rx());
  s.deseq_pct = r.desequencing().network_pct;
  s.drops = static_cast<double>(r.drops());
  for (Site site : kAllSites) {
    s.node_delay_s[index(site)] = r.node_mean_delay_s(site);
    s.node_txrx[index(site)] = static_cast<double>(r.node(site).txrx());
  }
  return s;
}

Stat make_stat(std::vector<double> values) {
  Stat st;
  st.n = values.size();
  if (values.empty()) return st;
  std::sort(values.begin(), values.end());
  st.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(st.n);
  if (st.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.std = std::sqrt(ss / static_cast<double>(st.n - 1));
  }
  return st;
}

AggregateResult aggregate(std::span<const RunSummary> runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  AggregateResult a;
  a.scenario_key = runs.front().scenario_key;
  a.seeds = runs.size();
  for (const RunSummary& r : runs)
    if (r.scenario_key != a.scenario_key)
      throw std::invalid_argument("aggregate: runs come from different scenarios ('" +
                                  a.scenario_key + "' vs '" + r.scenario_key + "')");

  auto collect = [&](auto get) {
    std::vector<double> v;
    v.reserve(runs.size());
    for (const RunSummary& r : runs) {
      if (auto x = get(r)) v.push_back(*x);
    }
    return make_stat(std::move(v));
  };
  using Opt = std::optional<double>;
  a.coverage_pct = collect([](const RunSummary& r) { return Opt(r.coverage_pct); });
  a.delay_s = collect([](const RunSummary& r) { return r.delay_s; });
  a.tx = collect([](const RunSummary& r) { return Opt(r.tx); });
  a.rx = collect([](const RunSummary& r) { return Opt(r.rx); });
  a.data_tx = collect([](const RunSummary& r) { return Opt(r.data_tx); });
  a.data_rx = collect([](const RunSummary& r) { return Opt(r.data_rx); });
  a.deseq_pct = collect([](const RunSummary& r) { return Opt(r.deseq_pct); });
  a.drops = collect([](const RunSummary& r) { return Opt(r.drops); });
  for (int i = 0; i < kNumSites; ++i) {
    a.node_delay_s[i] = collect([i](const RunSummary& r) { return r.node_delay_s[i]; });
    a.node_txrx[i] = collect([i](const RunSummary& r) { return Opt(r.node_txrx[i]); });
  }
  return a;
}

AggregateResult aggregate(std::span<const MetricsRecord> records) {
  std::vector<RunSummary> runs;
  runs.reserve(records.size());
  for (const MetricsRecord& r : records) runs.push_back(summarize(r));
  return aggregate(std::span<const RunSummary>(runs));
}

}  // namespace wban
