#include "wban/simulation.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace wban {

std::uint32_t SourceConfig::message_count() const {
  if (mode == SourceMode::kSinglePacket) return 1;
  const double n = std::floor(rate_pps * window.sec() + 1e-9);
  return static_cast<std::uint32_t>(std::max(1.0, n));
}

SimTime SourceConfig::origination_time(std::uint32_t seq) const {
  if (mode == SourceMode::kSinglePacket) return start;
  return start + SimTime::seconds(static_cast<double>(seq) / rate_pps);
}

namespace {

std::string_view target_name(int target) {
  return target == kChannelTarget ? std::string_view("channel") : to_string(site_at(target));
}

std::string describe(const Frame& f) {
  switch (f.kind) {
    case FrameKind::kData:
      return fmt::format("data {} ttl={} hops={} uid={}", to_string(f.msg.id), f.msg.ttl,
                         f.msg.hops, f.uid);
    case FrameKind::kAck:
      return fmt::format("ack {} uid={}", to_string(f.msg.id), f.uid);
    case FrameKind::kHello:
      return fmt::format("hello known={} uid={}", f.known.size(), f.uid);
  }
  return {};
}

}  // namespace

Simulation::Simulation(RunConfig config)
    : config_(std::move(config)),
      channel_(config_.channel, config_.posture,
               RngStream(config_.seed, StreamPurpose::kChannel)),
      metrics_(config_.scenario_key) {
  nodes_.reserve(kNumSites);
  macs_.reserve(kNumSites);
  for (Site s : kAllSites) {
    nodes_.push_back(Node{make_strategy(config_.strategy),
                          RngStream(config_.seed, StreamPurpose::kStrategy,
                                    static_cast<std::uint64_t>(index(s))),
                          {}});
    Mac::Hooks hooks;
    hooks.on_tx_start = [this, s](const Frame& f) {
      metrics_.record_tx(s, f);
      if (keep_tx_log_) tx_log_.push_back(TxRecord{engine_.now(), f});
      trace(index(s), "tx_start", describe(f));
    };
    hooks.on_tx_end = [this](const Frame& f, const std::vector<Reception>& rx) {
      on_tx_end(f, rx);
    };
    hooks.on_drop = [this, s](const Frame& f, DropReason r) {
      metrics_.record_drop(s, r);
      trace(index(s), r == DropReason::kQueueFull ? "drop_queue_full" : "drop_channel_access",
            describe(f));
    };
    hooks.on_cca = [this, s](bool busy, int nb, int be) {
      if (trace_)
        trace(index(s), "cca", fmt::format("{} nb={} be={}", busy ? "busy" : "idle", nb, be));
    };
    macs_.push_back(std::make_unique<Mac>(
        s, config_.mac, engine_, channel_,
        RngStream(config_.seed, StreamPurpose::kMac, static_cast<std::uint64_t>(index(s))),
        std::move(hooks)));
  }
}

void Simulation::trace(int target, std::string_view what, std::string_view detail) {
  if (!trace_) return;
  *trace_ << fmt::format("{:.6f} {} {}", engine_.now().sec(), target_name(target), what);
  if (!detail.empty()) *trace_ << ' ' << detail;
  *trace_ << '\n';
}

void Simulation::apply(Site node, Actions actions) {
  Node& n = nodes_[index(node)];
  for (Action& a : actions) {
    if (auto* send = std::get_if<SendFrame>(&a)) {
      Frame f = std::move(send->frame);
      f.sender = node;
      f.uid = next_uid_++;
      const std::string d = trace_ ? describe(f) : std::string();
      const EnqueueResult r = macs_[index(node)]->enqueue(std::move(f));
      if (r == EnqueueResult::kAccepted) trace(index(node), "enqueue", d);
    } else if (auto* start = std::get_if<StartTimer>(&a)) {
      auto it = n.timers.find(start->key);
      if (it != n.timers.end()) engine_.cancel(it->second);
      const TimerKey key = start->key;
      const EventKind kind =
          key.tag == TimerTag::kHello ? EventKind::kHelloDue : EventKind::kTimerFired;
      n.timers[key] = engine_.schedule_in(start->delay, kind, index(node),
                                          [this, node, key] { fire_timer(node, key); });
    } else if (auto* cancel = std::get_if<CancelTimer>(&a)) {
      auto it = n.timers.find(cancel->key);
      if (it != n.timers.end()) {
        engine_.cancel(it->second);
        n.timers.erase(it);
      }
    }
  }
}

void Simulation::fire_timer(Site node, TimerKey key) {
  Node& n = nodes_[index(node)];
  n.timers.erase(key);
  trace(index(node), key.tag == TimerTag::kHello ? "hello_due" : "timer_fired",
        key.tag == TimerTag::kHello ? std::string() : to_string(key.msg));
  apply(node, n.strategy->timer(key, context(node)));
}

void Simulation::on_tx_end(const Frame& frame, const std::vector<Reception>& rx) {
  trace(index(frame.sender), "tx_end", describe(frame));
  for (const Reception& r : rx) {
    if (trace_)
      trace(index(r.receiver), "rx", fmt::format("from={} uid={} {}", to_string(frame.sender),
                                                 frame.uid, to_string(r.outcome)));
    if (r.outcome != RxOutcome::kReceived) continue;
    metrics_.record_rx(r.receiver, frame, engine_.now());
    apply(r.receiver, nodes_[index(r.receiver)].strategy->receive(frame, context(r.receiver)));
  }
}

void Simulation::schedule_resample() {
  engine_.schedule_in(config_.channel.coherence_interval, EventKind::kChannelResample,
                      kChannelTarget, [this] {
                        channel_.resample();
                        trace(kChannelTarget, "resample", {});
                        schedule_resample();
                      });
}

void Simulation::originate(std::uint32_t seq) {
  BroadcastMessage m;
  m.id = MessageId{kSink, seq};
  m.ttl = config_.strategy.ttl_init;
  m.hops = 1;
  m.app_bits = config_.strategy.app_bits;
  ++originated_;
  metrics_.record_origination(m.id, engine_.now());
  trace(index(kSink), "originate", to_string(m.id));
  apply(kSink, nodes_[index(kSink)].strategy->originate(m, context(kSink)));
}

bool Simulation::quiescent() const {
  if (originated_ < config_.source.message_count()) return false;
  for (const auto& m : macs_)
    if (m->busy()) return false;
  for (const Node& n : nodes_) {
    for (const auto& [key, h] : n.timers)
      if (key.tag != TimerTag::kHello) return false;
    if (n.strategy->holding(engine_.now())) return false;
  }
  return true;
}

MetricsRecord Simulation::run() {
  schedule_resample();
  for (Site s : kAllSites) apply(s, nodes_[index(s)].strategy->start(context(s)));
  const std::uint32_t count = config_.source.message_count();
  for (std::uint32_t seq = 0; seq < count; ++seq) {
    engine_.schedule(config_.source.origination_time(seq), EventKind::kAppPacketDue,
                     index(kSink), [this, seq] { originate(seq); });
  }
  const SimTime last = config_.source.origination_time(count - 1);
  const SimTime end = last + config_.duration;
  engine_.run_until(end, [this] { return quiescent(); });
  finished_quiescent_ = quiescent();
  return metrics_;
}

}  // namespace wban
