#include "wban/mac.h"

#include <algorithm>
#include <cmath>

namespace wban {

SimTime MacParams::airtime(int payload_bits) const {
  return SimTime::seconds(static_cast<double>(header_bits + payload_bits) / data_rate_bps);
}

std::vector<std::string> MacParams::violations() const {
  std::vector<std::string> out;
  if (min_be < 0) out.push_back("mac.min_be must be >= 0");
  if (min_be > max_be) out.push_back("mac.min_be must be <= mac.max_be");
  if (max_be > 20) out.push_back("mac.max_be must be <= 20");
  if (max_csma_backoffs < 1) out.push_back("mac.max_csma_backoffs must be >= 1");
  if (backoff_unit <= SimTime()) out.push_back("mac.backoff_unit must be > 0");
  if (!(data_rate_bps > 0.0)) out.push_back("mac.data_rate_bps must be > 0");
  if (header_bits < 0) out.push_back("mac.header_bits must be >= 0");
  if (queue_capacity < 1) out.push_back("mac.queue_capacity must be >= 1");
  return out;
}

EnqueueResult MacQueue::push(Frame frame) {
  if (frames_.size() >= capacity_) {
    ++drops_;
    return EnqueueResult::kDropped;
  }
  frames_.push_back(std::move(frame));
  high_water_ = std::max(high_water_, frames_.size());
  return EnqueueResult::kAccepted;
}

Frame MacQueue::pop() {
  Frame f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

Mac::Mac(Site self, const MacParams& params, Engine& engine, Channel& channel, RngStream rng,
         Hooks hooks)
    : self_(self),
      params_(params),
      engine_(engine),
      channel_(channel),
      rng_(std::move(rng)),
      hooks_(std::move(hooks)),
      queue_(params.queue_capacity) {}

EnqueueResult Mac::enqueue(Frame frame) {
  ++counters_.offered;
  const bool was_empty = queue_.empty();
  if (queue_.size() >= queue_.capacity()) {
    ++counters_.dropped_queue;
    if (hooks_.on_drop) hooks_.on_drop(frame, DropReason::kQueueFull);
  }
  const EnqueueResult r = queue_.push(std::move(frame));
  if (r == EnqueueResult::kDropped) return r;
  if (was_empty && state_ == State::kIdle) start_csma();
  return r;
}

void Mac::start_csma() {
  nb_ = 0;
  be_ = params_.min_be;
  schedule_backoff();
}

void Mac::schedule_backoff() {
  state_ = State::kBackoff;
  const auto slots = static_cast<std::int64_t>(rng_.uniform_int(std::uint64_t{1} << be_));
  const SimTime wait = params_.backoff_unit * slots + params_.cca_duration;
  engine_.schedule_in(wait, EventKind::kCcaDue, index(self_), [this] { on_cca(); });
}

void Mac::on_cca() {
  const bool busy = channel_.carrier_busy(self_);
  if (hooks_.on_cca) hooks_.on_cca(busy, nb_, be_);
  if (!busy) {
    state_ = State::kTurnaround;
    engine_.schedule_in(params_.turnaround, EventKind::kFrameTxStart, index(self_),
                        [this] { on_tx_start(); });
    return;
  }
  ++nb_;
  be_ = std::min(be_ + 1, params_.max_be);
  if (nb_ >= params_.max_csma_backoffs) {
    const Frame f = queue_.pop();
    ++counters_.dropped_csma;
    next_frame();
    if (hooks_.on_drop) hooks_.on_drop(f, DropReason::kChannelAccessFailure);
    return;
  }
  schedule_backoff();
}

void Mac::on_tx_start() {
  state_ = State::kTransmitting;
  ++counters_.transmitted;
  const Frame& f = queue_.front();
  const std::uint64_t tx_id = channel_.begin_transmission(self_);
  if (hooks_.on_tx_start) hooks_.on_tx_start(f);
  engine_.schedule_in(params_.airtime(f.payload_bits()), EventKind::kFrameTxEnd, index(self_),
                      [this, tx_id] { on_tx_end(tx_id); });
}

void Mac::on_tx_end(std::uint64_t tx_id) {
  const std::vector<Reception> rx = channel_.end_transmission(tx_id);
  const Frame f = queue_.pop();
  next_frame();
  if (hooks_.on_tx_end) hooks_.on_tx_end(f, rx);
}

void Mac::next_frame() {
  state_ = State::kIdle;
  if (!queue_.empty()) start_csma();
}

}  // namespace wban
