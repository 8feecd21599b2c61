#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "wban/channel.h"
#include "wban/engine.h"
#include "wban/frame.h"
#include "wban/rng.h"

namespace wban {

/// Unslotted 802.15.4 CSMA/CA parameters (2.4 GHz O-QPSK PHY defaults).
struct MacParams {
  int min_be = 3;
  int max_be = 5;
  int max_csma_backoffs = 4;
  SimTime backoff_unit = SimTime::micros(320);
  SimTime cca_duration = SimTime::micros(128);
  SimTime turnaround = SimTime::micros(192);
  double data_rate_bps = 250000.0;
  /// PHY preamble/SFD/PHR (6 B) plus a broadcast MAC header with short
  /// addresses and FCS (11 B).
  int header_bits = 17 * 8;
  std::size_t queue_capacity = 100;

  SimTime airtime(int payload_bits) const;
  std::vector<std::string> violations() const;
};

enum class EnqueueResult : std::uint8_t { kAccepted, kDropped };

/// Bounded FIFO with drop-tail overflow.
class MacQueue {
 public:
  explicit MacQueue(std::size_t capacity) : capacity_(capacity) {}

  EnqueueResult push(Frame frame);
  Frame pop();
  const Frame& front() const { return frames_.front(); }
  bool empty() const { return frames_.empty(); }
  std::size_t size() const { return frames_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t drops() const { return drops_; }
  std::size_t high_water() const { return high_water_; }

 private:
  std::size_t capacity_;
  std::deque<Frame> frames_;
  std::uint64_t drops_ = 0;
  std::size_t high_water_ = 0;
};

enum class DropReason : std::uint8_t { kQueueFull, kChannelAccessFailure };

struct MacCounters {
  std::uint64_t offered = 0;
  std::uint64_t transmitted = 0;
  std::uint64_t dropped_queue = 0;
  std::uint64_t dropped_csma = 0;
};

/// Per-node MAC entity. Owns the transmit queue and drives CSMA/CA through
/// engine events; frames on the air are registered with the channel.
class Mac {
 public:
  struct Hooks {
    std::function<void(const Frame&)> on_tx_start;
    std::function<void(const Frame&, const std::vector<Reception>&)> on_tx_end;
    std::function<void(const Frame&, DropReason)> on_drop;
    std::function<void(bool busy, int nb, int be)> on_cca;
  };

  Mac(Site self, const MacParams& params, Engine& engine, Channel& channel, RngStream rng,
      Hooks hooks);
  Mac(const Mac&) = delete;
  Mac& operator=(const Mac&) = delete;

  EnqueueResult enqueue(Frame frame);

  /// Queue non-empty (a frame is in backoff, CCA or on the air).
  bool busy() const { return !queue_.empty(); }
  bool transmitting() const { return state_ == State::kTransmitting; }
  const MacQueue& queue() const { return queue_; }
  const MacCounters& counters() const { return counters_; }
  Site self() const { return self_; }

 private:
  enum class State : std::uint8_t { kIdle, kBackoff, kTurnaround, kTransmitting };

  void start_csma();
  void schedule_backoff();
  void on_cca();
  void on_tx_start();
  void on_tx_end(std::uint64_t tx_id);
  void next_frame();

  Site self_;
  MacParams params_;
  Engine& engine_;
  Channel& channel_;
  RngStream rng_;
  Hooks hooks_;
  MacQueue queue_;
  MacCounters counters_;
  State state_ = State::kIdle;
  int nb_ = 0;
  int be_ = 0;
};

}  // namespace wban
