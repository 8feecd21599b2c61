#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wban/sim_time.h"

namespace wban {

enum class EventKind : std::uint8_t {
  kAppPacketDue,
  kChannelResample,
  kCcaDue,
  kFrameTxStart,
  kFrameTxEnd,
  kTimerFired,
  kHelloDue,
};

std::string_view to_string(EventKind kind);

/// Target used for events that belong to the medium rather than a node.
inline constexpr int kChannelTarget = -1;

struct EventHandle {
  std::uint64_t id = 0;
  explicit operator bool() const { return id != 0; }
};

/// Single-threaded discrete-event loop. Events are ordered by
/// (fire time, insertion index); equal times fire in scheduling order.
class Engine {
 public:
  using Callback = std::function<void()>;
  using Observer = std::function<void(SimTime, EventKind, int target)>;

  /// Throws std::logic_error when `at` lies before the current clock.
  EventHandle schedule(SimTime at, EventKind kind, int target, Callback cb);
  EventHandle schedule_in(SimTime delay, EventKind kind, int target, Callback cb) {
    return schedule(now_ + delay, kind, target, std::move(cb));
  }

  /// Returns false when the event already fired or was cancelled.
  bool cancel(EventHandle h);
  bool is_pending(EventHandle h) const { return live_.contains(h.id); }

  /// Processes every event with fire time <= end, in total order. Stops
  /// early when the queue drains or `stop` returns true after an event.
  /// The clock is left at the last processed event.
  SimTime run_until(SimTime end, const std::function<bool()>& stop = {});

  SimTime now() const { return now_; }
  std::size_t pending() const { return live_.size(); }
  std::uint64_t processed() const { return processed_; }

  /// Called before each event's callback runs.
  void set_observer(Observer obs) { observer_ = std::move(obs); }

 private:
  struct Entry {
    SimTime at;
    std::uint64_t index;
    EventKind kind;
    int target;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.index > b.index;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::unordered_map<std::uint64_t, Callback> live_;
  std::uint64_t next_index_ = 1;
  std::uint64_t processed_ = 0;
  SimTime now_;
  Observer observer_;
  SimTime last_at_;  // debug ordering check
  std::uint64_t last_index_ = 0;
};

}  // namespace wban
