#include "wban/engine.h"

#include <cassert>
#include <stdexcept>

namespace wban {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kAppPacketDue: return "AppPacketDue";
    case EventKind::kChannelResample: return "ChannelResample";
    case EventKind::kCcaDue: return "CcaDue";
    case EventKind::kFrameTxStart: return "FrameTxStart";
    case EventKind::kFrameTxEnd: return "FrameTxEnd";
    case EventKind::kTimerFired: return "TimerFired";
    case EventKind::kHelloDue: return "HelloDue";
  }
  return "?";
}

EventHandle Engine::schedule(SimTime at, EventKind kind, int target, Callback cb) {
  if (at < now_) throw std::logic_error("Engine::schedule: event in the past");
  const std::uint64_t index = next_index_++;
  queue_.push(Entry{at, index, kind, target});
  live_.emplace(index, std::move(cb));
  return EventHandle{index};
}

bool Engine::cancel(EventHandle h) { return live_.erase(h.id) > 0; }

SimTime Engine::run_until(SimTime end, const std::function<bool()>& stop) {
  while (!queue_.empty()) {
    const Entry top = queue_.top();
    if (top.at > end) break;
    queue_.pop();
    auto it = live_.find(top.index);
    if (it == live_.end()) continue;  // cancelled
#ifndef NDEBUG
    assert(top.at > last_at_ || (top.at == last_at_ && top.index > last_index_));
    last_at_ = top.at;
    last_index_ = top.index;
#endif
    Callback cb = std::move(it->second);
    live_.erase(it);
    now_ = top.at;
    ++processed_;
    if (observer_) observer_(top.at, top.kind, top.target);
    cb();
    if (stop && stop()) break;
  }
  return now_;
}

}  // namespace wban
