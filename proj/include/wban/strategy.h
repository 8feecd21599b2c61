#pragma once

#include <array>
#include <map>
#include <set>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wban/body.h"
#include "wban/frame.h"
#include "wban/rng.h"
#include "wban/sim_time.h"

namespace wban {

enum class StrategyKind : std::uint8_t {
  kFlooding,
  kPlainFlooding,
  kPrunedFlooding,
  kProbabilistic,            // constant P
  kProbabilisticDecreasing,  // P = 1, 1/2, 1/4, ...
  kTabuFlooding,
  kEbp,
  kMbp,
  kOptFlood,
};

inline constexpr std::array<StrategyKind, 9> kAllStrategyKinds = {
    StrategyKind::kFlooding,      StrategyKind::kPlainFlooding,
    StrategyKind::kPrunedFlooding, StrategyKind::kProbabilistic,
    StrategyKind::kProbabilisticDecreasing, StrategyKind::kTabuFlooding,
    StrategyKind::kEbp,           StrategyKind::kMbp,
    StrategyKind::kOptFlood};

std::string_view to_string(StrategyKind kind);
/// Accepts the canonical names returned by to_string (case-insensitive,
/// '_' and ' ' treated as '-').
std::optional<StrategyKind> parse_strategy(std::string_view name);

/// EBP neighbour threshold per site: 3 at the gateway, 1 at the extremities,
/// 2 elsewhere.
int ebp_threshold(Site s);

struct StrategyParams {
  StrategyKind kind = StrategyKind::kFlooding;
  int ttl_init = 8;
  int pruned_k = 3;
  double probability = 0.5;
  SimTime hello_interval = SimTime::millis(250);
  int mbp_delta = 2;
  SimTime mbp_timer = SimTime::millis(50);
  int mbp_quota = 1;
  int app_bits = 320;

  /// Short description including the parameters that matter for `kind`.
  std::string label() const;
  std::vector<std::string> violations() const;
};

enum class TimerTag : std::uint8_t { kHello, kMbpWait };

struct TimerKey {
  TimerTag tag = TimerTag::kHello;
  MessageId msg;
  auto operator<=>(const TimerKey&) const = default;
};

/// Hand a frame to the local MAC. The runtime fills in sender and uid.
struct SendFrame {
  Frame frame;
};
struct StartTimer {
  TimerKey key;
  SimTime delay;
};
struct CancelTimer {
  TimerKey key;
};

using Action = std::variant<SendFrame, StartTimer, CancelTimer>;
using Actions = std::vector<Action>;

/// What a strategy sees of its node when reacting to an input.
struct NodeContext {
  Site self;
  SimTime now;
  RngStream& rng;
};

/// A forwarding policy as a state machine over one node's inputs.
class Strategy {
 public:
  virtual ~Strategy() = default;

  virtual StrategyKind kind() const = 0;
  virtual Actions start(const NodeContext&) { return {}; }
  /// The local node is the origin of `msg`.
  virtual Actions originate(const BroadcastMessage& msg, const NodeContext& ctx) = 0;
  /// A frame that the MAC received intact (possibly addressed to others).
  virtual Actions receive(const Frame& frame, const NodeContext& ctx) = 0;
  virtual Actions timer(const TimerKey&, const NodeContext&) { return {}; }
  /// True while the strategy keeps messages it may still forward later
  /// without any further input apart from background traffic.
  virtual bool holding(SimTime) const { return false; }
};

std::unique_ptr<Strategy> make_strategy(const StrategyParams& params);

/// Copy forwarded by one more hop.
BroadcastMessage next_hop(const BroadcastMessage& m);

// Concrete policies, exposed for unit tests.

class Flooding : public Strategy {
 public:
  explicit Flooding(const StrategyParams& p) : params_(p) {}
  StrategyKind kind() const override { return StrategyKind::kFlooding; }
  Actions originate(const BroadcastMessage& msg, const NodeContext& ctx) override;
  Actions receive(const Frame& frame, const NodeContext& ctx) override;

 private:
  StrategyParams params_;
};

class PlainFlooding : public Strategy {
 public:
  explicit PlainFlooding(const StrategyParams& p) : params_(p) {}
  StrategyKind kind() const override { return StrategyKind::kPlainFlooding; }
  Actions originate(const BroadcastMessage& msg, const NodeContext& ctx) override;
  Actions receive(const Frame& frame, const NodeContext& ctx) override;

 private:
  StrategyParams params_;
  std::set<MessageId> seen_;
};

class PrunedFlooding : public Strategy {
 public:
  explicit PrunedFlooding(const StrategyParams& p) : params_(p) {}
  StrategyKind kind() const override { return StrategyKind::kPrunedFlooding; }
  Actions originate(const BroadcastMessage& msg, const NodeContext& ctx) override;
  Actions receive(const Frame& frame, const NodeContext& ctx) override;

 private:
  Actions fan_out(const BroadcastMessage& copy, const NodeContext& ctx) const;
  StrategyParams params_;
};

class ProbabilisticFlooding : public Strategy {
 public:
  ProbabilisticFlooding(const StrategyParams& p, bool decreasing)
      : params_(p), decreasing_(decreasing) {}
  StrategyKind kind() const override {
    return decreasing_ ? StrategyKind::kProbabilisticDecreasing : StrategyKind::kProbabilistic;
  }
  Actions originate(const BroadcastMessage& msg, const NodeContext& ctx) override;
  Actions receive(const Frame& frame, const NodeContext& ctx) override;

  /// Probability applied to the next reception of `id`.
  double forwarding_probability(const MessageId& id) const;
  int receptions(const MessageId& id) const;

 private:
  StrategyParams params_;
  bool decreasing_;
  std::map<MessageId, int> counts_;
};

class TabuFlooding : public Strategy {
 public:
  explicit TabuFlooding(const StrategyParams& p) : params_(p) {}
  StrategyKind kind() const override { return StrategyKind::kTabuFlooding; }
  Actions originate(const BroadcastMessage& msg, const NodeContext& ctx) override;
  Actions receive(const Frame& frame, const NodeContext& ctx) override;
  SiteSet known_covered(const MessageId& id) const;

 private:
  StrategyParams params_;
  std::map<MessageId, SiteSet> covered_;
};

class OptFlood : public Strategy {
 public:
  explicit OptFlood(const StrategyParams& p) : params_(p) {}
  StrategyKind kind() const override { return StrategyKind::kOptFlood; }
  Actions originate(const BroadcastMessage& msg, const NodeContext& ctx) override;
  Actions receive(const Frame& frame, const NodeContext& ctx) override;

  /// Local copy of the global counter; 0 when the message was never seen.
  int cpt_local(const MessageId& id) const;
  bool stopped(const MessageId& id) const;

 private:
  struct Entry {
    int cpt_local = 0;
    bool stopped = false;
  };

  StrategyParams params_;
  std::map<MessageId, Entry> entries_;
};

class Ebp : public Strategy {
 public:
  explicit Ebp(const StrategyParams& p) : params_(p) {}
  StrategyKind kind() const override { return StrategyKind::kEbp; }
  Actions start(const NodeContext& ctx) override;
  Actions originate(const BroadcastMessage& msg, const NodeContext& ctx) override;
  Actions receive(const Frame& frame, const NodeContext& ctx) override;
  Actions timer(const TimerKey& key, const NodeContext& ctx) override;
  bool holding(SimTime now) const override;

  /// Neighbours heard within two hello intervals of `now`.
  SiteSet fresh_neighbors(Site self, SimTime now) const;
  SiteSet known_covered(const MessageId& id) const;
  void note_heard(Site neighbor, SimTime at) { last_heard_[index(neighbor)] = at; }

 private:
  // One forwarding opportunity per received copy, deferred until the
  // neighbourhood conditions hold.
  struct Held {
    BroadcastMessage copy;
    SiteSet covered;
    bool own = false;
    bool pending = false;
  };
  Actions evaluate(const NodeContext& ctx);

  StrategyParams params_;
  std::array<std::optional<SimTime>, kNumSites> last_heard_{};
  std::map<MessageId, Held> held_;
};

class Mbp : public Strategy {
 public:
  explicit Mbp(const StrategyParams& p) : params_(p) {}
  StrategyKind kind() const override { return StrategyKind::kMbp; }
  Actions originate(const BroadcastMessage& msg, const NodeContext& ctx) override;
  Actions receive(const Frame& frame, const NodeContext& ctx) override;
  Actions timer(const TimerKey& key, const NodeContext& ctx) override;
  bool holding(SimTime) const override;

  int acks(const MessageId& id) const;
  bool suppressed(const MessageId& id) const;
  bool waiting(const MessageId& id) const;

 private:
  struct Entry {
    int acks = 0;
    bool suppressed = false;
    bool waiting = false;
    BroadcastMessage pending;
  };
  const Entry* find(const MessageId& id) const;

  StrategyParams params_;
  std::map<MessageId, Entry> entries_;
};

}  // namespace wban
