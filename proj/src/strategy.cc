#include "wban/strategy.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fmt/format.h>

namespace wban {

namespace {

constexpr std::array<std::string_view, 9> kStrategyNames = {
    "flooding",      "plain-flooding", "pruned-flooding",
    "probabilistic-flooding", "probabilistic-flooding-decreasing",
    "tabu-flooding", "ebp",            "mbp",
    "optflood"};

Frame data_frame(const BroadcastMessage& m, SiteSet addressees = {}, int extension_bits = 0) {
  Frame f;
  f.kind = FrameKind::kData;
  f.msg = m;
  f.addressees = addressees;
  f.extension_bits = extension_bits;
  return f;
}

bool foreign_data(const Frame& f, const NodeContext& ctx) {
  return f.kind == FrameKind::kData && f.msg.id.origin != ctx.self;
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  return kStrategyNames[static_cast<std::size_t>(kind)];
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
  std::string norm;
  for (char c : name) {
    if (c == '_' || c == ' ') c = '-';
    norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (std::size_t i = 0; i < kStrategyNames.size(); ++i)
    if (kStrategyNames[i] == norm) return static_cast<StrategyKind>(i);
  return std::nullopt;
}

int ebp_threshold(Site s) {
  switch (s) {
    case Site::kChest: return 3;
    case Site::kHead:
    case Site::kWrist:
    case Site::kAnkle: return 1;
    default: return 2;
  }
}

std::string StrategyParams::label() const {
  switch (kind) {
    case StrategyKind::kPrunedFlooding:
      return fmt::format("{} K={}", to_string(kind), pruned_k);
    case StrategyKind::kProbabilistic:
      return fmt::format("{} P={:g}", to_string(kind), probability);
    case StrategyKind::kEbp:
      return fmt::format("{} I={:g}", to_string(kind), hello_interval.sec());
    case StrategyKind::kMbp:
      return fmt::format("{} delta={} T={:g} Q={}", to_string(kind), mbp_delta, mbp_timer.sec(),
                         mbp_quota);
    default:
      return std::string(to_string(kind));
  }
}

std::vector<std::string> StrategyParams::violations() const {
  std::vector<std::string> out;
  if (ttl_init < 1) out.push_back("ttl must be >= 1");
  if (app_bits < 0) out.push_back("app_bits must be >= 0");
  switch (kind) {
    case StrategyKind::kPrunedFlooding:
      if (pruned_k < 1 || pruned_k > kNumSites - 1)
        out.push_back(fmt::format("K={} out of range: 1 <= K <= {}", pruned_k, kNumSites - 1));
      break;
    case StrategyKind::kProbabilistic:
      if (!(probability > 0.0 && probability <= 1.0))
        out.push_back(fmt::format("P={} out of range: 0 < P <= 1", probability));
      break;
    case StrategyKind::kEbp:
      if (hello_interval <= SimTime()) out.push_back("hello_interval must be > 0");
      break;
    case StrategyKind::kMbp:
      if (mbp_delta < 1) out.push_back("delta must be >= 1");
      if (mbp_timer <= SimTime()) out.push_back("timer must be > 0");
      if (mbp_quota < 1) out.push_back("quota must be >= 1");
      break;
    default:
      break;
  }
  return out;
}

BroadcastMessage next_hop(const BroadcastMessage& m) {
  BroadcastMessage c = m;
  c.ttl = m.ttl - 1;
  c.hops = m.hops + 1;
  return c;
}

std::unique_ptr<Strategy> make_strategy(const StrategyParams& p) {
  switch (p.kind) {
    case StrategyKind::kFlooding: return std::make_unique<Flooding>(p);
    case StrategyKind::kPlainFlooding: return std::make_unique<PlainFlooding>(p);
    case StrategyKind::kPrunedFlooding: return std::make_unique<PrunedFlooding>(p);
    case StrategyKind::kProbabilistic: return std::make_unique<ProbabilisticFlooding>(p, false);
    case StrategyKind::kProbabilisticDecreasing:
      return std::make_unique<ProbabilisticFlooding>(p, true);
    case StrategyKind::kTabuFlooding: return std::make_unique<TabuFlooding>(p);
    case StrategyKind::kEbp: return std::make_unique<Ebp>(p);
    case StrategyKind::kMbp: return std::make_unique<Mbp>(p);
    case StrategyKind::kOptFlood: return std::make_unique<OptFlood>(p);
  }
  return nullptr;
}

// --- Flooding: every received copy goes out again while ttl > 1.

Actions Flooding::originate(const BroadcastMessage& msg, const NodeContext&) {
  return {SendFrame{data_frame(msg)}};
}

Actions Flooding::receive(const Frame& f, const NodeContext& ctx) {
  if (!foreign_data(f, ctx) || f.msg.ttl <= 1) return {};
  return {SendFrame{data_frame(next_hop(f.msg))}};
}

// --- Plain flooding: first copy only.

Actions PlainFlooding::originate(const BroadcastMessage& msg, const NodeContext&) {
  seen_.insert(msg.id);
  return {SendFrame{data_frame(msg)}};
}

Actions PlainFlooding::receive(const Frame& f, const NodeContext& ctx) {
  if (!foreign_data(f, ctx)) return {};
  const bool first = seen_.insert(f.msg.id).second;
  if (!first || f.msg.ttl <= 1) return {};
  return {SendFrame{data_frame(next_hop(f.msg))}};
}

// --- Pruned flooding: K addressed duplicates to random nodes.

Actions PrunedFlooding::fan_out(const BroadcastMessage& copy, const NodeContext& ctx) const {
  std::vector<Site> others;
  for (Site s : kAllSites)
    if (s != ctx.self) others.push_back(s);
  const auto k = static_cast<std::size_t>(std::min<int>(params_.pruned_k, static_cast<int>(others.size())));
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(ctx.rng.uniform_int(others.size() - i));
    std::swap(others[i], others[j]);
  }
  Actions out;
  for (std::size_t i = 0; i < k; ++i)
    out.emplace_back(SendFrame{data_frame(copy, SiteSet{others[i]}, kSiteSetBits)});
  return out;
}

Actions PrunedFlooding::originate(const BroadcastMessage& msg, const NodeContext& ctx) {
  return fan_out(msg, ctx);
}

Actions PrunedFlooding::receive(const Frame& f, const NodeContext& ctx) {
  if (!foreign_data(f, ctx) || !f.addressees.contains(ctx.self) || f.msg.ttl <= 1) return {};
  return fan_out(next_hop(f.msg), ctx);
}

// --- Probabilistic flooding.

Actions ProbabilisticFlooding::originate(const BroadcastMessage& msg, const NodeContext&) {
  return {SendFrame{data_frame(msg)}};
}

double ProbabilisticFlooding::forwarding_probability(const MessageId& id) const {
  if (!decreasing_) return params_.probability;
  return std::ldexp(1.0, -receptions(id));
}

int ProbabilisticFlooding::receptions(const MessageId& id) const {
  auto it = counts_.find(id);
  return it == counts_.end() ? 0 : it->second;
}

Actions ProbabilisticFlooding::receive(const Frame& f, const NodeContext& ctx) {
  if (!foreign_data(f, ctx)) return {};
  const double p = forwarding_probability(f.msg.id);
  ++counts_[f.msg.id];
  if (f.msg.ttl <= 1) return {};
  if (!(ctx.rng.uniform01() < p)) return {};
  return {SendFrame{data_frame(next_hop(f.msg))}};
}

// --- Tabu flooding: the copy lists covered nodes, forwarding targets the rest.

Actions TabuFlooding::originate(const BroadcastMessage& msg, const NodeContext& ctx) {
  BroadcastMessage m = msg;
  m.covered.insert(ctx.self);
  covered_[m.id] |= m.covered;
  return {SendFrame{data_frame(m, ~m.covered, kSiteSetBits)}};
}

SiteSet TabuFlooding::known_covered(const MessageId& id) const {
  auto it = covered_.find(id);
  return it == covered_.end() ? SiteSet{} : it->second;
}

Actions TabuFlooding::receive(const Frame& f, const NodeContext& ctx) {
  if (f.kind != FrameKind::kData) return {};
  SiteSet& known = covered_[f.msg.id];
  known |= f.msg.covered;
  known.insert(f.sender);
  known.insert(ctx.self);
  if (f.msg.id.origin == ctx.self || !f.addressees.contains(ctx.self)) return {};
  if (known.full() || f.msg.ttl <= 1) return {};
  BroadcastMessage copy = next_hop(f.msg);
  copy.covered = known;
  return {SendFrame{data_frame(copy, ~known, kSiteSetBits)}};
}

// --- OptFlood: contributor set as global counter, cpt_local as its last seen value.

Actions OptFlood::originate(const BroadcastMessage& msg, const NodeContext& ctx) {
  BroadcastMessage m = msg;
  m.contributors.insert(ctx.self);
  Entry& e = entries_[m.id];
  e.cpt_local = m.contributors.size();
  if (m.contributors.full()) {
    e.stopped = true;
    return {};
  }
  return {SendFrame{data_frame(m, {}, kSiteSetBits)}};
}

int OptFlood::cpt_local(const MessageId& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? 0 : it->second.cpt_local;
}

bool OptFlood::stopped(const MessageId& id) const {
  auto it = entries_.find(id);
  return it != entries_.end() && it->second.stopped;
}

Actions OptFlood::receive(const Frame& f, const NodeContext& ctx) {
  if (!foreign_data(f, ctx)) return {};
  auto [it, first] = entries_.try_emplace(f.msg.id);
  Entry& e = it->second;
  if (e.stopped) return {};
  BroadcastMessage copy = next_hop(f.msg);
  copy.contributors.insert(ctx.self);
  const int global = copy.contributors.size();
  if (global == kNumSites) {
    e.cpt_local = global;
    e.stopped = true;
    return {};
  }
  if (!first && global <= e.cpt_local) return {};  // obsolete copy
  e.cpt_local = global;
  if (f.msg.ttl <= 1) return {};
  return {SendFrame{data_frame(copy, {}, kSiteSetBits)}};
}

// --- EBP: forward when enough fresh neighbours exist and one lacks the message.

Actions Ebp::start(const NodeContext& ctx) {
  const auto phase = SimTime::seconds(ctx.rng.uniform01() * params_.hello_interval.sec());
  return {StartTimer{TimerKey{TimerTag::kHello, {}}, phase}};
}

SiteSet Ebp::fresh_neighbors(Site self, SimTime now) const {
  SiteSet out;
  const SimTime window = params_.hello_interval * 2;
  for (Site s : kAllSites) {
    const auto& t = last_heard_[index(s)];
    if (s != self && t && now - *t <= window) out.insert(s);
  }
  return out;
}

SiteSet Ebp::known_covered(const MessageId& id) const {
  auto it = held_.find(id);
  return it == held_.end() ? SiteSet{} : it->second.covered;
}

bool Ebp::holding(SimTime) const {
  return std::any_of(held_.begin(), held_.end(), [](const auto& kv) {
    return kv.second.pending && !kv.second.covered.full();
  });
}

Actions Ebp::timer(const TimerKey& key, const NodeContext&) {
  if (key.tag != TimerTag::kHello) return {};
  Frame hello;
  hello.kind = FrameKind::kHello;
  // Summary of the most recent messages held.
  constexpr std::size_t kSummary = 4;
  for (auto it = held_.rbegin(); it != held_.rend() && hello.known.size() < kSummary; ++it)
    hello.known.push_back(it->first);
  return {SendFrame{std::move(hello)}, StartTimer{key, params_.hello_interval}};
}

Actions Ebp::originate(const BroadcastMessage& msg, const NodeContext& ctx) {
  Held h;
  h.copy = msg;
  h.covered.insert(ctx.self);
  h.own = true;
  h.pending = true;
  held_[msg.id] = h;
  return evaluate(ctx);
}

Actions Ebp::receive(const Frame& f, const NodeContext& ctx) {
  note_heard(f.sender, ctx.now);
  if (f.kind == FrameKind::kHello) {
    for (const MessageId& id : f.known) {
      auto it = held_.find(id);
      if (it != held_.end()) it->second.covered.insert(f.sender);
    }
  } else if (f.kind == FrameKind::kData) {
    auto [it, inserted] = held_.try_emplace(f.msg.id);
    Held& h = it->second;
    h.covered.insert(ctx.self);
    h.covered.insert(f.sender);
    if (!h.own && f.msg.ttl > 1) {
      if (!h.pending || f.msg.ttl > h.copy.ttl) h.copy = f.msg;
      h.pending = true;
    }
  }
  return evaluate(ctx);
}

Actions Ebp::evaluate(const NodeContext& ctx) {
  const SiteSet fresh = fresh_neighbors(ctx.self, ctx.now);
  if (fresh.size() < ebp_threshold(ctx.self)) return {};
  Actions out;
  for (auto& [id, h] : held_) {
    if (!h.pending) continue;
    if ((fresh & ~h.covered).empty()) continue;
    h.pending = false;
    out.emplace_back(SendFrame{data_frame(h.own ? h.copy : next_hop(h.copy))});
  }
  return out;
}

// --- MBP: flood below the hop threshold, ack-gated delayed rebroadcast beyond.

Actions Mbp::originate(const BroadcastMessage& msg, const NodeContext&) {
  return {SendFrame{data_frame(msg)}};
}

const Mbp::Entry* Mbp::find(const MessageId& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

int Mbp::acks(const MessageId& id) const {
  const Entry* e = find(id);
  return e ? e->acks : 0;
}

bool Mbp::suppressed(const MessageId& id) const {
  const Entry* e = find(id);
  return e && e->suppressed;
}

bool Mbp::waiting(const MessageId& id) const {
  const Entry* e = find(id);
  return e && e->waiting;
}

bool Mbp::holding(SimTime) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [](const auto& kv) { return kv.second.waiting; });
}

Actions Mbp::receive(const Frame& f, const NodeContext& ctx) {
  if (f.kind == FrameKind::kAck) {
    if (f.addressees.contains(ctx.self)) ++entries_[f.msg.id].acks;
    return {};
  }
  if (!foreign_data(f, ctx)) return {};
  const int nh = f.msg.hops;
  if (nh < params_.mbp_delta) {
    if (f.msg.ttl <= 1) return {};
    return {SendFrame{data_frame(next_hop(f.msg))}};
  }
  Actions out;
  if (nh > params_.mbp_delta) {
    Frame ack;
    ack.kind = FrameKind::kAck;
    ack.addressees = SiteSet{f.sender};
    ack.msg.id = f.msg.id;
    out.emplace_back(SendFrame{std::move(ack)});
  }
  Entry& e = entries_[f.msg.id];
  if (e.suppressed || f.msg.ttl <= 1) return out;
  if (e.waiting) {
    if (f.msg.ttl > e.pending.ttl) e.pending = f.msg;
    return out;
  }
  e.waiting = true;
  e.pending = f.msg;
  out.emplace_back(StartTimer{TimerKey{TimerTag::kMbpWait, f.msg.id}, params_.mbp_timer});
  return out;
}

Actions Mbp::timer(const TimerKey& key, const NodeContext&) {
  if (key.tag != TimerTag::kMbpWait) return {};
  Entry& e = entries_[key.msg];
  e.waiting = false;
  if (e.acks >= params_.mbp_quota) {
    e.suppressed = true;
    return {};
  }
  return {SendFrame{data_frame(next_hop(e.pending))}};
}

}  // namespace wban
