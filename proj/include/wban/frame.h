#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "wban/body.h"

namespace wban {

struct MessageId {
  Site origin = kSink;
  std::uint32_t seq = 0;
  auto operator<=>(const MessageId&) const = default;
};

std::string to_string(const MessageId& id);

struct MessageIdHash {
  std::size_t operator()(const MessageId& id) const {
    return (static_cast<std::size_t>(id.seq) << 3) ^ static_cast<std::size_t>(id.origin);
  }
};

/// The disseminated packet as carried by one copy.
struct BroadcastMessage {
  MessageId id;
  int ttl = 1;
  /// MAC transmissions this copy has undergone since leaving the sink,
  /// counting the transmission that carries it.
  int hops = 1;
  /// OptFlood: nodes that already incremented the global counter.
  SiteSet contributors;
  /// Tabu: nodes known to hold the message.
  SiteSet covered;
  /// Application payload size.
  int app_bits = 320;
};

enum class FrameKind : std::uint8_t { kData, kHello, kAck };

std::string_view to_string(FrameKind kind);

// Wire layout of the payload above the 802.15.4 MAC header.
inline constexpr int kMessageHeaderBits = 8 + 16 + 8 + 8;  // origin, seq, ttl, hops
inline constexpr int kSiteSetBits = 8;
inline constexpr int kMessageIdBits = 8 + 16;
inline constexpr int kHelloHeaderBits = 8;

struct Frame {
  std::uint64_t uid = 0;
  FrameKind kind = FrameKind::kData;
  Site sender = kSink;
  /// Empty means a plain broadcast; otherwise only these sites act on it.
  SiteSet addressees;
  BroadcastMessage msg;
  /// Strategy-specific per-copy state carried in the payload.
  int extension_bits = 0;
  /// Hello: messages held by the sender.
  std::vector<MessageId> known;

  bool addressed_to(Site s) const { return addressees.empty() || addressees.contains(s); }
  bool is_control() const { return kind != FrameKind::kData; }
  int payload_bits() const;
};

}  // namespace wban
