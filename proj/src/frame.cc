#include "wban/frame.h"

#include <fmt/format.h>

namespace wban {

std::string to_string(const MessageId& id) {
  return fmt::format("{}#{}", to_string(id.origin), id.seq);
}

std::string_view to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::kData: return "data";
    case FrameKind::kHello: return "hello";
    case FrameKind::kAck: return "ack";
  }
  return "?";
}

int Frame::payload_bits() const {
  switch (kind) {
    case FrameKind::kData:
      return kMessageHeaderBits + msg.app_bits + extension_bits;
    case FrameKind::kHello:
      return kHelloHeaderBits + kMessageIdBits * static_cast<int>(known.size());
    case FrameKind::kAck:
      return kMessageIdBits;
  }
  return 0;
}

}  // namespace wban
