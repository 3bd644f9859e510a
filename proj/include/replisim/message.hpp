#pragma once
#include <cstdint>
#include <string_view>

#include "replisim/generations.hpp"
#include "replisim/keying.hpp"

namespace replisim {

// Special dst/src for the central station.
inline constexpr NodeId kStation = ~0ULL;

enum class MessageKind : std::uint8_t {
  kHello,
  kKeyRequest,
  kKeyResponse,
  kClaim,
  kForwardClaim,
  kAlert,
  kLeaderAnnounce,
};

// Fixed wire sizes in bytes, one per kind.
inline constexpr int message_size_bytes(MessageKind k) {
  switch (k) {
    case MessageKind::kHello:          return 32;
    case MessageKind::kKeyRequest:     return 40;
    case MessageKind::kKeyResponse:    return 40;
    case MessageKind::kClaim:          return 48;
    case MessageKind::kForwardClaim:   return 48;
    case MessageKind::kAlert:          return 24;
    case MessageKind::kLeaderAnnounce: return 16;
  }
  return 0;
}

inline constexpr std::string_view message_kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::kHello:          return "Hello";
    case MessageKind::kKeyRequest:     return "KeyRequest";
    case MessageKind::kKeyResponse:    return "KeyResponse";
    case MessageKind::kClaim:          return "Claim";
    case MessageKind::kForwardClaim:   return "ForwardClaim";
    case MessageKind::kAlert:          return "Alert";
    case MessageKind::kLeaderAnnounce: return "LeaderAnnounce";
  }
  return "?";
}

struct Message {
  MessageKind kind = MessageKind::kHello;
  NodeId src = 0;
  NodeId dst = 0;
  Tick send_tick = 0;
  // Transmissions needed to deliver; 1 for single-hop radio and V2I links,
  // the hop count for multicast forwards routed across the network.
  int hops = 1;
  int size_bytes() const { return message_size_bytes(kind); }
};

}  // namespace replisim
