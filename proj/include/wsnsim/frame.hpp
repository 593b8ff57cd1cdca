#pragma once

#include "geometry.hpp"
#include "sim_core.hpp"

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace wsnsim {

enum class FrameKind : std::uint8_t { Data, Ack, Beacon, Rreq, Rrep, AdvCh, Join, Schedule };

inline std::string_view to_string(FrameKind k) noexcept {
  switch (k) {
    case FrameKind::Data: return "DATA";
    case FrameKind::Ack: return "ACK";
    case FrameKind::Beacon: return "BEACON";
    case FrameKind::Rreq: return "RREQ";
    case FrameKind::Rrep: return "RREP";
    case FrameKind::AdvCh: return "ADV_CH";
    case FrameKind::Join: return "JOIN";
    case FrameKind::Schedule: return "SCHEDULE";
  }
  return "?";
}

// MPDU sizes in bytes. DATA carries the 256-byte application packet.
inline constexpr std::uint32_t kDataBytes = 256;
inline constexpr std::uint32_t kAckBytes = 5;
inline constexpr std::uint32_t kBeaconBytes = 24;
inline constexpr std::uint32_t kRreqBytes = 24;
inline constexpr std::uint32_t kRrepBytes = 20;
inline constexpr std::uint32_t kAdvChBytes = 16;
inline constexpr std::uint32_t kJoinBytes = 12;
inline constexpr std::uint32_t kScheduleBytes = 32;

inline constexpr std::uint32_t frame_bytes(FrameKind k) noexcept {
  switch (k) {
    case FrameKind::Data: return kDataBytes;
    case FrameKind::Ack: return kAckBytes;
    case FrameKind::Beacon: return kBeaconBytes;
    case FrameKind::Rreq: return kRreqBytes;
    case FrameKind::Rrep: return kRrepBytes;
    case FrameKind::AdvCh: return kAdvChBytes;
    case FrameKind::Join: return kJoinBytes;
    case FrameKind::Schedule: return kScheduleBytes;
  }
  return 0;
}

struct DataPayload {
  std::uint64_t pkt_id = 0;
  NodeId origin = kNoNode;
  NodeId final_dst = kNoNode;
};

struct RreqPayload {
  NodeId origin = kNoNode;
  std::uint32_t rreq_id = 0;
  NodeId dest = kNoNode;
  std::uint32_t hop = 0;
  double bottleneck = 0.0;
  std::uint32_t origin_seq = 0;
  std::uint32_t dest_seq = 0;  // oldest destination sequence the origin accepts
};

struct RrepPayload {
  NodeId origin = kNoNode;
  NodeId dest = kNoNode;
  std::uint32_t rreq_id = 0;
  std::uint32_t hop = 0;
  double bottleneck = 0.0;
  std::uint32_t dest_seq = 0;
};

struct AdvChPayload {
  std::uint32_t round = 0;
  double residual = 0.0;
  double radius = 0.0;  // sender's competition radius
};

struct JoinPayload {
  std::uint32_t round = 0;
  double residual = 0.0;
};

struct SchedulePayload {
  std::uint32_t round = 0;
  SimTime frame_start = 0.0;
  double slot_len = 0.0;
  std::vector<NodeId> members;  // slot order
};

using FramePayload = std::variant<std::monostate, DataPayload, RreqPayload, RrepPayload,
                                  AdvChPayload, JoinPayload, SchedulePayload>;

struct Frame {
  FrameKind kind = FrameKind::Data;
  NodeId src = kNoNode;
  NodeId dst = kBroadcast;  // next hop, or kBroadcast
  std::uint32_t size = 0;   // bytes
  SimTime created_at = 0.0;
  std::uint32_t mac_seq = 0;
  // Stamped when the frame airs; receivers use it to refresh neighbour state.
  Position sender_pos;
  double sender_energy = 0.0;
  FramePayload payload;

  bool broadcast() const noexcept { return dst == kBroadcast; }
};

inline Frame make_frame(FrameKind kind, NodeId src, NodeId dst, SimTime now,
                        FramePayload payload = {}) {
  Frame f;
  f.kind = kind;
  f.src = src;
  f.dst = dst;
  f.size = frame_bytes(kind);
  f.created_at = now;
  f.payload = std::move(payload);
  return f;
}

}  // namespace wsnsim
