#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace lcdc {

inline constexpr std::uint16_t kLcdcEthertype = 0x9100;
inline constexpr std::size_t kControlFrameSize = 64;
inline constexpr std::uint16_t kMaxStageNumber = 0x0FFF;

// Carried in the top four bits of the 16-bit stage field.
enum class ControlOpcode : std::uint8_t {
  kEnable = 0,
  kDisable = 1,
  kAckEnable = 2,
  kAckDisable = 3,
};

const char* to_string(ControlOpcode op);

using MacAddress = std::array<std::uint8_t, 6>;
using ControlFrameBytes = std::array<std::uint8_t, kControlFrameSize>;

MacAddress mac_from_u64(std::uint64_t v);
std::uint64_t mac_to_u64(const MacAddress& m);

/// In-band stage control message.
///
/// Wire layout (big-endian, zero-based offsets):
///   0..5   destination MAC
///   6..11  source MAC
///   12..13 ethertype 0x9100
///   14..17 sender id
///   18..19 stage field: opcode << 12 | stage number
///   20..21 TTL
///   22..63 zero padding
///
/// For Enable/Disable the sender id names the originating switch. Acks are
/// addressed back to the originator, so they carry the originator's id.
struct LcdcControlFrame {
  MacAddress dst_mac{};
  MacAddress src_mac{};
  std::uint32_t sender_id = 0;
  std::uint16_t stage_id = 0;
  std::uint16_t ttl = 0;

  std::uint8_t opcode_bits() const { return static_cast<std::uint8_t>(stage_id >> 12); }
  bool known_opcode() const { return opcode_bits() <= 3; }
  ControlOpcode opcode() const { return static_cast<ControlOpcode>(opcode_bits()); }
  bool is_ack() const { return opcode() == ControlOpcode::kAckEnable || opcode() == ControlOpcode::kAckDisable; }
  std::uint16_t stage() const { return stage_id & kMaxStageNumber; }

  static std::uint16_t pack_stage_id(ControlOpcode op, std::uint16_t stage);

  bool operator==(const LcdcControlFrame&) const = default;
};

ControlFrameBytes encode_control(const LcdcControlFrame& frame);

enum class DecodeStatus : std::uint8_t { kOk, kNotControl, kMalformed };

struct DecodeResult {
  DecodeStatus status = DecodeStatus::kMalformed;
  LcdcControlFrame frame;
};

// Shorter than a minimum Ethernet frame -> kMalformed; another ethertype ->
// kNotControl (the caller treats the frame as data).
DecodeResult decode_control(std::span<const std::uint8_t> bytes);

/// What the control stage of the pipeline does with a received frame.
struct ControlDisposition {
  bool notify = false;          // raise a stage notification locally
  bool forward = false;         // hand to the scheduler for flooding
  bool unknown_opcode = false;  // dropped and counted
  LcdcControlFrame frame;       // the frame to forward (TTL already updated)
};

// `local_id` is this switch's sender id. Frames from the virtual port never
// reach this function; they are forwarded as generated.
ControlDisposition process_control(const LcdcControlFrame& frame, std::uint32_t local_id);

}  // namespace lcdc
