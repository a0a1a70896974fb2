#include "lcdc/control_frame.hpp"

#include <stdexcept>

namespace lcdc {

const char* to_string(ControlOpcode op) {
  switch (op) {
    case ControlOpcode::kEnable: return "enable";
    case ControlOpcode::kDisable: return "disable";
    case ControlOpcode::kAckEnable: return "ack-enable";
    case ControlOpcode::kAckDisable: return "ack-disable";
  }
  return "?";
}

MacAddress mac_from_u64(std::uint64_t v) {
  MacAddress m{};
  for (int i = 0; i < 6; ++i) m[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * (5 - i)));
  return m;
}

std::uint64_t mac_to_u64(const MacAddress& m) {
  std::uint64_t v = 0;
  for (std::uint8_t b : m) v = (v << 8) | b;
  return v;
}

std::uint16_t LcdcControlFrame::pack_stage_id(ControlOpcode op, std::uint16_t stage) {
  if (stage > kMaxStageNumber) throw std::invalid_argument("stage number exceeds 12 bits");
  return static_cast<std::uint16_t>((static_cast<unsigned>(op) << 12) | stage);
}

namespace {

void put_be16(std::uint8_t* p, std::uint16_t v) {
  p[0] = static_cast<std::uint8_t>(v >> 8);
  p[1] = static_cast<std::uint8_t>(v);
}
void put_be32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * (3 - i)));
}
std::uint16_t get_be16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}
std::uint32_t get_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

}  // namespace

ControlFrameBytes encode_control(const LcdcControlFrame& f) {
  ControlFrameBytes out{};
  std::copy(f.dst_mac.begin(), f.dst_mac.end(), out.begin());
  std::copy(f.src_mac.begin(), f.src_mac.end(), out.begin() + 6);
  put_be16(&out[12], kLcdcEthertype);
  put_be32(&out[14], f.sender_id);
  put_be16(&out[18], f.stage_id);
  put_be16(&out[20], f.ttl);
  return out;
}

DecodeResult decode_control(std::span<const std::uint8_t> bytes) {
  DecodeResult r;
  if (bytes.size() < 14) return r;
  if (get_be16(&bytes[12]) != kLcdcEthertype) {
    r.status = DecodeStatus::kNotControl;
    return r;
  }
  if (bytes.size() < kControlFrameSize) return r;
  std::copy(bytes.begin(), bytes.begin() + 6, r.frame.dst_mac.begin());
  std::copy(bytes.begin() + 6, bytes.begin() + 12, r.frame.src_mac.begin());
  r.frame.sender_id = get_be32(&bytes[14]);
  r.frame.stage_id = get_be16(&bytes[18]);
  r.frame.ttl = get_be16(&bytes[20]);
  r.status = DecodeStatus::kOk;
  return r;
}

ControlDisposition process_control(const LcdcControlFrame& frame, std::uint32_t local_id) {
  ControlDisposition d;
  d.frame = frame;
  if (!frame.known_opcode()) {
    d.unknown_opcode = true;
    return d;
  }
  const bool is_ack = frame.is_ack();
  if (frame.sender_id == local_id) {
    if (is_ack) {
      d.notify = true;  // ack reached the switch it is addressed to
      return d;
    }
    d.forward = true;  // our own notification looped back; transition already under way
    return d;
  }
  d.notify = !is_ack;
  if (frame.ttl <= 1) return d;
  d.frame.ttl = static_cast<std::uint16_t>(frame.ttl - 1);
  d.forward = true;
  return d;
}

}  // namespace lcdc
