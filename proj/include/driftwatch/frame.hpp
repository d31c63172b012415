#pragma once

#include "driftwatch/dynamics.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace driftwatch {

enum class MsgType : std::uint8_t { state = 1, control = 2 };

/// Wire layout (little-endian):
///   magic 'S' 'D' | version u8 | msg_type u8 | seq u32 | t_us u64 | payload_len u8 |
///   payload (f32 * n) | crc32 u32
/// The CRC (IEEE 802.3) covers every byte after the magic and before the CRC.
inline constexpr std::uint8_t kFrameMagic0 = 0x53;
inline constexpr std::uint8_t kFrameMagic1 = 0x44;
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameOverhead = 2 + 1 + 1 + 4 + 8 + 1 + 4;
inline constexpr std::size_t kStateFloats = 13;
inline constexpr std::size_t kControlFloats = 4;

constexpr std::size_t payload_floats(MsgType t) {
    return t == MsgType::state ? kStateFloats : kControlFloats;
}
constexpr std::size_t frame_size(MsgType t) { return kFrameOverhead + 4 * payload_floats(t); }

struct TelemetryFrame {
    MsgType type = MsgType::state;
    std::uint32_t seq = 0;
    std::uint64_t t_us = 0;
    std::array<float, kStateFloats> payload{};  // only the first payload_floats(type) are used

    bool operator==(const TelemetryFrame& other) const;
};

TelemetryFrame make_state_frame(std::uint32_t seq, std::uint64_t t_us, const VehicleState& s);
TelemetryFrame make_control_frame(std::uint32_t seq, std::uint64_t t_us, const ControlInput& u);
VehicleState state_from_frame(const TelemetryFrame& f);
ControlInput control_from_frame(const TelemetryFrame& f);

enum class DecodeError {
    none,
    bad_magic,
    bad_version,
    bad_type,
    length_mismatch,
    crc_mismatch,
};

std::string_view to_string(DecodeError e);

struct DecodeResult {
    std::optional<TelemetryFrame> frame;
    DecodeError error = DecodeError::none;

    explicit operator bool() const { return frame.has_value(); }
};

std::vector<std::uint8_t> encode_frame(const TelemetryFrame& frame);
DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

/// CRC-32 (IEEE 802.3, reflected, init and xorout 0xFFFFFFFF).
std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes);

}  // namespace driftwatch
