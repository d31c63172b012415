#include "driftwatch/frame.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <stdexcept>

namespace driftwatch {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
    return v;
}

constexpr std::size_t kPayloadOffset = 17;

}  // namespace

bool TelemetryFrame::operator==(const TelemetryFrame& o) const {
    if (type != o.type || seq != o.seq || t_us != o.t_us) return false;
    // bitwise payload comparison so NaN payloads still round-trip as equal
    return std::memcmp(payload.data(), o.payload.data(), payload_floats(type) * sizeof(float)) == 0;
}

TelemetryFrame make_state_frame(std::uint32_t seq, std::uint64_t t_us, const VehicleState& s) {
    TelemetryFrame f;
    f.type = MsgType::state;
    f.seq = seq;
    f.t_us = t_us;
    const double values[kStateFloats] = {
        s.position.x(),   s.position.y(),   s.position.z(),   s.velocity.x(),   s.velocity.y(),
        s.velocity.z(),   s.attitude.w(),   s.attitude.x(),   s.attitude.y(),   s.attitude.z(),
        s.body_rates.x(), s.body_rates.y(), s.body_rates.z(),
    };
    for (std::size_t i = 0; i < kStateFloats; ++i) f.payload[i] = static_cast<float>(values[i]);
    return f;
}

TelemetryFrame make_control_frame(std::uint32_t seq, std::uint64_t t_us, const ControlInput& u) {
    TelemetryFrame f;
    f.type = MsgType::control;
    f.seq = seq;
    f.t_us = t_us;
    f.payload[0] = static_cast<float>(u.thrust);
    f.payload[1] = static_cast<float>(u.torque.x());
    f.payload[2] = static_cast<float>(u.torque.y());
    f.payload[3] = static_cast<float>(u.torque.z());
    return f;
}

VehicleState state_from_frame(const TelemetryFrame& f) {
    if (f.type != MsgType::state) throw std::invalid_argument("not a STATE frame");
    const auto& p = f.payload;
    VehicleState s;
    s.position = Vec3(p[0], p[1], p[2]);
    s.velocity = Vec3(p[3], p[4], p[5]);
    s.attitude = Quat(p[6], p[7], p[8], p[9]).normalized();
    s.body_rates = Vec3(p[10], p[11], p[12]);
    return s;
}

ControlInput control_from_frame(const TelemetryFrame& f) {
    if (f.type != MsgType::control) throw std::invalid_argument("not a CONTROL frame");
    ControlInput u;
    u.thrust = f.payload[0];
    u.torque = Vec3(f.payload[1], f.payload[2], f.payload[3]);
    return u;
}

std::string_view to_string(DecodeError e) {
    switch (e) {
        case DecodeError::none: return "none";
        case DecodeError::bad_magic: return "bad magic";
        case DecodeError::bad_version: return "bad version";
        case DecodeError::bad_type: return "bad message type";
        case DecodeError::length_mismatch: return "length mismatch";
        case DecodeError::crc_mismatch: return "crc mismatch";
    }
    return "unknown";
}

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    crc = ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_frame(const TelemetryFrame& f) {
    const std::size_t n = payload_floats(f.type);
    std::vector<std::uint8_t> out;
    out.reserve(frame_size(f.type));
    out.push_back(kFrameMagic0);
    out.push_back(kFrameMagic1);
    out.push_back(kFrameVersion);
    out.push_back(static_cast<std::uint8_t>(f.type));
    put_u32(out, f.seq);
    put_u64(out, f.t_us);
    out.push_back(static_cast<std::uint8_t>(4 * n));
    for (std::size_t i = 0; i < n; ++i) put_u32(out, std::bit_cast<std::uint32_t>(f.payload[i]));
    const std::uint32_t crc = crc32_ieee(std::span(out).subspan(2));
    put_u32(out, crc);
    return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> b) {
    DecodeResult r;
    if (b.size() >= 2 && (b[0] != kFrameMagic0 || b[1] != kFrameMagic1)) {
        r.error = DecodeError::bad_magic;
        return r;
    }
    if (b.size() < kFrameOverhead) {
        r.error = DecodeError::length_mismatch;
        return r;
    }
    // integrity first, so any corruption after the magic reports as a CRC failure
    const std::size_t body_end = b.size() - 4;
    if (crc32_ieee(b.subspan(2, body_end - 2)) != get_u32(b, body_end)) {
        r.error = DecodeError::crc_mismatch;
        return r;
    }
    if (b[2] != kFrameVersion) {
        r.error = DecodeError::bad_version;
        return r;
    }
    if (b[3] != static_cast<std::uint8_t>(MsgType::state) &&
        b[3] != static_cast<std::uint8_t>(MsgType::control)) {
        r.error = DecodeError::bad_type;
        return r;
    }
    const auto type = static_cast<MsgType>(b[3]);
    const std::size_t n = payload_floats(type);
    if (b[16] != 4 * n || b.size() != frame_size(type)) {
        r.error = DecodeError::length_mismatch;
        return r;
    }

    TelemetryFrame f;
    f.type = type;
    f.seq = get_u32(b, 4);
    f.t_us = get_u64(b, 8);
    for (std::size_t i = 0; i < n; ++i) {
        f.payload[i] = std::bit_cast<float>(get_u32(b, kPayloadOffset + 4 * i));
    }
    r.frame = f;
    return r;
}

}  // namespace driftwatch
