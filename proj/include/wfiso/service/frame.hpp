#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wfiso::service {

inline constexpr uint32_t kFrameMagic = 0x57465250;
inline constexpr size_t kFrameHeaderBytes = 32;
inline constexpr uint32_t kFrameFinal = 1u;

// Binary pass frame, little-endian: magic, generation, pass_index, flags
// (bit0 = final), width, height, n_active (u32 each), completeness (f32),
// then width*height*4 bytes of RGBA.
struct FrameHeader {
    uint32_t generation = 0;
    uint32_t pass_index = 0;
    uint32_t flags = 0;
    uint32_t width = 0;
    uint32_t height = 0;
    uint32_t n_active = 0;
    float completeness = 0.f;

    bool final() const { return flags & kFrameFinal; }
};

std::vector<uint8_t> encode_frame(const FrameHeader& header, std::span<const uint8_t> rgba);

struct DecodedFrame {
    FrameHeader header;
    std::vector<uint8_t> rgba;
};

/// Throws InputError on bad magic or a payload size that disagrees with the header.
DecodedFrame decode_frame(std::span<const uint8_t> bytes);

struct OutboundMessage {
    bool text = false;
    std::string payload;
    uint32_t generation = 0;
    bool droppable = false;  // non-final pass frame
};

/// Per-connection send queue. When more than kMaxLag frames wait, the oldest
/// droppable frames are discarded; order is never changed and final frames
/// are always kept.
class OutboundQueue {
public:
    static constexpr size_t kMaxLag = 3;

    void push(OutboundMessage msg);
    std::optional<OutboundMessage> pop();
    size_t size() const { return pending_.size(); }
    uint64_t dropped() const { return dropped_; }

private:
    std::deque<OutboundMessage> pending_;
    uint64_t dropped_ = 0;
};

}  // namespace wfiso::service
