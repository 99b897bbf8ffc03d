#include "wfiso/service/frame.hpp"

#include <algorithm>
#include <bit>

#include "wfiso/errors.hpp"

namespace wfiso::service {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(uint8_t(v >> (8 * b)));
}

uint32_t get_u32(std::span<const uint8_t> in, size_t off) {
    return uint32_t(in[off]) | (uint32_t(in[off + 1]) << 8) | (uint32_t(in[off + 2]) << 16) |
           (uint32_t(in[off + 3]) << 24);
}

}  // namespace

std::vector<uint8_t> encode_frame(const FrameHeader& h, std::span<const uint8_t> rgba) {
    std::vector<uint8_t> out;
    out.reserve(kFrameHeaderBytes + rgba.size());
    put_u32(out, kFrameMagic);
    put_u32(out, h.generation);
    put_u32(out, h.pass_index);
    put_u32(out, h.flags);
    put_u32(out, h.width);
    put_u32(out, h.height);
    put_u32(out, h.n_active);
    put_u32(out, std::bit_cast<uint32_t>(h.completeness));
    out.insert(out.end(), rgba.begin(), rgba.end());
    return out;
}

DecodedFrame decode_frame(std::span<const uint8_t> bytes) {
    if (bytes.size() < kFrameHeaderBytes || get_u32(bytes, 0) != kFrameMagic) {
        throw InputError("frame: bad magic or truncated header");
    }
    DecodedFrame f;
    f.header.generation = get_u32(bytes, 4);
    f.header.pass_index = get_u32(bytes, 8);
    f.header.flags = get_u32(bytes, 12);
    f.header.width = get_u32(bytes, 16);
    f.header.height = get_u32(bytes, 20);
    f.header.n_active = get_u32(bytes, 24);
    f.header.completeness = std::bit_cast<float>(get_u32(bytes, 28));
    const size_t expected = size_t(f.header.width) * f.header.height * 4;
    if (bytes.size() - kFrameHeaderBytes != expected) throw InputError("frame: payload size mismatch");
    f.rgba.assign(bytes.begin() + kFrameHeaderBytes, bytes.end());
    return f;
}

void OutboundQueue::push(OutboundMessage msg) {
    if (!msg.text) {
        // a newer generation makes queued intermediate frames of older ones stale
        const uint32_t gen = msg.generation;
        const auto before = pending_.size();
        std::erase_if(pending_, [&](const OutboundMessage& m) { return !m.text && m.droppable && m.generation < gen; });
        dropped_ += before - pending_.size();
    }
    pending_.push_back(std::move(msg));
    auto frames = [&] { return size_t(std::count_if(pending_.begin(), pending_.end(), [](auto& m) { return !m.text; })); };
    while (frames() > kMaxLag) {
        auto it = std::find_if(pending_.begin(), pending_.end(), [](const OutboundMessage& m) { return m.droppable; });
        if (it == pending_.end()) break;
        pending_.erase(it);
        ++dropped_;
    }
}

std::optional<OutboundMessage> OutboundQueue::pop() {
    if (pending_.empty()) return std::nullopt;
    OutboundMessage m = std::move(pending_.front());
    pending_.pop_front();
    return m;
}

}  // namespace wfiso::service
