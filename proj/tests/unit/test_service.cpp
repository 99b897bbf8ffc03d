#include "doctest.h"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <condition_variable>
#include <mutex>

#include "json.hpp"

#include "wfiso/errors.hpp"
#include "wfiso/service/frame.hpp"
#include "wfiso/service/server.hpp"
#include "wfiso/service/session.hpp"
#include "wfiso/wavefront_engine.hpp"

using namespace wfiso;
using namespace wfiso::service;
using nlohmann::json;

namespace {

struct Sink {
    std::mutex m;
    std::vector<OutboundMessage> got;
    void operator()(OutboundMessage msg) {
        std::lock_guard lock(m);
        got.push_back(std::move(msg));
    }
    std::vector<OutboundMessage> take() {
        std::lock_guard lock(m);
        return got;
    }
};

std::shared_ptr<const LoadedVolume> sphere_volume() {
    static auto lv = LoadedVolume::from(compress_volume(synthesize(SynthKind::sphere, {48, 48, 48}), 16));
    return lv;
}

std::string set_view(float iso, int w, int h, bool spec = true, float z = 100.f) {
    return json{{"type", "set_view"},
                {"camera", {{"eye", {23.5, 23.5, z}}, {"look_at", {23.5, 23.5, 23.5}}, {"up", {0, 1, 0}}, {"fov_y", 45}}},
                {"iso", iso},
                {"width", w},
                {"height", h},
                {"speculation", spec}}
        .dump();
}

DecodedFrame as_frame(const OutboundMessage& m) {
    REQUIRE_FALSE(m.text);
    return decode_frame(std::span(reinterpret_cast<const uint8_t*>(m.payload.data()), m.payload.size()));
}

RenderResult cli_equivalent(float iso, int w, int h, bool spec = true) {
    const auto lv = sphere_volume();
    RenderOptions opts;
    opts.width = w;
    opts.height = h;
    opts.speculation = spec;
    opts.keep_snapshots = true;
    const Camera cam = Camera::look_at({23.5f, 23.5f, 100.f}, {23.5f, 23.5f, 23.5f}, {0, 1, 0}, 45.f);
    return render(lv->cv, lv->grids, cam, iso, opts);
}

}  // namespace

TEST_CASE("frame encode/decode round trip") {
    FrameHeader h{7, 3, kFrameFinal, 2, 1, 0, 1.f};
    const std::vector<uint8_t> rgba{1, 2, 3, 4, 5, 6, 7, 8};
    const auto bytes = encode_frame(h, rgba);
    CHECK(bytes.size() == kFrameHeaderBytes + 8);
    CHECK(bytes[0] == 0x50);
    CHECK(bytes[3] == 0x57);
    const DecodedFrame f = decode_frame(bytes);
    CHECK(f.header.generation == 7);
    CHECK(f.header.pass_index == 3);
    CHECK(f.header.final());
    CHECK(f.header.completeness == 1.f);
    CHECK(f.rgba == rgba);
    auto bad = bytes;
    bad[0] = 0;
    CHECK_THROWS_AS(decode_frame(bad), InputError);
    CHECK_THROWS_AS(decode_frame(std::span(bytes).first(bytes.size() - 1)), InputError);
}

TEST_CASE("outbound queue drops old intermediate frames, never finals, never reorders") {
    OutboundQueue q;
    for (uint32_t p = 0; p < 6; ++p) q.push({false, std::to_string(p), 1, true});
    q.push({false, "final", 1, false});
    q.push({true, "{}", 0, false});
    std::vector<std::string> order;
    while (auto m = q.pop()) order.push_back(m->payload);
    CHECK(order == std::vector<std::string>{"4", "5", "final", "{}"});
    CHECK(q.dropped() == 4);

    OutboundQueue q2;
    q2.push({false, "g1p0", 1, true});
    q2.push({false, "g1final", 1, false});
    q2.push({false, "g2p0", 2, true});
    std::vector<std::string> order2;
    while (auto m = q2.pop()) order2.push_back(m->payload);
    CHECK(order2 == std::vector<std::string>{"g1final", "g2p0"});

    OutboundQueue q3;
    for (int i = 0; i < 5; ++i) q3.push({false, "f" + std::to_string(i), 1, false});
    CHECK(q3.size() == 5);
}

TEST_CASE("info and error messages") {
    Sink sink;
    SessionController s(sphere_volume(), std::ref(sink));
    s.handle_text(R"({"type":"info_request"})");
    s.handle_text("not json");
    s.handle_text(R"({"type":"set_view","iso":3})");
    s.handle_text(R"({"type":"dance"})");
    s.handle_text(set_view(10.f, 0, 4));
    s.wait_idle();
    const auto got = sink.take();
    REQUIRE(got.size() == 5);
    const json info = json::parse(got[0].payload);
    CHECK(info["type"] == "info");
    CHECK(info["dims"] == json::array({48, 48, 48}));
    CHECK(info["value_range"][0].get<float>() == sphere_volume()->value_range.min);
    for (size_t i = 1; i < 5; ++i) {
        const json e = json::parse(got[i].payload);
        CHECK(e["type"] == "error");
        CHECK(e["code"].is_string());
        CHECK(e["reason"].get<std::string>().size() > 0);
    }
    // still serving
    s.handle_text(R"({"type":"info_request"})");
    s.wait_idle();
    CHECK(sink.take().size() == 6);
}

TEST_CASE("iso outside the range: a single final frame") {
    Sink sink;
    SessionController s(sphere_volume(), std::ref(sink));
    s.handle_text(set_view(1000.f, 32, 24));
    s.wait_idle();
    const auto got = sink.take();
    REQUIRE(got.size() == 1);
    const DecodedFrame f = as_frame(got[0]);
    CHECK(f.header.final());
    CHECK(f.header.completeness == 1.f);
    CHECK(f.header.n_active == 0);
    CHECK(f.header.pass_index == 0);
}

TEST_CASE("camera missing the volume still sends a final frame") {
    Sink sink;
    SessionController s(sphere_volume(), std::ref(sink));
    const std::string away = json{{"type", "set_view"},
                                  {"camera", {{"eye", {23.5, 23.5, 100}}, {"look_at", {23.5, 23.5, 200}}, {"up", {0, 1, 0}}}},
                                  {"iso", 10},
                                  {"width", 8},
                                  {"height", 8}}
                                 .dump();
    s.handle_text(away);
    s.wait_idle();
    const auto got = sink.take();
    REQUIRE(got.size() == 1);
    CHECK(as_frame(got[0]).header.final());
}

TEST_CASE("frames match the CLI render pass by pass") {
    const RenderResult ref = cli_equivalent(15.f, 96, 64);
    Sink sink;
    SessionController s(sphere_volume(), std::ref(sink));
    s.handle_text(set_view(15.f, 96, 64));
    s.wait_idle();
    const auto got = sink.take();
    REQUIRE(got.size() == ref.passes.size());
    for (size_t p = 0; p < got.size(); ++p) {
        const DecodedFrame f = as_frame(got[p]);
        CHECK(f.header.generation == 1);
        CHECK(f.header.pass_index == p);
        CHECK(f.header.width == 96);
        CHECK(f.header.height == 64);
        CHECK(f.header.completeness == float(ref.passes[p].completeness));
        CHECK(f.header.final() == (p + 1 == got.size()));
        CHECK(f.rgba == ref.snapshots[p].rgba);
    }
}

TEST_CASE("a newer set_view supersedes the running render") {
    Sink sink;
    SessionController s(sphere_volume(), std::ref(sink));
    for (int i = 0; i < 5; ++i) s.handle_text(set_view(12.f + float(i), 160, 120, false));
    s.wait_idle();
    const auto got = sink.take();
    REQUIRE_FALSE(got.empty());
    uint32_t gen = 0, last_pass = 0;
    bool seen_last_gen = false;
    for (const auto& m : got) {
        const DecodedFrame f = as_frame(m);
        REQUIRE(f.header.generation >= gen);
        if (f.header.generation == gen) {
            REQUIRE(f.header.pass_index > last_pass);
        }
        if (seen_last_gen) REQUIRE(f.header.generation == 5);
        if (f.header.generation == 5) seen_last_gen = true;
        gen = f.header.generation;
        last_pass = f.header.pass_index;
    }
    const DecodedFrame tail = as_frame(got.back());
    CHECK(tail.header.generation == 5);
    CHECK(tail.header.final());
    CHECK(s.generation() == 5);
}

TEST_CASE("live websocket session") {
    namespace beast = boost::beast;
    namespace websocket = beast::websocket;
    using tcp = boost::asio::ip::tcp;

    Server server(sphere_volume(), "127.0.0.1", 0);
    server.start();
    const RenderResult ref = cli_equivalent(18.f, 64, 48);

    boost::asio::io_context ioc;
    tcp::resolver resolver(ioc);
    websocket::stream<tcp::socket> ws(ioc);
    boost::asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.port())));
    ws.handshake("127.0.0.1", "/");

    ws.text(true);
    ws.write(boost::asio::buffer(std::string(R"({"type":"info_request"})")));
    beast::flat_buffer buf;
    ws.read(buf);
    CHECK(ws.got_text());
    const json info = json::parse(beast::buffers_to_string(buf.data()));
    CHECK(info["type"] == "info");
    buf.consume(buf.size());

    ws.write(boost::asio::buffer(set_view(18.f, 64, 48)));
    std::vector<DecodedFrame> frames;
    for (;;) {
        ws.read(buf);
        REQUIRE_FALSE(ws.got_text());
        const std::string bytes = beast::buffers_to_string(buf.data());
        buf.consume(buf.size());
        frames.push_back(decode_frame(std::span(reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size())));
        if (frames.back().header.final()) break;
    }
    // the client keeps up here, so nothing is dropped
    REQUIRE(frames.size() == ref.passes.size());
    for (size_t p = 0; p < frames.size(); ++p) {
        CHECK(frames[p].header.pass_index == p);
        CHECK(frames[p].rgba == ref.snapshots[p].rgba);
    }

    ws.write(boost::asio::buffer(std::string("{bad")));
    ws.read(buf);
    CHECK(json::parse(beast::buffers_to_string(buf.data()))["type"] == "error");
    buf.consume(buf.size());

    ws.close(websocket::close_code::normal);
    server.stop();
}
