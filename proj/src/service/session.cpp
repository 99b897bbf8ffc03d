#include "wfiso/service/session.hpp"

#include <cmath>

#include "json.hpp"

#include "wfiso/errors.hpp"
#include "wfiso/reference_oracle.hpp"
#include "wfiso/wavefront_engine.hpp"

namespace wfiso::service {

using nlohmann::json;

std::shared_ptr<const LoadedVolume> LoadedVolume::from(CompressedVolume cv) {
    auto lv = std::make_shared<LoadedVolume>();
    lv->grids = build_grids(cv);
    lv->value_range = decode_full(cv).value_range();
    lv->cv = std::move(cv);
    return lv;
}

namespace {

Vec3f vec3_field(const json& obj, const char* key) {
    if (!obj.contains(key)) throw UsageError(std::string("camera.") + key + " is missing");
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 3) throw UsageError(std::string("camera.") + key + " must be [x,y,z]");
    Vec3f out;
    for (int i = 0; i < 3; ++i) {
        if (!v[i].is_number()) throw UsageError(std::string("camera.") + key + " must hold numbers");
        out[i] = v[i].get<float>();
        if (!std::isfinite(out[i])) throw UsageError(std::string("camera.") + key + " must be finite");
    }
    return out;
}

int edge_field(const json& msg, const char* key) {
    if (!msg.contains(key) || !msg.at(key).is_number_integer()) {
        throw UsageError(std::string(key) + " must be an integer");
    }
    const int64_t v = msg.at(key).get<int64_t>();
    if (v < 1 || v > kMaxImageEdge) {
        throw UsageError(std::string(key) + " must be in [1, " + std::to_string(kMaxImageEdge) + "]");
    }
    return int(v);
}

}  // namespace

ViewRequest parse_set_view(const std::string& text) {
    const json msg = json::parse(text, nullptr, false);
    if (msg.is_discarded() || !msg.is_object()) throw UsageError("message is not a JSON object");
    if (!msg.contains("camera") || !msg.at("camera").is_object()) throw UsageError("camera object is missing");
    const json& cam = msg.at("camera");

    ViewRequest req;
    const float fov = cam.contains("fov_y") && cam.at("fov_y").is_number() ? cam.at("fov_y").get<float>() : 45.f;
    req.camera = Camera::look_at(vec3_field(cam, "eye"), vec3_field(cam, "look_at"), vec3_field(cam, "up"), fov);
    if (!msg.contains("iso") || !msg.at("iso").is_number()) throw UsageError("iso must be a number");
    req.iso = msg.at("iso").get<float>();
    if (!std::isfinite(req.iso)) throw UsageError("iso must be finite");
    req.width = edge_field(msg, "width");
    req.height = edge_field(msg, "height");
    if (msg.contains("speculation")) {
        if (!msg.at("speculation").is_boolean()) throw UsageError("speculation must be a boolean");
        req.speculation = msg.at("speculation").get<bool>();
    }
    return req;
}

SessionController::SessionController(std::shared_ptr<const LoadedVolume> volume, Send send)
    : volume_(std::move(volume)), send_(std::move(send)) {
    worker_ = std::thread([this] { worker_loop(); });
}

SessionController::~SessionController() { stop(); }

void SessionController::stop() {
    {
        std::lock_guard lock(mutex_);
        if (stopping_ && !worker_.joinable()) return;
        stopping_ = true;
        pending_.reset();
    }
    ++generation_;
    cv_.notify_all();
    if (worker_.joinable() && worker_.get_id() != std::this_thread::get_id()) worker_.join();
}

void SessionController::wait_idle() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return stopping_ || (!pending_ && !busy_); });
}

void SessionController::send_error(const std::string& code, const std::string& reason) {
    OutboundMessage m;
    m.text = true;
    m.payload = json{{"type", "error"}, {"code", code}, {"reason", reason}}.dump();
    send_(std::move(m));
}

void SessionController::handle_text(const std::string& text) {
    const json msg = json::parse(text, nullptr, false);
    if (msg.is_discarded() || !msg.is_object()) {
        send_error("bad_json", "message is not a JSON object");
        return;
    }
    const std::string type = msg.contains("type") && msg.at("type").is_string() ? msg.at("type").get<std::string>() : "";
    if (type == "info_request") {
        const Int3 d = volume_->cv.dims();
        OutboundMessage m;
        m.text = true;
        m.payload = json{{"type", "info"},
                         {"dims", {d.x, d.y, d.z}},
                         {"value_range", {volume_->value_range.min, volume_->value_range.max}}}
                        .dump();
        send_(std::move(m));
        return;
    }
    if (type != "set_view") {
        send_error("unknown_type", type.empty() ? "message has no type" : "unknown message type '" + type + "'");
        return;
    }
    ViewRequest req;
    try {
        req = parse_set_view(text);
    } catch (const std::invalid_argument& e) {
        send_error("bad_set_view", e.what());
        return;
    }
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    const uint32_t gen = ++generation_;
    pending_.emplace(gen, req);
    cv_.notify_all();
}

void SessionController::worker_loop() {
    for (;;) {
        std::pair<uint32_t, ViewRequest> job;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [&] { return stopping_ || pending_.has_value(); });
            if (stopping_) break;
            job = *pending_;
            pending_.reset();
            busy_ = true;
        }
        try {
            run_render(job.first, job.second);
        } catch (const std::exception& e) {
            send_error("render_failed", e.what());
        }
        {
            std::lock_guard lock(mutex_);
            busy_ = false;
        }
        cv_.notify_all();
    }
    cv_.notify_all();
}

void SessionController::run_render(uint32_t gen, const ViewRequest& req) {
    const uint32_t n_pixels = uint32_t(req.width) * uint32_t(req.height);
    auto emit = [&](const Framebuffer& fb, uint32_t pass_index) {
        FrameHeader h;
        h.generation = gen;
        h.pass_index = pass_index;
        h.width = uint32_t(req.width);
        h.height = uint32_t(req.height);
        h.completeness = float(fb.completeness);
        h.n_active = n_pixels - uint32_t(std::lround(fb.completeness * n_pixels));
        if (fb.completeness >= 1.0) h.flags |= kFrameFinal;
        const auto bytes = encode_frame(h, fb.rgba);
        OutboundMessage m;
        m.payload.assign(bytes.begin(), bytes.end());
        m.generation = gen;
        m.droppable = !h.final();
        send_(std::move(m));
    };

    RenderOptions opts;
    opts.width = req.width;
    opts.height = req.height;
    opts.speculation = req.speculation;
    opts.on_pass = [&](const Framebuffer& fb, const PassStats& st) {
        if (generation_.load() != gen) return false;
        emit(fb, st.pass_index);
        return true;
    };
    const RenderResult r = render(volume_->cv, volume_->grids, req.camera, req.iso, opts);
    // a camera that misses the volume finishes without any pass
    if (!r.cancelled && r.passes.empty() && generation_.load() == gen) emit(r.image, 0);
}

}  // namespace wfiso::service
