#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "wfiso/block_codec.hpp"
#include "wfiso/grid_traversal.hpp"
#include "wfiso/macrocell_grid.hpp"
#include "wfiso/service/frame.hpp"

namespace wfiso::service {

/// Volume state shared read-only by every session.
struct LoadedVolume {
    CompressedVolume cv;
    MacrocellGrids grids;
    ValueRange value_range;  // of the decoded data

    static std::shared_ptr<const LoadedVolume> from(CompressedVolume cv);
};

struct ViewRequest {
    Camera camera;
    float iso = 0.f;
    int width = 0;
    int height = 0;
    bool speculation = true;
};

inline constexpr int kMaxImageEdge = 8192;

/// Parses a set_view message body; throws UsageError with a readable reason.
ViewRequest parse_set_view(const std::string& text);

/// Transport-independent protocol state for one client connection.
///
/// Control messages arrive through handle_text. Renders run on a worker
/// thread; a new set_view bumps the generation and the in-flight render stops
/// at its next pass boundary. Outbound messages go to the send callback, which
/// may be called from the worker thread.
class SessionController {
public:
    using Send = std::function<void(OutboundMessage)>;

    SessionController(std::shared_ptr<const LoadedVolume> volume, Send send);
    ~SessionController();
    SessionController(const SessionController&) = delete;
    SessionController& operator=(const SessionController&) = delete;

    void handle_text(const std::string& text);
    /// Cancels any render and joins the worker. Idempotent.
    void stop();

    uint32_t generation() const { return generation_.load(); }
    /// Blocks until no render is pending or running. For tests.
    void wait_idle();

private:
    void send_error(const std::string& code, const std::string& reason);
    void worker_loop();
    void run_render(uint32_t gen, const ViewRequest& req);

    std::shared_ptr<const LoadedVolume> volume_;
    Send send_;
    std::atomic<uint32_t> generation_{0};

    std::mutex mutex_;
    std::condition_variable cv_;
    std::optional<std::pair<uint32_t, ViewRequest>> pending_;
    bool busy_ = false;
    bool stopping_ = false;
    std::thread worker_;
};

}  // namespace wfiso::service
