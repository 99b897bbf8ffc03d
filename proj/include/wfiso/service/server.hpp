#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "wfiso/service/session.hpp"

namespace wfiso::service {

/// WebSocket render service: one SessionController per connection, JSON
/// control messages as text frames, pass frames as binary frames.
class Server {
public:
    /// Binds immediately; port 0 picks an ephemeral port.
    Server(std::shared_ptr<const LoadedVolume> volume, const std::string& address, uint16_t port);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    uint16_t port() const;
    /// Runs the event loop on a background thread.
    void start();
    /// Runs the event loop on the calling thread until stop().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace wfiso::service
