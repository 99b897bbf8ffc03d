#include "wfiso/service/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <iostream>
#include <thread>

namespace wfiso::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, std::shared_ptr<const LoadedVolume> volume)
        : ws_(std::move(socket)), volume_(std::move(volume)) {}

    ~Connection() {
        if (session_) session_->stop();
    }

    void start() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        asio::dispatch(ws_.get_executor(), [self = shared_from_this()] {
            self->ws_.async_accept([self](beast::error_code ec) { self->on_accept(ec); });
        });
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        std::weak_ptr<Connection> weak = shared_from_this();
        auto ex = ws_.get_executor();
        session_ = std::make_unique<SessionController>(volume_, [weak, ex](OutboundMessage m) {
            asio::post(ex, [weak, m = std::move(m)]() mutable {
                if (auto self = weak.lock()) self->enqueue_now(std::move(m));
            });
        });
        read();
    }

    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            if (session_) session_->stop();
            return;
        }
        if (ws_.got_text()) {
            session_->handle_text(beast::buffers_to_string(buffer_.data()));
        } else {
            enqueue_now({true, R"({"type":"error","code":"unexpected_binary","reason":"control messages must be text"})", 0, false});
        }
        buffer_.consume(buffer_.size());
        read();
    }

    void enqueue_now(OutboundMessage m) {
        queue_.push(std::move(m));
        if (!writing_) write_next();
    }

    void write_next() {
        auto next = queue_.pop();
        if (!next) {
            writing_ = false;
            return;
        }
        writing_ = true;
        current_ = std::move(*next);
        ws_.text(current_.text);
        ws_.async_write(asio::buffer(current_.payload), [self = shared_from_this()](beast::error_code ec, size_t) {
            if (ec) {
                self->writing_ = false;
                return;
            }
            self->write_next();
        });
    }

    websocket::stream<beast::tcp_stream> ws_;
    std::shared_ptr<const LoadedVolume> volume_;
    std::unique_ptr<SessionController> session_;
    beast::flat_buffer buffer_;
    OutboundQueue queue_;
    OutboundMessage current_;
    bool writing_ = false;
};

}  // namespace

struct Server::Impl {
    asio::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::shared_ptr<const LoadedVolume> volume;
    std::thread thread;

    void accept() {
        acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            std::make_shared<Connection>(std::move(socket), volume)->start();
            accept();
        });
    }
};

Server::Server(std::shared_ptr<const LoadedVolume> volume, const std::string& address, uint16_t port)
    : impl_(std::make_unique<Impl>()) {
    impl_->volume = std::move(volume);
    const tcp::endpoint ep{asio::ip::make_address(address), port};
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen(asio::socket_base::max_listen_connections);
    impl_->accept();
}

Server::~Server() { stop(); }

uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::start() {
    impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void Server::run() { impl_->ioc.run(); }

void Server::stop() {
    impl_->ioc.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace wfiso::service
