#include "arena/server/server.hpp"

#include <chrono>
#include <deque>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "arena/errors.hpp"
#include "arena/log.hpp"

namespace arena {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, const PolicyModel& model, const GameConfig& game,
             const SessionOptions& options)
      : ws_(std::move(socket)),
        timer_(ws_.get_executor()),
        session_(model, game, options),
        period_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / options.tick_hz))) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->next_tick_ = std::chrono::steady_clock::now() + self->period_;
      self->schedule_tick();
      self->read();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->shutdown();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->send(self->session_.on_message(text));
      if (!self->session_.closed()) self->read();
    });
  }

  void schedule_tick() {
    timer_.expires_at(next_tick_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->done_) return;
      self->send(self->session_.tick());
      // A late tick runs immediately once, then the schedule resumes from now.
      self->next_tick_ += self->period_;
      const auto now = std::chrono::steady_clock::now();
      if (self->next_tick_ < now) self->next_tick_ = now;
      if (!self->session_.closed()) self->schedule_tick();
    });
  }

  void send(std::vector<Frame> frames) {
    for (Frame& f : frames) {
      // The front frame may be mid-write, so only a queued tail is replaced.
      const bool tail_replaceable = outbox_.size() > (writing_ ? 1u : 0u);
      if (f.snapshot && tail_replaceable && outbox_.back().snapshot) {
        outbox_.back() = std::move(f);
      } else {
        outbox_.push_back(std::move(f));
      }
    }
    if (!writing_) write_next();
  }

  void write_next() {
    if (outbox_.empty()) {
      writing_ = false;
      if (session_.closed()) close();
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front().text),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->outbox_.pop_front();
                      if (ec) {
                        self->shutdown();
                        return;
                      }
                      self->write_next();
                    });
  }

  void close() {
    if (done_) return;
    done_ = true;
    timer_.cancel();
    ws_.async_close(websocket::close_code::normal,
                    [self = shared_from_this()](beast::error_code) {});
  }

  void shutdown() {
    done_ = true;
    timer_.cancel();
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  beast::flat_buffer buffer_;
  Session session_;
  std::chrono::steady_clock::duration period_;
  std::chrono::steady_clock::time_point next_tick_;
  std::deque<Frame> outbox_;
  bool writing_ = false;
  bool done_ = false;
};

}  // namespace

struct PlayServer::Impl {
  const PolicyModel* model;
  GameConfig game;
  ServerOptions options;
  net::io_context io{1};
  tcp::acceptor acceptor{io};
  std::thread thread;
  unsigned short bound_port = 0;

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Connection>(std::move(socket), *model, game, options.session)->start();
      accept();
    });
  }
};

PlayServer::PlayServer(const PolicyModel& model, GameConfig game, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  game.validate();
  if (options.session.tick_hz < 1) throw std::invalid_argument("server: tick_hz must be >= 1");
  impl_->model = &model;
  impl_->game = std::move(game);
  impl_->options = std::move(options);
}

PlayServer::~PlayServer() {
  stop();
  wait();
}

void PlayServer::start() {
  Impl& s = *impl_;
  try {
    const tcp::endpoint endpoint(net::ip::make_address(s.options.address), s.options.port);
    s.acceptor.open(endpoint.protocol());
    s.acceptor.set_option(net::socket_base::reuse_address(true));
    s.acceptor.bind(endpoint);
    s.acceptor.listen();
    s.bound_port = s.acceptor.local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    throw IoError("play server: cannot listen on " + s.options.address + ":" +
                  std::to_string(s.options.port) + ": " + e.what());
  }
  s.accept();
  s.thread = std::thread([&s] { s.io.run(); });
  log::info("play server listening on " + s.options.address + ":" + std::to_string(s.bound_port));
}

unsigned short PlayServer::port() const { return impl_->bound_port; }

void PlayServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void PlayServer::stop() { impl_->io.stop(); }

}  // namespace arena
