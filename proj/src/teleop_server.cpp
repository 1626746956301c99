/*
 * Copyright (c) 2026 The vacgrip Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vacgrip/teleop_server.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <boost/beast/websocket.hpp>

#include "vacgrip/errors.hpp"

namespace vacgrip::teleop {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

constexpr const char* kStubIndex =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>vacgrip</title></head>"
    "<body><h1>vacgrip teleop</h1><p>No UI bundle is configured. Connect a client to "
    "<code>ws://HOST:PORT/session/&lt;id&gt;</code>.</p></body></html>";

std::string mime_type(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

json error_message(const std::string& text) { return {{"type", "error"}, {"message", text}}; }

}  // namespace

std::string session_id_from_target(const std::string& target) {
  static const std::string prefix = "/session/";
  if (target.rfind(prefix, 0) != 0) return {};
  std::string id = target.substr(prefix.size());
  if (const auto q = id.find('?'); q != std::string::npos) id.resize(q);
  if (id.empty() || id.size() > 64) return {};
  for (char c : id) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return {};
  }
  return id;
}

std::string static_path(const std::string& root, const std::string& target) {
  std::string rel = target.substr(0, target.find('?'));
  if (rel.empty() || rel[0] != '/') return {};
  if (rel.find("..") != std::string::npos || rel.find('\\') != std::string::npos) return {};
  if (rel.back() == '/') rel += "index.html";
  return root + rel;
}

// ---------------------------------------------------------------------------

struct Server::Impl {
  ServerOptions opts;
  SessionFactory factory;
  asio::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::mutex mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::map<std::string, bool> driven;  // session id -> a driver is attached

  std::shared_ptr<Session> session(const std::string& id) {
    std::lock_guard lock(mu);
    auto& s = sessions[id];
    if (!s) {
      s = std::shared_ptr<Session>(factory(id));
      s->start();
    }
    return s;
  }

  bool claim_driver(const std::string& id) {
    std::lock_guard lock(mu);
    if (driven[id]) return false;
    driven[id] = true;
    return true;
  }

  void release_driver(const std::string& id) {
    std::lock_guard lock(mu);
    driven[id] = false;
  }

  void accept();
};

namespace {

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, Server::Impl& server, std::string id)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), server_(server), id_(std::move(id)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    try {
      session_ = server_.session(id_);
      subscriber_ = session_->subscribe();
    } catch (const std::exception& e) {
      send(error_message(e.what()).dump());
      return;
    }
    driver_ = server_.claim_driver(id_);
    send(json{{"type", "hello"}, {"session", id_}, {"role", driver_ ? "driver" : "viewer"}}.dump());
    read();
    poll();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) return shutdown();
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (!driver_) {
      send(error_message("viewer connections are read-only").dump());
    } else {
      try {
        const Ack ack = session_->apply_input(input_from_json(json::parse(text)));
        send(to_json(ack).dump());
      } catch (const json::exception& e) {
        send(error_message(std::string("bad JSON: ") + e.what()).dump());
      } catch (const std::exception& e) {
        send(error_message(e.what()).dump());
      }
    }
    read();
  }

  void poll() {
    if (closed_) return;
    // Frames are pulled only when the socket is idle; a slow client leaves
    // them in the bounded subscriber queue, which drops the oldest.
    if (queue_.empty()) {
      if (auto frame = subscriber_->pop()) send(std::move(*frame));
    }
    timer_.expires_after(server_.opts.frame_poll);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->poll();
    });
  }

  void send(std::string msg) {
    queue_.push_back(std::move(msg));
    if (queue_.size() == 1) write_next();
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->shutdown();
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write_next();
    });
  }

  void shutdown() {
    if (closed_) return;
    closed_ = true;
    timer_.cancel();
    if (driver_) server_.release_driver(id_);
    if (session_ && subscriber_) session_->unsubscribe(subscriber_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  asio::steady_timer timer_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  Server::Impl& server_;
  std::string id_;
  std::shared_ptr<Session> session_;
  std::shared_ptr<Subscriber> subscriber_;
  bool driver_ = false;
  bool closed_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, Server::Impl& server) : stream_(std::move(socket)), server_(server) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

 private:
  void on_read(beast::error_code ec) {
    if (ec) return;
    const std::string target(req_.target());
    if (websocket::is_upgrade(req_)) {
      const auto id = session_id_from_target(target);
      if (!id.empty()) {
        stream_.expires_never();
        std::make_shared<WsConnection>(stream_.release_socket(), server_, id)->run(std::move(req_));
        return;
      }
      return respond(http::status::not_found, "text/plain", "unknown session path\n");
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head)
      return respond(http::status::method_not_allowed, "text/plain", "GET only\n");
    if (server_.opts.static_dir.empty()) {
      if (target == "/" || target == "/index.html") return respond(http::status::ok, "text/html", kStubIndex);
      return respond(http::status::not_found, "text/plain", "not found\n");
    }
    const auto path = static_path(server_.opts.static_dir, target);
    if (path.empty()) return respond(http::status::bad_request, "text/plain", "bad path\n");
    std::ifstream in(path, std::ios::binary);
    if (!in || std::filesystem::is_directory(path)) return respond(http::status::not_found, "text/plain", "not found\n");
    std::ostringstream body;
    body << in.rdbuf();
    respond(http::status::ok, mime_type(path), body.str());
  }

  void respond(http::status status, const std::string& type, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "vacgrip");
    res->set(http::field::content_type, type);
    res->keep_alive(false);
    res->body() = req_.method() == http::verb::head ? std::string{} : std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Server::Impl& server_;
};

}  // namespace

void Server::Impl::accept() {
  acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec == asio::error::operation_aborted) return;
    if (!ec) std::make_shared<HttpConnection>(std::move(socket), *this)->run();
    accept();
  });
}

Server::Server(ServerOptions opts, SessionFactory factory) : impl_(std::make_unique<Impl>()) {
  impl_->opts = std::move(opts);
  impl_->factory = std::move(factory);
  beast::error_code ec;
  const auto address = asio::ip::make_address(impl_->opts.address, ec);
  if (ec) throw ConfigError("bad listen address " + impl_->opts.address);
  const tcp::endpoint endpoint(address, impl_->opts.port);
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw Error("cannot listen on " + impl_->opts.address + ":" + std::to_string(impl_->opts.port) + ": " + ec.message());
  impl_->accept();
}

Server::~Server() {
  stop();
  std::lock_guard lock(impl_->mu);
  for (auto& [_, s] : impl_->sessions) s->close();
}

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() { impl_->ioc.run(); }

void Server::stop() { impl_->ioc.stop(); }

std::shared_ptr<Session> Server::session(const std::string& id) { return impl_->session(id); }

}  // namespace vacgrip::teleop
