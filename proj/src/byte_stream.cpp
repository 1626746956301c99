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

#include "vacgrip/byte_stream.hpp"

#include <poll.h>

#include <algorithm>
#include <boost/asio.hpp>

#include "vacgrip/errors.hpp"

namespace vacgrip {

namespace asio = boost::asio;
using asio::ip::tcp;

void BytePipe::write(std::span<const std::uint8_t> bytes) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) throw StreamClosed("pipe closed");
    data_.insert(data_.end(), bytes.begin(), bytes.end());
  }
  cv_.notify_all();
}

ReadResult BytePipe::read_some(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [&] { return !data_.empty() || closed_; });
  const std::size_t n = std::min(out.size(), data_.size());
  std::copy_n(data_.begin(), n, out.begin());
  data_.erase(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(n));
  return {n, closed_ && data_.empty() && n == 0};
}

void BytePipe::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::pair<std::string, unsigned short> split_address(const std::string& address) {
  const auto colon = address.rfind(':');
  try {
    if (colon == std::string::npos) return {"127.0.0.1", static_cast<unsigned short>(std::stoi(address))};
    std::string host = address.substr(0, colon);
    if (host.empty()) host = "127.0.0.1";
    return {host, static_cast<unsigned short>(std::stoi(address.substr(colon + 1)))};
  } catch (const std::logic_error&) {
    throw ConfigError("bad address '" + address + "', expected host:port");
  }
}

struct TcpStream::Impl {
  asio::io_context io;
  tcp::socket socket{io};
};

TcpStream::TcpStream(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
TcpStream::~TcpStream() = default;

std::unique_ptr<TcpStream> TcpStream::connect(const std::string& address) {
  auto [host, port] = split_address(address);
  auto impl = std::make_unique<Impl>();
  boost::system::error_code ec;
  tcp::resolver resolver(impl->io);
  auto endpoints = resolver.resolve(host, std::to_string(port), ec);
  if (!ec) asio::connect(impl->socket, endpoints, ec);
  if (ec) throw StreamClosed("cannot connect to " + address + ": " + ec.message());
  impl->socket.set_option(tcp::no_delay(true));
  return std::make_unique<TcpStream>(std::move(impl));
}

void TcpStream::write(std::span<const std::uint8_t> bytes) {
  boost::system::error_code ec;
  asio::write(impl_->socket, asio::buffer(bytes.data(), bytes.size()), ec);
  if (ec) throw StreamClosed("tcp write: " + ec.message());
}

ReadResult TcpStream::read_some(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) {
  if (!impl_->socket.is_open()) return {0, true};
  pollfd pfd{impl_->socket.native_handle(), POLLIN, 0};
  const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (ready <= 0) return {0, false};
  boost::system::error_code ec;
  const std::size_t n = impl_->socket.read_some(asio::buffer(out.data(), out.size()), ec);
  if (ec) return {n, n == 0};
  return {n, false};
}

void TcpStream::close() {
  boost::system::error_code ec;
  impl_->socket.shutdown(tcp::socket::shutdown_both, ec);
  impl_->socket.close(ec);
}

struct TcpListener::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
};

TcpListener::TcpListener(const std::string& address) : impl_(std::make_unique<Impl>()) {
  auto [host, port] = split_address(address);
  boost::system::error_code ec;
  const tcp::endpoint ep(asio::ip::make_address(host, ec), port);
  if (ec) throw ConfigError("bad listen host '" + host + "'");
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
  impl_->acceptor.bind(ep, ec);
  if (ec) throw ConfigError("cannot bind " + address + ": " + ec.message());
  impl_->acceptor.listen();
}

TcpListener::~TcpListener() = default;

unsigned short TcpListener::port() const { return impl_->acceptor.local_endpoint().port(); }

std::unique_ptr<TcpStream> TcpListener::accept() {
  auto impl = std::make_unique<TcpStream::Impl>();
  boost::system::error_code ec;
  impl_->acceptor.accept(impl->socket, ec);
  if (ec) throw StreamClosed("accept: " + ec.message());
  impl->socket.set_option(tcp::no_delay(true));
  return std::make_unique<TcpStream>(std::move(impl));
}

void TcpListener::close() {
  boost::system::error_code ec;
  impl_->acceptor.close(ec);
}

}  // namespace vacgrip
