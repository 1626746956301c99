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

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <string>

namespace vacgrip {

struct ReadResult {
  std::size_t count = 0;
  bool closed = false;  // no more bytes will ever arrive
};

/// Ordered byte transport. Implementations must tolerate one reader and one
/// writer on different threads.
class ByteStream {
 public:
  virtual ~ByteStream() = default;

  /// Throws StreamClosed when the peer is gone.
  virtual void write(std::span<const std::uint8_t> bytes) = 0;

  /// Blocks up to `timeout` for at least one byte.
  virtual ReadResult read_some(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) = 0;

  virtual void close() = 0;
};

/// In-process one-directional pipe. Reads drain buffered bytes before
/// reporting closure.
class BytePipe final : public ByteStream {
 public:
  void write(std::span<const std::uint8_t> bytes) override;
  ReadResult read_some(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) override;
  void close() override;

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::uint8_t> data_;
  bool closed_ = false;
};

/// Blocking TCP connection, usable for both directions.
class TcpStream final : public ByteStream {
 public:
  ~TcpStream() override;

  /// `address` is host:port.
  static std::unique_ptr<TcpStream> connect(const std::string& address);

  void write(std::span<const std::uint8_t> bytes) override;
  ReadResult read_some(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) override;
  void close() override;

  struct Impl;
  explicit TcpStream(std::unique_ptr<Impl> impl);

 private:
  std::unique_ptr<Impl> impl_;
};

/// Accepts TCP connections on host:port. Port 0 picks a free port.
class TcpListener {
 public:
  explicit TcpListener(const std::string& address);
  ~TcpListener();

  unsigned short port() const;
  std::unique_ptr<TcpStream> accept();
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits "host:port"; a bare port means 127.0.0.1.
std::pair<std::string, unsigned short> split_address(const std::string& address);

}  // namespace vacgrip
