// Copyright 2026 The ssinfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "ssinfer/error.hpp"
#include "ssinfer/transport.hpp"

namespace ssinfer {

namespace {

constexpr char kMagic[4] = {'P', 'G', 'N', 'N'};
constexpr std::size_t kHelloBytes = 11;

using Clock = std::chrono::steady_clock;

int RemainingMs(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(left.count());
}

// Reads exactly n bytes or throws (kTimeout / kClosed / kIo).
void ReadExact(int fd, std::uint8_t* buf, std::size_t n,
               Clock::time_point deadline) {
  std::size_t got = 0;
  while (got < n) {
    pollfd pfd{fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, RemainingMs(deadline));
    if (rc == 0) Fail(ErrorKind::kTimeout, "no data from peer within deadline");
    if (rc < 0) {
      if (errno == EINTR) continue;
      Fail(ErrorKind::kIo, std::string("poll: ") + std::strerror(errno));
    }
    const ssize_t r = ::recv(fd, buf + got, n - got, 0);
    if (r == 0) Fail(ErrorKind::kClosed, "peer closed the connection");
    if (r < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      Fail(ErrorKind::kIo, std::string("recv: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(r);
  }
}

bool WriteAll(int fd, const std::uint8_t* buf, std::size_t n) {
  std::size_t sent = 0;
  while (sent < n) {
    const ssize_t w = ::send(fd, buf + sent, n - sent, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(w);
  }
  return true;
}

// Sends go through a writer thread so that two parties sending large frames
// at the same time never block on each other's socket buffers.
class TcpLink final : public Link {
 public:
  explicit TcpLink(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    writer_ = std::thread([this] { WriterLoop(); });
  }

  ~TcpLink() override { Close(); }

  void WriteFrame(Bytes wire) override {
    std::lock_guard<std::mutex> lock(mu_);
    Require(!closing_ && !write_failed_, ErrorKind::kClosed,
            "write on closed TCP link");
    queue_.push_back(std::move(wire));
    cv_.notify_all();
  }

  Bytes ReadFrame(std::chrono::milliseconds timeout) override {
    const auto deadline = Clock::now() + timeout;
    Bytes wire(kFrameHeaderBytes);
    ReadExact(fd_, wire.data(), kFrameHeaderBytes, deadline);
    const std::uint32_t len =
        static_cast<std::uint32_t>(wire[5]) | (static_cast<std::uint32_t>(wire[6]) << 8) |
        (static_cast<std::uint32_t>(wire[7]) << 16) |
        (static_cast<std::uint32_t>(wire[8]) << 24);
    wire.resize(kFrameHeaderBytes + len);
    if (len > 0) ReadExact(fd_, wire.data() + kFrameHeaderBytes, len, deadline);
    return wire;
  }

  void Close() override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (closing_) return;
      closing_ = true;
      cv_.notify_all();
    }
    if (writer_.joinable()) writer_.join();
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
  }

 private:
  void WriterLoop() {
    std::unique_lock<std::mutex> lock(mu_);
    for (;;) {
      cv_.wait(lock, [&] { return !queue_.empty() || closing_; });
      if (queue_.empty()) return;  // closing and drained
      Bytes wire = std::move(queue_.front());
      queue_.pop_front();
      lock.unlock();
      const bool ok = WriteAll(fd_, wire.data(), wire.size());
      lock.lock();
      if (!ok) {
        write_failed_ = true;
        queue_.clear();
        return;
      }
    }
  }

  int fd_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Bytes> queue_;
  bool closing_ = false;
  bool write_failed_ = false;
  std::thread writer_;
};

std::unique_ptr<Link> Handshake(int fd, const HandshakeParams& params,
                                std::chrono::milliseconds timeout) {
  const Bytes hello = EncodeHello(params);
  if (!WriteAll(fd, hello.data(), hello.size())) {
    ::close(fd);
    Fail(ErrorKind::kIo, "failed to send handshake");
  }
  Bytes peer(kHelloBytes);
  try {
    ReadExact(fd, peer.data(), peer.size(), Clock::now() + timeout);
    CheckHello(peer, params);
  } catch (...) {
    ::close(fd);
    throw;
  }
  return std::make_unique<TcpLink>(fd);
}

sockaddr_in Resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string h = (host.empty() || host == "localhost") ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  addrinfo* res = nullptr;
  Require(::getaddrinfo(h.c_str(), nullptr, &hints, &res) == 0 && res != nullptr,
          ErrorKind::kIo, "cannot resolve host " + host);
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

}  // namespace

Bytes EncodeHello(const HandshakeParams& params) {
  Bytes out(kMagic, kMagic + 4);
  out.push_back(kProtocolVersion);
  out.push_back(static_cast<std::uint8_t>(params.ring.bits));
  out.push_back(static_cast<std::uint8_t>(params.ring.frac));
  out.push_back(static_cast<std::uint8_t>(params.kappa & 0xff));
  out.push_back(static_cast<std::uint8_t>(params.kappa >> 8));
  out.push_back(params.prg_id);
  out.push_back(static_cast<std::uint8_t>(params.spline_pieces));
  return out;
}

void CheckHello(std::span<const std::uint8_t> hello, const HandshakeParams& mine) {
  Require(hello.size() == kHelloBytes, ErrorKind::kHandshake, "bad hello size");
  Require(std::memcmp(hello.data(), kMagic, 4) == 0, ErrorKind::kHandshake,
          "bad magic");
  Require(hello[4] == kProtocolVersion, ErrorKind::kHandshake,
          "protocol version mismatch");
  const Bytes expected = EncodeHello(mine);
  static const char* kFields[] = {"", "", "", "", "", "ring bits l",
                                  "fraction bits f", "kappa", "kappa",
                                  "prg id", "spline pieces"};
  for (std::size_t i = 5; i < kHelloBytes; ++i) {
    Require(hello[i] == expected[i], ErrorKind::kHandshake,
            std::string(kFields[i]) + " differs: peer " + std::to_string(hello[i]) +
                ", local " + std::to_string(expected[i]));
  }
}

std::pair<std::string, std::uint16_t> ParseHostPort(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  Require(colon != std::string::npos, ErrorKind::kConfig,
          "endpoint must be host:port, got '" + endpoint + "'");
  const std::string port_text = endpoint.substr(colon + 1);
  int port = -1;
  try {
    port = std::stoi(port_text);
  } catch (...) {
  }
  Require(port >= 0 && port <= 65535, ErrorKind::kConfig, "bad port in '" + endpoint + "'");
  return {endpoint.substr(0, colon), static_cast<std::uint16_t>(port)};
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  Require(fd_ >= 0, ErrorKind::kIo, "socket() failed");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = Resolve(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 1) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    Fail(ErrorKind::kIo, "cannot listen on " + host + ":" + std::to_string(port) +
                             ": " + err);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Link> TcpListener::Accept(const HandshakeParams& params,
                                          std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  Require(rc > 0, ErrorKind::kTimeout, "no peer connected within deadline");
  const int fd = ::accept(fd_, nullptr, nullptr);
  Require(fd >= 0, ErrorKind::kIo, "accept() failed");
  return Handshake(fd, params, timeout);
}

std::unique_ptr<Link> TcpConnect(const std::string& host, std::uint16_t port,
                                 const HandshakeParams& params,
                                 std::chrono::milliseconds timeout) {
  const sockaddr_in addr = Resolve(host, port);
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    Require(fd >= 0, ErrorKind::kIo, "socket() failed");
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) {
      return Handshake(fd, params, timeout);
    }
    ::close(fd);
    // The server may not be listening yet.
    Require(Clock::now() < deadline, ErrorKind::kTimeout,
            "could not connect to " + host + ":" + std::to_string(port));
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

}  // namespace ssinfer
