#include "tpc/tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <thread>

namespace tpc {

PeerAddress parse_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) throw ConfigError("address must be host:port, got '" + std::string(text) + "'");
  PeerAddress a;
  a.host = std::string(text.substr(0, colon));
  const std::string port(text.substr(colon + 1));
  try {
    std::size_t used = 0;
    const unsigned long p = std::stoul(port, &used);
    if (used != port.size() || p == 0 || p > 65535) throw std::out_of_range(port);
    a.port = static_cast<std::uint16_t>(p);
  } catch (const std::exception&) {
    throw ConfigError("bad port in '" + std::string(text) + "'");
  }
  return a;
}

namespace {

bool write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

bool read_all(int fd, std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::recv(fd, data, n, 0);
    if (r == 0) return false;
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

class TcpChannel final : public Channel {
 public:
  TcpChannel(int fd, std::chrono::milliseconds recv_timeout) : fd_(fd), timeout_(recv_timeout) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    writer_ = std::thread([this] { write_loop(); });
    reader_ = std::thread([this] { read_loop(); });
  }

  ~TcpChannel() override { close(); }

  void send(std::vector<std::uint8_t> encoded) override {
    {
      std::lock_guard lk(mu_);
      if (broken_) throw TransportError("connection lost");
      if (closing_) throw TransportError("channel closed");
      outbox_.push_back(std::move(encoded));
    }
    cv_.notify_one();
  }

  std::vector<std::uint8_t> recv() override { return inbox_.pop(timeout_); }

  void close() override {
    if (closed_.exchange(true)) return;
    {
      std::lock_guard lk(mu_);
      closing_ = true;
    }
    cv_.notify_one();
    writer_.join();
    ::shutdown(fd_, SHUT_WR);
    // Let the peer finish reading before tearing the socket down, so a late
    // frame from it cannot reset data we already sent.
    {
      std::unique_lock lk(mu_);
      cv_.wait_for(lk, std::chrono::seconds(5), [&] { return reader_done_; });
    }
    ::shutdown(fd_, SHUT_RDWR);
    reader_.join();
    ::close(fd_);
    inbox_.close();
  }

 private:
  void write_loop() {
    for (;;) {
      std::vector<std::uint8_t> item;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return !outbox_.empty() || closing_; });
        if (outbox_.empty()) return;
        item = std::move(outbox_.front());
        outbox_.pop_front();
      }
      if (!write_all(fd_, item.data(), item.size())) {
        std::lock_guard lk(mu_);
        broken_ = true;
        outbox_.clear();
        return;
      }
    }
  }

  void read_loop() {
    for (;;) {
      std::array<std::uint8_t, kFrameHeaderBytes> header{};
      if (!read_all(fd_, header.data(), header.size())) break;
      std::uint32_t len = 0;
      try {
        len = frame_payload_length(header);
      } catch (const FramingError&) {
        break;
      }
      std::vector<std::uint8_t> frame(kFrameHeaderBytes + len);
      std::memcpy(frame.data(), header.data(), header.size());
      if (len > 0 && !read_all(fd_, frame.data() + kFrameHeaderBytes, len)) break;
      inbox_.push(std::move(frame));
    }
    inbox_.close();
    {
      std::lock_guard lk(mu_);
      reader_done_ = true;
    }
    cv_.notify_all();
  }

  int fd_;
  std::chrono::milliseconds timeout_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::vector<std::uint8_t>> outbox_;
  bool closing_ = false;
  bool broken_ = false;
  bool reader_done_ = false;
  std::atomic<bool> closed_{false};
  FrameQueue inbox_;
  std::thread writer_, reader_;
};

sockaddr_in resolve(const PeerAddress& a) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(a.host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw TransportError("cannot resolve host " + a.host);
  sockaddr_in sa{};
  std::memcpy(&sa, res->ai_addr, sizeof sa);
  ::freeaddrinfo(res);
  sa.sin_port = htons(a.port);
  return sa;
}

int listen_on(const PeerAddress& a) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError("socket() failed");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in sa = resolve(a);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 || ::listen(fd, 4) != 0) {
    ::close(fd);
    throw TransportError("cannot listen on " + a.host + ":" + std::to_string(a.port) + ": " + std::strerror(errno));
  }
  return fd;
}

int dial(const PeerAddress& a, std::chrono::steady_clock::time_point deadline) {
  const sockaddr_in sa = resolve(a);
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError("socket() failed");
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) == 0) return fd;
    ::close(fd);
    if (std::chrono::steady_clock::now() > deadline)
      throw TransportError("cannot connect to " + a.host + ":" + std::to_string(a.port));
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

int accept_one(int listen_fd, std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw TransportError("timed out waiting for a peer to connect");
    pollfd p{listen_fd, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) continue;
    const int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd >= 0) return fd;
  }
}

}  // namespace

std::array<std::unique_ptr<Channel>, 3> tcp_connect(Party me, const std::array<PeerAddress, 3>& addresses,
                                                    std::chrono::milliseconds connect_timeout,
                                                    std::chrono::milliseconds recv_timeout) {
  const auto deadline = std::chrono::steady_clock::now() + connect_timeout;
  const int m = index_of(me);
  std::array<int, 3> fds{-1, -1, -1};
  const int expected_incoming = 2 - m;  // parties with a higher id dial us
  int listen_fd = -1;
  try {
    if (expected_incoming > 0) listen_fd = listen_on(addresses[m]);
    for (int lower = 0; lower < m; ++lower) {
      const int fd = dial(addresses[lower], deadline);
      const std::uint8_t id = static_cast<std::uint8_t>(m);
      if (!write_all(fd, &id, 1)) throw TransportError("handshake failed");
      fds[lower] = fd;
    }
    for (int k = 0; k < expected_incoming; ++k) {
      const int fd = accept_one(listen_fd, deadline);
      std::uint8_t id = 0xFF;
      if (!read_all(fd, &id, 1) || id <= m || id > 2 || fds[id] != -1) {
        ::close(fd);
        throw TransportError("bad handshake from incoming peer");
      }
      fds[id] = fd;
    }
  } catch (...) {
    for (int fd : fds) {
      if (fd >= 0) ::close(fd);
    }
    if (listen_fd >= 0) ::close(listen_fd);
    throw;
  }
  if (listen_fd >= 0) ::close(listen_fd);
  std::array<std::unique_ptr<Channel>, 3> out;
  for (int p = 0; p < 3; ++p) {
    if (p != m) out[p] = std::make_unique<TcpChannel>(fds[p], recv_timeout);
  }
  return out;
}

std::vector<std::uint16_t> free_local_ports(std::size_t n) {
  std::vector<int> fds;
  std::vector<std::uint16_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) break;
    fds.push_back(fd);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    sa.sin_port = 0;
    socklen_t len = sizeof sa;
    if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 ||
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&sa), &len) != 0)
      break;
    out.push_back(ntohs(sa.sin_port));
  }
  for (int fd : fds) ::close(fd);
  if (out.size() != n) throw TransportError("no free loopback ports");
  return out;
}

}  // namespace tpc
