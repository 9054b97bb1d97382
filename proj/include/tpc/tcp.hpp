#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tpc/transport.hpp"

namespace tpc {

struct PeerAddress {
  std::string host;
  std::uint16_t port = 0;
};

/// "host:port"; throws ConfigError.
PeerAddress parse_address(std::string_view text);

/// One TCP connection per pair. Party i listens on addresses[i]; the higher id
/// dials the lower one and announces itself with a one-byte handshake, so
/// there is never a dial race. Each connection has a writer thread (send never
/// blocks) and a reader thread.
std::array<std::unique_ptr<Channel>, 3> tcp_connect(Party me, const std::array<PeerAddress, 3>& addresses,
                                                    std::chrono::milliseconds connect_timeout = std::chrono::seconds(30),
                                                    std::chrono::milliseconds recv_timeout = std::chrono::seconds(120));

/// `n` loopback ports that were free a moment ago (the kernel picks them).
std::vector<std::uint16_t> free_local_ports(std::size_t n);

}  // namespace tpc
