// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colaboot/addr.hpp"

namespace colaboot {

/// Raised when a listener cannot bind; carries the port for all-or-nothing startup reporting.
class PortInUse : public std::runtime_error {
 public:
  PortInUse(std::uint16_t port, const std::string& detail);
  std::uint16_t port() const { return port_; }

 private:
  std::uint16_t port_;
};

struct Datagram {
  UdpEndpoint from;
  std::vector<std::uint8_t> bytes;
};

class UdpSocket {
 public:
  /// Binds to address:port (port 0 picks an ephemeral port). Throws PortInUse.
  static UdpSocket bind(Ipv4Address address, std::uint16_t port, bool reuse_address = false);

  UdpSocket() = default;
  ~UdpSocket();
  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  UdpEndpoint local_endpoint() const;

  void enable_broadcast();
  void send_to(const UdpEndpoint& to, std::span<const std::uint8_t> bytes) const;
  /// Waits up to `timeout`; nullopt on timeout.
  std::optional<Datagram> receive(std::chrono::milliseconds timeout) const;
  void close();

 private:
  explicit UdpSocket(int fd) : fd_(fd) {}
  int fd_ = -1;
};

}  // namespace colaboot
