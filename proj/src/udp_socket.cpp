// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/udp_socket.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <system_error>

namespace colaboot {

namespace {

sockaddr_in to_sockaddr(const UdpEndpoint& ep) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(ep.port);
  sa.sin_addr.s_addr = htonl(ep.address.value());
  return sa;
}

UdpEndpoint from_sockaddr(const sockaddr_in& sa) {
  return {Ipv4Address{ntohl(sa.sin_addr.s_addr)}, ntohs(sa.sin_port)};
}

constexpr std::size_t kMaxDatagram = 65536;

}  // namespace

PortInUse::PortInUse(std::uint16_t port, const std::string& detail)
    : std::runtime_error("cannot bind port " + std::to_string(port) + ": " + detail), port_(port) {}

UdpSocket UdpSocket::bind(Ipv4Address address, std::uint16_t port, bool reuse_address) {
  int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw std::system_error(errno, std::generic_category(), "socket");
  UdpSocket sock(fd);
  if (reuse_address) {
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  }
  auto sa = to_sockaddr({address, port});
  if (::bind(fd, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0) {
    throw PortInUse(port, address.to_string() + ": " + std::strerror(errno));
  }
  return sock;
}

UdpSocket::~UdpSocket() { close(); }

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void UdpSocket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

UdpEndpoint UdpSocket::local_endpoint() const {
  sockaddr_in sa{};
  socklen_t len = sizeof sa;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len);
  return from_sockaddr(sa);
}

void UdpSocket::enable_broadcast() {
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_BROADCAST, &one, sizeof one);
}

void UdpSocket::send_to(const UdpEndpoint& to, std::span<const std::uint8_t> bytes) const {
  auto sa = to_sockaddr(to);
  for (;;) {
    auto n = ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&sa),
                      sizeof sa);
    if (n >= 0 || errno != EINTR) break;
  }
  // Datagram delivery is best effort; callers recover via retransmission.
}

std::optional<Datagram> UdpSocket::receive(std::chrono::milliseconds timeout) const {
  pollfd pfd{fd_, POLLIN, 0};
  auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    int rc = ::poll(&pfd, 1, static_cast<int>(std::max<long long>(0, left.count())));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return std::nullopt;
    Datagram d;
    d.bytes.resize(kMaxDatagram);
    sockaddr_in sa{};
    socklen_t len = sizeof sa;
    auto n = ::recvfrom(fd_, d.bytes.data(), d.bytes.size(), 0, reinterpret_cast<sockaddr*>(&sa),
                        &len);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return std::nullopt;
    }
    d.bytes.resize(static_cast<std::size_t>(n));
    d.from = from_sockaddr(sa);
    return d;
  }
}

}  // namespace colaboot
