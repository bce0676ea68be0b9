// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "colaboot/addr.hpp"
#include "colaboot/boot_session.hpp"
#include "colaboot/client_arch.hpp"
#include "colaboot/dhcp_message.hpp"
#include "colaboot/udp_socket.hpp"

namespace colaboot {
class ClientRegistry;
}

namespace colaboot::dhcp {

using Clock = std::chrono::steady_clock;

struct Lease {
  MacAddress mac;
  Ipv4Address ip;
  bool active = false;  // false while only offered
  Clock::time_point expiry;
};

enum class DhcpServerErrc { kPoolExhausted, kNotPxe, kUnknownClient };

class DhcpServerError : public std::runtime_error {
 public:
  explicit DhcpServerError(DhcpServerErrc code);
  DhcpServerErrc code() const { return code_; }

 private:
  DhcpServerErrc code_;
};

/// Address pool bindings. One owner mutates it; reads are cheap snapshots.
class LeaseTable {
 public:
  LeaseTable(Ipv4Address pool_start, Ipv4Address pool_end);

  /// Reserves an address for `mac` until `hold_until`, reusing any existing binding.
  /// Lowest free address wins. Throws DhcpServerError{kPoolExhausted}.
  Ipv4Address offer(const MacAddress& mac, Clock::time_point hold_until);
  /// Marks `ip` as leased to `mac`. Fails if the address is bound to another client.
  bool activate(const MacAddress& mac, Ipv4Address ip, Clock::time_point expiry);
  void release(const MacAddress& mac);
  /// Removes bindings with expiry < now; returns how many were reclaimed.
  std::size_t expire(Clock::time_point now);

  bool in_pool(Ipv4Address ip) const;
  std::optional<Lease> binding(const MacAddress& mac) const;
  std::optional<MacAddress> holder(Ipv4Address ip) const;
  std::size_t pool_size() const;
  std::size_t free_count() const { return pool_size() - by_mac_.size(); }
  std::vector<Lease> leases() const;

 private:
  void unbind(const MacAddress& mac);

  Ipv4Address start_;
  Ipv4Address end_;
  std::map<MacAddress, Lease> by_mac_;
  std::map<Ipv4Address, MacAddress> by_ip_;
};

/// Boot information handed to PXE clients alongside the lease.
struct BootConfig {
  Ipv4Address next_server;
  std::map<netproto::ArchClass, std::string> bootfile_by_arch;
  std::string image_url_template;

  /// Unknown or unmapped architectures fall back to the legacy BIOS entry.
  const std::string& bootfile_for(netproto::ArchClass cls) const;
};

struct DhcpSettings {
  Ipv4Address server_id;
  Ipv4Address subnet_mask{255, 255, 255, 0};
  Ipv4Address router;
  std::vector<Ipv4Address> dns;
  std::uint32_t lease_seconds = 3600;
  std::chrono::seconds offer_hold{30};
  bool pxe_only = false;
  BootConfig boot;
};

/// Pure DHCP exchange logic over a lease table.
class DhcpResponder {
 public:
  DhcpResponder(DhcpSettings settings, LeaseTable& leases);

  /// Throws DhcpServerError{kPoolExhausted, kNotPxe}.
  netproto::DhcpMessage handle_discover(const netproto::DhcpMessage& msg, Clock::time_point now);
  /// ACK, or NAK when the request does not match what this server offered.
  /// Returns nullopt when the client selected a different server.
  std::optional<netproto::DhcpMessage> handle_request(const netproto::DhcpMessage& msg,
                                                      Clock::time_point now);
  /// Dispatches on message type; nullopt means "send nothing".
  std::optional<netproto::DhcpMessage> handle(const netproto::DhcpMessage& msg,
                                              Clock::time_point now);
  std::size_t expire_leases(Clock::time_point now) { return leases_.expire(now); }

  const DhcpSettings& settings() const { return settings_; }

 private:
  netproto::DhcpMessage reply_skeleton(const netproto::DhcpMessage& req,
                                       netproto::DhcpMessageType type) const;
  void add_boot_fields(netproto::DhcpMessage& reply, const netproto::DhcpMessage& req) const;

  DhcpSettings settings_;
  LeaseTable& leases_;
};

/// Where a reply to `req` received from `from` goes (RFC 2131 4.1, plus unicast to
/// clients that did not send from the well-known client port).
UdpEndpoint reply_destination(const netproto::DhcpMessage& req, const netproto::DhcpMessage& reply,
                              const UdpEndpoint& from, std::uint16_t client_port = 68);

/// UDP front end: one consumer thread owns the lease table.
class DhcpService {
 public:
  DhcpService(DhcpSettings settings, LeaseTable& leases, ClientRegistry* registry,
              session::EventSink events);
  ~DhcpService();

  /// Binds without starting; throws PortInUse.
  void bind(Ipv4Address address, std::uint16_t port);
  void start();
  void stop();
  std::uint16_t port() const;

 private:
  void run(std::stop_token stop);
  void handle_datagram(const Datagram& d);

  DhcpResponder responder_;
  ClientRegistry* registry_;
  session::EventSink events_;
  UdpSocket socket_;
  std::jthread worker_;
};

}  // namespace colaboot::dhcp
