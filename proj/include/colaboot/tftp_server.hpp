// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

#include "colaboot/boot_session.hpp"
#include "colaboot/client_registry.hpp"
#include "colaboot/transfer_session.hpp"
#include "colaboot/udp_socket.hpp"

namespace colaboot::tftp {

/// Listens for RRQs and runs each transfer on its own thread and ephemeral port.
class TftpService {
 public:
  TftpService(TftpPolicy policy, ClientRegistry& registry, session::EventSink events);
  ~TftpService();
  TftpService(const TftpService&) = delete;
  TftpService& operator=(const TftpService&) = delete;

  /// Binds the listener without starting; throws PortInUse. Transfer sockets bind to
  /// the same address on ephemeral ports.
  void bind(Ipv4Address address, std::uint16_t port);
  void start();
  void stop();
  std::uint16_t port() const;

  /// Treats transfers to `ip` whose final block went out as complete. A client that has
  /// moved on to its next request has received the file even if its last ACK is still in
  /// flight; reporting it here keeps completion ahead of the next request in the event
  /// stream.
  void settle_client(Ipv4Address ip);

  std::size_t active_transfers() const;
  std::uint64_t transfers_completed() const { return completed_.load(); }
  std::uint64_t transfers_aborted() const { return aborted_.load(); }

 private:
  struct Transfer;

  void run(std::stop_token stop);
  void handle_request(const Datagram& d);
  void run_transfer(std::stop_token stop, Transfer& t);
  void report_complete(Transfer& t);
  void reap();

  TftpPolicy policy_;
  ClientRegistry& registry_;
  session::EventSink events_;
  Ipv4Address address_;
  UdpSocket listener_;
  std::jthread worker_;

  mutable std::mutex transfers_mutex_;
  std::list<std::unique_ptr<Transfer>> transfers_;
  std::atomic<std::uint64_t> completed_{0};
  std::atomic<std::uint64_t> aborted_{0};
};

}  // namespace colaboot::tftp
