// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// The `serve` process: DHCP, TFTP and image services over one store, one client
// registry and one session tracker, plus periodic sync.
#pragma once

#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "colaboot/asset_store.hpp"
#include "colaboot/boot_session.hpp"
#include "colaboot/client_registry.hpp"
#include "colaboot/config.hpp"
#include "colaboot/dhcp_server.hpp"
#include "colaboot/image_service.hpp"
#include "colaboot/sync.hpp"
#include "colaboot/tftp_server.hpp"

namespace colaboot {

class BootServer {
 public:
  explicit BootServer(ServerConfig config);
  ~BootServer();
  BootServer(const BootServer&) = delete;
  BootServer& operator=(const BootServer&) = delete;

  /// Binds every listener or none: on PortInUse anything already bound is released
  /// before the exception propagates.
  void bind();
  /// Starts service threads. Periodic sync runs only when sync_source is set.
  void start();
  /// Stops services (aborting in-flight transfers) and flushes the event log. Idempotent.
  void stop();

  std::uint16_t dhcp_port() const { return dhcp_.port(); }
  std::uint16_t tftp_port() const { return tftp_.port(); }
  std::uint16_t image_port() const { return image_.port(); }

  const ServerConfig& config() const { return config_; }
  ClientRegistry& registry() { return *registry_; }
  session::EventFunnel& events() { return funnel_; }
  const dhcp::LeaseTable& leases() const { return leases_; }

  /// One sync pass against sync_source; nullopt when no source is configured.
  std::optional<store::SyncReport> sync_now();

 private:
  void sync_loop(std::stop_token stop);

  ServerConfig config_;
  std::shared_ptr<store::AssetStore> store_;
  std::unique_ptr<ClientRegistry> registry_;
  session::BootTracker tracker_;
  session::EventFunnel funnel_;
  dhcp::LeaseTable leases_;
  dhcp::DhcpService dhcp_;
  tftp::TftpService tftp_;
  image::ImageService image_;
  std::mutex sync_mutex_;
  std::condition_variable_any sync_wake_;
  std::jthread sync_thread_;
  bool running_ = false;
};

}  // namespace colaboot
