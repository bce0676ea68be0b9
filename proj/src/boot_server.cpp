// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/boot_server.hpp"

#include <spdlog/spdlog.h>

namespace colaboot {

namespace {

std::shared_ptr<store::AssetStore> open_store(const std::filesystem::path& root) {
  store::AssetStore probe(root);
  if (!probe.exists()) store::AssetStore::create(root);
  return std::make_shared<store::AssetStore>(root);
}

std::optional<std::filesystem::path> log_path(const ServerConfig& cfg) {
  if (cfg.event_log.empty()) return std::nullopt;
  return cfg.event_log;
}

}  // namespace

BootServer::BootServer(ServerConfig config)
    : config_(std::move(config)),
      store_(open_store(config_.store_root)),
      registry_(std::make_unique<ClientRegistry>(store_)),
      funnel_(tracker_, log_path(config_)),
      leases_(config_.pool_start, config_.pool_end),
      dhcp_(config_.dhcp_settings(), leases_, registry_.get(), funnel_.sink()),
      tftp_(config_.tftp_policy(), *registry_, funnel_.sink()),
      image_(*registry_, funnel_.sink(), [this](Ipv4Address ip) { tftp_.settle_client(ip); }) {}

BootServer::~BootServer() { stop(); }

void BootServer::bind() {
  const auto addr = config_.bind_address;
  try {
    dhcp_.bind(addr, config_.dhcp_port);
    tftp_.bind(addr, config_.tftp_port);
    image_.bind(addr, config_.image_port);
  } catch (const PortInUse&) {
    dhcp_.stop();
    tftp_.stop();
    image_.stop();
    throw;
  }
}

void BootServer::start() {
  dhcp_.start();
  tftp_.start();
  image_.start();
  if (!config_.sync_source.empty()) {
    sync_thread_ = std::jthread([this](std::stop_token st) { sync_loop(st); });
  }
  running_ = true;
  spdlog::info("serving on {}: dhcp {}, tftp {}, image {}", config_.bind_address.to_string(),
               dhcp_port(), tftp_port(), image_port());
}

void BootServer::stop() {
  if (sync_thread_.joinable()) {
    sync_thread_.request_stop();
    sync_wake_.notify_all();
    sync_thread_.join();
  }
  dhcp_.stop();
  tftp_.stop();
  image_.stop();
  funnel_.flush();
  if (running_) spdlog::info("stopped");
  running_ = false;
}

std::optional<store::SyncReport> BootServer::sync_now() {
  if (config_.sync_source.empty()) return std::nullopt;
  auto remote = store::make_remote_source(config_.sync_source);
  return store::sync_once(*remote, *store_);
}

void BootServer::sync_loop(std::stop_token stop) {
  const auto interval = std::chrono::seconds(config_.sync_interval);
  while (!stop.stop_requested()) {
    try {
      if (auto report = sync_now(); report && report->new_version) {
        spdlog::info("sync: activated version {} ({} objects, {} bytes)", *report->new_version,
                     report->fetched, report->bytes);
      }
    } catch (const std::exception& e) {
      spdlog::warn("sync: {}", e.what());
    }
    std::unique_lock lock(sync_mutex_);
    sync_wake_.wait_for(lock, stop, interval, [] { return false; });
  }
}

}  // namespace colaboot
