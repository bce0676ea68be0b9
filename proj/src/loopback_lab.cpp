// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/loopback_lab.hpp"

#include <unistd.h>

#include <atomic>
#include <random>

namespace colaboot::sim {

namespace fs = std::filesystem;

namespace {

fs::path make_temp_root() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  for (;;) {
    auto dir = fs::temp_directory_path() /
               ("colaboot-lab-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)) + "-" + std::to_string(rd() % 100000));
    if (fs::create_directory(dir)) return dir;
  }
}

}  // namespace

LoopbackLab::LoopbackLab(LabOptions options) : options_(std::move(options)) {
  if (options_.root.empty()) {
    root_ = make_temp_root();
    owns_root_ = true;
  } else {
    root_ = options_.root;
    fs::create_directories(root_);
  }
  ServerConfig cfg;
  cfg.bind_address = Ipv4Address(127, 0, 0, 1);
  cfg.next_server = cfg.bind_address;
  cfg.pool_start = options_.pool_start;
  cfg.pool_end = options_.pool_end;
  cfg.subnet_mask = Ipv4Address(255, 0, 0, 0);
  cfg.bootfile_bios = kBootloaderBios;
  cfg.bootfile_uefi = kBootloaderUefi;
  cfg.dhcp_port = 0;
  cfg.tftp_port = 0;
  cfg.image_port = 0;
  cfg.tftp_timeout_ms = options_.tftp_timeout_ms;
  cfg.tftp_retries = options_.tftp_retries;
  cfg.tftp_blksize_max = options_.tftp_blksize_max;
  cfg.store_root = store_root();
  cfg.event_log = event_log();

  server_ = std::make_unique<BootServer>(cfg);
  server_->bind();
  install(1, options_.asset_seed);
  server_->start();
}

LoopbackLab::~LoopbackLab() {
  stop();
  if (owns_root_) {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }
}

void LoopbackLab::stop() {
  if (server_) server_->stop();
}

Endpoints LoopbackLab::endpoints() const {
  Endpoints ep;
  ep.server = Ipv4Address(127, 0, 0, 1);
  ep.dhcp_port = server_->dhcp_port();
  ep.tftp_port = server_->tftp_port();
  ep.client_bind = Ipv4Address(127, 0, 0, 1);
  return ep;
}

std::string LoopbackLab::image_url() const {
  return "http://127.0.0.1:" + std::to_string(server_->image_port()) + "/assets/" + kImage;
}

store::SyncReport LoopbackLab::install(std::uint64_t version, std::uint64_t asset_seed) {
  store::AssetStore writer_view(store_root());
  return install_version(writer_view, version,
                         synthetic_assets(options_.sizes, asset_seed, image_url()));
}

}  // namespace colaboot::sim
