// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// A complete boot server on 127.0.0.1 with ephemeral ports and a synthetic store,
// for `colaboot simulate` and the integration tests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>

#include "colaboot/boot_server.hpp"
#include "colaboot/pxe_client_sim.hpp"
#include "colaboot/synthetic.hpp"

namespace colaboot::sim {

struct LabOptions {
  SyntheticSizes sizes;
  std::uint64_t asset_seed = 1;
  Ipv4Address pool_start{127, 0, 10, 100};
  Ipv4Address pool_end{127, 0, 10, 199};
  std::uint32_t tftp_timeout_ms = 1000;
  std::uint32_t tftp_retries = 5;
  std::uint16_t tftp_blksize_max = 1428;
  /// Working directory; a fresh temp directory (removed afterwards) when empty.
  std::filesystem::path root;
};

class LoopbackLab {
 public:
  /// Binds the servers, installs synthetic version 1 and starts serving.
  explicit LoopbackLab(LabOptions options = {});
  ~LoopbackLab();
  LoopbackLab(const LoopbackLab&) = delete;
  LoopbackLab& operator=(const LoopbackLab&) = delete;

  BootServer& server() { return *server_; }
  Endpoints endpoints() const;
  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path store_root() const { return root_ / "store"; }
  std::filesystem::path event_log() const { return root_ / "events.jsonl"; }
  std::string image_url() const;

  /// Installs synthetic assets as `version` through a separate writer, the way an
  /// external sync would. Content is derived from `asset_seed`.
  store::SyncReport install(std::uint64_t version, std::uint64_t asset_seed);

  void stop();

 private:
  LabOptions options_;
  std::filesystem::path root_;
  bool owns_root_ = false;
  std::unique_ptr<BootServer> server_;
};

}  // namespace colaboot::sim
