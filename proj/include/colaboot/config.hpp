// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// Server configuration: `key = value` lines, `#` comments, COLABOOT_<KEY> overrides.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "colaboot/addr.hpp"
#include "colaboot/dhcp_server.hpp"
#include "colaboot/transfer_session.hpp"

namespace colaboot {

class ConfigInvalid : public std::runtime_error {
 public:
  explicit ConfigInvalid(const std::string& reason) : std::runtime_error(reason) {}
};

using Environment = std::map<std::string, std::string>;

/// Snapshot of the process environment, restricted to COLABOOT_* names.
Environment colaboot_environment();

struct ServerConfig {
  Ipv4Address bind_address;
  Ipv4Address pool_start;
  Ipv4Address pool_end;
  Ipv4Address subnet_mask{255, 255, 255, 0};
  Ipv4Address router;
  std::vector<Ipv4Address> dns;
  Ipv4Address next_server;
  std::string bootfile_bios;
  std::string bootfile_uefi = "bootx64.efi";
  std::string bootfile_uefi_ia32;
  std::uint32_t lease_seconds = 3600;
  bool pxe_only = false;
  std::uint16_t dhcp_port = 67;
  std::uint16_t tftp_port = 69;
  std::uint16_t image_port = 8080;
  std::uint16_t tftp_blksize_max = 1428;
  std::uint32_t tftp_timeout_ms = 1000;
  std::uint32_t tftp_retries = 5;
  std::filesystem::path store_root;
  std::string sync_source;
  std::uint32_t sync_interval = 300;
  std::filesystem::path event_log;
  std::string image_url_template = "http://${next_server}:${image_port}/assets/os-image.sqfs";

  dhcp::DhcpSettings dhcp_settings() const;
  tftp::TftpPolicy tftp_policy() const;
  /// Address clients should use to reach this server's image service.
  std::string image_url() const;

  bool operator==(const ServerConfig&) const = default;
};

/// Every key the loader accepts, in documentation order.
const std::vector<std::string_view>& config_keys();

/// Parses and validates config text. Environment entries COLABOOT_<KEY> override file
/// values. Throws ConfigInvalid naming the offending key.
ServerConfig parse_config(std::string_view text, const Environment& env = {});
ServerConfig load_config(const std::filesystem::path& path, const Environment& env = {});

/// Renders `cfg` in the loader's format; parse_config(render_config(c)) reproduces c.
std::string render_config(const ServerConfig& cfg);

/// Replaces ${next_server} and ${image_port} in `text`.
std::string expand_placeholders(std::string_view text, Ipv4Address next_server,
                                std::uint16_t image_port);

}  // namespace colaboot
