// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// Text generators for boot-server deployment: firewall rules, installer script, and
// the server config consumed by `colaboot serve`. Output is inert text; nothing here
// executes it.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "colaboot/addr.hpp"

namespace colaboot::deploy {

enum class DeployErrc { kUnsupportedDialect, kMissingBootfile, kProfileInvalid };

class DeployError : public std::runtime_error {
 public:
  DeployError(DeployErrc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  DeployErrc code() const { return code_; }

 private:
  DeployErrc code_;
};

enum class ScriptDialect { kWindowsBatch, kPosixShell };

/// Throws DeployError{kUnsupportedDialect}.
ScriptDialect dialect_from_string(std::string_view name);

inline constexpr std::uint16_t kDhcpServerPort = 67;
inline constexpr std::uint16_t kDhcpClientPort = 68;
inline constexpr std::uint16_t kTftpPort = 69;
inline constexpr std::uint16_t kCifsPorts[] = {137, 138, 139, 445};

struct DeployProfile {
  Ipv4Address server_ip;
  std::uint16_t image_port = 8080;
  std::string cifs_user = "colaboot";
  std::string target_os = "windows_batch";
  std::string share_path;  // store root as seen on the boot server
  std::optional<Ipv4Address> pool_start;
  std::optional<Ipv4Address> pool_end;
  Ipv4Address subnet_mask{255, 255, 255, 0};
};

/// Parses a `key = value` profile (server_ip, image_port, cifs_user, target_os,
/// share_path, pool_start, pool_end, subnet_mask, bootfile_bios, bootfile_uefi).
/// Throws DeployError{kProfileInvalid}.
struct ProfileFile {
  DeployProfile profile;
  std::optional<std::string> bootfile_bios;
  std::optional<std::string> bootfile_uefi;
};
ProfileFile parse_profile(std::string_view text);

enum class Protocol { kTcp, kUdp };
std::string_view to_string(Protocol p);

struct FirewallRule {
  Protocol protocol;
  std::uint16_t port;
  std::string purpose;
  auto operator<=>(const FirewallRule&) const = default;
};

/// UDP 67, 68, 69; TCP and UDP 137, 138, 139, 445; TCP image port. Fixed order.
std::vector<FirewallRule> firewall_rules(const DeployProfile& profile);
std::string generate_firewall_rules(const DeployProfile& profile);

/// SMB/CIFS enablement, user creation, share creation, service start, in that order.
std::string generate_installer_script(const DeployProfile& profile);
std::string_view installer_file_name(const DeployProfile& profile);

struct BootAssets {
  std::optional<std::string> bios;
  std::optional<std::string> uefi;
};

/// Throws DeployError{kMissingBootfile} without a BIOS bootfile.
std::string generate_server_config(const DeployProfile& profile, const BootAssets& assets);

}  // namespace colaboot::deploy
