// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/deploykit.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace colaboot::deploy {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_profile(const std::string& why) {
  throw DeployError(DeployErrc::kProfileInvalid, "profile: " + why);
}

Ipv4Address profile_ip(std::string_view key, std::string_view value) {
  auto ip = Ipv4Address::parse(value);
  if (!ip) bad_profile(std::string(key) + ": not an IPv4 address");
  return *ip;
}

bool safe_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

bool safe_path(std::string_view s) {
  return std::none_of(s.begin(), s.end(), [](unsigned char c) {
    return c == '"' || c == '\'' || c == '\n' || c == '\r' || c == '%' || c == '$' || c == '`';
  });
}

std::string share_path_for(const DeployProfile& p, ScriptDialect d) {
  if (!p.share_path.empty()) return p.share_path;
  return d == ScriptDialect::kWindowsBatch ? "C:\\colaboot\\store" : "/srv/colaboot/store";
}

void check_profile(const DeployProfile& p) {
  if (!safe_name(p.cifs_user)) bad_profile("cifs_user must be [A-Za-z0-9_.-]+");
  if (!safe_path(p.share_path)) bad_profile("share_path contains quoting characters");
}

}  // namespace

ScriptDialect dialect_from_string(std::string_view name) {
  if (name == "windows_batch") return ScriptDialect::kWindowsBatch;
  if (name == "posix_shell") return ScriptDialect::kPosixShell;
  throw DeployError(DeployErrc::kUnsupportedDialect,
                    "unsupported script dialect '" + std::string(name) + "'");
}

std::string_view to_string(Protocol p) { return p == Protocol::kTcp ? "TCP" : "UDP"; }

ProfileFile parse_profile(std::string_view text) {
  ProfileFile out;
  bool have_ip = false;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) bad_profile("expected 'key = value': " + std::string(line));
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    auto& p = out.profile;
    if (key == "server_ip") {
      p.server_ip = profile_ip(key, value);
      have_ip = true;
    } else if (key == "image_port") {
      unsigned v = 0;
      auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || end != value.data() + value.size() || v == 0 || v > 65535) {
        bad_profile("image_port must be 1-65535");
      }
      p.image_port = static_cast<std::uint16_t>(v);
    } else if (key == "cifs_user") {
      p.cifs_user = value;
    } else if (key == "target_os") {
      p.target_os = value;
    } else if (key == "share_path") {
      p.share_path = value;
    } else if (key == "pool_start") {
      p.pool_start = profile_ip(key, value);
    } else if (key == "pool_end") {
      p.pool_end = profile_ip(key, value);
    } else if (key == "subnet_mask") {
      p.subnet_mask = profile_ip(key, value);
    } else if (key == "bootfile_bios") {
      out.bootfile_bios = std::string(value);
    } else if (key == "bootfile_uefi") {
      out.bootfile_uefi = std::string(value);
    } else {
      bad_profile("unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_ip) bad_profile("server_ip is required");
  check_profile(out.profile);
  return out;
}

std::vector<FirewallRule> firewall_rules(const DeployProfile& profile) {
  std::vector<FirewallRule> rules = {
      {Protocol::kUdp, kDhcpServerPort, "DHCP server"},
      {Protocol::kUdp, kDhcpClientPort, "DHCP client"},
      {Protocol::kUdp, kTftpPort, "TFTP"},
  };
  const char* cifs_purpose[] = {"NetBIOS name", "NetBIOS datagram", "NetBIOS session", "SMB"};
  for (std::size_t i = 0; i < std::size(kCifsPorts); ++i) {
    rules.push_back({Protocol::kTcp, kCifsPorts[i], cifs_purpose[i]});
    rules.push_back({Protocol::kUdp, kCifsPorts[i], cifs_purpose[i]});
  }
  rules.push_back({Protocol::kTcp, profile.image_port, "image HTTP"});
  return rules;
}

std::string generate_firewall_rules(const DeployProfile& profile) {
  auto dialect = dialect_from_string(profile.target_os);
  std::ostringstream out;
  const auto ip = profile.server_ip.to_string();
  if (dialect == ScriptDialect::kWindowsBatch) {
    out << "rem Inbound rules for the colaboot boot server at " << ip << "\r\n";
    for (const auto& r : firewall_rules(profile)) {
      out << "netsh advfirewall firewall add rule name=\"colaboot " << r.purpose << " ("
          << to_string(r.protocol) << " " << r.port << ")\" dir=in action=allow protocol="
          << to_string(r.protocol) << " localport=" << r.port << "\r\n";
    }
  } else {
    out << "# Inbound rules for the colaboot boot server at " << ip << "\n";
    for (const auto& r : firewall_rules(profile)) {
      std::string proto = r.protocol == Protocol::kTcp ? "tcp" : "udp";
      out << "iptables -A INPUT -p " << proto << " --dport " << r.port
          << " -m comment --comment \"colaboot " << r.purpose << "\" -j ACCEPT\n";
    }
  }
  return out.str();
}

std::string_view installer_file_name(const DeployProfile& profile) {
  return dialect_from_string(profile.target_os) == ScriptDialect::kWindowsBatch ? "install.bat"
                                                                                : "install.sh";
}

std::string generate_installer_script(const DeployProfile& profile) {
  auto dialect = dialect_from_string(profile.target_os);
  check_profile(profile);
  const auto share = share_path_for(profile, dialect);
  const auto& user = profile.cifs_user;
  std::ostringstream out;
  if (dialect == ScriptDialect::kWindowsBatch) {
    const char* nl = "\r\n";
    out << "@echo off" << nl
        << "rem colaboot boot server setup for " << profile.server_ip.to_string() << nl
        << "rem Run from an elevated prompt." << nl << nl
        << "rem 1. SMB 1.0 / CIFS file sharing support" << nl
        << "dism /online /enable-feature /featurename:SMB1Protocol /all /norestart" << nl << nl
        << "rem 2. Account for CIFS share access (prompts for a password)" << nl
        << "net user " << user << " * /add" << nl << nl
        << "rem 3. Read-only share of the boot asset store" << nl
        << "if not exist \"" << share << "\" mkdir \"" << share << "\"" << nl
        << "net share colaboot=\"" << share << "\" /grant:" << user << ",READ" << nl << nl
        << "rem 4. File sharing service" << nl
        << "sc config lanmanserver start= auto" << nl
        << "net start lanmanserver" << nl;
  } else {
    out << "#!/bin/sh\n"
        << "# colaboot boot server setup for " << profile.server_ip.to_string() << "\n"
        << "# Run as root.\n"
        << "set -eu\n\n"
        << "# 1. SMB 1.0 / CIFS file sharing support\n"
        << "apt-get install -y samba cifs-utils\n"
        << "sed -i 's/^\\[global\\]$/[global]\\n   server min protocol = NT1/' /etc/samba/smb.conf\n\n"
        << "# 2. Account for CIFS share access (prompts for a password)\n"
        << "id -u " << user << " >/dev/null 2>&1 || useradd -M -s /usr/sbin/nologin " << user
        << "\n"
        << "smbpasswd -a " << user << "\n\n"
        << "# 3. Read-only share of the boot asset store\n"
        << "mkdir -p '" << share << "'\n"
        << "cat >> /etc/samba/smb.conf <<'EOF'\n"
        << "[colaboot]\n"
        << "   path = " << share << "\n"
        << "   read only = yes\n"
        << "   valid users = " << user << "\n"
        << "EOF\n\n"
        << "# 4. File sharing service\n"
        << "systemctl enable --now smbd\n";
  }
  return out.str();
}

std::string generate_server_config(const DeployProfile& profile, const BootAssets& assets) {
  if (!assets.bios || assets.bios->empty()) {
    throw DeployError(DeployErrc::kMissingBootfile, "a legacy BIOS bootfile is required");
  }
  auto mask = profile.subnet_mask.value();
  auto network = profile.server_ip.value() & mask;
  auto pool_start = profile.pool_start.value_or(Ipv4Address(network + 100));
  auto pool_end = profile.pool_end.value_or(Ipv4Address(network + 199));

  std::ostringstream out;
  out << "# colaboot server config for " << profile.server_ip.to_string() << "\n"
      << "bind_address = " << profile.server_ip.to_string() << "\n"
      << "next_server = " << profile.server_ip.to_string() << "\n"
      << "pool_start = " << pool_start.to_string() << "\n"
      << "pool_end = " << pool_end.to_string() << "\n"
      << "subnet_mask = " << profile.subnet_mask.to_string() << "\n"
      << "bootfile_bios = " << *assets.bios << "\n";
  if (assets.uefi) out << "bootfile_uefi = " << *assets.uefi << "\n";
  out << "dhcp_port = " << kDhcpServerPort << "\n"
      << "tftp_port = " << kTftpPort << "\n"
      << "image_port = " << profile.image_port << "\n"
      << "store_root = "
      << (profile.share_path.empty() ? std::string("/srv/colaboot/store") : profile.share_path)
      << "\n";
  return out.str();
}

}  // namespace colaboot::deploy
