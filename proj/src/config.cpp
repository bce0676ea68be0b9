// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

extern char** environ;

namespace colaboot {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string env_name(std::string_view key) {
  std::string out = "COLABOOT_";
  for (char c : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

[[noreturn]] void invalid(std::string_view key, std::string_view why) {
  throw ConfigInvalid(std::string(key) + ": " + std::string(why));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, T min, T max) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc{} || end != value.data() + value.size()) {
    invalid(key, "expected a non-negative integer, got '" + std::string(value) + "'");
  }
  if (v < min || v > max) {
    invalid(key, std::to_string(v) + " outside [" + std::to_string(min) + ", " +
                     std::to_string(max) + "]");
  }
  return static_cast<T>(v);
}

Ipv4Address parse_ip(std::string_view key, std::string_view value) {
  auto ip = Ipv4Address::parse(value);
  if (!ip) invalid(key, "not an IPv4 address: '" + std::string(value) + "'");
  return *ip;
}

bool parse_bool(std::string_view key, std::string_view value) {
  std::string v(value);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  invalid(key, "expected true or false, got '" + std::string(value) + "'");
}

std::string join_ips(const std::vector<Ipv4Address>& ips) {
  std::string out;
  for (const auto& ip : ips) {
    if (!out.empty()) out += ", ";
    out += ip.to_string();
  }
  return out;
}

}  // namespace

Environment colaboot_environment() {
  Environment env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view entry(*e);
    if (!entry.starts_with("COLABOOT_")) continue;
    auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return env;
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = {
      "bind_address",   "pool_start",       "pool_end",        "subnet_mask",
      "router",         "dns",              "next_server",     "bootfile_bios",
      "bootfile_uefi",  "bootfile_uefi_ia32", "lease_seconds", "pxe_only",
      "dhcp_port",      "tftp_port",        "image_port",      "tftp_blksize_max",
      "tftp_timeout_ms", "tftp_retries",    "store_root",      "sync_source",
      "sync_interval",  "event_log",        "image_url_template",
  };
  return keys;
}

ServerConfig parse_config(std::string_view text, const Environment& env) {
  std::map<std::string, std::string, std::less<>> values;
  const auto& keys = config_keys();
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigInvalid("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto key = std::string(trim(line.substr(0, eq)));
    auto value = std::string(trim(line.substr(eq + 1)));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigInvalid("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (values.contains(key)) {
      throw ConfigInvalid("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    values[key] = value;
  }
  for (auto key : keys) {
    if (auto it = env.find(env_name(key)); it != env.end()) {
      values[std::string(key)] = std::string(trim(it->second));
    }
  }

  ServerConfig cfg;
  auto get = [&](std::string_view key) -> std::optional<std::string_view> {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return std::string_view(it->second);
  };
  auto required = [&](std::string_view key) {
    auto v = get(key);
    if (!v || v->empty()) invalid(key, "required");
    return *v;
  };

  if (auto v = get("bind_address")) cfg.bind_address = parse_ip("bind_address", *v);
  cfg.pool_start = parse_ip("pool_start", required("pool_start"));
  cfg.pool_end = parse_ip("pool_end", required("pool_end"));
  if (auto v = get("subnet_mask")) cfg.subnet_mask = parse_ip("subnet_mask", *v);
  if (auto v = get("router"); v && !v->empty()) cfg.router = parse_ip("router", *v);
  if (auto v = get("dns")) {
    std::string_view rest = *v;
    while (!rest.empty()) {
      auto comma = rest.find(',');
      auto item = trim(rest.substr(0, comma));
      if (!item.empty()) cfg.dns.push_back(parse_ip("dns", item));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  if (auto v = get("next_server")) {
    cfg.next_server = parse_ip("next_server", *v);
  } else if (!cfg.bind_address.is_unspecified()) {
    cfg.next_server = cfg.bind_address;
  } else {
    invalid("next_server", "required when bind_address is 0.0.0.0");
  }
  cfg.bootfile_bios = std::string(required("bootfile_bios"));
  if (auto v = get("bootfile_uefi")) cfg.bootfile_uefi = *v;
  if (auto v = get("bootfile_uefi_ia32")) cfg.bootfile_uefi_ia32 = *v;
  if (auto v = get("lease_seconds")) {
    cfg.lease_seconds = parse_number<std::uint32_t>("lease_seconds", *v, 1, 0xFFFFFFFEu);
  }
  if (auto v = get("pxe_only")) cfg.pxe_only = parse_bool("pxe_only", *v);
  if (auto v = get("dhcp_port")) cfg.dhcp_port = parse_number<std::uint16_t>("dhcp_port", *v, 0, 65535);
  if (auto v = get("tftp_port")) cfg.tftp_port = parse_number<std::uint16_t>("tftp_port", *v, 0, 65535);
  if (auto v = get("image_port")) {
    cfg.image_port = parse_number<std::uint16_t>("image_port", *v, 0, 65535);
  }
  if (auto v = get("tftp_blksize_max")) {
    cfg.tftp_blksize_max = parse_number<std::uint16_t>("tftp_blksize_max", *v, tftp::kMinBlockSize,
                                                       tftp::kMaxBlockSize);
  }
  if (auto v = get("tftp_timeout_ms")) {
    cfg.tftp_timeout_ms = parse_number<std::uint32_t>("tftp_timeout_ms", *v, 1, 255000);
  }
  if (auto v = get("tftp_retries")) {
    cfg.tftp_retries = parse_number<std::uint32_t>("tftp_retries", *v, 0, 100);
  }
  cfg.store_root = std::string(required("store_root"));
  if (auto v = get("sync_source")) cfg.sync_source = *v;
  if (auto v = get("sync_interval")) {
    cfg.sync_interval = parse_number<std::uint32_t>("sync_interval", *v, 1, 86400 * 7);
  }
  if (auto v = get("event_log")) cfg.event_log = std::string(*v);
  if (auto v = get("image_url_template"); v && !v->empty()) cfg.image_url_template = *v;

  if (cfg.pool_end < cfg.pool_start) invalid("pool_end", "precedes pool_start");
  if (cfg.pool_end.value() - cfg.pool_start.value() >= 65536) {
    invalid("pool_end", "pool larger than 65536 addresses");
  }
  auto mask = cfg.subnet_mask.value();
  if ((~mask & (~mask + 1)) != 0) invalid("subnet_mask", "not a contiguous netmask");
  if ((cfg.pool_start.value() & mask) != (cfg.pool_end.value() & mask)) {
    invalid("pool_end", "pool spans more than one subnet");
  }
  if (cfg.bootfile_bios.size() >= 128 || cfg.bootfile_uefi.size() >= 128 ||
      cfg.bootfile_uefi_ia32.size() >= 128) {
    invalid("bootfile_bios", "bootfile names must fit the 128-byte file field");
  }
  return cfg;
}

ServerConfig load_config(const std::filesystem::path& path, const Environment& env) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), env);
}

dhcp::DhcpSettings ServerConfig::dhcp_settings() const {
  dhcp::DhcpSettings s;
  s.server_id = next_server;
  s.subnet_mask = subnet_mask;
  s.router = router;
  s.dns = dns;
  s.lease_seconds = lease_seconds;
  s.pxe_only = pxe_only;
  s.boot.next_server = next_server;
  s.boot.bootfile_by_arch[netproto::ArchClass::kLegacyBios] = bootfile_bios;
  if (!bootfile_uefi.empty()) s.boot.bootfile_by_arch[netproto::ArchClass::kUefiX64] = bootfile_uefi;
  if (!bootfile_uefi_ia32.empty()) {
    s.boot.bootfile_by_arch[netproto::ArchClass::kUefiIa32] = bootfile_uefi_ia32;
  }
  s.boot.image_url_template = image_url_template;
  return s;
}

tftp::TftpPolicy ServerConfig::tftp_policy() const {
  tftp::TftpPolicy p;
  p.blksize_max = tftp_blksize_max;
  p.timeout = std::chrono::milliseconds(tftp_timeout_ms);
  p.retries = tftp_retries;
  return p;
}

std::string ServerConfig::image_url() const {
  return expand_placeholders(image_url_template, next_server, image_port);
}

std::string render_config(const ServerConfig& cfg) {
  std::ostringstream out;
  out << "bind_address = " << cfg.bind_address.to_string() << "\n"
      << "pool_start = " << cfg.pool_start.to_string() << "\n"
      << "pool_end = " << cfg.pool_end.to_string() << "\n"
      << "subnet_mask = " << cfg.subnet_mask.to_string() << "\n";
  if (!cfg.router.is_unspecified()) out << "router = " << cfg.router.to_string() << "\n";
  if (!cfg.dns.empty()) out << "dns = " << join_ips(cfg.dns) << "\n";
  out << "next_server = " << cfg.next_server.to_string() << "\n"
      << "bootfile_bios = " << cfg.bootfile_bios << "\n"
      << "bootfile_uefi = " << cfg.bootfile_uefi << "\n";
  if (!cfg.bootfile_uefi_ia32.empty()) out << "bootfile_uefi_ia32 = " << cfg.bootfile_uefi_ia32 << "\n";
  out << "lease_seconds = " << cfg.lease_seconds << "\n"
      << "pxe_only = " << (cfg.pxe_only ? "true" : "false") << "\n"
      << "dhcp_port = " << cfg.dhcp_port << "\n"
      << "tftp_port = " << cfg.tftp_port << "\n"
      << "image_port = " << cfg.image_port << "\n"
      << "tftp_blksize_max = " << cfg.tftp_blksize_max << "\n"
      << "tftp_timeout_ms = " << cfg.tftp_timeout_ms << "\n"
      << "tftp_retries = " << cfg.tftp_retries << "\n"
      << "store_root = " << cfg.store_root.string() << "\n";
  if (!cfg.sync_source.empty()) out << "sync_source = " << cfg.sync_source << "\n";
  out << "sync_interval = " << cfg.sync_interval << "\n";
  if (!cfg.event_log.empty()) out << "event_log = " << cfg.event_log.string() << "\n";
  out << "image_url_template = " << cfg.image_url_template << "\n";
  return out.str();
}

std::string expand_placeholders(std::string_view text, Ipv4Address next_server,
                                std::uint16_t image_port) {
  std::string out(text);
  auto replace_all = [&](std::string_view from, const std::string& to) {
    for (auto pos = out.find(from); pos != std::string::npos; pos = out.find(from, pos + to.size())) {
      out.replace(pos, from.size(), to);
    }
  };
  replace_all("${next_server}", next_server.to_string());
  replace_all("${image_port}", std::to_string(image_port));
  return out;
}

}  // namespace colaboot
