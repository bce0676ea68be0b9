// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "colaboot/config.hpp"
#include "test_support.hpp"

namespace colaboot {
namespace {

constexpr const char* kMinimal =
    "# boot server\n"
    "bind_address = 192.168.50.1\n"
    "pool_start = 192.168.50.100\n"
    "pool_end   = 192.168.50.199\n"
    "bootfile_bios = pxelinux.0\n"
    "store_root = /srv/colaboot/store\n";

std::string reason(const std::string& text, const Environment& env = {}) {
  try {
    parse_config(text, env);
  } catch (const ConfigInvalid& e) {
    return e.what();
  }
  return "";
}

TEST(Config, MinimalFileFillsDefaults) {
  auto cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.bind_address, Ipv4Address(192, 168, 50, 1));
  EXPECT_EQ(cfg.next_server, cfg.bind_address);
  EXPECT_EQ(cfg.subnet_mask, Ipv4Address(255, 255, 255, 0));
  EXPECT_EQ(cfg.bootfile_uefi, "bootx64.efi");
  EXPECT_EQ(cfg.dhcp_port, 67);
  EXPECT_EQ(cfg.tftp_port, 69);
  EXPECT_EQ(cfg.image_port, 8080);
  EXPECT_EQ(cfg.tftp_blksize_max, 1428);
  EXPECT_EQ(cfg.tftp_retries, 5u);
  EXPECT_EQ(cfg.image_url(), "http://192.168.50.1:8080/assets/os-image.sqfs");
}

TEST(Config, FullFile) {
  auto cfg = parse_config(std::string(kMinimal) +
                          "router = 192.168.50.254\n"
                          "dns = 192.168.50.53, 9.9.9.9\n"
                          "pxe_only = yes\n"
                          "lease_seconds = 600\n"
                          "bootfile_uefi_ia32 = bootia32.efi\n"
                          "image_url_template = http://${next_server}:${image_port}/x\n");
  EXPECT_EQ(cfg.router, Ipv4Address(192, 168, 50, 254));
  ASSERT_EQ(cfg.dns.size(), 2u);
  EXPECT_EQ(cfg.dns[1], Ipv4Address(9, 9, 9, 9));
  EXPECT_TRUE(cfg.pxe_only);
  EXPECT_EQ(cfg.image_url(), "http://192.168.50.1:8080/x");
  auto dhcp = cfg.dhcp_settings();
  EXPECT_EQ(dhcp.lease_seconds, 600u);
  EXPECT_EQ(dhcp.boot.bootfile_by_arch.at(netproto::ArchClass::kUefiIa32), "bootia32.efi");
}

TEST(Config, RejectsBadInput) {
  EXPECT_NE(reason("pool_start = 10.0.0.1\n").find("pool_end"), std::string::npos);
  EXPECT_NE(reason(std::string(kMinimal) + "colour = blue\n").find("unknown key"), std::string::npos);
  EXPECT_NE(reason(std::string(kMinimal) + "pool_end = 192.168.50.150\n").find("duplicate"),
            std::string::npos);
  EXPECT_NE(reason(std::string(kMinimal) + "no equals sign\n").find("line 7"), std::string::npos);
  EXPECT_NE(reason(std::string(kMinimal) + "image_port = 70000\n").find("image_port"),
            std::string::npos);
  EXPECT_NE(reason(std::string(kMinimal) + "subnet_mask = 255.0.255.0\n").find("subnet_mask"),
            std::string::npos);
  EXPECT_NE(reason(std::string(kMinimal) + "tftp_blksize_max = 4\n").find("tftp_blksize_max"),
            std::string::npos);
  EXPECT_NE(reason(std::string(kMinimal) + "pxe_only = maybe\n").find("pxe_only"), std::string::npos);
  std::string reversed =
      "bind_address = 10.0.0.1\npool_start = 10.0.0.200\npool_end = 10.0.0.100\n"
      "bootfile_bios = a\nstore_root = /s\n";
  EXPECT_NE(reason(reversed).find("pool_end"), std::string::npos);
  std::string no_server = "pool_start = 10.0.0.1\npool_end = 10.0.0.2\nbootfile_bios = a\nstore_root = /s\n";
  EXPECT_NE(reason(no_server).find("next_server"), std::string::npos);
  EXPECT_NE(reason(std::string(kMinimal) + "bootfile_uefi = " + std::string(130, 'x') + "\n"), "");
}

TEST(Config, EnvironmentOverridesFile) {
  Environment env{{"COLABOOT_IMAGE_PORT", "9090"}, {"COLABOOT_POOL_END", "192.168.50.120"}};
  auto cfg = parse_config(kMinimal, env);
  EXPECT_EQ(cfg.image_port, 9090);
  EXPECT_EQ(cfg.pool_end, Ipv4Address(192, 168, 50, 120));
  EXPECT_NE(reason(kMinimal, {{"COLABOOT_TFTP_PORT", "x"}}).find("tftp_port"), std::string::npos);
}

TEST(Config, ProcessEnvironmentIsFiltered) {
  ::setenv("COLABOOT_SYNC_INTERVAL", "42", 1);
  ::setenv("UNRELATED_COLABOOT", "1", 1);
  auto env = colaboot_environment();
  EXPECT_EQ(env.at("COLABOOT_SYNC_INTERVAL"), "42");
  EXPECT_FALSE(env.contains("UNRELATED_COLABOOT"));
  EXPECT_EQ(parse_config(kMinimal, env).sync_interval, 42u);
  ::unsetenv("COLABOOT_SYNC_INTERVAL");
  ::unsetenv("UNRELATED_COLABOOT");
}

TEST(Config, LoadFromFile) {
  testing::TempDir dir;
  testing::write_text(dir / "c.conf", kMinimal);
  EXPECT_EQ(load_config(dir / "c.conf").pool_start, Ipv4Address(192, 168, 50, 100));
  EXPECT_THROW(load_config(dir / "missing.conf"), ConfigInvalid);
}

// Random valid configs survive render then parse unchanged.
TEST(Config, RenderRoundTripProperty) {
  std::mt19937_64 rng(11);
  auto pick = [&](std::uint64_t n) { return rng() % n; };
  for (int i = 0; i < 500; ++i) {
    ServerConfig c;
    std::uint32_t net = static_cast<std::uint32_t>(rng()) & 0xFFFFFF00u;
    c.bind_address = Ipv4Address(net | 1);
    c.next_server = pick(2) ? c.bind_address : Ipv4Address(net | 2);
    c.pool_start = Ipv4Address(net | 10);
    c.pool_end = Ipv4Address(net | static_cast<std::uint32_t>(10 + pick(200)));
    c.subnet_mask = Ipv4Address(255, 255, 255, 0);
    if (pick(2)) c.router = Ipv4Address(net | 254);
    for (std::uint64_t d = pick(3); d > 0; --d) c.dns.push_back(Ipv4Address(static_cast<std::uint32_t>(rng()) | 1));
    c.bootfile_bios = "boot" + std::to_string(pick(1000)) + ".0";
    c.bootfile_uefi = pick(2) ? "bootx64.efi" : "grubx64.efi";
    if (pick(2)) c.bootfile_uefi_ia32 = "bootia32.efi";
    c.lease_seconds = static_cast<std::uint32_t>(1 + pick(100000));
    c.pxe_only = pick(2);
    c.dhcp_port = static_cast<std::uint16_t>(pick(65536));
    c.tftp_port = static_cast<std::uint16_t>(pick(65536));
    c.image_port = static_cast<std::uint16_t>(pick(65536));
    c.tftp_blksize_max = static_cast<std::uint16_t>(8 + pick(65464 - 8 + 1));
    c.tftp_timeout_ms = static_cast<std::uint32_t>(1 + pick(255000));
    c.tftp_retries = static_cast<std::uint32_t>(pick(101));
    c.store_root = "/var/lib/colaboot/" + std::to_string(pick(100));
    if (pick(2)) c.sync_source = "http://mirror.example/" + std::to_string(pick(100));
    c.sync_interval = static_cast<std::uint32_t>(1 + pick(3600));
    if (pick(2)) c.event_log = "/var/log/colaboot/events.jsonl";
    auto text = render_config(c);
    ASSERT_EQ(parse_config(text), c) << text;
  }
}

TEST(Config, KeysAreDocumented) {
  auto docs = testing::read_text(std::filesystem::path(COLABOOT_TESTDATA_DIR) / ".." / "docs" / "config.md");
  for (auto key : config_keys()) {
    EXPECT_NE(docs.find("`" + std::string(key) + "`"), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace colaboot
