// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <regex>
#include <set>

#include "colaboot/config.hpp"
#include "colaboot/deploykit.hpp"
#include "test_support.hpp"

namespace colaboot::deploy {
namespace {

namespace fs = std::filesystem;
using PortSet = std::set<std::pair<std::string, int>>;

// DHCP 67/68 and TFTP 69 over UDP, CIFS 137-139 and 445 over both, the image port over TCP.
PortSet expected_ports(int image_port) {
  PortSet s = {{"UDP", 67}, {"UDP", 68}, {"UDP", 69}, {"TCP", image_port}};
  for (int p : {137, 138, 139, 445}) {
    s.insert({"TCP", p});
    s.insert({"UDP", p});
  }
  return s;
}

// Reads the (protocol, port) pairs back out of generated rule text.
PortSet parse_rule_text(const std::string& text) {
  PortSet out;
  std::regex netsh(R"(protocol=(TCP|UDP) localport=(\d+))");
  std::regex ipt(R"(-p (tcp|udp) --dport (\d+))");
  for (auto it = text.cbegin();;) {
    std::smatch a;
    if (std::regex_search(it, text.cend(), a, netsh)) {
      out.insert({a[1], std::stoi(a[2])});
      it = a.suffix().first;
    } else if (std::regex_search(it, text.cend(), a, ipt)) {
      std::string proto = a[1] == "tcp" ? "TCP" : "UDP";
      out.insert({proto, std::stoi(a[2])});
      it = a.suffix().first;
    } else {
      break;
    }
  }
  return out;
}

ProfileFile load_profile(const std::string& name) {
  return parse_profile(testing::read_text(testing::golden_dir() / name));
}

TEST(Firewall, PortSetIsExact) {
  for (int port : {8080, 80, 137, 65535}) {
    DeployProfile p;
    p.server_ip = Ipv4Address(192, 168, 50, 1);
    p.image_port = static_cast<std::uint16_t>(port);
    PortSet got;
    for (const auto& r : firewall_rules(p)) got.insert({std::string(to_string(r.protocol)), r.port});
    EXPECT_EQ(got, expected_ports(port));
    for (const char* dialect : {"windows_batch", "posix_shell"}) {
      p.target_os = dialect;
      EXPECT_EQ(parse_rule_text(generate_firewall_rules(p)), expected_ports(port)) << dialect;
    }
  }
}

TEST(Firewall, DefaultProfileRuleCount) {
  DeployProfile p;
  auto rules = firewall_rules(p);
  // Three UDP rules, both protocols on four CIFS ports, one image rule.
  EXPECT_EQ(rules.size(), 3u + 2u * 4u + 1u);
  EXPECT_EQ(rules.back().protocol, Protocol::kTcp);
  EXPECT_EQ(rules.back().port, 8080);
}

TEST(Firewall, Deterministic) {
  auto p = load_profile("profile_windows.conf").profile;
  EXPECT_EQ(generate_firewall_rules(p), generate_firewall_rules(p));
  EXPECT_EQ(generate_installer_script(p), generate_installer_script(p));
}

struct GoldenCase {
  const char* profile;
  const char* dir;
};

class Golden : public ::testing::TestWithParam<GoldenCase> {};

TEST_P(Golden, MatchesCheckedInFiles) {
  auto parsed = load_profile(GetParam().profile);
  auto dir = testing::golden_dir() / GetParam().dir;
  BootAssets assets{parsed.bootfile_bios, parsed.bootfile_uefi};
  EXPECT_EQ(generate_firewall_rules(parsed.profile), testing::read_text(dir / "firewall.txt"));
  EXPECT_EQ(generate_installer_script(parsed.profile),
            testing::read_text(dir / std::string(installer_file_name(parsed.profile))));
  EXPECT_EQ(generate_server_config(parsed.profile, assets), testing::read_text(dir / "colaboot.conf"));
}

INSTANTIATE_TEST_SUITE_P(Dialects, Golden,
                         ::testing::Values(GoldenCase{"profile_windows.conf", "windows"},
                                           GoldenCase{"profile_posix.conf", "posix"}));

TEST(Installer, StepsAppearInOrder) {
  for (const char* name : {"profile_windows.conf", "profile_posix.conf"}) {
    auto p = load_profile(name).profile;
    auto script = generate_installer_script(p);
    std::vector<std::string> steps = {"SMB 1.0", "Account for CIFS", "share of the boot asset store",
                                      "File sharing service"};
    std::size_t at = 0;
    for (const auto& s : steps) {
      auto pos = script.find(s, at);
      ASSERT_NE(pos, std::string::npos) << name << ": " << s;
      at = pos;
    }
    EXPECT_NE(script.find(p.cifs_user), std::string::npos);
    EXPECT_NE(script.find(p.share_path), std::string::npos);
  }
  auto win = generate_installer_script(load_profile("profile_windows.conf").profile);
  EXPECT_NE(win.find("SMB1Protocol"), std::string::npos);
  EXPECT_NE(win.find("net user colaboot"), std::string::npos);
}

TEST(Installer, UnsupportedDialect) {
  DeployProfile p;
  p.target_os = "powershell";
  try {
    generate_installer_script(p);
    FAIL();
  } catch (const DeployError& e) {
    EXPECT_EQ(e.code(), DeployErrc::kUnsupportedDialect);
  }
  EXPECT_THROW(installer_file_name(p), DeployError);
}

TEST(Profile, RejectsUnsafeOrMissingValues) {
  auto code = [](const std::string& text) {
    try {
      parse_profile(text);
    } catch (const DeployError& e) {
      return e.code();
    }
    return DeployErrc::kUnsupportedDialect;  // sentinel: parsed fine
  };
  EXPECT_EQ(code("image_port = 80\n"), DeployErrc::kProfileInvalid);
  EXPECT_EQ(code("server_ip = 10.0.0.1\ncifs_user = a b\n"), DeployErrc::kProfileInvalid);
  EXPECT_EQ(code("server_ip = 10.0.0.1\nshare_path = /x\"; rm\n"), DeployErrc::kProfileInvalid);
  EXPECT_EQ(code("server_ip = 10.0.0.1\nimage_port = 0\n"), DeployErrc::kProfileInvalid);
  EXPECT_EQ(code("server_ip = 10.0.0.1\nflavour = x\n"), DeployErrc::kProfileInvalid);
  EXPECT_EQ(code("server_ip = 10.0.0.1\n"), DeployErrc::kUnsupportedDialect);
}

TEST(ServerConfig, RoundTripsThroughLoader) {
  for (const char* name : {"profile_windows.conf", "profile_posix.conf"}) {
    auto parsed = load_profile(name);
    auto text = generate_server_config(parsed.profile, {"pxelinux.0", "bootx64.efi"});
    auto cfg = parse_config(text);
    EXPECT_EQ(cfg.next_server, parsed.profile.server_ip);
    EXPECT_EQ(cfg.bootfile_bios, "pxelinux.0");
    EXPECT_EQ(cfg.bootfile_uefi, "bootx64.efi");
    EXPECT_EQ(cfg.image_port, parsed.profile.image_port);
    EXPECT_EQ(parse_config(render_config(cfg)), cfg);
  }
}

TEST(ServerConfig, RandomProfilesLoad) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    DeployProfile p;
    p.server_ip = Ipv4Address(static_cast<std::uint32_t>(rng()) | 1);
    p.image_port = static_cast<std::uint16_t>(1 + rng() % 65535);
    auto cfg = parse_config(generate_server_config(p, {"pxelinux.0", std::nullopt}));
    EXPECT_EQ(cfg.next_server, p.server_ip);
    EXPECT_EQ(cfg.image_port, p.image_port);
    EXPECT_TRUE(cfg.pool_start <= cfg.pool_end);
  }
}

TEST(ServerConfig, MissingBootfile) {
  DeployProfile p;
  p.server_ip = Ipv4Address(10, 0, 0, 1);
  try {
    generate_server_config(p, {std::nullopt, "bootx64.efi"});
    FAIL();
  } catch (const DeployError& e) {
    EXPECT_EQ(e.code(), DeployErrc::kMissingBootfile);
  }
}

}  // namespace
}  // namespace colaboot::deploy
