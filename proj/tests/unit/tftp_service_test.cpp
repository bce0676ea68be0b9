// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <mutex>
#include <thread>

#include "colaboot/client_registry.hpp"
#include "colaboot/digest.hpp"
#include "colaboot/synthetic.hpp"
#include "colaboot/tftp_server.hpp"
#include "test_support.hpp"
#include "tftp_client.hpp"

namespace colaboot {
namespace {

using namespace std::chrono_literals;
using netproto::TftpErrorCode;
using store::AssetRole;

const Ipv4Address kLoopback(127, 0, 0, 1);

constexpr std::uint16_t code(TftpErrorCode c) { return static_cast<std::uint16_t>(c); }

std::vector<store::PublishedAsset> assets(std::uint64_t seed) {
  return {
      {"pxelinux.0", AssetRole::kBootloader, sim::prng_bytes(seed, 40000)},
      {"pxelinux.cfg/default", AssetRole::kConfig, sim::prng_bytes(seed + 1, 300)},
      {"vmlinuz", AssetRole::kKernel, sim::prng_bytes(seed + 2, 200000)},
      {"initrd.img", AssetRole::kInitrd, sim::prng_bytes(seed + 3, 100000)},
      {"os-image.sqfs", AssetRole::kImage, sim::prng_bytes(seed + 4, 5000)},
      {"wrap.bin", AssetRole::kConfig, sim::prng_bytes(seed + 5, 600 * 1024)},
  };
}

TEST(Registry, PinsUntilNextDiscover) {
  testing::StoreFixture fx;
  fx.install(1, assets(1));
  auto shared = std::make_shared<store::AssetStore>(fx.store.root());
  ClientRegistry reg(shared);
  auto mac = *MacAddress::parse("02:00:00:00:00:01");
  Ipv4Address ip(10, 0, 0, 5);
  EXPECT_EQ(reg.bind(mac, ip).version(), 1u);
  fx.install(2, assets(2));
  EXPECT_EQ(reg.snapshot_for({std::nullopt, ip}).version(), 1u);
  EXPECT_EQ(reg.snapshot_for({mac, std::nullopt}).version(), 1u);
  EXPECT_EQ(reg.resolve_mac({std::nullopt, ip}), mac);
  // A stranger on first contact pins whatever is current.
  EXPECT_EQ(reg.snapshot_for({std::nullopt, Ipv4Address(10, 0, 0, 9)}).version(), 2u);
  EXPECT_FALSE(reg.resolve_mac({std::nullopt, Ipv4Address(10, 0, 0, 9)}).has_value());
  reg.begin_boot(mac);
  EXPECT_FALSE(reg.resolve_mac({std::nullopt, ip}).has_value());
  EXPECT_EQ(reg.bind(mac, ip).version(), 2u);
}

TEST(Registry, ImageProgressFlagsFireOnce) {
  testing::StoreFixture fx;
  fx.install(1, assets(1));
  ClientRegistry reg(std::make_shared<store::AssetStore>(fx.store.root()));
  ClientRef c{std::nullopt, Ipv4Address(10, 0, 0, 7)};
  auto a = reg.add_image_bytes(c, 0, 100);
  EXPECT_FALSE(a.first_byte);
  auto b = reg.add_image_bytes(c, 60, 100);
  EXPECT_TRUE(b.first_byte);
  EXPECT_FALSE(b.complete);
  auto d = reg.add_image_bytes(c, 40, 100);
  EXPECT_FALSE(d.first_byte);
  EXPECT_TRUE(d.complete);
  EXPECT_EQ(d.total, 100u);
  EXPECT_FALSE(reg.add_image_bytes(c, 100, 100).complete);
}

using testing::TftpClient;

class Service : public ::testing::Test {
 protected:
  void SetUp() override {
    fx_.install(1, assets_);
    registry_ = std::make_unique<ClientRegistry>(std::make_shared<store::AssetStore>(fx_.store.root()));
    tftp::TftpPolicy policy;
    policy.timeout = 100ms;
    service_ = std::make_unique<tftp::TftpService>(policy, *registry_, [this](session::BootEvent e) {
      std::lock_guard lock(mutex_);
      events_.push_back(std::move(e));
    });
    service_->bind(kLoopback, 0);
    service_->start();
    client_.server = UdpEndpoint{kLoopback, service_->port()};
  }

  std::vector<std::uint8_t> bytes_of(const std::string& path) {
    for (const auto& a : assets_) {
      if (a.path == path) return a.bytes;
    }
    return {};
  }

  std::vector<session::BootEvent> events() {
    std::lock_guard lock(mutex_);
    return events_;
  }

  testing::StoreFixture fx_;
  std::vector<store::PublishedAsset> assets_ = assets(1);
  std::mutex mutex_;
  std::vector<session::BootEvent> events_;
  std::unique_ptr<ClientRegistry> registry_;
  // Declared last so its transfer threads stop before the event sink goes away.
  std::unique_ptr<tftp::TftpService> service_;
  TftpClient client_;
};

TEST_F(Service, PlainFetchFromEphemeralPort) {
  auto got = client_.fetch("pxelinux.0");
  ASSERT_TRUE(std::holds_alternative<std::vector<std::uint8_t>>(got));
  EXPECT_EQ(sha256_hex(std::get<0>(got)), sha256_hex(bytes_of("pxelinux.0")));
  ASSERT_TRUE(client_.peer);
  EXPECT_NE(client_.peer->port, service_->port());
  for (int i = 0; i < 50 && service_->transfers_completed() == 0; ++i) std::this_thread::sleep_for(10ms);
  EXPECT_EQ(service_->transfers_completed(), 1u);
  auto ev = events();
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].kind, session::EventKind::kTftpRrq);
  EXPECT_EQ(ev[1].kind, session::EventKind::kTftpComplete);
  EXPECT_EQ(ev[1].role, AssetRole::kBootloader);
  EXPECT_EQ(ev[1].size, 40000u);
}

TEST_F(Service, NegotiatedFetchAcrossBlockWrap) {
  auto got = client_.fetch("wrap.bin", {{"blksize", "8"}, {"tsize", "0"}});
  ASSERT_TRUE(std::holds_alternative<std::vector<std::uint8_t>>(got));
  EXPECT_EQ(sha256_hex(std::get<0>(got)), sha256_hex(bytes_of("wrap.bin")));
}

TEST_F(Service, NestedPathAndLeadingSlash) {
  auto got = client_.fetch("/pxelinux.cfg/default", {{"blksize", "1428"}});
  ASSERT_TRUE(std::holds_alternative<std::vector<std::uint8_t>>(got));
  EXPECT_EQ(std::get<0>(got), bytes_of("pxelinux.cfg/default"));
}

TEST_F(Service, Rejections) {
  EXPECT_EQ(std::get<std::uint16_t>(client_.fetch("missing.bin")), code(TftpErrorCode::kFileNotFound));
  EXPECT_EQ(std::get<std::uint16_t>(client_.fetch("../secret")), code(TftpErrorCode::kAccessViolation));
  client_.send(client_.server, netproto::TftpWrq{"upload.bin", "octet", {}});
  auto r = client_.recv();
  ASSERT_TRUE(r);
  EXPECT_EQ(std::get<netproto::TftpErrorPacket>(r->second).code, code(TftpErrorCode::kAccessViolation));
}

TEST_F(Service, ForeignTransferIdGetsError5) {
  client_.send(client_.server, netproto::TftpRrq{"vmlinuz", "octet", {}});
  auto first = client_.recv();
  ASSERT_TRUE(first);
  TftpClient intruder;
  intruder.send(first->first, netproto::TftpAck{1});
  auto r = intruder.recv();
  ASSERT_TRUE(r);
  EXPECT_EQ(std::get<netproto::TftpErrorPacket>(r->second).code, code(TftpErrorCode::kUnknownTransferId));
  // The real transfer carries on.
  client_.send(first->first, netproto::TftpAck{1});
  auto next = client_.recv();
  ASSERT_TRUE(next);
  EXPECT_EQ(std::get<netproto::TftpData>(next->second).block, 2);
}

TEST_F(Service, DuplicateRrqResendsInsteadOfForking) {
  client_.send(client_.server, netproto::TftpRrq{"vmlinuz", "octet", {}});
  auto a = client_.recv();
  client_.send(client_.server, netproto::TftpRrq{"vmlinuz", "octet", {}});
  auto b = client_.recv();
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->first, b->first);
  EXPECT_EQ(std::get<netproto::TftpData>(b->second).block, 1);
  EXPECT_EQ(service_->active_transfers(), 1u);
}

TEST_F(Service, SilentClientIsAbandoned) {
  client_.send(client_.server, netproto::TftpRrq{"vmlinuz", "octet", {}});
  // 1 send plus 5 retransmits at 100, 200, 400, 800, 800 ms before giving up.
  int seen = 0;
  while (client_.recv(1500ms)) ++seen;
  EXPECT_EQ(seen, 6);
  for (int i = 0; i < 100 && service_->transfers_aborted() == 0; ++i) std::this_thread::sleep_for(20ms);
  EXPECT_EQ(service_->transfers_aborted(), 1u);
  EXPECT_EQ(service_->transfers_completed(), 0u);
}

TEST_F(Service, ConcurrentClients) {
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      TftpClient c;
      c.server = client_.server;
      auto got = c.fetch("initrd.img", {{"blksize", "1428"}});
      if (auto* v = std::get_if<std::vector<std::uint8_t>>(&got); v && *v == bytes_of("initrd.img")) ++ok;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 8);
}

TEST_F(Service, SecondBindOnSamePortFails) {
  tftp::TftpService other({}, *registry_, {});
  try {
    other.bind(kLoopback, service_->port());
    FAIL();
  } catch (const PortInUse& e) {
    EXPECT_EQ(e.port(), service_->port());
  }
}

}  // namespace
}  // namespace colaboot
