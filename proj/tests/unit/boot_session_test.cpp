// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "colaboot/boot_session.hpp"
#include "test_support.hpp"

namespace colaboot::session {
namespace {

using store::AssetRole;

const MacAddress kMac = *MacAddress::parse("02:c0:1b:00:00:01");
const Ipv4Address kIp{127, 0, 10, 100};

BootEvent ev(EventKind kind, double t, std::optional<AssetRole> role = {},
             std::optional<std::uint64_t> size = {}, MacAddress mac = kMac,
             Ipv4Address ip = kIp) {
  BootEvent e;
  e.kind = kind;
  e.timestamp = Seconds(t);
  e.role = role;
  e.size = size;
  // TFTP and image events only know the peer address.
  bool dhcp = kind == EventKind::kDhcpDiscover || kind == EventKind::kDhcpOffer ||
              kind == EventKind::kDhcpRequest || kind == EventKind::kDhcpAck;
  if (dhcp) e.mac = mac;
  if (kind == EventKind::kDhcpAck || !dhcp) e.ip = ip;
  if (kind == EventKind::kDhcpAck) e.manifest_version = 1;
  return e;
}

struct Sizes {
  std::uint64_t bootloader = 65536, config = 1024, kernel = 8 << 20, initrd = 16 << 20,
                image = 64 << 20;
};

// One complete boot, events spaced `step` seconds apart from `t0`.
std::vector<BootEvent> full_boot(double t0, double step, MacAddress mac = kMac, Ipv4Address ip = kIp,
                                 Sizes sz = {}) {
  std::vector<BootEvent> out;
  double t = t0;
  auto push = [&](EventKind k, std::optional<AssetRole> r = {}, std::optional<std::uint64_t> s = {}) {
    out.push_back(ev(k, t, r, s, mac, ip));
    t += step;
  };
  push(EventKind::kDhcpDiscover);
  push(EventKind::kDhcpOffer);
  push(EventKind::kDhcpRequest);
  push(EventKind::kDhcpAck);
  push(EventKind::kTftpRrq, AssetRole::kBootloader, sz.bootloader);
  push(EventKind::kTftpComplete, AssetRole::kBootloader, sz.bootloader);
  push(EventKind::kTftpRrq, AssetRole::kConfig, sz.config);
  push(EventKind::kTftpComplete, AssetRole::kConfig, sz.config);
  push(EventKind::kTftpRrq, AssetRole::kKernel, sz.kernel);
  push(EventKind::kTftpComplete, AssetRole::kKernel, sz.kernel);
  push(EventKind::kTftpRrq, AssetRole::kInitrd, sz.initrd);
  push(EventKind::kTftpComplete, AssetRole::kInitrd, sz.initrd);
  push(EventKind::kImageFirstByte, AssetRole::kImage, sz.image);
  push(EventKind::kImageComplete, AssetRole::kImage, sz.image);
  return out;
}

BootTracker manual_tracker() {
  return BootTracker([] { return Seconds(0); });
}

TEST(Tracker, FullSequenceBoots) {
  auto t = manual_tracker();
  for (const auto& e : full_boot(0, 1)) t.record(e);
  const auto* s = t.find(kMac.to_string());
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->state, BootState::kBooted);
  EXPECT_EQ(s->outcome, Outcome::kBooted);
  ASSERT_EQ(s->transitions.size(), 9u);
  std::vector<BootState> want = {BootState::kDiscovering,      BootState::kOffered,
                                 BootState::kRequested,        BootState::kAcked,
                                 BootState::kLoadingBootloader, BootState::kLoadingKernel,
                                 BootState::kLoadingInitrd,    BootState::kFetchingImage,
                                 BootState::kBooted};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(s->transitions[i].state, want[i]);
  Sizes sz;
  EXPECT_EQ(s->bytes_tftp, sz.bootloader + sz.config + sz.kernel + sz.initrd);
  EXPECT_EQ(s->bytes_image, sz.image);
  EXPECT_EQ(s->manifest_version, 1u);
  EXPECT_EQ(s->ip, kIp);
  EXPECT_FALSE(s->inferred);
  EXPECT_EQ(s->boot_duration(), Seconds(13));
}

TEST(Tracker, KernelBeforeAckIsViolation) {
  auto t = manual_tracker();
  t.record(ev(EventKind::kDhcpDiscover, 0));
  t.record(ev(EventKind::kDhcpOffer, 1));
  auto k = ev(EventKind::kTftpRrq, 2, AssetRole::kKernel, 100);
  k.mac = kMac;
  const auto& s = t.record(k);
  EXPECT_EQ(s.state, BootState::kFailed);
  EXPECT_EQ(s.outcome, Outcome::kFailed);
  EXPECT_EQ(s.failure_reason.rfind("protocol_violation", 0), 0u);
}

TEST(Tracker, KernelBeforeBootloaderCompletesIsViolation) {
  auto t = manual_tracker();
  auto events = full_boot(0, 1);
  for (int i = 0; i < 5; ++i) t.record(events[i]);  // through bootloader RRQ
  EXPECT_EQ(t.record(ev(EventKind::kTftpRrq, 6, AssetRole::kKernel, 1)).state, BootState::kFailed);
}

TEST(Tracker, RetransmittedRequestAddsNothing) {
  auto t = manual_tracker();
  t.record(ev(EventKind::kDhcpDiscover, 0));
  t.record(ev(EventKind::kDhcpOffer, 1));
  t.record(ev(EventKind::kDhcpRequest, 2));
  const auto& s = t.record(ev(EventKind::kDhcpRequest, 3));
  EXPECT_EQ(s.state, BootState::kRequested);
  EXPECT_EQ(s.transitions.size(), 3u);
  t.record(ev(EventKind::kDhcpDiscover, 3.5));  // retransmitted DISCOVER in the same boot
  EXPECT_EQ(t.sessions().size(), 1u);
}

TEST(Tracker, UnknownClientIsInferred) {
  auto t = manual_tracker();
  const auto& s = t.record(ev(EventKind::kTftpRrq, 5, AssetRole::kKernel, 10));
  EXPECT_TRUE(s.inferred);
  EXPECT_EQ(s.client_id, "ip:" + kIp.to_string());
  EXPECT_NE(s.state, BootState::kFailed);
  EXPECT_FALSE(s.boot_duration().has_value());
}

TEST(Tracker, NewDiscoverAfterBootStartsNewSession) {
  auto t = manual_tracker();
  for (const auto& e : full_boot(0, 1)) t.record(e);
  for (const auto& e : full_boot(100, 2)) t.record(e);
  auto sessions = t.sessions();
  ASSERT_EQ(sessions.size(), 2u);
  EXPECT_EQ(sessions[1].boot_duration(), Seconds(26));
  EXPECT_EQ(t.find(kMac.to_string())->transitions.front().at, Seconds(100));
}

TEST(Tracker, TimestampsNeverDecrease) {
  auto t = manual_tracker();
  auto events = full_boot(0, 1);
  std::mt19937_64 rng(3);
  for (auto& e : events) e.timestamp = Seconds(static_cast<double>(rng() % 50));
  for (const auto& e : events) t.record(e);
  auto tr = t.sessions()[0].transitions;
  for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_LE(tr[i - 1].at, tr[i].at);
}

TEST(Report, EmptyHasNoPercentiles) {
  auto r = make_report({});
  EXPECT_EQ(r.sessions, 0u);
  EXPECT_FALSE(r.p50.has_value());
  EXPECT_FALSE(r.p95.has_value());
  EXPECT_FALSE(r.median_throughput_mbps.has_value());
}

std::vector<BootSession> booted_with_durations(const std::vector<double>& durations) {
  auto t = manual_tracker();
  std::uint32_t i = 0;
  for (double d : durations) {
    MacAddress mac({2, 0, 0, 0, static_cast<std::uint8_t>(i >> 8), static_cast<std::uint8_t>(i)});
    Ipv4Address ip(10, 0, static_cast<std::uint8_t>(i >> 8), static_cast<std::uint8_t>(i));
    for (const auto& e : full_boot(0, d / 13.0, mac, ip)) t.record(e);
    ++i;
  }
  return t.sessions();
}

// Brute-force nearest rank: smallest value with at least ceil(q*n) values <= it.
double oracle_rank(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  for (double x : v) {
    auto le = std::count_if(v.begin(), v.end(), [&](double y) { return y <= x; });
    if (static_cast<double>(le) >= q * static_cast<double>(v.size()) - 1e-9) return x;
  }
  return v.back();
}

TEST(Report, MedianOfThree) {
  auto r = make_report(booted_with_durations({10, 20, 30}));
  ASSERT_TRUE(r.p50.has_value());
  EXPECT_NEAR(r.p50->count(), oracle_rank({10, 20, 30}, 0.5), 1e-9);
  EXPECT_NEAR(r.p50->count(), 20.0, 1e-9);
  EXPECT_EQ(r.booted, 3u);
}

TEST(Report, PercentilesMatchOracle) {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 30; ++round) {
    std::vector<double> d(1 + rng() % 40);
    for (auto& x : d) x = 1.0 + static_cast<double>(rng() % 100000) / 100.0;
    auto r = make_report(booted_with_durations(d));
    EXPECT_NEAR(r.p50->count(), oracle_rank(d, 0.5), 1e-6);
    EXPECT_NEAR(r.p95->count(), oracle_rank(d, 0.95), 1e-6);
  }
}

TEST(Report, FailedSessionsExcludedFromPercentiles) {
  auto sessions = booted_with_durations({10, 20});
  auto t = manual_tracker();
  auto other = *MacAddress::parse("02:00:00:00:99:99");
  t.record(ev(EventKind::kDhcpDiscover, 0, {}, {}, other));
  auto image = ev(EventKind::kImageComplete, 500, AssetRole::kImage, 1, other);
  image.mac = other;
  t.record(image);
  auto failed = t.sessions();
  sessions.insert(sessions.end(), failed.begin(), failed.end());
  auto r = make_report(sessions);
  EXPECT_EQ(r.failed, 1u);
  EXPECT_NEAR(r.p95->count(), 20.0, 1e-9);
}

// 4.1 GB over an effective ~110 Mbit/s link: the report lands around five minutes.
TEST(Report, LargeImageAtModestLinkSpeed) {
  Sizes sz;
  sz.image = 4100000000ull;
  const double link_bps = 110e6;
  double total_bits = 8.0 * static_cast<double>(sz.bootloader + sz.config + sz.kernel + sz.initrd + sz.image);
  double seconds = total_bits / link_bps;
  auto t = manual_tracker();
  for (const auto& e : full_boot(0, seconds / 13.0, kMac, kIp, sz)) t.record(e);
  auto r = t.report();
  ASSERT_TRUE(r.p50.has_value());
  EXPECT_GT(r.p50->count(), 250.0);
  EXPECT_LT(r.p50->count(), 350.0);
  EXPECT_NEAR(*r.median_throughput_mbps, 110.0, 0.01);
}

TEST(Events, JsonRoundTrip) {
  for (const auto& e : full_boot(1.5, 0.25)) {
    EXPECT_EQ(event_from_json(to_json(e)), e);
  }
  EXPECT_THROW(event_from_json(nlohmann::json{{"kind", "bogus"}}), std::invalid_argument);
}

TEST(Funnel, ReplayIsDeterministicAndMatchesLive) {
  colaboot::testing::TempDir dir;
  auto log = dir / "events.jsonl";
  BootTracker live(manual_tracker());
  {
    EventFunnel funnel(live, log);
    for (std::uint32_t c = 0; c < 5; ++c) {
      MacAddress mac({2, 0, 0, 0, 0, static_cast<std::uint8_t>(c)});
      for (const auto& e : full_boot(c * 10.0, 0.5 + c, mac, Ipv4Address(10, 0, 0, static_cast<std::uint8_t>(c))))
        funnel.submit(e);
    }
    funnel.flush();
  }
  // A torn trailing line from a crash is skipped.
  {
    std::ofstream(log, std::ios::app) << "{\"kind\": \"dhcp_disc";
  }
  auto a = replay_event_log(log).report();
  auto b = replay_event_log(log).report();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, live.report());
  EXPECT_EQ(a.booted, 5u);
}

TEST(Funnel, ConcurrentProducersKeepPerClientOrder) {
  BootTracker tracker;
  EventFunnel funnel(tracker);
  std::vector<std::thread> producers;
  for (std::uint32_t c = 0; c < 16; ++c) {
    producers.emplace_back([&, c] {
      MacAddress mac({2, 1, 0, 0, 0, static_cast<std::uint8_t>(c)});
      for (auto e : full_boot(0, 0, mac, Ipv4Address(10, 1, 0, static_cast<std::uint8_t>(c)))) {
        e.timestamp.reset();  // stamped at submission
        funnel.submit(e);
      }
    });
  }
  for (auto& p : producers) p.join();
  funnel.flush();
  auto report = funnel.report();
  EXPECT_EQ(report.sessions, 16u);
  EXPECT_EQ(report.booted, 16u);
  for (const auto& s : funnel.sessions()) {
    for (std::size_t i = 1; i < s.transitions.size(); ++i) {
      EXPECT_LE(s.transitions[i - 1].at, s.transitions[i].at);
    }
  }
}

TEST(Render, TableListsSessions) {
  auto sessions = booted_with_durations({12});
  auto text = render_table(sessions, make_report(sessions));
  EXPECT_NE(text.find("CLIENT"), std::string::npos);
  EXPECT_NE(text.find("booted"), std::string::npos);
  EXPECT_NE(text.find("1 sessions, 1 booted"), std::string::npos);
}

}  // namespace
}  // namespace colaboot::session
