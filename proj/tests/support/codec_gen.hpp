// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// Random DHCP messages and TFTP packets for codec round trips and fuzzing.
#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "colaboot/dhcp_message.hpp"
#include "colaboot/tftp_packet.hpp"

namespace colaboot::testing {

using namespace colaboot::netproto;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_); }
  std::uint8_t byte() { return static_cast<std::uint8_t>(below(256)); }
  bool coin() { return below(2) == 0; }

  std::vector<std::uint8_t> bytes(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = byte();
    return out;
  }

  // No embedded NULs: TFTP strings are NUL-terminated on the wire.
  std::string text(std::size_t max_len) {
    std::string s(below(max_len + 1), ' ');
    for (auto& c : s) c = static_cast<char>(1 + below(255));
    return s;
  }

  DhcpMessage dhcp() {
    DhcpMessage m;
    m.op = coin() ? DhcpMessage::kBootRequest : DhcpMessage::kBootReply;
    m.htype = byte();
    m.hlen = byte();
    m.hops = byte();
    m.xid = static_cast<std::uint32_t>(below(1ull << 32));
    m.secs = static_cast<std::uint16_t>(below(65536));
    m.flags = static_cast<std::uint16_t>(below(65536));
    m.ciaddr = Ipv4Address(static_cast<std::uint32_t>(below(1ull << 32)));
    m.yiaddr = Ipv4Address(static_cast<std::uint32_t>(below(1ull << 32)));
    m.siaddr = Ipv4Address(static_cast<std::uint32_t>(below(1ull << 32)));
    m.giaddr = Ipv4Address(static_cast<std::uint32_t>(below(1ull << 32)));
    for (auto& b : m.chaddr) b = byte();
    for (auto& b : m.sname) b = byte();
    for (auto& b : m.file) b = byte();
    bool have_type = false;
    auto count = below(24);
    for (std::uint64_t i = 0; i < count; ++i) {
      std::uint8_t tag = static_cast<std::uint8_t>(1 + below(254));
      if (tag == dhcp_option::kOverload) continue;
      if (tag == dhcp_option::kMessageType) {
        if (have_type) continue;
        have_type = true;
        m.options.push_back({tag, {static_cast<std::uint8_t>(1 + below(8))}});
        continue;
      }
      // Mostly short payloads, occasionally the 255-byte maximum.
      std::size_t len = below(10) == 0 ? 255 : below(40);
      m.options.push_back({tag, bytes(len)});
    }
    return m;
  }

  TftpOptions tftp_options() {
    TftpOptions out;
    auto n = below(5);
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string name = text(12);
      if (name.empty()) name = "x";
      out.push_back({name, text(12)});
    }
    return out;
  }

  TftpPacket tftp() {
    switch (below(6)) {
      case 0: return TftpRrq{text(40), text(8), tftp_options()};
      case 1: return TftpWrq{text(40), text(8), tftp_options()};
      case 2: return TftpData{static_cast<std::uint16_t>(below(65536)), bytes(below(1429))};
      case 3: return TftpAck{static_cast<std::uint16_t>(below(65536))};
      case 4: return TftpErrorPacket{static_cast<std::uint16_t>(below(9)), text(60)};
      default: return TftpOack{tftp_options()};
    }
  }

 private:
  std::mt19937_64 rng_;
};

// Half random buffers, half mutations of a valid message so the option parser is reached.
inline std::vector<std::uint8_t> fuzz_dhcp_buffer(Gen& g, int i, const std::vector<std::uint8_t>& seed_msg) {
  if (i % 2 == 0) return g.bytes(g.below(2001));
  auto buf = seed_msg;
  buf.resize(std::min<std::size_t>(2000, g.below(buf.size() + 60)));
  if (buf.size() >= 240) {
    buf[236] = 0x63, buf[237] = 0x82, buf[238] = 0x53, buf[239] = 0x63;
    for (int k = 0; k < 6 && buf.size() > 240; ++k) buf[240 + g.below(buf.size() - 240)] = g.byte();
  }
  return buf;
}

// Random buffers with opcodes mostly biased into the valid range.
inline std::vector<std::uint8_t> fuzz_tftp_buffer(Gen& g, int i) {
  auto buf = g.bytes(g.below(2001));
  if (buf.size() >= 2 && i % 3 != 0) {
    buf[0] = 0;
    buf[1] = static_cast<std::uint8_t>(1 + g.below(7));
  }
  return buf;
}

}  // namespace colaboot::testing
