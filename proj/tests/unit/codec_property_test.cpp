// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// Generated round trips and decoder fuzzing for the DHCP and TFTP codecs.
#include <gtest/gtest.h>

#include "codec_gen.hpp"

namespace colaboot::netproto {
namespace {

constexpr int kRoundTrips = 2000;
constexpr int kFuzzBuffers = 10000;

using testing::Gen;

TEST(CodecProperty, DhcpRoundTrip) {
  Gen g(0xC0DEC0DE);
  for (int i = 0; i < kRoundTrips; ++i) {
    auto m = g.dhcp();
    auto raw = encode_dhcp(m);
    ASSERT_GE(raw.size(), kDhcpMinimumDatagram);
    ASSERT_EQ(decode_dhcp(raw), m) << "case " << i;
  }
}

TEST(CodecProperty, DhcpWireRoundTrip) {
  // encode(decode(b)) == b for well-formed wire images produced by the encoder.
  Gen g(77);
  for (int i = 0; i < kRoundTrips; ++i) {
    auto raw = encode_dhcp(g.dhcp());
    ASSERT_EQ(encode_dhcp(decode_dhcp(raw)), raw) << "case " << i;
  }
}

TEST(CodecProperty, TftpRoundTrip) {
  Gen g(0x7F7F);
  for (int i = 0; i < kRoundTrips; ++i) {
    auto p = g.tftp();
    auto raw = encode_tftp(p);
    ASSERT_EQ(decode_tftp(raw), p) << "case " << i;
    ASSERT_EQ(encode_tftp(decode_tftp(raw)), raw) << "case " << i;
  }
}

// Every input either parses or raises the codec's typed error; anything else
// (another exception type, a crash, a sanitizer report) fails the run.
template <typename Decode, typename Error>
void fuzz(Decode decode, std::vector<std::uint8_t> buf, int& parsed, int& rejected) {
  try {
    decode(buf);
    ++parsed;
  } catch (const Error&) {
    ++rejected;
  }
}

TEST(CodecProperty, FuzzDhcpDecoder) {
  Gen g(1);
  int parsed = 0, rejected = 0;
  auto seed_msg = encode_dhcp(g.dhcp());
  for (int i = 0; i < kFuzzBuffers; ++i) {
    auto buf = testing::fuzz_dhcp_buffer(g, i, seed_msg);
    fuzz<decltype(&decode_dhcp), DhcpError>(&decode_dhcp, std::move(buf), parsed, rejected);
  }
  EXPECT_EQ(parsed + rejected, kFuzzBuffers);
  EXPECT_GT(parsed, 0);
  EXPECT_GT(rejected, 0);
}

TEST(CodecProperty, FuzzTftpDecoder) {
  Gen g(2);
  int parsed = 0, rejected = 0;
  for (int i = 0; i < kFuzzBuffers; ++i) {
    auto buf = testing::fuzz_tftp_buffer(g, i);
    fuzz<decltype(&decode_tftp), TftpDecodeError>(&decode_tftp, std::move(buf), parsed, rejected);
  }
  EXPECT_EQ(parsed + rejected, kFuzzBuffers);
  EXPECT_GT(parsed, 0);
  EXPECT_GT(rejected, 0);
}

}  // namespace
}  // namespace colaboot::netproto
