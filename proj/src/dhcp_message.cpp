// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/dhcp_message.hpp"

#include <algorithm>

#include "byte_io.hpp"

namespace colaboot::netproto {

namespace {

std::string c_string(std::span<const std::uint8_t> field) {
  auto nul = std::find(field.begin(), field.end(), std::uint8_t{0});
  return std::string(field.begin(), nul);
}

template <std::size_t N>
void set_c_string(std::array<std::uint8_t, N>& field, std::string_view text) {
  if (text.size() >= N) throw std::length_error("text does not fit BOOTP field");
  field.fill(0);
  std::copy(text.begin(), text.end(), field.begin());
}

Ipv4Address read_address(detail::ByteReader& r) {
  std::uint32_t v = 0;
  r.u32(v);
  return Ipv4Address{v};
}

}  // namespace

std::string_view to_string(DhcpMessageType type) {
  switch (type) {
    case DhcpMessageType::kDiscover: return "DISCOVER";
    case DhcpMessageType::kOffer: return "OFFER";
    case DhcpMessageType::kRequest: return "REQUEST";
    case DhcpMessageType::kDecline: return "DECLINE";
    case DhcpMessageType::kAck: return "ACK";
    case DhcpMessageType::kNak: return "NAK";
    case DhcpMessageType::kRelease: return "RELEASE";
    case DhcpMessageType::kInform: return "INFORM";
  }
  return "UNKNOWN";
}

std::string_view to_string(DhcpErrc code) {
  switch (code) {
    case DhcpErrc::kTruncated: return "truncated DHCP datagram";
    case DhcpErrc::kBadCookie: return "bad DHCP magic cookie";
    case DhcpErrc::kUnterminatedOptions: return "unterminated DHCP options";
    case DhcpErrc::kDuplicateMessageType: return "duplicate DHCP message type option";
    case DhcpErrc::kOverloadUnsupported: return "DHCP option overload is not supported";
    case DhcpErrc::kOversizedOption: return "DHCP option payload exceeds 255 bytes";
    case DhcpErrc::kReservedOptionTag: return "pad/end tag used as an option";
  }
  return "DHCP error";
}

DhcpError::DhcpError(DhcpErrc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

MacAddress DhcpMessage::client_mac() const {
  std::array<std::uint8_t, 6> mac{};
  std::copy_n(chaddr.begin(), 6, mac.begin());
  return MacAddress{mac};
}

void DhcpMessage::set_client_mac(const MacAddress& mac) {
  chaddr.fill(0);
  std::copy(mac.bytes().begin(), mac.bytes().end(), chaddr.begin());
  htype = 1;
  hlen = 6;
}

std::string DhcpMessage::sname_string() const { return c_string(sname); }
std::string DhcpMessage::file_string() const { return c_string(file); }
void DhcpMessage::set_sname(std::string_view text) { set_c_string(sname, text); }
void DhcpMessage::set_file(std::string_view text) { set_c_string(file, text); }

const DhcpOption* DhcpMessage::find_option(std::uint8_t tag) const {
  auto it = std::find_if(options.begin(), options.end(),
                         [tag](const DhcpOption& o) { return o.tag == tag; });
  return it == options.end() ? nullptr : &*it;
}

void DhcpMessage::set_option(std::uint8_t tag, std::vector<std::uint8_t> payload) {
  for (auto& o : options) {
    if (o.tag == tag) {
      o.payload = std::move(payload);
      return;
    }
  }
  options.push_back({tag, std::move(payload)});
}

void DhcpMessage::set_option(std::uint8_t tag, std::string_view text) {
  set_option(tag, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::optional<DhcpMessageType> DhcpMessage::message_type() const {
  const auto* opt = find_option(dhcp_option::kMessageType);
  if (opt == nullptr || opt->payload.size() != 1) return std::nullopt;
  auto v = opt->payload[0];
  if (v < 1 || v > 8) return std::nullopt;
  return static_cast<DhcpMessageType>(v);
}

std::optional<Ipv4Address> DhcpMessage::option_address(std::uint8_t tag) const {
  const auto* opt = find_option(tag);
  if (opt == nullptr || opt->payload.size() != 4) return std::nullopt;
  const auto& p = opt->payload;
  return Ipv4Address{p[0], p[1], p[2], p[3]};
}

DhcpMessage decode_dhcp(std::span<const std::uint8_t> raw) {
  if (raw.size() < kDhcpFixedHeaderSize + 4) throw DhcpError(DhcpErrc::kTruncated);

  detail::ByteReader r(raw);
  DhcpMessage msg;
  r.u8(msg.op);
  r.u8(msg.htype);
  r.u8(msg.hlen);
  r.u8(msg.hops);
  r.u32(msg.xid);
  r.u16(msg.secs);
  r.u16(msg.flags);
  msg.ciaddr = read_address(r);
  msg.yiaddr = read_address(r);
  msg.siaddr = read_address(r);
  msg.giaddr = read_address(r);
  std::span<const std::uint8_t> field;
  r.take(msg.chaddr.size(), field);
  std::copy(field.begin(), field.end(), msg.chaddr.begin());
  r.take(msg.sname.size(), field);
  std::copy(field.begin(), field.end(), msg.sname.begin());
  r.take(msg.file.size(), field);
  std::copy(field.begin(), field.end(), msg.file.begin());

  std::uint32_t cookie = 0;
  r.u32(cookie);
  if (cookie != kDhcpMagicCookie) throw DhcpError(DhcpErrc::kBadCookie);

  bool seen_type = false;
  for (;;) {
    std::uint8_t tag = 0;
    if (!r.u8(tag)) throw DhcpError(DhcpErrc::kUnterminatedOptions);
    if (tag == dhcp_option::kEnd) break;
    if (tag == dhcp_option::kPad) continue;
    std::uint8_t len = 0;
    std::span<const std::uint8_t> payload;
    if (!r.u8(len) || !r.take(len, payload)) throw DhcpError(DhcpErrc::kUnterminatedOptions);
    if (tag == dhcp_option::kOverload) throw DhcpError(DhcpErrc::kOverloadUnsupported);
    if (tag == dhcp_option::kMessageType) {
      if (seen_type) throw DhcpError(DhcpErrc::kDuplicateMessageType);
      seen_type = true;
    }
    msg.options.push_back({tag, std::vector<std::uint8_t>(payload.begin(), payload.end())});
  }
  return msg;
}

std::vector<std::uint8_t> encode_dhcp(const DhcpMessage& msg) {
  std::vector<std::uint8_t> out;
  out.reserve(kDhcpMinimumDatagram);
  detail::ByteWriter w(out);
  w.u8(msg.op);
  w.u8(msg.htype);
  w.u8(msg.hlen);
  w.u8(msg.hops);
  w.u32(msg.xid);
  w.u16(msg.secs);
  w.u16(msg.flags);
  w.u32(msg.ciaddr.value());
  w.u32(msg.yiaddr.value());
  w.u32(msg.siaddr.value());
  w.u32(msg.giaddr.value());
  w.bytes(msg.chaddr);
  w.bytes(msg.sname);
  w.bytes(msg.file);
  w.u32(kDhcpMagicCookie);
  bool seen_type = false;
  for (const auto& o : msg.options) {
    if (o.tag == dhcp_option::kPad || o.tag == dhcp_option::kEnd) {
      throw DhcpError(DhcpErrc::kReservedOptionTag);
    }
    if (o.tag == dhcp_option::kOverload) throw DhcpError(DhcpErrc::kOverloadUnsupported);
    if (o.tag == dhcp_option::kMessageType) {
      if (seen_type) throw DhcpError(DhcpErrc::kDuplicateMessageType);
      seen_type = true;
    }
    if (o.payload.size() > 255) throw DhcpError(DhcpErrc::kOversizedOption);
    w.u8(o.tag);
    w.u8(static_cast<std::uint8_t>(o.payload.size()));
    w.bytes(o.payload);
  }
  w.u8(dhcp_option::kEnd);
  if (out.size() < kDhcpMinimumDatagram) w.zeros(kDhcpMinimumDatagram - out.size());
  return out;
}

bool is_pxe_client(const DhcpMessage& msg) {
  static constexpr std::string_view kPrefix = "PXEClient";
  const auto* opt = msg.find_option(dhcp_option::kVendorClass);
  if (opt == nullptr || opt->payload.size() < kPrefix.size()) return false;
  return std::equal(kPrefix.begin(), kPrefix.end(), opt->payload.begin());
}

std::vector<std::uint8_t> address_payload(Ipv4Address address) {
  auto o = address.octets();
  return {o.begin(), o.end()};
}

std::vector<std::uint8_t> address_list_payload(std::span<const Ipv4Address> addresses) {
  std::vector<std::uint8_t> out;
  for (auto a : addresses) {
    auto o = a.octets();
    out.insert(out.end(), o.begin(), o.end());
  }
  return out;
}

std::vector<std::uint8_t> u32_payload(std::uint32_t value) {
  std::vector<std::uint8_t> out;
  detail::ByteWriter(out).u32(value);
  return out;
}

}  // namespace colaboot::netproto
