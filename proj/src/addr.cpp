// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/addr.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace colaboot {

std::optional<Ipv4Address> Ipv4Address::parse(std::string_view dotted) {
  std::uint32_t value = 0;
  const char* p = dotted.data();
  const char* end = dotted.data() + dotted.size();
  for (int i = 0; i < 4; ++i) {
    if (i > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    if (p == end || *p < '0' || *p > '9') return std::nullopt;
    unsigned octet = 0;
    auto [next, ec] = std::from_chars(p, end, octet);
    if (ec != std::errc{} || octet > 255 || next - p > 3) return std::nullopt;
    p = next;
    value = (value << 8) | octet;
  }
  if (p != end) return std::nullopt;
  return Ipv4Address{value};
}

Ipv4Address Ipv4Address::from_string(std::string_view dotted) {
  auto parsed = parse(dotted);
  if (!parsed) throw std::invalid_argument("invalid IPv4 address: " + std::string(dotted));
  return *parsed;
}

std::array<std::uint8_t, 4> Ipv4Address::octets() const {
  return {static_cast<std::uint8_t>(value_ >> 24), static_cast<std::uint8_t>(value_ >> 16),
          static_cast<std::uint8_t>(value_ >> 8), static_cast<std::uint8_t>(value_)};
}

std::string Ipv4Address::to_string() const {
  auto o = octets();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", o[0], o[1], o[2], o[3]);
  return buf;
}

std::optional<MacAddress> MacAddress::parse(std::string_view text) {
  if (text.size() != 17) return std::nullopt;
  std::array<std::uint8_t, 6> bytes{};
  for (std::size_t i = 0; i < 6; ++i) {
    if (i > 0 && text[i * 3 - 1] != ':' && text[i * 3 - 1] != '-') return std::nullopt;
    unsigned v = 0;
    auto first = text.data() + i * 3;
    auto [next, ec] = std::from_chars(first, first + 2, v, 16);
    if (ec != std::errc{} || next != first + 2) return std::nullopt;
    bytes[i] = static_cast<std::uint8_t>(v);
  }
  return MacAddress{bytes};
}

std::string MacAddress::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", bytes_[0], bytes_[1], bytes_[2],
                bytes_[3], bytes_[4], bytes_[5]);
  return buf;
}

std::string MacAddress::pxelinux_name() const {
  char buf[21];
  std::snprintf(buf, sizeof buf, "01-%02x-%02x-%02x-%02x-%02x-%02x", bytes_[0], bytes_[1],
                bytes_[2], bytes_[3], bytes_[4], bytes_[5]);
  return buf;
}

std::string UdpEndpoint::to_string() const {
  return address.to_string() + ":" + std::to_string(port);
}

}  // namespace colaboot
