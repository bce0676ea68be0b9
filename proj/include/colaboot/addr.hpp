// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace colaboot {

/// IPv4 address held in host byte order.
class Ipv4Address {
 public:
  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t host_order) : value_(host_order) {}
  constexpr Ipv4Address(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value_((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) |
               std::uint32_t{d}) {}

  static std::optional<Ipv4Address> parse(std::string_view dotted);
  /// Throws std::invalid_argument on malformed input.
  static Ipv4Address from_string(std::string_view dotted);

  constexpr std::uint32_t value() const { return value_; }
  constexpr bool is_unspecified() const { return value_ == 0; }
  std::array<std::uint8_t, 4> octets() const;
  std::string to_string() const;

  constexpr auto operator<=>(const Ipv4Address&) const = default;

 private:
  std::uint32_t value_ = 0;
};

inline constexpr Ipv4Address kBroadcastAddress{0xFFFFFFFFu};

class MacAddress {
 public:
  constexpr MacAddress() = default;
  constexpr explicit MacAddress(const std::array<std::uint8_t, 6>& bytes) : bytes_(bytes) {}

  /// Accepts "aa:bb:cc:dd:ee:ff" or "aa-bb-cc-dd-ee-ff".
  static std::optional<MacAddress> parse(std::string_view text);

  const std::array<std::uint8_t, 6>& bytes() const { return bytes_; }
  std::string to_string() const;
  /// pxelinux style "01-aa-bb-cc-dd-ee-ff".
  std::string pxelinux_name() const;

  constexpr auto operator<=>(const MacAddress&) const = default;

 private:
  std::array<std::uint8_t, 6> bytes_{};
};

struct UdpEndpoint {
  Ipv4Address address;
  std::uint16_t port = 0;

  std::string to_string() const;
  auto operator<=>(const UdpEndpoint&) const = default;
};

}  // namespace colaboot
