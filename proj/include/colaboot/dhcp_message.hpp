// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// BOOTP/DHCP message layout (RFC 2131) with the RFC 2132 option area.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "colaboot/addr.hpp"

namespace colaboot::netproto {

inline constexpr std::size_t kDhcpFixedHeaderSize = 236;
inline constexpr std::size_t kDhcpMinimumDatagram = 300;
inline constexpr std::uint32_t kDhcpMagicCookie = 0x63825363;

namespace dhcp_option {
inline constexpr std::uint8_t kPad = 0;
inline constexpr std::uint8_t kSubnetMask = 1;
inline constexpr std::uint8_t kRouter = 3;
inline constexpr std::uint8_t kDnsServers = 6;
inline constexpr std::uint8_t kRequestedIp = 50;
inline constexpr std::uint8_t kLeaseTime = 51;
inline constexpr std::uint8_t kOverload = 52;
inline constexpr std::uint8_t kMessageType = 53;
inline constexpr std::uint8_t kServerId = 54;
inline constexpr std::uint8_t kParameterList = 55;
inline constexpr std::uint8_t kMaxMessageSize = 57;
inline constexpr std::uint8_t kVendorClass = 60;
inline constexpr std::uint8_t kTftpServerName = 66;
inline constexpr std::uint8_t kBootfileName = 67;
inline constexpr std::uint8_t kClientArch = 93;
inline constexpr std::uint8_t kClientNdi = 94;
inline constexpr std::uint8_t kClientUuid = 97;
inline constexpr std::uint8_t kEnd = 255;
}  // namespace dhcp_option

enum class DhcpMessageType : std::uint8_t {
  kDiscover = 1,
  kOffer = 2,
  kRequest = 3,
  kDecline = 4,
  kAck = 5,
  kNak = 6,
  kRelease = 7,
  kInform = 8,
};

std::string_view to_string(DhcpMessageType type);

enum class DhcpErrc {
  kTruncated,
  kBadCookie,
  kUnterminatedOptions,
  kDuplicateMessageType,
  kOverloadUnsupported,
  kOversizedOption,
  kReservedOptionTag,
};

std::string_view to_string(DhcpErrc code);

class DhcpError : public std::runtime_error {
 public:
  explicit DhcpError(DhcpErrc code);
  DhcpErrc code() const { return code_; }

 private:
  DhcpErrc code_;
};

struct DhcpOption {
  std::uint8_t tag = 0;
  std::vector<std::uint8_t> payload;

  bool operator==(const DhcpOption&) const = default;
};

struct DhcpMessage {
  static constexpr std::uint8_t kBootRequest = 1;
  static constexpr std::uint8_t kBootReply = 2;
  static constexpr std::uint16_t kBroadcastFlag = 0x8000;

  std::uint8_t op = kBootRequest;
  std::uint8_t htype = 1;
  std::uint8_t hlen = 6;
  std::uint8_t hops = 0;
  std::uint32_t xid = 0;
  std::uint16_t secs = 0;
  std::uint16_t flags = 0;
  Ipv4Address ciaddr;
  Ipv4Address yiaddr;
  Ipv4Address siaddr;  // next server
  Ipv4Address giaddr;
  std::array<std::uint8_t, 16> chaddr{};
  std::array<std::uint8_t, 64> sname{};
  std::array<std::uint8_t, 128> file{};
  std::vector<DhcpOption> options;

  bool operator==(const DhcpMessage&) const = default;

  MacAddress client_mac() const;
  void set_client_mac(const MacAddress& mac);

  std::string sname_string() const;
  std::string file_string() const;
  /// Throws std::length_error when the text does not fit with a NUL terminator.
  void set_sname(std::string_view text);
  void set_file(std::string_view text);

  const DhcpOption* find_option(std::uint8_t tag) const;
  /// Replaces the first option carrying `tag`, or appends when absent.
  void set_option(std::uint8_t tag, std::vector<std::uint8_t> payload);
  void set_option(std::uint8_t tag, std::string_view text);

  std::optional<DhcpMessageType> message_type() const;
  std::optional<Ipv4Address> option_address(std::uint8_t tag) const;
};

/// Parses a datagram payload. Unknown options are kept verbatim; pad bytes are dropped.
DhcpMessage decode_dhcp(std::span<const std::uint8_t> raw);

/// Serializes `msg`, padding to the 300-byte BOOTP minimum.
std::vector<std::uint8_t> encode_dhcp(const DhcpMessage& msg);

/// True iff option 60 starts with "PXEClient".
bool is_pxe_client(const DhcpMessage& msg);

std::vector<std::uint8_t> address_payload(Ipv4Address address);
std::vector<std::uint8_t> address_list_payload(std::span<const Ipv4Address> addresses);
std::vector<std::uint8_t> u32_payload(std::uint32_t value);

}  // namespace colaboot::netproto
