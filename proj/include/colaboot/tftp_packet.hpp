// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// TFTP packets (RFC 1350) with option extension (RFC 2347/2348/2349).
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace colaboot::netproto {

enum class TftpOpcode : std::uint16_t {
  kRrq = 1,
  kWrq = 2,
  kData = 3,
  kAck = 4,
  kError = 5,
  kOack = 6,
};

/// RFC 1350 error codes 0-7 plus RFC 2347 option negotiation failure (8).
enum class TftpErrorCode : std::uint16_t {
  kNotDefined = 0,
  kFileNotFound = 1,
  kAccessViolation = 2,
  kDiskFull = 3,
  kIllegalOperation = 4,
  kUnknownTransferId = 5,
  kFileExists = 6,
  kNoSuchUser = 7,
  kOptionRefused = 8,
};

struct TftpOption {
  std::string name;
  std::string value;
  bool operator==(const TftpOption&) const = default;
};

using TftpOptions = std::vector<TftpOption>;

/// Case-insensitive lookup, per RFC 2347.
const TftpOption* find_tftp_option(const TftpOptions& options, std::string_view name);

struct TftpRrq {
  std::string filename;
  std::string mode;
  TftpOptions options;
  bool operator==(const TftpRrq&) const = default;
};

struct TftpWrq {
  std::string filename;
  std::string mode;
  TftpOptions options;
  bool operator==(const TftpWrq&) const = default;
};

struct TftpData {
  std::uint16_t block = 0;
  std::vector<std::uint8_t> payload;
  bool operator==(const TftpData&) const = default;
};

struct TftpAck {
  std::uint16_t block = 0;
  bool operator==(const TftpAck&) const = default;
};

struct TftpErrorPacket {
  std::uint16_t code = 0;
  std::string message;
  bool operator==(const TftpErrorPacket&) const = default;
};

struct TftpOack {
  TftpOptions options;
  bool operator==(const TftpOack&) const = default;
};

using TftpPacket = std::variant<TftpRrq, TftpWrq, TftpData, TftpAck, TftpErrorPacket, TftpOack>;

enum class TftpErrc { kEmpty, kTruncated, kUnknownOpcode, kMalformedNetascii };

std::string_view to_string(TftpErrc code);

class TftpDecodeError : public std::runtime_error {
 public:
  explicit TftpDecodeError(TftpErrc code);
  TftpErrc code() const { return code_; }

 private:
  TftpErrc code_;
};

TftpPacket decode_tftp(std::span<const std::uint8_t> raw);
std::vector<std::uint8_t> encode_tftp(const TftpPacket& pkt);

TftpOpcode opcode_of(const TftpPacket& pkt);
TftpErrorPacket make_tftp_error(TftpErrorCode code, std::string message);

}  // namespace colaboot::netproto
