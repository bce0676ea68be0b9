// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/tftp_packet.hpp"

#include <algorithm>
#include <cctype>

#include "byte_io.hpp"

namespace colaboot::netproto {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// Reads a NUL-terminated string; the terminator must lie inside the buffer.
std::string read_cstring(detail::ByteReader& r) {
  std::string out;
  for (;;) {
    std::uint8_t c = 0;
    if (!r.u8(c)) throw TftpDecodeError(TftpErrc::kMalformedNetascii);
    if (c == 0) return out;
    out.push_back(static_cast<char>(c));
  }
}

TftpOptions read_options(detail::ByteReader& r) {
  TftpOptions options;
  while (!r.empty()) {
    TftpOption opt;
    opt.name = read_cstring(r);
    opt.value = read_cstring(r);
    options.push_back(std::move(opt));
  }
  return options;
}

void write_cstring(detail::ByteWriter& w, std::string_view s) {
  w.text(s);
  w.u8(0);
}

void write_options(detail::ByteWriter& w, const TftpOptions& options) {
  for (const auto& o : options) {
    write_cstring(w, o.name);
    write_cstring(w, o.value);
  }
}

template <typename Request>
Request read_request(detail::ByteReader& r) {
  Request req;
  req.filename = read_cstring(r);
  req.mode = read_cstring(r);
  req.options = read_options(r);
  return req;
}

}  // namespace

const TftpOption* find_tftp_option(const TftpOptions& options, std::string_view name) {
  auto it = std::find_if(options.begin(), options.end(),
                         [&](const TftpOption& o) { return iequals(o.name, name); });
  return it == options.end() ? nullptr : &*it;
}

std::string_view to_string(TftpErrc code) {
  switch (code) {
    case TftpErrc::kEmpty: return "empty TFTP datagram";
    case TftpErrc::kTruncated: return "truncated TFTP packet";
    case TftpErrc::kUnknownOpcode: return "unknown TFTP opcode";
    case TftpErrc::kMalformedNetascii: return "missing NUL terminator in TFTP string";
  }
  return "TFTP error";
}

TftpDecodeError::TftpDecodeError(TftpErrc code)
    : std::runtime_error(std::string(to_string(code))), code_(code) {}

TftpPacket decode_tftp(std::span<const std::uint8_t> raw) {
  if (raw.empty()) throw TftpDecodeError(TftpErrc::kEmpty);
  detail::ByteReader r(raw);
  std::uint16_t opcode = 0;
  if (!r.u16(opcode)) throw TftpDecodeError(TftpErrc::kTruncated);

  switch (static_cast<TftpOpcode>(opcode)) {
    case TftpOpcode::kRrq: return read_request<TftpRrq>(r);
    case TftpOpcode::kWrq: return read_request<TftpWrq>(r);
    case TftpOpcode::kData: {
      TftpData data;
      if (!r.u16(data.block)) throw TftpDecodeError(TftpErrc::kTruncated);
      auto rest = r.rest();
      data.payload.assign(rest.begin(), rest.end());
      return data;
    }
    case TftpOpcode::kAck: {
      TftpAck ack;
      if (!r.u16(ack.block)) throw TftpDecodeError(TftpErrc::kTruncated);
      return ack;
    }
    case TftpOpcode::kError: {
      TftpErrorPacket err;
      if (!r.u16(err.code)) throw TftpDecodeError(TftpErrc::kTruncated);
      err.message = read_cstring(r);
      return err;
    }
    case TftpOpcode::kOack: return TftpOack{read_options(r)};
  }
  throw TftpDecodeError(TftpErrc::kUnknownOpcode);
}

std::vector<std::uint8_t> encode_tftp(const TftpPacket& pkt) {
  std::vector<std::uint8_t> out;
  detail::ByteWriter w(out);
  w.u16(static_cast<std::uint16_t>(opcode_of(pkt)));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TftpRrq> || std::is_same_v<T, TftpWrq>) {
          write_cstring(w, p.filename);
          write_cstring(w, p.mode);
          write_options(w, p.options);
        } else if constexpr (std::is_same_v<T, TftpData>) {
          w.u16(p.block);
          w.bytes(p.payload);
        } else if constexpr (std::is_same_v<T, TftpAck>) {
          w.u16(p.block);
        } else if constexpr (std::is_same_v<T, TftpErrorPacket>) {
          w.u16(p.code);
          write_cstring(w, p.message);
        } else {
          write_options(w, p.options);
        }
      },
      pkt);
  return out;
}

TftpOpcode opcode_of(const TftpPacket& pkt) {
  return static_cast<TftpOpcode>(pkt.index() + 1);
}

TftpErrorPacket make_tftp_error(TftpErrorCode code, std::string message) {
  return TftpErrorPacket{static_cast<std::uint16_t>(code), std::move(message)};
}

}  // namespace colaboot::netproto
