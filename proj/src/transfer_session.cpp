// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/transfer_session.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace colaboot::tftp {

using netproto::TftpErrorCode;

namespace {

std::optional<std::uint64_t> parse_uint(std::string_view text) {
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

bool iequals(std::string_view a, std::string_view b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
  });
}

}  // namespace

TftpRequestRejected::TftpRequestRejected(TftpErrorCode code, std::string message)
    : std::runtime_error(std::move(message)), code_(code) {}

netproto::TftpErrorPacket TftpRequestRejected::error_packet() const {
  return netproto::make_tftp_error(code_, what());
}

TransferSession::TransferSession(UdpEndpoint client, std::string path, store::AssetEntry entry,
                                 std::uint64_t manifest_version,
                                 std::shared_ptr<const store::AssetBlob> blob,
                                 std::uint16_t blksize, std::chrono::milliseconds timeout,
                                 unsigned retries, unsigned backoff_cap)
    : client_(client),
      path_(std::move(path)),
      entry_(std::move(entry)),
      manifest_version_(manifest_version),
      blob_(std::move(blob)),
      blksize_(blksize),
      base_timeout_(timeout),
      timeout_(timeout),
      retries_(retries),
      retries_left_(retries),
      backoff_cap_(std::max(1u, backoff_cap)) {
  if (blksize_ < kMinBlockSize || blksize_ > kMaxBlockSize) {
    throw std::invalid_argument("blksize outside [8, 65464]");
  }
  send_block(1);
}

void TransferSession::send_block(std::uint64_t index) {
  std::uint64_t offset = (index - 1) * blksize_;
  std::uint64_t remaining = blob_->size() > offset ? blob_->size() - offset : 0;
  netproto::TftpData data;
  data.block = static_cast<std::uint16_t>(index & 0xFFFF);
  data.payload.resize(static_cast<std::size_t>(std::min<std::uint64_t>(remaining, blksize_)));
  if (!data.payload.empty()) {
    auto got = blob_->read(offset, data.payload);
    data.payload.resize(got);
  }
  final_sent_ = data.payload.size() < blksize_;
  sent_index_ = index;
  last_packet_ = std::move(data);
  retries_left_ = retries_;
  timeout_ = base_timeout_;
}

TransferStep TransferSession::on_ack(std::uint16_t block) {
  if (state_ != TransferState::kAwaitingAck || block != next_block()) return {};
  if (final_sent_ && sent_index_ > 0) {
    state_ = TransferState::kComplete;
    return {TransferStep::Kind::kComplete, std::nullopt};
  }
  send_block(sent_index_ + 1);
  return {TransferStep::Kind::kSend, last_packet_};
}

TransferStep TransferSession::on_timeout() {
  if (state_ != TransferState::kAwaitingAck) return {};
  if (retries_left_ == 0) {
    state_ = TransferState::kAborted;
    return {TransferStep::Kind::kAbort, std::nullopt};
  }
  --retries_left_;
  timeout_ = std::min(timeout_ * 2, base_timeout_ * backoff_cap_);
  return {TransferStep::Kind::kSend, last_packet_};
}

TransferSession handle_rrq(const netproto::TftpRrq& rrq, const UdpEndpoint& client,
                           const store::Snapshot& snapshot, const TftpPolicy& policy) {
  if (!iequals(rrq.mode, "octet")) {
    throw TftpRequestRejected(TftpErrorCode::kNotDefined,
                              "transfer mode '" + rrq.mode + "' not supported, use octet");
  }
  auto path = store::normalize_request_path(rrq.filename);
  if (!path) throw TftpRequestRejected(TftpErrorCode::kAccessViolation, "access violation");
  const store::AssetEntry* entry = snapshot.manifest().find(*path);
  if (entry == nullptr) throw TftpRequestRejected(TftpErrorCode::kFileNotFound, "file not found");
  auto blob = snapshot.open(*path);

  std::uint16_t blksize = kDefaultBlockSize;
  auto timeout = policy.timeout;
  netproto::TftpOack oack;
  for (const auto& option : rrq.options) {
    if (iequals(option.name, "blksize")) {
      auto requested = parse_uint(option.value);
      if (!requested || *requested < kMinBlockSize) continue;
      auto cap = std::min<std::uint64_t>(policy.blksize_max, kMaxBlockSize);
      blksize = static_cast<std::uint16_t>(std::min(*requested, cap));
      oack.options.push_back({"blksize", std::to_string(blksize)});
    } else if (iequals(option.name, "tsize")) {
      oack.options.push_back({"tsize", std::to_string(blob->size())});
    } else if (iequals(option.name, "timeout")) {
      auto seconds = parse_uint(option.value);
      if (!seconds || *seconds < 1 || *seconds > 255) continue;
      timeout = std::chrono::seconds(*seconds);
      oack.options.push_back({"timeout", option.value});
    }
    // windowsize and unknown options are left out of the OACK, which declines them.
  }

  TransferSession session(client, *path, *entry, snapshot.version(), std::move(blob), blksize,
                          timeout, policy.retries, policy.backoff_cap);
  if (!oack.options.empty()) {
    session.sent_index_ = 0;
    session.final_sent_ = false;
    session.last_packet_ = std::move(oack);
  }
  return session;
}

}  // namespace colaboot::tftp
