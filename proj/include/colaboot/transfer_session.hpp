// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// One TFTP read transfer as a pure state machine. The network loop feeds it ACKs and
// timeouts and sends whatever packet it hands back.
#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "colaboot/addr.hpp"
#include "colaboot/asset_store.hpp"
#include "colaboot/tftp_packet.hpp"

namespace colaboot::tftp {

inline constexpr std::uint16_t kDefaultBlockSize = 512;
inline constexpr std::uint16_t kMinBlockSize = 8;
inline constexpr std::uint16_t kMaxBlockSize = 65464;

struct TftpPolicy {
  std::uint16_t blksize_max = 1428;
  std::chrono::milliseconds timeout{1000};
  unsigned retries = 5;
  unsigned backoff_cap = 8;  // timeout never grows past backoff_cap * base
};

/// RRQ refused before a session exists; carries the ERROR packet to send back.
class TftpRequestRejected : public std::runtime_error {
 public:
  TftpRequestRejected(netproto::TftpErrorCode code, std::string message);
  netproto::TftpErrorCode code() const { return code_; }
  netproto::TftpErrorPacket error_packet() const;

 private:
  netproto::TftpErrorCode code_;
};

enum class TransferState { kAwaitingAck, kComplete, kAborted };

struct TransferStep {
  enum class Kind { kSend, kIgnore, kComplete, kAbort };
  Kind kind = Kind::kIgnore;
  std::optional<netproto::TftpPacket> packet;  // set for kSend
};

class TransferSession {
 public:
  TransferSession(UdpEndpoint client, std::string path, store::AssetEntry entry,
                  std::uint64_t manifest_version, std::shared_ptr<const store::AssetBlob> blob,
                  std::uint16_t blksize, std::chrono::milliseconds timeout, unsigned retries,
                  unsigned backoff_cap);

  /// Packet that opens the transfer: the OACK if options were accepted, else DATA 1.
  const netproto::TftpPacket& first_packet() const { return last_packet_; }
  const netproto::TftpPacket& last_packet() const { return last_packet_; }

  /// Advances on the ACK for the last sent packet; stale and duplicate ACKs are ignored
  /// without resending.
  TransferStep on_ack(std::uint16_t block);
  /// Retransmits the last packet with doubled timeout, or aborts once retries run out.
  TransferStep on_timeout();
  /// Client sent ERROR or went away.
  void abort() { state_ = TransferState::kAborted; }

  TransferState state() const { return state_; }
  bool final_block_sent() const { return final_sent_; }
  std::chrono::milliseconds current_timeout() const { return timeout_; }

  const UdpEndpoint& client() const { return client_; }
  const std::string& path() const { return path_; }
  const store::AssetEntry& entry() const { return entry_; }
  std::uint64_t manifest_version() const { return manifest_version_; }
  std::uint16_t blksize() const { return blksize_; }
  std::uint64_t size() const { return blob_->size(); }
  /// 16-bit block number the session expects to be acknowledged next.
  std::uint16_t next_block() const { return static_cast<std::uint16_t>(sent_index_ & 0xFFFF); }
  std::uint64_t blocks_sent() const { return sent_index_; }
  unsigned retries_left() const { return retries_left_; }

 private:
  friend TransferSession handle_rrq(const netproto::TftpRrq&, const UdpEndpoint&,
                                    const store::Snapshot&, const TftpPolicy&);
  void send_block(std::uint64_t index);

  UdpEndpoint client_;
  std::string path_;
  store::AssetEntry entry_;
  std::uint64_t manifest_version_;
  std::shared_ptr<const store::AssetBlob> blob_;
  std::uint16_t blksize_;
  std::chrono::milliseconds base_timeout_;
  std::chrono::milliseconds timeout_;
  unsigned retries_;
  unsigned retries_left_;
  unsigned backoff_cap_;
  std::uint64_t sent_index_ = 0;  // 0 = OACK outstanding
  bool final_sent_ = false;
  TransferState state_ = TransferState::kAwaitingAck;
  netproto::TftpPacket last_packet_;
};

/// Validates an RRQ against the pinned snapshot and opens a session.
/// Throws TftpRequestRejected (ERROR 0 non-octet mode, 1 unknown file, 2 path escape).
TransferSession handle_rrq(const netproto::TftpRrq& rrq, const UdpEndpoint& client,
                           const store::Snapshot& snapshot, const TftpPolicy& policy);

}  // namespace colaboot::tftp
