// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/tftp_server.hpp"

#include <spdlog/spdlog.h>

namespace colaboot::tftp {

using Clock = std::chrono::steady_clock;
using netproto::TftpErrorCode;

struct TftpService::Transfer {
  Transfer(TransferSession s, UdpSocket sock, std::optional<MacAddress> m)
      : session(std::move(s)), socket(std::move(sock)), mac(m) {}

  std::mutex mutex;  // guards session and reported
  TransferSession session;
  UdpSocket socket;
  std::optional<MacAddress> mac;
  std::atomic<bool> reported{false};
  std::atomic<bool> done{false};
  std::jthread thread;

  void send(const netproto::TftpPacket& pkt) {
    socket.send_to(session.client(), netproto::encode_tftp(pkt));
  }
};

TftpService::TftpService(TftpPolicy policy, ClientRegistry& registry, session::EventSink events)
    : policy_(policy), registry_(registry), events_(std::move(events)) {}

TftpService::~TftpService() { stop(); }

void TftpService::bind(Ipv4Address address, std::uint16_t port) {
  listener_ = UdpSocket::bind(address, port);
  address_ = address;
}

std::uint16_t TftpService::port() const { return listener_.local_endpoint().port; }

void TftpService::start() {
  worker_ = std::jthread([this](std::stop_token st) { run(st); });
}

void TftpService::stop() {
  if (worker_.joinable()) {
    worker_.request_stop();
    worker_.join();
  }
  std::lock_guard lock(transfers_mutex_);
  for (auto& t : transfers_) t->thread.request_stop();
  transfers_.clear();  // joins
  listener_.close();
}

std::size_t TftpService::active_transfers() const {
  std::lock_guard lock(transfers_mutex_);
  std::size_t n = 0;
  for (const auto& t : transfers_) n += !t->done.load();
  return n;
}

void TftpService::run(std::stop_token stop) {
  while (!stop.stop_requested()) {
    if (auto d = listener_.receive(std::chrono::milliseconds(100))) {
      handle_request(*d);
    } else {
      reap();
    }
  }
}

void TftpService::reap() {
  std::lock_guard lock(transfers_mutex_);
  transfers_.remove_if([](const auto& t) { return t->done.load(); });
}

void TftpService::report_complete(Transfer& t) {
  if (t.reported) return;
  t.reported = true;
  completed_.fetch_add(1);
  if (!events_) return;
  session::BootEvent e;
  e.kind = session::EventKind::kTftpComplete;
  e.mac = t.mac;
  e.ip = t.session.client().address;
  e.size = t.session.size();
  e.role = t.session.entry().role;
  e.manifest_version = t.session.manifest_version();
  events_(std::move(e));
}

void TftpService::settle_client(Ipv4Address ip) {
  std::lock_guard lock(transfers_mutex_);
  for (auto& t : transfers_) {
    if (t->session.client().address != ip || t->done.load()) continue;
    std::lock_guard tl(t->mutex);
    if (t->session.final_block_sent() && t->session.state() != TransferState::kAborted) {
      report_complete(*t);
    }
  }
}

void TftpService::handle_request(const Datagram& d) {
  netproto::TftpPacket pkt;
  try {
    pkt = netproto::decode_tftp(d.bytes);
  } catch (const netproto::TftpDecodeError& e) {
    spdlog::debug("tftp: dropping datagram from {}: {}", d.from.to_string(), e.what());
    return;
  }
  auto reply_error = [&](TftpErrorCode code, const std::string& message) {
    listener_.send_to(d.from, netproto::encode_tftp(netproto::make_tftp_error(code, message)));
  };
  if (std::holds_alternative<netproto::TftpWrq>(pkt)) {
    reply_error(TftpErrorCode::kAccessViolation, "read-only server");
    return;
  }
  const auto* rrq = std::get_if<netproto::TftpRrq>(&pkt);
  if (rrq == nullptr) return;

  auto requested = store::normalize_request_path(rrq->filename).value_or(rrq->filename);
  {
    // A retransmitted RRQ for a transfer already under way gets its last packet again.
    std::lock_guard lock(transfers_mutex_);
    for (auto& t : transfers_) {
      if (t->done.load() || t->session.client() != d.from || t->session.path() != requested) {
        continue;
      }
      std::lock_guard tl(t->mutex);
      t->send(t->session.last_packet());
      return;
    }
  }
  settle_client(d.from.address);
  reap();

  ClientRef ref{std::nullopt, d.from.address};
  std::optional<TransferSession> session;
  try {
    session.emplace(handle_rrq(*rrq, d.from, registry_.snapshot_for(ref), policy_));
  } catch (const TftpRequestRejected& e) {
    spdlog::debug("tftp: {} rejected '{}': {}", d.from.to_string(), rrq->filename, e.what());
    listener_.send_to(d.from, netproto::encode_tftp(e.error_packet()));
    return;
  } catch (const store::StoreError& e) {
    spdlog::warn("tftp: cannot serve '{}': {}", rrq->filename, e.what());
    reply_error(TftpErrorCode::kFileNotFound, "no assets available");
    return;
  }

  UdpSocket socket;
  try {
    socket = UdpSocket::bind(address_, 0);
  } catch (const PortInUse& e) {
    spdlog::warn("tftp: no transfer port for {}: {}", d.from.to_string(), e.what());
    reply_error(TftpErrorCode::kNotDefined, "server busy");
    return;
  }
  auto mac = registry_.resolve_mac(ref);
  if (events_) {
    session::BootEvent e;
    e.kind = session::EventKind::kTftpRrq;
    e.mac = mac;
    e.ip = d.from.address;
    e.size = session->size();
    e.role = session->entry().role;
    e.manifest_version = session->manifest_version();
    events_(std::move(e));
  }
  spdlog::debug("tftp: {} reads '{}' ({} bytes, blksize {})", d.from.to_string(), session->path(),
                session->size(), session->blksize());

  auto transfer = std::make_unique<Transfer>(std::move(*session), std::move(socket), mac);
  Transfer& t = *transfer;
  {
    std::lock_guard lock(transfers_mutex_);
    transfers_.push_back(std::move(transfer));
  }
  t.thread = std::jthread([this, &t](std::stop_token st) { run_transfer(st, t); });
}

void TftpService::run_transfer(std::stop_token stop, Transfer& t) {
  auto finish = [&](bool aborted) {
    if (aborted && !t.reported) aborted_.fetch_add(1);
    t.done.store(true);
  };
  Clock::time_point deadline;
  {
    std::lock_guard tl(t.mutex);
    t.send(t.session.first_packet());
    deadline = Clock::now() + t.session.current_timeout();
  }
  const UdpEndpoint client = t.session.client();
  while (!stop.stop_requested()) {
    auto now = Clock::now();
    if (now >= deadline) {
      std::lock_guard tl(t.mutex);
      auto step = t.session.on_timeout();
      if (step.kind == TransferStep::Kind::kAbort) {
        spdlog::debug("tftp: {} '{}' aborted after retries", client.to_string(), t.session.path());
        return finish(true);
      }
      t.send(*step.packet);
      deadline = Clock::now() + t.session.current_timeout();
      continue;
    }
    auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now) +
                std::chrono::milliseconds(1);
    auto d = t.socket.receive(std::min(wait, std::chrono::milliseconds(100)));
    if (!d) continue;
    if (d->from != client) {
      t.socket.send_to(d->from, netproto::encode_tftp(netproto::make_tftp_error(
                                    TftpErrorCode::kUnknownTransferId, "unknown transfer id")));
      continue;
    }
    netproto::TftpPacket pkt;
    try {
      pkt = netproto::decode_tftp(d->bytes);
    } catch (const netproto::TftpDecodeError&) {
      continue;
    }
    std::lock_guard tl(t.mutex);
    if (const auto* ack = std::get_if<netproto::TftpAck>(&pkt)) {
      auto step = t.session.on_ack(ack->block);
      if (step.kind == TransferStep::Kind::kSend) {
        t.send(*step.packet);
        deadline = Clock::now() + t.session.current_timeout();
      } else if (step.kind == TransferStep::Kind::kComplete) {
        report_complete(t);
        return finish(false);
      }
    } else if (std::holds_alternative<netproto::TftpErrorPacket>(pkt)) {
      t.session.abort();
      return finish(true);
    }
  }
  finish(true);
}

}  // namespace colaboot::tftp
