// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/dhcp_server.hpp"

#include <spdlog/spdlog.h>

#include "colaboot/client_registry.hpp"

namespace colaboot::dhcp {

using netproto::DhcpMessage;
using netproto::DhcpMessageType;
namespace opt = netproto::dhcp_option;

namespace {

std::string_view to_string(DhcpServerErrc code) {
  switch (code) {
    case DhcpServerErrc::kPoolExhausted: return "address pool exhausted";
    case DhcpServerErrc::kNotPxe: return "client is not a PXE client";
    case DhcpServerErrc::kUnknownClient: return "request from unknown client";
  }
  return "dhcp server error";
}

}  // namespace

DhcpServerError::DhcpServerError(DhcpServerErrc code)
    : std::runtime_error(std::string(to_string(code))), code_(code) {}

LeaseTable::LeaseTable(Ipv4Address pool_start, Ipv4Address pool_end)
    : start_(pool_start), end_(pool_end) {
  if (end_ < start_) throw std::invalid_argument("pool_end precedes pool_start");
}

bool LeaseTable::in_pool(Ipv4Address ip) const { return start_ <= ip && ip <= end_; }

std::size_t LeaseTable::pool_size() const {
  return static_cast<std::size_t>(end_.value() - start_.value()) + 1;
}

std::optional<Lease> LeaseTable::binding(const MacAddress& mac) const {
  auto it = by_mac_.find(mac);
  if (it == by_mac_.end()) return std::nullopt;
  return it->second;
}

std::optional<MacAddress> LeaseTable::holder(Ipv4Address ip) const {
  auto it = by_ip_.find(ip);
  if (it == by_ip_.end()) return std::nullopt;
  return it->second;
}

std::vector<Lease> LeaseTable::leases() const {
  std::vector<Lease> out;
  for (const auto& [mac, lease] : by_mac_) out.push_back(lease);
  return out;
}

void LeaseTable::unbind(const MacAddress& mac) {
  auto it = by_mac_.find(mac);
  if (it == by_mac_.end()) return;
  by_ip_.erase(it->second.ip);
  by_mac_.erase(it);
}

Ipv4Address LeaseTable::offer(const MacAddress& mac, Clock::time_point hold_until) {
  if (auto it = by_mac_.find(mac); it != by_mac_.end()) {
    if (!it->second.active) it->second.expiry = hold_until;
    return it->second.ip;
  }
  for (auto v = start_.value();; ++v) {
    Ipv4Address candidate{v};
    if (!by_ip_.contains(candidate)) {
      by_mac_[mac] = Lease{mac, candidate, false, hold_until};
      by_ip_[candidate] = mac;
      return candidate;
    }
    if (v == end_.value()) break;
  }
  throw DhcpServerError(DhcpServerErrc::kPoolExhausted);
}

bool LeaseTable::activate(const MacAddress& mac, Ipv4Address ip, Clock::time_point expiry) {
  if (!in_pool(ip)) return false;
  if (auto h = holder(ip); h && *h != mac) return false;
  if (auto b = binding(mac); b && b->ip != ip) unbind(mac);
  by_mac_[mac] = Lease{mac, ip, true, expiry};
  by_ip_[ip] = mac;
  return true;
}

void LeaseTable::release(const MacAddress& mac) { unbind(mac); }

std::size_t LeaseTable::expire(Clock::time_point now) {
  std::size_t reclaimed = 0;
  for (auto it = by_mac_.begin(); it != by_mac_.end();) {
    if (it->second.expiry < now) {
      by_ip_.erase(it->second.ip);
      it = by_mac_.erase(it);
      ++reclaimed;
    } else {
      ++it;
    }
  }
  return reclaimed;
}

const std::string& BootConfig::bootfile_for(netproto::ArchClass cls) const {
  if (auto it = bootfile_by_arch.find(cls); it != bootfile_by_arch.end()) return it->second;
  return bootfile_by_arch.at(netproto::ArchClass::kLegacyBios);
}

DhcpResponder::DhcpResponder(DhcpSettings settings, LeaseTable& leases)
    : settings_(std::move(settings)), leases_(leases) {
  if (!settings_.boot.bootfile_by_arch.contains(netproto::ArchClass::kLegacyBios)) {
    throw std::invalid_argument("boot config needs a legacy BIOS bootfile");
  }
}

DhcpMessage DhcpResponder::reply_skeleton(const DhcpMessage& req, DhcpMessageType type) const {
  DhcpMessage reply;
  reply.op = DhcpMessage::kBootReply;
  reply.htype = req.htype;
  reply.hlen = req.hlen;
  reply.xid = req.xid;
  reply.flags = req.flags;
  reply.giaddr = req.giaddr;
  reply.chaddr = req.chaddr;
  reply.options.push_back({opt::kMessageType, {static_cast<std::uint8_t>(type)}});
  reply.options.push_back({opt::kServerId, netproto::address_payload(settings_.server_id)});
  return reply;
}

// Lease parameters and BINL boot information, identical for OFFER and ACK.
void DhcpResponder::add_boot_fields(DhcpMessage& reply, const DhcpMessage& req) const {
  reply.options.push_back({opt::kLeaseTime, netproto::u32_payload(settings_.lease_seconds)});
  reply.options.push_back({opt::kSubnetMask, netproto::address_payload(settings_.subnet_mask)});
  if (!settings_.router.is_unspecified()) {
    reply.options.push_back({opt::kRouter, netproto::address_payload(settings_.router)});
  }
  if (!settings_.dns.empty()) {
    reply.options.push_back({opt::kDnsServers, netproto::address_list_payload(settings_.dns)});
  }
  auto arch = netproto::client_arch(req).value_or(netproto::ClientArch{0xFFFF}).classify();
  const auto& bootfile = settings_.boot.bootfile_for(arch);
  auto next_server = settings_.boot.next_server.to_string();
  reply.siaddr = settings_.boot.next_server;
  reply.set_sname(next_server);
  reply.set_file(bootfile);
  reply.set_option(opt::kTftpServerName, next_server);
  reply.set_option(opt::kBootfileName, bootfile);
  if (netproto::is_pxe_client(req)) reply.set_option(opt::kVendorClass, "PXEClient");
}

DhcpMessage DhcpResponder::handle_discover(const DhcpMessage& msg, Clock::time_point now) {
  if (settings_.pxe_only && !netproto::is_pxe_client(msg)) {
    throw DhcpServerError(DhcpServerErrc::kNotPxe);
  }
  auto ip = leases_.offer(msg.client_mac(), now + settings_.offer_hold);
  auto offer = reply_skeleton(msg, DhcpMessageType::kOffer);
  offer.yiaddr = ip;
  add_boot_fields(offer, msg);
  return offer;
}

std::optional<DhcpMessage> DhcpResponder::handle_request(const DhcpMessage& msg,
                                                         Clock::time_point now) {
  if (settings_.pxe_only && !netproto::is_pxe_client(msg)) {
    throw DhcpServerError(DhcpServerErrc::kNotPxe);
  }
  auto mac = msg.client_mac();
  auto binding = leases_.binding(mac);
  if (auto server = msg.option_address(opt::kServerId); server && *server != settings_.server_id) {
    if (binding && !binding->active) leases_.release(mac);
    return std::nullopt;
  }
  auto requested = msg.option_address(opt::kRequestedIp).value_or(msg.ciaddr);

  auto nak = [&] {
    auto reply = reply_skeleton(msg, DhcpMessageType::kNak);
    reply.flags |= DhcpMessage::kBroadcastFlag;
    return reply;
  };

  bool granted = false;
  if (binding) {
    granted = binding->ip == requested &&
              leases_.activate(mac, requested, now + std::chrono::seconds(settings_.lease_seconds));
  } else if (!requested.is_unspecified() && leases_.in_pool(requested) &&
             !leases_.holder(requested)) {
    // INIT-REBOOT of a client we have no record of, asking for a free pool address.
    granted = leases_.activate(mac, requested, now + std::chrono::seconds(settings_.lease_seconds));
  }
  if (!granted) return nak();

  auto ack = reply_skeleton(msg, DhcpMessageType::kAck);
  ack.ciaddr = msg.ciaddr;
  ack.yiaddr = requested;
  add_boot_fields(ack, msg);
  return ack;
}

std::optional<DhcpMessage> DhcpResponder::handle(const DhcpMessage& msg, Clock::time_point now) {
  if (msg.op != DhcpMessage::kBootRequest) return std::nullopt;
  auto type = msg.message_type();
  if (!type) return std::nullopt;
  switch (*type) {
    case DhcpMessageType::kDiscover: return handle_discover(msg, now);
    case DhcpMessageType::kRequest: return handle_request(msg, now);
    case DhcpMessageType::kRelease: leases_.release(msg.client_mac()); return std::nullopt;
    default: return std::nullopt;
  }
}

UdpEndpoint reply_destination(const DhcpMessage& req, const DhcpMessage& reply,
                              const UdpEndpoint& from, std::uint16_t client_port) {
  if (!req.giaddr.is_unspecified()) return {req.giaddr, 67};
  if (from.port != client_port) return from;
  if (reply.message_type() == DhcpMessageType::kNak) return {kBroadcastAddress, client_port};
  if (!req.ciaddr.is_unspecified()) return {req.ciaddr, client_port};
  return {kBroadcastAddress, client_port};
}

DhcpService::DhcpService(DhcpSettings settings, LeaseTable& leases, ClientRegistry* registry,
                         session::EventSink events)
    : responder_(std::move(settings), leases), registry_(registry), events_(std::move(events)) {}

DhcpService::~DhcpService() { stop(); }

void DhcpService::bind(Ipv4Address address, std::uint16_t port) {
  socket_ = UdpSocket::bind(address, port);
  socket_.enable_broadcast();
}

std::uint16_t DhcpService::port() const { return socket_.local_endpoint().port; }

void DhcpService::start() {
  worker_ = std::jthread([this](std::stop_token st) { run(st); });
}

void DhcpService::stop() {
  if (worker_.joinable()) {
    worker_.request_stop();
    worker_.join();
  }
  socket_.close();
}

void DhcpService::run(std::stop_token stop) {
  auto last_expiry = Clock::now();
  while (!stop.stop_requested()) {
    if (auto d = socket_.receive(std::chrono::milliseconds(100))) handle_datagram(*d);
    auto now = Clock::now();
    if (now - last_expiry > std::chrono::seconds(1)) {
      if (auto n = responder_.expire_leases(now)) spdlog::debug("dhcp: reclaimed {} leases", n);
      last_expiry = now;
    }
  }
}

void DhcpService::handle_datagram(const Datagram& d) {
  DhcpMessage msg;
  try {
    msg = netproto::decode_dhcp(d.bytes);
  } catch (const netproto::DhcpError& e) {
    spdlog::debug("dhcp: dropping datagram from {}: {}", d.from.to_string(), e.what());
    return;
  }
  if (msg.op != DhcpMessage::kBootRequest) return;
  auto type = msg.message_type();
  if (!type) return;
  auto mac = msg.client_mac();
  auto emit = [&](session::EventKind kind, std::optional<Ipv4Address> ip = std::nullopt,
                  std::optional<std::uint64_t> version = std::nullopt) {
    if (!events_) return;
    session::BootEvent e;
    e.kind = kind;
    e.mac = mac;
    e.ip = ip;
    e.manifest_version = version;
    events_(std::move(e));
  };

  bool eligible = !responder_.settings().pxe_only || netproto::is_pxe_client(msg);
  std::optional<DhcpMessage> reply;
  try {
    if (*type == netproto::DhcpMessageType::kDiscover) {
      if (eligible) {
        if (registry_ != nullptr) registry_->begin_boot(mac);
        emit(session::EventKind::kDhcpDiscover);
      }
      reply = responder_.handle_discover(msg, Clock::now());
      emit(session::EventKind::kDhcpOffer, reply->yiaddr);
    } else if (*type == netproto::DhcpMessageType::kRequest) {
      if (eligible) emit(session::EventKind::kDhcpRequest);
      reply = responder_.handle_request(msg, Clock::now());
      if (reply && reply->message_type() == netproto::DhcpMessageType::kAck) {
        std::optional<std::uint64_t> version;
        if (registry_ != nullptr) {
          try {
            version = registry_->bind(mac, reply->yiaddr).version();
          } catch (const std::exception& e) {
            spdlog::warn("dhcp: no snapshot to pin for {}: {}", mac.to_string(), e.what());
          }
        }
        emit(session::EventKind::kDhcpAck, reply->yiaddr, version);
      }
    } else {
      reply = responder_.handle(msg, Clock::now());
    }
  } catch (const DhcpServerError& e) {
    if (e.code() == DhcpServerErrc::kPoolExhausted) {
      spdlog::warn("dhcp: {} from {}", e.what(), mac.to_string());
    } else {
      spdlog::debug("dhcp: ignoring {}: {}", mac.to_string(), e.what());
    }
    return;
  }
  if (!reply) return;
  socket_.send_to(reply_destination(msg, *reply, d.from), netproto::encode_dhcp(*reply));
}

}  // namespace colaboot::dhcp
