// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// Software PXE client: DHCP, TFTP and HTTP over real sockets, verifying every byte
// against the manifest the server advertises. Used as the end-to-end oracle.
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "colaboot/addr.hpp"
#include "colaboot/manifest.hpp"
#include "colaboot/udp_socket.hpp"

namespace colaboot::sim {

enum class SimErrc {
  kPhaseTimeout,
  kDigestMismatch,
  kOfferMissingBootfile,
  kTransferFailed,
  kProtocolError,
};

std::string_view to_string(SimErrc code);

class SimError : public std::runtime_error {
 public:
  SimError(SimErrc code, std::string phase, const std::string& detail);
  SimErrc code() const { return code_; }
  const std::string& phase() const { return phase_; }

 private:
  SimErrc code_;
  std::string phase_;
};

/// Datagram socket wrapper that drops packets in both directions with probability
/// `loss_rate`, drawing every decision from one seeded generator and recording it.
class LossyChannel {
 public:
  LossyChannel(UdpSocket socket, double loss_rate, std::mt19937_64& rng,
               std::vector<std::string>* trace, std::string label);

  void send_to(const UdpEndpoint& to, std::span<const std::uint8_t> bytes,
               std::string_view what);
  /// Waits up to `timeout` for a datagram that survives the loss draw.
  std::optional<Datagram> receive(std::chrono::milliseconds timeout,
                                  const std::function<std::string(const Datagram&)>& describe);
  UdpEndpoint local_endpoint() const { return socket_.local_endpoint(); }

 private:
  bool drop();

  UdpSocket socket_;
  double loss_rate_;
  std::mt19937_64& rng_;
  std::vector<std::string>* trace_;
  std::string label_;
};

struct Endpoints {
  Ipv4Address server{127, 0, 0, 1};
  std::uint16_t dhcp_port = 67;
  std::uint16_t tftp_port = 69;
  /// Source address for DHCP before a lease exists.
  Ipv4Address client_bind{127, 0, 0, 1};
};

struct SimClientConfig {
  MacAddress mac;
  std::uint16_t arch = 0;
  double loss_rate = 0.0;
  std::optional<std::uint16_t> blksize_request = 1428;
  std::uint64_t seed = 0;

  std::chrono::milliseconds dhcp_timeout{500};
  unsigned dhcp_attempts = 6;
  std::chrono::milliseconds rrq_timeout{1000};
  unsigned rrq_attempts = 6;
  /// Silence after which an in-progress TFTP transfer is abandoned.
  std::chrono::milliseconds tftp_give_up{35000};
  std::uint64_t http_range_size = 8 * 1024 * 1024;
  /// Binds TFTP and HTTP sockets to the leased address, as a real client would.
  bool use_leased_address = true;
  /// Called on entering each phase; tests use it to pause a boot midway.
  std::function<void(std::string_view phase)> on_phase;
};

struct FetchedAsset {
  std::string path;
  std::uint64_t bytes = 0;
  std::string digest;
};

struct BootResult {
  MacAddress mac;
  std::optional<Ipv4Address> lease;
  std::string bootfile;
  std::uint64_t manifest_version = 0;
  std::map<store::AssetRole, FetchedAsset> fetched;
  std::vector<std::pair<std::string, double>> durations;  // phase, seconds
  double total_seconds = 0;
  std::uint64_t tftp_bytes = 0;
  std::uint64_t image_bytes = 0;
  bool ok = false;
  std::optional<SimErrc> error;
  std::string failed_phase;
  std::string error_detail;
  /// Packet-level trace of what the client sent and saw, including loss decisions.
  std::vector<std::string> trace;
};

nlohmann::json to_json(const BootResult& result);

/// Fleet member `index` gets a distinct locally administered MAC.
MacAddress fleet_mac(std::uint32_t index);

BootResult run_boot(const SimClientConfig& cfg, const Endpoints& endpoints);

/// Boots `n` clients concurrently; client i uses fleet_mac(i) and seed cfg.seed + i.
std::vector<BootResult> run_fleet(std::size_t n, const SimClientConfig& cfg,
                                  const Endpoints& endpoints);

struct BootloaderConfig {
  std::string kernel;
  std::string initrd;
  std::string image_url;
};

/// Reads KERNEL and the APPEND line's initrd= and colaboot.image= entries from the
/// default label. Throws SimError{kProtocolError} when any is missing.
BootloaderConfig parse_bootloader_config(std::string_view text);

}  // namespace colaboot::sim
