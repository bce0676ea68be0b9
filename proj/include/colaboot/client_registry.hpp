// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "colaboot/addr.hpp"
#include "colaboot/asset_store.hpp"

namespace colaboot {

/// Identifies a client to the registry: the MAC when known, else its address.
struct ClientRef {
  std::optional<MacAddress> mac;
  std::optional<Ipv4Address> ip;
};

/// Per-boot client bookkeeping shared by the DHCP, TFTP and image services.
///
/// A client boot pins one store snapshot at DHCP ACK (or on first contact) and keeps
/// it until the client sends a fresh DISCOVER, so every byte of one boot comes from a
/// single manifest version even if a sync activates a newer one mid-boot.
class ClientRegistry {
 public:
  explicit ClientRegistry(std::shared_ptr<const store::AssetStore> store);

  /// A DISCOVER starts a new boot: drops the client's pin and progress counters.
  void begin_boot(const MacAddress& mac);
  /// Records the leased address and pins the current snapshot unless already pinned.
  store::Snapshot bind(const MacAddress& mac, Ipv4Address ip);
  /// Pinned snapshot for the client, pinning the current one on first contact.
  store::Snapshot snapshot_for(const ClientRef& client);
  /// Returns the MAC when `ref` resolves to a known client.
  std::optional<MacAddress> resolve_mac(const ClientRef& ref) const;

  struct ImageProgress {
    bool first_byte = false;  // this call delivered the first image bytes of the boot
    bool complete = false;    // this call crossed the full image size
    std::uint64_t total = 0;
  };
  /// Accumulates image bytes delivered to the client; each flag fires once per boot.
  ImageProgress add_image_bytes(const ClientRef& client, std::uint64_t bytes,
                                std::uint64_t image_size);

  std::size_t pinned_count() const;

 private:
  struct Entry {
    std::optional<store::Snapshot> snapshot;
    std::optional<Ipv4Address> ip;
    std::uint64_t image_bytes = 0;
    bool first_byte_sent = false;
    bool complete_sent = false;
  };

  std::string key_for(const ClientRef& ref) const;

  std::shared_ptr<const store::AssetStore> store_;
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
  std::map<Ipv4Address, std::string> key_by_ip_;
};

}  // namespace colaboot
