// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/client_registry.hpp"

namespace colaboot {

ClientRegistry::ClientRegistry(std::shared_ptr<const store::AssetStore> store)
    : store_(std::move(store)) {}

std::string ClientRegistry::key_for(const ClientRef& ref) const {
  if (ref.mac) return ref.mac->to_string();
  if (ref.ip) {
    if (auto it = key_by_ip_.find(*ref.ip); it != key_by_ip_.end()) return it->second;
    return "ip:" + ref.ip->to_string();
  }
  return {};
}

void ClientRegistry::begin_boot(const MacAddress& mac) {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(mac.to_string());
  if (it == entries_.end()) return;
  if (it->second.ip) key_by_ip_.erase(*it->second.ip);
  entries_.erase(it);
}

store::Snapshot ClientRegistry::bind(const MacAddress& mac, Ipv4Address ip) {
  std::lock_guard lock(mutex_);
  auto key = mac.to_string();
  auto& entry = entries_[key];
  if (entry.ip && *entry.ip != ip) key_by_ip_.erase(*entry.ip);
  entry.ip = ip;
  key_by_ip_[ip] = key;
  if (!entry.snapshot) entry.snapshot = store_->open_snapshot();
  return *entry.snapshot;
}

store::Snapshot ClientRegistry::snapshot_for(const ClientRef& client) {
  std::lock_guard lock(mutex_);
  auto key = key_for(client);
  if (key.empty()) return store_->open_snapshot();
  auto& entry = entries_[key];
  if (!entry.snapshot) entry.snapshot = store_->open_snapshot();
  return *entry.snapshot;
}

std::optional<MacAddress> ClientRegistry::resolve_mac(const ClientRef& ref) const {
  std::lock_guard lock(mutex_);
  if (ref.mac) return ref.mac;
  auto key = key_for(ref);
  return MacAddress::parse(key);
}

ClientRegistry::ImageProgress ClientRegistry::add_image_bytes(const ClientRef& client,
                                                              std::uint64_t bytes,
                                                              std::uint64_t image_size) {
  std::lock_guard lock(mutex_);
  auto key = key_for(client);
  auto& entry = entries_[key];
  ImageProgress p;
  entry.image_bytes += bytes;
  p.total = entry.image_bytes;
  if (!entry.first_byte_sent && bytes > 0) {
    entry.first_byte_sent = true;
    p.first_byte = true;
  }
  if (!entry.complete_sent && entry.image_bytes >= image_size) {
    entry.complete_sent = true;
    p.complete = true;
  }
  return p;
}

std::size_t ClientRegistry::pinned_count() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [key, entry] : entries_) n += entry.snapshot.has_value();
  return n;
}

}  // namespace colaboot
