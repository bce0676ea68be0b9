// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "colaboot/dhcp_message.hpp"

namespace colaboot::netproto {

enum class ArchClass { kLegacyBios, kUefiX64, kUefiIa32, kUnknown };

std::string_view to_string(ArchClass cls);
std::optional<ArchClass> arch_class_from_string(std::string_view name);

/// Client system architecture as carried in DHCP option 93.
struct ClientArch {
  std::uint16_t code = 0;

  ArchClass classify() const;
  bool operator==(const ClientArch&) const = default;
};

/// First architecture listed in option 93, if present and well-formed.
std::optional<ClientArch> client_arch(const DhcpMessage& msg);

}  // namespace colaboot::netproto
