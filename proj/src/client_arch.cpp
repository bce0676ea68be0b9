// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/client_arch.hpp"

namespace colaboot::netproto {

std::string_view to_string(ArchClass cls) {
  switch (cls) {
    case ArchClass::kLegacyBios: return "bios";
    case ArchClass::kUefiX64: return "uefi-x64";
    case ArchClass::kUefiIa32: return "uefi-ia32";
    case ArchClass::kUnknown: return "unknown";
  }
  return "unknown";
}

std::optional<ArchClass> arch_class_from_string(std::string_view name) {
  for (auto cls : {ArchClass::kLegacyBios, ArchClass::kUefiX64, ArchClass::kUefiIa32,
                   ArchClass::kUnknown}) {
    if (to_string(cls) == name) return cls;
  }
  return std::nullopt;
}

ArchClass ClientArch::classify() const {
  switch (code) {
    case 0: return ArchClass::kLegacyBios;
    case 6: return ArchClass::kUefiIa32;
    case 7:
    case 9: return ArchClass::kUefiX64;
    default: return ArchClass::kUnknown;
  }
}

std::optional<ClientArch> client_arch(const DhcpMessage& msg) {
  const auto* opt = msg.find_option(dhcp_option::kClientArch);
  if (opt == nullptr || opt->payload.size() < 2 || opt->payload.size() % 2 != 0) {
    return std::nullopt;
  }
  return ClientArch{static_cast<std::uint16_t>((opt->payload[0] << 8) | opt->payload[1])};
}

}  // namespace colaboot::netproto
