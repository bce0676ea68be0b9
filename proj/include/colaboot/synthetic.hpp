// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded synthetic boot assets for simulation and tests.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "colaboot/asset_store.hpp"
#include "colaboot/sync.hpp"

namespace colaboot::sim {

inline constexpr char kBootloaderBios[] = "pxelinux.0";
inline constexpr char kBootloaderUefi[] = "bootx64.efi";
inline constexpr char kDefaultConfig[] = "pxelinux.cfg/default";
inline constexpr char kKernel[] = "vmlinuz";
inline constexpr char kInitrd[] = "initrd.img";
inline constexpr char kImage[] = "os-image.sqfs";

struct SyntheticSizes {
  std::uint64_t bootloader = 64 * 1024;
  std::uint64_t config = 1024;
  std::uint64_t kernel = 8 * 1024 * 1024;
  std::uint64_t initrd = 16 * 1024 * 1024;
  std::uint64_t image = 64 * 1024 * 1024;

  /// Small assets for loss and fleet tests where transfer volume only costs time.
  static SyntheticSizes small();
};

/// Deterministic pseudo-random bytes (mt19937_64).
std::vector<std::uint8_t> prng_bytes(std::uint64_t seed, std::uint64_t size);

/// pxelinux-style config naming kernel, initrd and image URL, padded with comment
/// lines to exactly `size` bytes when it fits.
std::string bootloader_config(const std::string& image_url, std::uint64_t size);

/// Bootloaders for BIOS and UEFI x64, config, kernel, initrd and image. Content depends
/// only on `seed` and sizes.
std::vector<store::PublishedAsset> synthetic_assets(const SyntheticSizes& sizes,
                                                    std::uint64_t seed,
                                                    const std::string& image_url);

/// Publishes `assets` as `version` into a scratch remote and syncs it into `store`.
store::SyncReport install_version(store::AssetStore& store, std::uint64_t version,
                                  const std::vector<store::PublishedAsset>& assets);

}  // namespace colaboot::sim
