// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/synthetic.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <random>

namespace colaboot::sim {

SyntheticSizes SyntheticSizes::small() {
  SyntheticSizes s;
  s.bootloader = 16 * 1024;
  s.kernel = 96 * 1024;
  s.initrd = 160 * 1024;
  s.image = 1024 * 1024;
  return s;
}

std::vector<std::uint8_t> prng_bytes(std::uint64_t seed, std::uint64_t size) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> out(size);
  std::size_t i = 0;
  for (; i + 8 <= out.size(); i += 8) {
    auto v = rng();
    for (int b = 0; b < 8; ++b) out[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  auto v = rng();
  for (; i < out.size(); ++i, v >>= 8) out[i] = static_cast<std::uint8_t>(v);
  return out;
}

std::string bootloader_config(const std::string& image_url, std::uint64_t size) {
  std::string text = std::string("DEFAULT colaboot\n") + "LABEL colaboot\n" + "  KERNEL " +
                     kKernel + "\n" + "  APPEND initrd=" + kInitrd + " colaboot.image=" +
                     image_url + "\n";
  // Pad with comment lines: "#...#\n".
  while (text.size() + 2 <= size) {
    auto line = std::min<std::uint64_t>(size - text.size(), 80);
    if (size - text.size() - line == 1) --line;  // never leave a 1-byte gap
    text += std::string(line - 1, '#') + "\n";
  }
  return text;
}

std::vector<store::PublishedAsset> synthetic_assets(const SyntheticSizes& sizes,
                                                    std::uint64_t seed,
                                                    const std::string& image_url) {
  using store::AssetRole;
  auto cfg = bootloader_config(image_url, sizes.config);
  return {
      {kBootloaderBios, AssetRole::kBootloader, prng_bytes(seed * 16 + 1, sizes.bootloader)},
      {kBootloaderUefi, AssetRole::kBootloader, prng_bytes(seed * 16 + 2, sizes.bootloader)},
      {kDefaultConfig, AssetRole::kConfig, std::vector<std::uint8_t>(cfg.begin(), cfg.end())},
      {kKernel, AssetRole::kKernel, prng_bytes(seed * 16 + 3, sizes.kernel)},
      {kInitrd, AssetRole::kInitrd, prng_bytes(seed * 16 + 4, sizes.initrd)},
      {kImage, AssetRole::kImage, prng_bytes(seed * 16 + 5, sizes.image)},
  };
}

store::SyncReport install_version(store::AssetStore& store, std::uint64_t version,
                                  const std::vector<store::PublishedAsset>& assets) {
  namespace fs = std::filesystem;
  static std::atomic<unsigned> counter{0};
  auto dir = fs::temp_directory_path() /
             ("colaboot-publish-" + std::to_string(::getpid()) + "-" +
              std::to_string(counter.fetch_add(1)));
  fs::remove_all(dir);
  store::publish_to_directory(dir, version, assets);
  store::DirectorySource source(dir);
  store::SyncReport report;
  try {
    report = store::sync_once(source, store);
  } catch (...) {
    fs::remove_all(dir);
    throw;
  }
  fs::remove_all(dir);
  return report;
}

}  // namespace colaboot::sim
