// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace colaboot::store {

enum class AssetRole { kBootloader, kKernel, kInitrd, kImage, kConfig };

std::string_view to_string(AssetRole role);
std::optional<AssetRole> asset_role_from_string(std::string_view name);

struct AssetEntry {
  std::string path;
  std::uint64_t size = 0;
  std::string digest;  // lowercase SHA-256 hex
  AssetRole role = AssetRole::kConfig;

  bool operator==(const AssetEntry&) const = default;
};

struct AssetManifest {
  std::uint64_t version = 0;
  std::string created_at;  // RFC 3339 UTC
  std::vector<AssetEntry> assets;

  const AssetEntry* find(std::string_view path) const;
  /// First entry with the role; kernel, initrd and image are unique per manifest.
  const AssetEntry* find_role(AssetRole role) const;

  bool operator==(const AssetManifest&) const = default;
};

enum class StoreErrc {
  kManifestMalformed,
  kDigestFieldInvalid,
  kUnknownPath,
  kOutOfBounds,
  kNoActiveVersion,
  kIo,
};

std::string_view to_string(StoreErrc code);

class StoreError : public std::runtime_error {
 public:
  StoreError(StoreErrc code, const std::string& detail);
  StoreErrc code() const { return code_; }

 private:
  StoreErrc code_;
};

/// Parses and invariant-checks manifest JSON. Throws StoreError.
AssetManifest parse_manifest(std::string_view json);
/// Checks the invariants parse_manifest enforces on an in-memory manifest.
void validate_manifest(const AssetManifest& manifest);
/// Canonical form: keys in declaration order, two-space indent, trailing newline.
std::string serialize_manifest(const AssetManifest& manifest);

/// Relative, '/'-separated, no empty, "." or ".." segments.
bool is_valid_virtual_path(std::string_view path);

/// Maps a client-supplied name onto the virtual namespace: strips leading '/',
/// converts '\' to '/'. Returns nullopt when the name would escape the root.
std::optional<std::string> normalize_request_path(std::string_view requested);

std::string utc_timestamp_now();

enum class VerificationStatus { kOk, kMissing, kSizeMismatch, kDigestMismatch };

std::string_view to_string(VerificationStatus status);

struct VerificationEntry {
  std::string path;
  VerificationStatus status = VerificationStatus::kOk;
};

struct VerificationReport {
  std::uint64_t version = 0;
  std::vector<VerificationEntry> entries;

  bool ok() const;
};

/// Checks every entry against content-addressed blobs `objects_dir/<digest>`.
VerificationReport verify(const AssetManifest& manifest, const std::filesystem::path& objects_dir);

}  // namespace colaboot::store
