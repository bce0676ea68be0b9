// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// Remote asset sources and the one-shot sync that mirrors them into a local store.
// A remote exposes the same layout over a directory tree or HTTP:
//   manifest.json
//   objects/<sha256>
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "colaboot/asset_store.hpp"
#include "colaboot/manifest.hpp"

namespace colaboot::store {

enum class SyncErrc { kRemoteUnreachable, kVerificationFailed };

class SyncError : public std::runtime_error {
 public:
  SyncError(SyncErrc code, const std::string& detail);
  SyncErrc code() const { return code_; }

 private:
  SyncErrc code_;
};

class RemoteSource {
 public:
  virtual ~RemoteSource() = default;
  /// Raw manifest text. Throws SyncError{kRemoteUnreachable}.
  virtual std::string fetch_manifest() = 0;
  /// Streams object bytes into `sink`. Throws SyncError.
  virtual void fetch_object(std::string_view digest, const ByteSink& sink) = 0;
  virtual std::string describe() const = 0;
};

class DirectorySource final : public RemoteSource {
 public:
  explicit DirectorySource(std::filesystem::path root) : root_(std::move(root)) {}
  std::string fetch_manifest() override;
  void fetch_object(std::string_view digest, const ByteSink& sink) override;
  std::string describe() const override { return root_.string(); }

 private:
  std::filesystem::path root_;
};

class HttpSource final : public RemoteSource {
 public:
  /// `base_url` like "http://host:port/prefix".
  explicit HttpSource(std::string base_url);
  std::string fetch_manifest() override;
  void fetch_object(std::string_view digest, const ByteSink& sink) override;
  std::string describe() const override { return base_url_; }

 private:
  std::string base_url_;
  std::string host_;  // scheme://host:port
  std::string prefix_;
};

/// "http://..." selects HttpSource; "file://..." or a bare path selects DirectorySource.
std::unique_ptr<RemoteSource> make_remote_source(std::string_view spec);

/// Fetches and invariant-checks the remote manifest.
AssetManifest load_manifest(RemoteSource& source);

struct SyncReport {
  std::size_t fetched = 0;
  std::uint64_t bytes = 0;
  std::uint64_t remote_version = 0;
  std::optional<std::uint64_t> previous_version;
  std::optional<std::uint64_t> new_version;
};

/// Mirrors the remote into `store`: fetches only absent digests, verifies everything,
/// then activates atomically. On failure the previously active version stays active.
SyncReport sync_once(RemoteSource& remote, AssetStore& store);

struct PublishedAsset {
  std::string path;
  AssetRole role = AssetRole::kConfig;
  std::vector<std::uint8_t> bytes;
};

/// Writes a remote-layout tree (manifest.json + objects/) and returns its manifest.
AssetManifest publish_to_directory(const std::filesystem::path& dir, std::uint64_t version,
                                   const std::vector<PublishedAsset>& assets);

}  // namespace colaboot::store
