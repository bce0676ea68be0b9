// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// On-disk layout:
//   <root>/objects/<sha256>          immutable content-addressed blobs
//   <root>/manifests/<version>.json  canonical manifests
//   <root>/ACTIVE                    active version number, swapped by rename
//   <root>/.sync.lock                writer exclusion (flock)
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "colaboot/manifest.hpp"

namespace colaboot::store {

using ByteSink = std::function<void(std::span<const std::uint8_t>)>;
using ByteProducer = std::function<void(const ByteSink&)>;

/// Read-only view of one asset's bytes.
class AssetBlob {
 public:
  virtual ~AssetBlob() = default;
  virtual std::uint64_t size() const = 0;
  /// Copies up to out.size() bytes starting at offset; returns the count copied.
  virtual std::size_t read(std::uint64_t offset, std::span<std::uint8_t> out) const = 0;
};

/// Blob backed by an O_RDONLY descriptor, which stays valid if the path is later unlinked.
class FileBlob final : public AssetBlob {
 public:
  static std::shared_ptr<FileBlob> open(const std::filesystem::path& path);
  ~FileBlob() override;
  FileBlob(const FileBlob&) = delete;
  FileBlob& operator=(const FileBlob&) = delete;

  std::uint64_t size() const override { return size_; }
  std::size_t read(std::uint64_t offset, std::span<std::uint8_t> out) const override;

 private:
  FileBlob(int fd, std::uint64_t size) : fd_(fd), size_(size) {}
  int fd_;
  std::uint64_t size_;
};

class MemoryBlob final : public AssetBlob {
 public:
  explicit MemoryBlob(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}
  std::uint64_t size() const override { return bytes_.size(); }
  std::size_t read(std::uint64_t offset, std::span<std::uint8_t> out) const override;

 private:
  std::vector<std::uint8_t> bytes_;
};

/// Immutable view of one activated manifest version.
class Snapshot {
 public:
  Snapshot(std::shared_ptr<const AssetManifest> manifest, std::filesystem::path objects_dir)
      : manifest_(std::move(manifest)), objects_dir_(std::move(objects_dir)) {}

  std::uint64_t version() const { return manifest_->version; }
  const AssetManifest& manifest() const { return *manifest_; }

  /// Throws StoreError{kUnknownPath}.
  const AssetEntry& entry(std::string_view path) const;
  std::shared_ptr<const AssetBlob> open(std::string_view path) const;
  /// Throws StoreError{kUnknownPath, kOutOfBounds}.
  std::vector<std::uint8_t> read_asset(std::string_view path, std::uint64_t offset,
                                       std::uint64_t length) const;

 private:
  std::shared_ptr<const AssetManifest> manifest_;
  std::filesystem::path objects_dir_;
};

struct GcReport {
  std::size_t objects_removed = 0;
  std::uint64_t bytes_removed = 0;
  std::size_t manifests_removed = 0;
};

class AssetStore {
 public:
  /// Opens an existing store without touching the filesystem.
  explicit AssetStore(std::filesystem::path root);

  /// Creates the directory skeleton if absent.
  static AssetStore create(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path objects_dir() const { return root_ / "objects"; }
  std::filesystem::path object_path(std::string_view digest) const;
  std::filesystem::path manifest_path(std::uint64_t version) const;

  bool exists() const;
  std::optional<std::uint64_t> active_version() const;
  bool has_object(std::string_view digest) const;

  /// Throws StoreError{kNoActiveVersion} when nothing is activated yet.
  Snapshot open_snapshot() const;
  std::shared_ptr<const AssetManifest> load_version(std::uint64_t version) const;

  /// Exclusive writer handle; at most one exists per store across processes.
  class Writer {
   public:
    explicit Writer(AssetStore& store);
    ~Writer();
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    /// Streams a blob into objects/ under a temp name, renaming only when the digest matches.
    /// Returns false (and leaves nothing behind) on mismatch.
    bool install_object(std::string_view digest, const ByteProducer& producer,
                        std::uint64_t* bytes_written = nullptr);
    void write_manifest(const AssetManifest& manifest);
    /// Atomically repoints ACTIVE. Requires version > active version.
    void activate(std::uint64_t version);
    GcReport gc();

   private:
    AssetStore& store_;
    int lock_fd_ = -1;
  };

 private:
  std::filesystem::path root_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::uint64_t, std::shared_ptr<const AssetManifest>> cache_;
};

/// Writes `contents` to `target` via temp file + rename.
void write_file_atomically(const std::filesystem::path& target, std::string_view contents);

}  // namespace colaboot::store
