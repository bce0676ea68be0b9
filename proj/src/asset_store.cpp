// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/asset_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "colaboot/digest.hpp"

namespace colaboot::store {

namespace fs = std::filesystem;

namespace {

std::string read_small_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError(StoreErrc::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_name(const fs::path& target) {
  static std::atomic<unsigned> counter{0};
  return target.string() + ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1));
}

void write_all(int fd, std::span<const std::uint8_t> data, const fs::path& path) {
  while (!data.empty()) {
    auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StoreError(StoreErrc::kIo, "write failed for " + path.string() + ": " +
                                           std::strerror(errno));
    }
    data = data.subspan(static_cast<std::size_t>(n));
  }
}

}  // namespace

std::shared_ptr<FileBlob> FileBlob::open(const fs::path& path) {
  int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) throw StoreError(StoreErrc::kIo, "cannot open " + path.string());
  struct stat st {};
  if (::fstat(fd, &st) != 0) {
    ::close(fd);
    throw StoreError(StoreErrc::kIo, "cannot stat " + path.string());
  }
  return std::shared_ptr<FileBlob>(new FileBlob(fd, static_cast<std::uint64_t>(st.st_size)));
}

FileBlob::~FileBlob() { ::close(fd_); }

std::size_t FileBlob::read(std::uint64_t offset, std::span<std::uint8_t> out) const {
  if (offset >= size_) return 0;
  auto want = std::min<std::uint64_t>(out.size(), size_ - offset);
  std::size_t done = 0;
  while (done < want) {
    auto n = ::pread(fd_, out.data() + done, want - done, static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StoreError(StoreErrc::kIo, std::string("pread failed: ") + std::strerror(errno));
    }
    if (n == 0) break;
    done += static_cast<std::size_t>(n);
  }
  return done;
}

std::size_t MemoryBlob::read(std::uint64_t offset, std::span<std::uint8_t> out) const {
  if (offset >= bytes_.size()) return 0;
  auto n = std::min<std::uint64_t>(out.size(), bytes_.size() - offset);
  std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(offset), n, out.begin());
  return static_cast<std::size_t>(n);
}

const AssetEntry& Snapshot::entry(std::string_view path) const {
  const auto* e = manifest_->find(path);
  if (e == nullptr) throw StoreError(StoreErrc::kUnknownPath, std::string(path));
  return *e;
}

std::shared_ptr<const AssetBlob> Snapshot::open(std::string_view path) const {
  return FileBlob::open(objects_dir_ / entry(path).digest);
}

std::vector<std::uint8_t> Snapshot::read_asset(std::string_view path, std::uint64_t offset,
                                               std::uint64_t length) const {
  const auto& e = entry(path);
  if (offset > e.size || length > e.size - offset) {
    throw StoreError(StoreErrc::kOutOfBounds, std::string(path));
  }
  auto blob = FileBlob::open(objects_dir_ / e.digest);
  std::vector<std::uint8_t> out(length);
  if (blob->read(offset, out) != length) {
    throw StoreError(StoreErrc::kIo, "short read on " + std::string(path));
  }
  return out;
}

AssetStore::AssetStore(fs::path root) : root_(std::move(root)) {}

AssetStore AssetStore::create(const fs::path& root) {
  fs::create_directories(root / "objects");
  fs::create_directories(root / "manifests");
  return AssetStore(root);
}

fs::path AssetStore::object_path(std::string_view digest) const {
  return objects_dir() / std::string(digest);
}

fs::path AssetStore::manifest_path(std::uint64_t version) const {
  return root_ / "manifests" / (std::to_string(version) + ".json");
}

bool AssetStore::exists() const {
  std::error_code ec;
  return fs::is_directory(objects_dir(), ec) && fs::is_directory(root_ / "manifests", ec);
}

std::optional<std::uint64_t> AssetStore::active_version() const {
  std::error_code ec;
  if (!fs::exists(root_ / "ACTIVE", ec)) return std::nullopt;
  auto text = read_small_file(root_ / "ACTIVE");
  try {
    std::size_t used = 0;
    auto v = std::stoull(text, &used);
    return v;
  } catch (const std::exception&) {
    throw StoreError(StoreErrc::kIo, "ACTIVE marker is corrupt");
  }
}

bool AssetStore::has_object(std::string_view digest) const {
  std::error_code ec;
  return fs::is_regular_file(object_path(digest), ec);
}

std::shared_ptr<const AssetManifest> AssetStore::load_version(std::uint64_t version) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(version); it != cache_.end()) return it->second;
  }
  auto manifest = std::make_shared<const AssetManifest>(
      parse_manifest(read_small_file(manifest_path(version))));
  std::lock_guard lock(cache_mutex_);
  return cache_.emplace(version, std::move(manifest)).first->second;
}

Snapshot AssetStore::open_snapshot() const {
  auto version = active_version();
  if (!version) throw StoreError(StoreErrc::kNoActiveVersion, root_.string());
  return Snapshot(load_version(*version), objects_dir());
}

void write_file_atomically(const fs::path& target, std::string_view contents) {
  auto tmp = temp_name(target);
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) throw StoreError(StoreErrc::kIo, "cannot create " + tmp);
  try {
    write_all(fd, {reinterpret_cast<const std::uint8_t*>(contents.data()), contents.size()},
              target);
    ::fsync(fd);
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), target.c_str()) != 0) {
    ::unlink(tmp.c_str());
    throw StoreError(StoreErrc::kIo, "rename to " + target.string() + " failed");
  }
}

AssetStore::Writer::Writer(AssetStore& store) : store_(store) {
  fs::create_directories(store_.objects_dir());
  fs::create_directories(store_.root() / "manifests");
  auto lock_path = store_.root() / ".sync.lock";
  lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) throw StoreError(StoreErrc::kIo, "cannot open " + lock_path.string());
  while (::flock(lock_fd_, LOCK_EX) != 0) {
    if (errno != EINTR) {
      ::close(lock_fd_);
      throw StoreError(StoreErrc::kIo, "cannot lock " + lock_path.string());
    }
  }
}

AssetStore::Writer::~Writer() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

bool AssetStore::Writer::install_object(std::string_view digest, const ByteProducer& producer,
                                        std::uint64_t* bytes_written) {
  auto target = store_.object_path(digest);
  auto tmp = temp_name(target);
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0444);
  if (fd < 0) throw StoreError(StoreErrc::kIo, "cannot create " + tmp);
  Sha256 hash;
  std::uint64_t written = 0;
  try {
    producer([&](std::span<const std::uint8_t> chunk) {
      hash.update(chunk);
      write_all(fd, chunk, target);
      written += chunk.size();
    });
    ::fsync(fd);
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (bytes_written != nullptr) *bytes_written = written;
  if (hash.hex_digest() != digest) {
    ::unlink(tmp.c_str());
    return false;
  }
  if (::rename(tmp.c_str(), target.c_str()) != 0) {
    ::unlink(tmp.c_str());
    throw StoreError(StoreErrc::kIo, "rename to " + target.string() + " failed");
  }
  return true;
}

void AssetStore::Writer::write_manifest(const AssetManifest& manifest) {
  validate_manifest(manifest);
  write_file_atomically(store_.manifest_path(manifest.version), serialize_manifest(manifest));
}

void AssetStore::Writer::activate(std::uint64_t version) {
  auto current = store_.active_version();
  if (current && version <= *current) {
    throw StoreError(StoreErrc::kManifestMalformed,
                     "version " + std::to_string(version) + " is not newer than active " +
                         std::to_string(*current));
  }
  // Parse before activating so a bad manifest file can never become active.
  store_.load_version(version);
  write_file_atomically(store_.root() / "ACTIVE", std::to_string(version) + "\n");
}

GcReport AssetStore::Writer::gc() {
  GcReport report;
  auto active = store_.active_version();
  std::set<std::string> live;
  if (active) {
    for (const auto& e : store_.load_version(*active)->assets) live.insert(e.digest);
  }
  for (const auto& dirent : fs::directory_iterator(store_.root() / "manifests")) {
    auto stem = dirent.path().stem().string();
    std::uint64_t v = 0;
    try {
      v = std::stoull(stem);
    } catch (const std::exception&) {
      continue;
    }
    if (active && v < *active) {
      fs::remove(dirent.path());
      ++report.manifests_removed;
    } else if (active && v > *active) {
      for (const auto& e : store_.load_version(v)->assets) live.insert(e.digest);
    }
  }
  for (const auto& dirent : fs::directory_iterator(store_.objects_dir())) {
    auto name = dirent.path().filename().string();
    if (live.count(name) != 0) continue;
    std::error_code ec;
    auto size = fs::file_size(dirent.path(), ec);
    if (fs::remove(dirent.path(), ec)) {
      ++report.objects_removed;
      report.bytes_removed += ec ? 0 : size;
    }
  }
  return report;
}

}  // namespace colaboot::store
