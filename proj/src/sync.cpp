// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/sync.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <httplib.h>

#include "colaboot/digest.hpp"

namespace colaboot::store {

namespace fs = std::filesystem;

namespace {

std::string_view to_string(SyncErrc code) {
  switch (code) {
    case SyncErrc::kRemoteUnreachable: return "remote unreachable";
    case SyncErrc::kVerificationFailed: return "verification failed";
  }
  return "sync error";
}

}  // namespace

SyncError::SyncError(SyncErrc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

std::string DirectorySource::fetch_manifest() {
  std::ifstream in(root_ / "manifest.json", std::ios::binary);
  if (!in) throw SyncError(SyncErrc::kRemoteUnreachable, "no manifest.json under " + describe());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void DirectorySource::fetch_object(std::string_view digest, const ByteSink& sink) {
  if (!is_sha256_hex(digest)) throw SyncError(SyncErrc::kVerificationFailed, "bad digest");
  auto path = root_ / "objects" / std::string(digest);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SyncError(SyncErrc::kVerificationFailed, "object missing: " + path.string());
  std::vector<std::uint8_t> buf(1 << 16);
  while (in) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    auto n = static_cast<std::size_t>(in.gcount());
    if (n > 0) sink(std::span<const std::uint8_t>(buf.data(), n));
  }
}

HttpSource::HttpSource(std::string base_url) : base_url_(std::move(base_url)) {
  auto scheme_end = base_url_.find("://");
  auto path_start =
      base_url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) {
    host_ = base_url_;
  } else {
    host_ = base_url_.substr(0, path_start);
    prefix_ = base_url_.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
}

std::string HttpSource::fetch_manifest() {
  httplib::Client cli(host_);
  cli.set_connection_timeout(5);
  auto res = cli.Get(prefix_ + "/manifest.json");
  if (!res) {
    throw SyncError(SyncErrc::kRemoteUnreachable,
                    describe() + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw SyncError(SyncErrc::kRemoteUnreachable,
                    describe() + ": manifest status " + std::to_string(res->status));
  }
  return res->body;
}

void HttpSource::fetch_object(std::string_view digest, const ByteSink& sink) {
  if (!is_sha256_hex(digest)) throw SyncError(SyncErrc::kVerificationFailed, "bad digest");
  httplib::Client cli(host_);
  cli.set_connection_timeout(5);
  int status = 0;
  auto res = cli.Get(
      prefix_ + "/objects/" + std::string(digest),
      [&](const httplib::Response& r) {
        status = r.status;
        return r.status == 200;
      },
      [&](const char* data, std::size_t len) {
        sink(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(data), len));
        return true;
      });
  if (status == 404) {
    throw SyncError(SyncErrc::kVerificationFailed, "object missing: " + std::string(digest));
  }
  if (!res || status != 200) {
    throw SyncError(SyncErrc::kRemoteUnreachable,
                    describe() + ": object fetch failed for " + std::string(digest));
  }
}

std::unique_ptr<RemoteSource> make_remote_source(std::string_view spec) {
  if (spec.starts_with("http://")) return std::make_unique<HttpSource>(std::string(spec));
  if (spec.starts_with("file://")) spec.remove_prefix(7);
  return std::make_unique<DirectorySource>(fs::path(std::string(spec)));
}

AssetManifest load_manifest(RemoteSource& source) {
  return parse_manifest(source.fetch_manifest());
}

SyncReport sync_once(RemoteSource& remote, AssetStore& store) {
  SyncReport report;
  AssetManifest manifest;
  try {
    manifest = load_manifest(remote);
  } catch (const StoreError& e) {
    throw SyncError(SyncErrc::kVerificationFailed, e.what());
  }
  report.remote_version = manifest.version;

  AssetStore::Writer writer(store);
  report.previous_version = store.active_version();
  if (report.previous_version && manifest.version <= *report.previous_version) return report;

  std::map<std::string, std::uint64_t> wanted;  // digest -> size, deduplicated
  for (const auto& e : manifest.assets) wanted.emplace(e.digest, e.size);

  for (const auto& [digest, size] : wanted) {
    if (store.has_object(digest)) continue;
    std::uint64_t written = 0;
    bool ok = writer.install_object(
        digest, [&](const ByteSink& sink) { remote.fetch_object(digest, sink); }, &written);
    if (!ok || written != size) {
      throw SyncError(SyncErrc::kVerificationFailed, "content mismatch for object " + digest);
    }
    ++report.fetched;
    report.bytes += written;
  }

  auto check = verify(manifest, store.objects_dir());
  if (!check.ok()) {
    for (const auto& e : check.entries) {
      if (e.status != VerificationStatus::kOk) {
        throw SyncError(SyncErrc::kVerificationFailed,
                        e.path + ": " + std::string(to_string(e.status)));
      }
    }
  }
  writer.write_manifest(manifest);
  writer.activate(manifest.version);
  report.new_version = manifest.version;
  return report;
}

AssetManifest publish_to_directory(const fs::path& dir, std::uint64_t version,
                                   const std::vector<PublishedAsset>& assets) {
  fs::create_directories(dir / "objects");
  AssetManifest manifest;
  manifest.version = version;
  manifest.created_at = utc_timestamp_now();
  for (const auto& a : assets) {
    AssetEntry e{a.path, a.bytes.size(), sha256_hex(a.bytes), a.role};
    auto object = dir / "objects" / e.digest;
    if (!fs::exists(object)) {
      std::ofstream out(object, std::ios::binary);
      out.write(reinterpret_cast<const char*>(a.bytes.data()),
                static_cast<std::streamsize>(a.bytes.size()));
      if (!out) throw StoreError(StoreErrc::kIo, "cannot write " + object.string());
    }
    manifest.assets.push_back(std::move(e));
  }
  validate_manifest(manifest);
  write_file_atomically(dir / "manifest.json", serialize_manifest(manifest));
  return manifest;
}

}  // namespace colaboot::store
