// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <set>
#include <system_error>

#include <nlohmann/json.hpp>

#include "colaboot/digest.hpp"

namespace colaboot::store {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(AssetRole role) {
  switch (role) {
    case AssetRole::kBootloader: return "bootloader";
    case AssetRole::kKernel: return "kernel";
    case AssetRole::kInitrd: return "initrd";
    case AssetRole::kImage: return "image";
    case AssetRole::kConfig: return "config";
  }
  return "config";
}

std::optional<AssetRole> asset_role_from_string(std::string_view name) {
  for (auto role : {AssetRole::kBootloader, AssetRole::kKernel, AssetRole::kInitrd,
                    AssetRole::kImage, AssetRole::kConfig}) {
    if (to_string(role) == name) return role;
  }
  return std::nullopt;
}

const AssetEntry* AssetManifest::find(std::string_view path) const {
  auto it = std::find_if(assets.begin(), assets.end(),
                         [&](const AssetEntry& e) { return e.path == path; });
  return it == assets.end() ? nullptr : &*it;
}

const AssetEntry* AssetManifest::find_role(AssetRole role) const {
  auto it = std::find_if(assets.begin(), assets.end(),
                         [&](const AssetEntry& e) { return e.role == role; });
  return it == assets.end() ? nullptr : &*it;
}

std::string_view to_string(StoreErrc code) {
  switch (code) {
    case StoreErrc::kManifestMalformed: return "manifest malformed";
    case StoreErrc::kDigestFieldInvalid: return "digest field invalid";
    case StoreErrc::kUnknownPath: return "unknown asset path";
    case StoreErrc::kOutOfBounds: return "read out of bounds";
    case StoreErrc::kNoActiveVersion: return "store has no active version";
    case StoreErrc::kIo: return "store I/O error";
  }
  return "store error";
}

StoreError::StoreError(StoreErrc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

bool is_valid_virtual_path(std::string_view path) {
  if (path.empty() || path.front() == '/' || path.back() == '/') return false;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto slash = path.find('/', start);
    auto seg = path.substr(start, slash == std::string_view::npos ? std::string_view::npos
                                                                  : slash - start);
    if (seg.empty() || seg == "." || seg == "..") return false;
    if (seg.find('\0') != std::string_view::npos || seg.find('\\') != std::string_view::npos) {
      return false;
    }
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return true;
}

std::optional<std::string> normalize_request_path(std::string_view requested) {
  std::string path(requested);
  std::replace(path.begin(), path.end(), '\\', '/');
  while (!path.empty() && path.front() == '/') path.erase(path.begin());
  if (!is_valid_virtual_path(path)) return std::nullopt;
  return path;
}

std::string utc_timestamp_now() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void validate_manifest(const AssetManifest& manifest) {
  std::set<std::string> paths;
  int kernels = 0, initrds = 0, images = 0;
  for (const auto& e : manifest.assets) {
    if (!is_valid_virtual_path(e.path)) {
      throw StoreError(StoreErrc::kManifestMalformed, "invalid path '" + e.path + "'");
    }
    if (!paths.insert(e.path).second) {
      throw StoreError(StoreErrc::kManifestMalformed, "duplicate path '" + e.path + "'");
    }
    if (!is_sha256_hex(e.digest) ||
        std::any_of(e.digest.begin(), e.digest.end(),
                    [](char c) { return std::isupper(static_cast<unsigned char>(c)); })) {
      throw StoreError(StoreErrc::kDigestFieldInvalid, "'" + e.digest + "' for " + e.path);
    }
    kernels += e.role == AssetRole::kKernel;
    initrds += e.role == AssetRole::kInitrd;
    images += e.role == AssetRole::kImage;
  }
  if (kernels != 1 || initrds != 1 || images != 1) {
    throw StoreError(StoreErrc::kManifestMalformed,
                     "exactly one kernel, initrd and image entry required");
  }
}

AssetManifest parse_manifest(std::string_view json) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw StoreError(StoreErrc::kManifestMalformed, e.what());
  }
  AssetManifest m;
  try {
    if (!doc.is_object()) throw StoreError(StoreErrc::kManifestMalformed, "not an object");
    if (!doc.at("version").is_number_unsigned()) {
      throw StoreError(StoreErrc::kManifestMalformed, "version must be a non-negative integer");
    }
    m.version = doc.at("version").get<std::uint64_t>();
    m.created_at = doc.at("created_at").get<std::string>();
    for (const auto& a : doc.at("assets")) {
      AssetEntry e;
      e.path = a.at("path").get<std::string>();
      if (!a.at("size").is_number_unsigned()) {
        throw StoreError(StoreErrc::kManifestMalformed, "size must be a non-negative integer");
      }
      e.size = a.at("size").get<std::uint64_t>();
      if (!a.at("digest").is_string()) {
        throw StoreError(StoreErrc::kDigestFieldInvalid, "digest must be a string");
      }
      auto digest = a.at("digest").get<std::string>();
      if (!is_sha256_hex(digest)) {
        throw StoreError(StoreErrc::kDigestFieldInvalid, "'" + digest + "' for " + e.path);
      }
      std::transform(digest.begin(), digest.end(), digest.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      e.digest = std::move(digest);
      auto role = asset_role_from_string(a.at("role").get<std::string>());
      if (!role) throw StoreError(StoreErrc::kManifestMalformed, "unknown role for " + e.path);
      e.role = *role;
      m.assets.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw StoreError(StoreErrc::kManifestMalformed, e.what());
  }
  validate_manifest(m);
  return m;
}

std::string serialize_manifest(const AssetManifest& manifest) {
  ordered_json doc;
  doc["version"] = manifest.version;
  doc["created_at"] = manifest.created_at;
  doc["assets"] = ordered_json::array();
  for (const auto& e : manifest.assets) {
    ordered_json a;
    a["path"] = e.path;
    a["size"] = e.size;
    a["digest"] = e.digest;
    a["role"] = std::string(to_string(e.role));
    doc["assets"].push_back(std::move(a));
  }
  return doc.dump(2) + "\n";
}

std::string_view to_string(VerificationStatus status) {
  switch (status) {
    case VerificationStatus::kOk: return "ok";
    case VerificationStatus::kMissing: return "missing";
    case VerificationStatus::kSizeMismatch: return "size_mismatch";
    case VerificationStatus::kDigestMismatch: return "digest_mismatch";
  }
  return "unknown";
}

bool VerificationReport::ok() const {
  return std::all_of(entries.begin(), entries.end(), [](const VerificationEntry& e) {
    return e.status == VerificationStatus::kOk;
  });
}

VerificationReport verify(const AssetManifest& manifest, const std::filesystem::path& objects_dir) {
  VerificationReport report;
  report.version = manifest.version;
  for (const auto& e : manifest.assets) {
    auto blob = objects_dir / e.digest;
    std::error_code ec;
    auto size = std::filesystem::file_size(blob, ec);
    VerificationStatus status = VerificationStatus::kOk;
    if (ec) {
      status = VerificationStatus::kMissing;
    } else if (size != e.size) {
      status = VerificationStatus::kSizeMismatch;
    } else {
      try {
        if (sha256_file(blob) != e.digest) status = VerificationStatus::kDigestMismatch;
      } catch (const std::runtime_error&) {
        status = VerificationStatus::kMissing;
      }
    }
    report.entries.push_back({e.path, status});
  }
  return report;
}

}  // namespace colaboot::store
