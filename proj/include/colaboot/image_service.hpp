// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// Read-only HTTP/1.1 delivery of store assets under /assets/<virtual-path>.
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "colaboot/addr.hpp"
#include "colaboot/asset_store.hpp"
#include "colaboot/boot_session.hpp"
#include "colaboot/client_registry.hpp"

namespace colaboot::image {

inline constexpr std::size_t kStreamChunk = 64 * 1024;
inline constexpr std::string_view kClientHintHeader = "X-Colaboot-Client";

class RangeNotSatisfiable : public std::runtime_error {
 public:
  RangeNotSatisfiable() : std::runtime_error("range not satisfiable") {}
};

/// One "bytes=" range. A missing first byte means a suffix range of `last` bytes.
struct ByteRange {
  std::optional<std::uint64_t> first;
  std::optional<std::uint64_t> last;
  bool operator==(const ByteRange&) const = default;
};

struct Slice {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  bool operator==(const Slice&) const = default;
};

/// Clamps `last` to size-1. Throws RangeNotSatisfiable when first >= size or first > last.
Slice resolve_range(std::uint64_t first, std::optional<std::uint64_t> last, std::uint64_t size);
Slice resolve_range(const ByteRange& range, std::uint64_t size);

/// nullopt for a syntactically invalid header (served as if absent). Multiple ranges
/// throw RangeNotSatisfiable.
std::optional<ByteRange> parse_range_header(std::string_view value);

struct ImageRequest {
  std::string method = "GET";
  std::string path;  // request target, e.g. "/assets/os-image.sqfs"
  std::optional<ByteRange> range;
  bool multi_range = false;  // several ranges asked for; answered with 416
  std::optional<std::string> session_hint;
};

struct ImageResponse {
  int status = 200;
  std::vector<std::pair<std::string, std::string>> headers;
  /// Body is either a slice of `blob` or `text`.
  std::shared_ptr<const store::AssetBlob> blob;
  Slice slice;
  std::string text;
  std::optional<store::AssetRole> role;
  std::uint64_t asset_size = 0;

  std::uint64_t body_length() const { return blob ? slice.length : text.size(); }
  const std::string* header(std::string_view name) const;
};

std::string_view reason_phrase(int status);

/// Resolves a request against one pinned snapshot. Never touches the store for writing.
ImageResponse serve_image(const ImageRequest& req, const store::Snapshot& snapshot);

/// TCP front end. Each connection gets its own thread; responses stream in 64 KiB chunks.
class ImageService {
 public:
  using ActivityHook = std::function<void(Ipv4Address)>;

  ImageService(ClientRegistry& registry, session::EventSink events,
               ActivityHook on_image_request = {});
  ~ImageService();
  ImageService(const ImageService&) = delete;
  ImageService& operator=(const ImageService&) = delete;

  /// Binds and listens without accepting; throws PortInUse.
  void bind(Ipv4Address address, std::uint16_t port);
  void start();
  void stop();
  std::uint16_t port() const { return port_; }
  std::uint64_t requests_served() const { return requests_.load(); }

 private:
  struct Connection;

  void accept_loop(std::stop_token stop);
  void serve_connection(std::stop_token stop, Connection& c);
  void reap();

  ClientRegistry& registry_;
  session::EventSink events_;
  ActivityHook on_image_request_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::jthread acceptor_;
  std::mutex connections_mutex_;
  std::list<std::unique_ptr<Connection>> connections_;
  std::atomic<std::uint64_t> requests_{0};
};

}  // namespace colaboot::image
