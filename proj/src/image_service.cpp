// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/image_service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <map>

#include <spdlog/spdlog.h>

#include "colaboot/udp_socket.hpp"

namespace colaboot::image {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<std::uint64_t> parse_digits(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::string> percent_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 2 >= s.size()) return std::nullopt;
    unsigned v = 0;
    auto [end, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
    if (ec != std::errc{} || end != s.data() + i + 3) return std::nullopt;
    out.push_back(static_cast<char>(v));
    i += 2;
  }
  return out;
}

ImageResponse plain(int status, std::string text) {
  ImageResponse r;
  r.status = status;
  r.text = std::move(text);
  r.headers.emplace_back("Content-Type", "text/plain");
  return r;
}

}  // namespace

Slice resolve_range(std::uint64_t first, std::optional<std::uint64_t> last, std::uint64_t size) {
  if (first >= size || (last && *last < first)) throw RangeNotSatisfiable();
  std::uint64_t end = std::min(last.value_or(size - 1), size - 1);
  return {first, end - first + 1};
}

Slice resolve_range(const ByteRange& range, std::uint64_t size) {
  if (range.first) return resolve_range(*range.first, range.last, size);
  std::uint64_t suffix = range.last.value_or(0);
  if (suffix == 0 || size == 0) throw RangeNotSatisfiable();
  std::uint64_t length = std::min(suffix, size);
  return {size - length, length};
}

std::optional<ByteRange> parse_range_header(std::string_view value) {
  value = trim(value);
  auto eq = value.find('=');
  if (eq == std::string_view::npos || lower(trim(value.substr(0, eq))) != "bytes") {
    return std::nullopt;
  }
  auto spec = trim(value.substr(eq + 1));
  if (spec.find(',') != std::string_view::npos) throw RangeNotSatisfiable();
  auto dash = spec.find('-');
  if (dash == std::string_view::npos) return std::nullopt;
  auto a = trim(spec.substr(0, dash));
  auto b = trim(spec.substr(dash + 1));
  ByteRange range;
  if (a.empty()) {
    range.last = parse_digits(b);
    if (!range.last) return std::nullopt;
    return range;
  }
  range.first = parse_digits(a);
  if (!range.first) return std::nullopt;
  if (!b.empty()) {
    range.last = parse_digits(b);
    if (!range.last || *range.last < *range.first) return std::nullopt;
  }
  return range;
}

const std::string* ImageResponse::header(std::string_view name) const {
  auto wanted = lower(name);
  for (const auto& [k, v] : headers) {
    if (lower(k) == wanted) return &v;
  }
  return nullptr;
}

std::string_view reason_phrase(int status) {
  switch (status) {
    case 200: return "OK";
    case 206: return "Partial Content";
    case 400: return "Bad Request";
    case 404: return "Not Found";
    case 405: return "Method Not Allowed";
    case 416: return "Range Not Satisfiable";
    case 431: return "Request Header Fields Too Large";
    case 503: return "Service Unavailable";
    default: return "Unknown";
  }
}

ImageResponse serve_image(const ImageRequest& req, const store::Snapshot& snapshot) {
  auto finish = [](ImageResponse r) {
    r.headers.emplace_back("Content-Length", std::to_string(r.body_length()));
    return r;
  };
  if (req.method != "GET" && req.method != "HEAD") {
    auto r = plain(405, "method not allowed\n");
    r.headers.emplace_back("Allow", "GET, HEAD");
    return finish(std::move(r));
  }
  std::string_view target = req.path;
  target = target.substr(0, target.find('?'));
  const auto version = std::to_string(snapshot.version());

  if (target == "/manifest") {
    ImageResponse r;
    r.text = store::serialize_manifest(snapshot.manifest());
    r.headers.emplace_back("Content-Type", "application/json");
    r.headers.emplace_back("X-Manifest-Version", version);
    return finish(std::move(r));
  }

  constexpr std::string_view kPrefix = "/assets/";
  if (!target.starts_with(kPrefix)) return finish(plain(404, "not found\n"));
  auto decoded = percent_decode(target.substr(kPrefix.size()));
  auto path = decoded ? store::normalize_request_path(*decoded) : std::nullopt;
  const store::AssetEntry* entry = path ? snapshot.manifest().find(*path) : nullptr;
  if (entry == nullptr) return finish(plain(404, "not found\n"));

  ImageResponse r;
  r.role = entry->role;
  r.asset_size = entry->size;
  r.headers.emplace_back("Content-Type", "application/octet-stream");
  r.headers.emplace_back("Accept-Ranges", "bytes");
  r.headers.emplace_back("ETag", "\"" + entry->digest + "\"");
  r.headers.emplace_back("X-Asset-Digest", entry->digest);
  r.headers.emplace_back("X-Manifest-Version", version);

  const auto total = std::to_string(entry->size);
  if (req.multi_range) {
    r.status = 416;
    r.headers.emplace_back("Content-Range", "bytes */" + total);
    return finish(std::move(r));
  }
  if (req.range) {
    try {
      r.slice = resolve_range(*req.range, entry->size);
    } catch (const RangeNotSatisfiable&) {
      r.status = 416;
      r.headers.emplace_back("Content-Range", "bytes */" + total);
      return finish(std::move(r));
    }
    r.status = 206;
    r.headers.emplace_back("Content-Range",
                           "bytes " + std::to_string(r.slice.offset) + "-" +
                               std::to_string(r.slice.offset + r.slice.length - 1) + "/" + total);
  } else {
    r.slice = {0, entry->size};
  }
  r.blob = snapshot.open(*path);
  return finish(std::move(r));
}

struct ImageService::Connection {
  int fd = -1;
  Ipv4Address peer;
  std::atomic<bool> done{false};
  std::jthread thread;

  ~Connection() {
    if (thread.joinable()) {
      thread.request_stop();
      ::shutdown(fd, SHUT_RDWR);
      thread.join();
    }
    if (fd >= 0) ::close(fd);
  }
};

ImageService::ImageService(ClientRegistry& registry, session::EventSink events,
                           ActivityHook on_image_request)
    : registry_(registry),
      events_(std::move(events)),
      on_image_request_(std::move(on_image_request)) {}

ImageService::~ImageService() { stop(); }

void ImageService::bind(Ipv4Address address, std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw PortInUse(port, std::strerror(errno));
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  sa.sin_addr.s_addr = htonl(address.value());
  if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 || ::listen(fd, 128) != 0) {
    auto err = std::string(std::strerror(errno));
    ::close(fd);
    throw PortInUse(port, err);
  }
  socklen_t len = sizeof sa;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&sa), &len);
  listen_fd_ = fd;
  port_ = ntohs(sa.sin_port);
}

void ImageService::start() {
  acceptor_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
}

void ImageService::stop() {
  if (acceptor_.joinable()) {
    acceptor_.request_stop();
    acceptor_.join();
  }
  {
    std::lock_guard lock(connections_mutex_);
    connections_.clear();
  }
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

void ImageService::reap() {
  std::lock_guard lock(connections_mutex_);
  connections_.remove_if([](const auto& c) { return c->done.load(); });
}

void ImageService::accept_loop(std::stop_token stop) {
  while (!stop.stop_requested()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 100) <= 0) {
      reap();
      continue;
    }
    sockaddr_in sa{};
    socklen_t len = sizeof sa;
    int fd = ::accept4(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len, SOCK_CLOEXEC);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    timeval tv{30, 0};
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);

    auto conn = std::make_unique<Connection>();
    conn->fd = fd;
    conn->peer = Ipv4Address(ntohl(sa.sin_addr.s_addr));
    Connection& c = *conn;
    {
      std::lock_guard lock(connections_mutex_);
      connections_.push_back(std::move(conn));
    }
    c.thread = std::jthread([this, &c](std::stop_token st) { serve_connection(st, c); });
    reap();
  }
}

namespace {

bool send_all(int fd, const void* data, std::size_t size) {
  const auto* p = static_cast<const char*>(data);
  while (size > 0) {
    auto n = ::send(fd, p, size, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    p += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

struct ParsedHead {
  std::string method;
  std::string target;
  std::string version;
  std::map<std::string, std::string> headers;  // lowercased names
};

std::optional<ParsedHead> parse_head(std::string_view head) {
  ParsedHead out;
  auto line_end = head.find("\r\n");
  auto request_line = head.substr(0, line_end);
  auto sp1 = request_line.find(' ');
  auto sp2 = request_line.rfind(' ');
  if (sp1 == std::string_view::npos || sp2 == sp1) return std::nullopt;
  out.method = request_line.substr(0, sp1);
  out.target = request_line.substr(sp1 + 1, sp2 - sp1 - 1);
  out.version = request_line.substr(sp2 + 1);
  if (!out.version.starts_with("HTTP/1.")) return std::nullopt;
  std::size_t pos = line_end == std::string_view::npos ? head.size() : line_end + 2;
  while (pos < head.size()) {
    auto end = head.find("\r\n", pos);
    if (end == std::string_view::npos) end = head.size();
    auto line = head.substr(pos, end - pos);
    pos = end + 2;
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    out.headers[lower(trim(line.substr(0, colon)))] = std::string(trim(line.substr(colon + 1)));
  }
  return out;
}

}  // namespace

void ImageService::serve_connection(std::stop_token stop, Connection& c) {
  constexpr std::size_t kMaxHead = 16 * 1024;
  constexpr auto kIdle = std::chrono::seconds(30);
  std::string buffer;
  std::vector<std::uint8_t> chunk(kStreamChunk);
  auto idle_since = std::chrono::steady_clock::now();

  auto emit = [&](session::EventKind kind, const ClientRef& ref, std::uint64_t size,
                  std::uint64_t version) {
    if (!events_) return;
    session::BootEvent e;
    e.kind = kind;
    e.mac = registry_.resolve_mac(ref);
    e.ip = c.peer;
    e.size = size;
    e.role = store::AssetRole::kImage;
    e.manifest_version = version;
    events_(std::move(e));
  };

  while (!stop.stop_requested()) {
    auto head_end = buffer.find("\r\n\r\n");
    if (head_end == std::string::npos) {
      if (buffer.size() > kMaxHead) break;
      pollfd pfd{c.fd, POLLIN, 0};
      int ready = ::poll(&pfd, 1, 100);
      if (ready == 0) {
        if (std::chrono::steady_clock::now() - idle_since > kIdle) break;
        continue;
      }
      char tmp[4096];
      auto n = ::recv(c.fd, tmp, sizeof tmp, 0);
      if (n <= 0) break;
      buffer.append(tmp, static_cast<std::size_t>(n));
      continue;
    }

    auto head = parse_head(std::string_view(buffer).substr(0, head_end));
    buffer.erase(0, head_end + 4);
    if (!head) {
      std::string resp = "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n";
      send_all(c.fd, resp.data(), resp.size());
      break;
    }
    // Discard any request body.
    if (auto it = head->headers.find("content-length"); it != head->headers.end()) {
      auto body = parse_digits(it->second).value_or(0);
      while (buffer.size() < body && !stop.stop_requested()) {
        char tmp[4096];
        auto n = ::recv(c.fd, tmp, sizeof tmp, 0);
        if (n <= 0) break;
        buffer.append(tmp, static_cast<std::size_t>(n));
      }
      buffer.erase(0, std::min<std::size_t>(buffer.size(), body));
    }
    requests_.fetch_add(1);

    ImageRequest req;
    req.method = head->method;
    req.path = head->target;
    if (auto it = head->headers.find("range"); it != head->headers.end()) {
      try {
        req.range = parse_range_header(it->second);
      } catch (const RangeNotSatisfiable&) {
        req.multi_range = true;
      }
    }
    ClientRef ref{std::nullopt, c.peer};
    if (auto it = head->headers.find(lower(kClientHintHeader)); it != head->headers.end()) {
      req.session_hint = it->second;
      ref.mac = MacAddress::parse(it->second);
    }
    bool keep_alive = head->version == "HTTP/1.1";
    if (auto it = head->headers.find("connection"); it != head->headers.end()) {
      auto v = lower(it->second);
      if (v == "close") keep_alive = false;
      if (v == "keep-alive") keep_alive = true;
    }

    if (req.method == "GET" && req.path.starts_with("/assets/") && on_image_request_) {
      on_image_request_(c.peer);
    }
    ImageResponse resp;
    std::uint64_t version = 0;
    try {
      auto snapshot = registry_.snapshot_for(ref);
      version = snapshot.version();
      resp = serve_image(req, snapshot);
    } catch (const store::StoreError& e) {
      spdlog::warn("image: cannot serve {}: {}", req.path, e.what());
      resp = plain(503, "no assets available\n");
      resp.headers.emplace_back("Content-Length", std::to_string(resp.text.size()));
    }

    std::string out = "HTTP/1.1 " + std::to_string(resp.status) + " " +
                      std::string(reason_phrase(resp.status)) + "\r\n";
    for (const auto& [k, v] : resp.headers) out += k + ": " + v + "\r\n";
    out += keep_alive ? "Connection: keep-alive\r\n\r\n" : "Connection: close\r\n\r\n";
    bool ok = send_all(c.fd, out.data(), out.size());

    if (ok && req.method != "HEAD") {
      if (resp.blob) {
        const bool track = resp.role == store::AssetRole::kImage;
        std::uint64_t offset = resp.slice.offset;
        std::uint64_t remaining = resp.slice.length;
        while (ok && remaining > 0 && !stop.stop_requested()) {
          auto want = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, chunk.size()));
          auto got = resp.blob->read(offset, std::span(chunk).first(want));
          if (got == 0) {
            ok = false;
            break;
          }
          ok = send_all(c.fd, chunk.data(), got);
          if (!ok) break;
          offset += got;
          remaining -= got;
          if (track) {
            auto progress = registry_.add_image_bytes(ref, got, resp.asset_size);
            if (progress.first_byte) {
              emit(session::EventKind::kImageFirstByte, ref, resp.asset_size, version);
            }
            if (progress.complete) {
              emit(session::EventKind::kImageComplete, ref, resp.asset_size, version);
            }
          }
        }
        ok = ok && remaining == 0;
      } else if (!resp.text.empty()) {
        ok = send_all(c.fd, resp.text.data(), resp.text.size());
      }
    }
    if (!ok || !keep_alive) break;
    idle_since = std::chrono::steady_clock::now();
  }
  ::shutdown(c.fd, SHUT_RDWR);
  c.done.store(true);
}

}  // namespace colaboot::image
