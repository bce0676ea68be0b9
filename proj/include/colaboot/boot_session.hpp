// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-client boot progress, correlated from DHCP, TFTP and image-service events.
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "colaboot/addr.hpp"
#include "colaboot/manifest.hpp"

namespace colaboot::session {

using Seconds = std::chrono::duration<double>;
using MonotonicClock = std::function<Seconds()>;

/// Seconds elapsed on std::chrono::steady_clock since the clock object was created.
MonotonicClock steady_clock_source();

enum class BootState {
  kDiscovering,
  kOffered,
  kRequested,
  kAcked,
  kLoadingBootloader,
  kLoadingKernel,
  kLoadingInitrd,
  kFetchingImage,
  kBooted,
  kFailed,
};

std::string_view to_string(BootState state);

enum class EventKind {
  kDhcpDiscover,
  kDhcpOffer,
  kDhcpRequest,
  kDhcpAck,
  kTftpRrq,
  kTftpComplete,
  kImageFirstByte,
  kImageComplete,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

struct BootEvent {
  EventKind kind = EventKind::kDhcpDiscover;
  std::optional<MacAddress> mac;
  std::optional<Ipv4Address> ip;
  std::optional<std::uint64_t> size;
  std::optional<store::AssetRole> role;
  std::optional<std::uint64_t> manifest_version;
  std::optional<Seconds> timestamp;

  bool operator==(const BootEvent&) const = default;
};

nlohmann::json to_json(const BootEvent& event);
/// Throws std::invalid_argument on malformed records.
BootEvent event_from_json(const nlohmann::json& j);

using EventSink = std::function<void(BootEvent)>;

enum class Outcome { kInProgress, kBooted, kFailed };

std::string_view to_string(Outcome outcome);

struct Transition {
  BootState state;
  Seconds at;
};

struct BootSession {
  std::string client_id;
  std::optional<Ipv4Address> ip;
  BootState state = BootState::kDiscovering;
  std::vector<Transition> transitions;
  std::uint64_t bytes_tftp = 0;
  std::uint64_t bytes_image = 0;
  std::optional<std::uint64_t> manifest_version;
  Outcome outcome = Outcome::kInProgress;
  std::string failure_reason;
  /// Created from an event whose client had no session yet; first state taken as given.
  bool inferred = false;
  std::vector<store::AssetRole> completed_roles;

  std::optional<Seconds> boot_duration() const;
};

struct BootReport {
  std::size_t sessions = 0;
  std::size_t booted = 0;
  std::size_t failed = 0;
  std::size_t in_progress = 0;
  std::optional<Seconds> p50;
  std::optional<Seconds> p95;
  std::uint64_t total_bytes = 0;
  /// Median per-session (bytes_tftp + bytes_image) / boot duration, in Mbit/s.
  std::optional<double> median_throughput_mbps;

  bool operator==(const BootReport&) const = default;
};

/// Nearest-rank percentile over booted sessions only.
BootReport make_report(const std::vector<BootSession>& sessions);
nlohmann::json to_json(const BootReport& report);
nlohmann::json to_json(const BootSession& session);
std::string render_table(const std::vector<BootSession>& sessions, const BootReport& report);

/// Owns session state. Not thread-safe by itself; EventFunnel serializes access.
class BootTracker {
 public:
  explicit BootTracker(MonotonicClock clock = steady_clock_source());

  Seconds now() const { return clock_(); }
  const BootSession& record(const BootEvent& event);

  std::vector<BootSession> sessions() const { return sessions_; }
  /// Latest session for a MAC (or "ip:<addr>" for inferred ones).
  const BootSession* find(std::string_view client_id) const;
  BootReport report() const { return make_report(sessions_); }
  void clear();

 private:
  std::string resolve_client(const BootEvent& event) const;
  BootSession& start_session(const std::string& client_id, Seconds at);
  void enter(BootSession& s, BootState next, Seconds at);
  void fail(BootSession& s, std::string reason, Seconds at);

  MonotonicClock clock_;
  std::vector<BootSession> sessions_;
  std::map<std::string, std::size_t, std::less<>> current_;
  std::map<Ipv4Address, std::string> client_by_ip_;
};

/// Replays a line-delimited JSON event log into a fresh tracker.
BootTracker replay_event_log(const std::filesystem::path& log);

/// Single-consumer funnel: submit() never blocks on tracker work; per-producer order is kept.
class EventFunnel {
 public:
  explicit EventFunnel(BootTracker& tracker, std::optional<std::filesystem::path> event_log = {});
  ~EventFunnel();
  EventFunnel(const EventFunnel&) = delete;
  EventFunnel& operator=(const EventFunnel&) = delete;

  void submit(BootEvent event);
  EventSink sink();
  /// Blocks until every event submitted so far has been applied and logged.
  void flush();
  std::vector<BootSession> sessions();
  BootReport report();
  void stop();

 private:
  void run();

  BootTracker& tracker_;
  std::ofstream log_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable drained_;
  std::deque<BootEvent> queue_;
  std::uint64_t submitted_ = 0;
  std::uint64_t applied_ = 0;
  bool stopping_ = false;
  std::mutex tracker_mutex_;
  std::thread worker_;
};

}  // namespace colaboot::session
