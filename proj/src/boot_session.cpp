// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/boot_session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace colaboot::session {

using store::AssetRole;

MonotonicClock steady_clock_source() {
  auto origin = std::chrono::steady_clock::now();
  return [origin] { return Seconds(std::chrono::steady_clock::now() - origin); };
}

std::string_view to_string(BootState state) {
  switch (state) {
    case BootState::kDiscovering: return "Discovering";
    case BootState::kOffered: return "Offered";
    case BootState::kRequested: return "Requested";
    case BootState::kAcked: return "Acked";
    case BootState::kLoadingBootloader: return "LoadingBootloader";
    case BootState::kLoadingKernel: return "LoadingKernel";
    case BootState::kLoadingInitrd: return "LoadingInitrd";
    case BootState::kFetchingImage: return "FetchingImage";
    case BootState::kBooted: return "Booted";
    case BootState::kFailed: return "Failed";
  }
  return "?";
}

namespace {

constexpr EventKind kAllKinds[] = {
    EventKind::kDhcpDiscover, EventKind::kDhcpOffer,      EventKind::kDhcpRequest,
    EventKind::kDhcpAck,      EventKind::kTftpRrq,        EventKind::kTftpComplete,
    EventKind::kImageFirstByte, EventKind::kImageComplete,
};

bool is_terminal(BootState s) { return s == BootState::kBooted || s == BootState::kFailed; }

bool in_dhcp_phase(BootState s) {
  return s == BootState::kDiscovering || s == BootState::kOffered ||
         s == BootState::kRequested || s == BootState::kAcked;
}

// The loading phase a TFTP transfer of `role` belongs to.
std::optional<BootState> phase_of(AssetRole role) {
  switch (role) {
    case AssetRole::kBootloader:
    case AssetRole::kConfig: return BootState::kLoadingBootloader;
    case AssetRole::kKernel: return BootState::kLoadingKernel;
    case AssetRole::kInitrd: return BootState::kLoadingInitrd;
    case AssetRole::kImage: return std::nullopt;
  }
  return std::nullopt;
}

// State an inferred session starts in when its first observed event is `e`.
BootState inferred_state(const BootEvent& e) {
  switch (e.kind) {
    case EventKind::kDhcpDiscover: return BootState::kDiscovering;
    case EventKind::kDhcpOffer: return BootState::kOffered;
    case EventKind::kDhcpRequest: return BootState::kRequested;
    case EventKind::kDhcpAck: return BootState::kAcked;
    case EventKind::kTftpRrq:
    case EventKind::kTftpComplete:
      return e.role ? phase_of(*e.role).value_or(BootState::kLoadingBootloader)
                    : BootState::kLoadingBootloader;
    case EventKind::kImageFirstByte: return BootState::kFetchingImage;
    case EventKind::kImageComplete: return BootState::kFetchingImage;
  }
  return BootState::kDiscovering;
}

bool has_role(const BootSession& s, AssetRole role) {
  return std::find(s.completed_roles.begin(), s.completed_roles.end(), role) !=
         s.completed_roles.end();
}

template <typename T>
std::optional<T> nearest_rank(std::vector<T> values, double q) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kDhcpDiscover: return "dhcp_discover";
    case EventKind::kDhcpOffer: return "dhcp_offer";
    case EventKind::kDhcpRequest: return "dhcp_request";
    case EventKind::kDhcpAck: return "dhcp_ack";
    case EventKind::kTftpRrq: return "tftp_rrq";
    case EventKind::kTftpComplete: return "tftp_complete";
    case EventKind::kImageFirstByte: return "image_first_byte";
    case EventKind::kImageComplete: return "image_complete";
  }
  return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (auto k : kAllKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kInProgress: return "in_progress";
    case Outcome::kBooted: return "booted";
    case Outcome::kFailed: return "failed";
  }
  return "?";
}

nlohmann::json to_json(const BootEvent& e) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(e.kind));
  if (e.mac) j["mac"] = e.mac->to_string();
  if (e.ip) j["ip"] = e.ip->to_string();
  if (e.size) j["size"] = *e.size;
  if (e.role) j["role"] = std::string(store::to_string(*e.role));
  if (e.manifest_version) j["manifest_version"] = *e.manifest_version;
  if (e.timestamp) j["t"] = e.timestamp->count();
  return j;
}

BootEvent event_from_json(const nlohmann::json& j) {
  BootEvent e;
  try {
    auto kind = event_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown event kind");
    e.kind = *kind;
    if (j.contains("mac")) {
      e.mac = MacAddress::parse(j["mac"].get<std::string>());
      if (!e.mac) throw std::invalid_argument("bad mac");
    }
    if (j.contains("ip")) e.ip = Ipv4Address::from_string(j["ip"].get<std::string>());
    if (j.contains("size")) e.size = j["size"].get<std::uint64_t>();
    if (j.contains("role")) {
      e.role = store::asset_role_from_string(j["role"].get<std::string>());
      if (!e.role) throw std::invalid_argument("bad role");
    }
    if (j.contains("manifest_version")) e.manifest_version = j["manifest_version"].get<std::uint64_t>();
    if (j.contains("t")) e.timestamp = Seconds(j["t"].get<double>());
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(ex.what());
  }
  return e;
}

std::optional<Seconds> BootSession::boot_duration() const {
  if (outcome != Outcome::kBooted || transitions.empty()) return std::nullopt;
  if (transitions.front().state != BootState::kDiscovering) return std::nullopt;
  return transitions.back().at - transitions.front().at;
}

BootTracker::BootTracker(MonotonicClock clock) : clock_(std::move(clock)) {}

const BootSession* BootTracker::find(std::string_view client_id) const {
  auto it = current_.find(client_id);
  return it == current_.end() ? nullptr : &sessions_[it->second];
}

void BootTracker::clear() {
  sessions_.clear();
  current_.clear();
  client_by_ip_.clear();
}

std::string BootTracker::resolve_client(const BootEvent& event) const {
  if (event.mac) return event.mac->to_string();
  if (event.ip) {
    if (auto it = client_by_ip_.find(*event.ip); it != client_by_ip_.end()) return it->second;
    return "ip:" + event.ip->to_string();
  }
  return "unknown";
}

BootSession& BootTracker::start_session(const std::string& client_id, Seconds at) {
  BootSession s;
  s.client_id = client_id;
  s.transitions.push_back({BootState::kDiscovering, at});
  sessions_.push_back(std::move(s));
  current_[client_id] = sessions_.size() - 1;
  return sessions_.back();
}

void BootTracker::enter(BootSession& s, BootState next, Seconds at) {
  if (!s.transitions.empty()) at = std::max(at, s.transitions.back().at);
  s.state = next;
  s.transitions.push_back({next, at});
  if (next == BootState::kBooted) s.outcome = Outcome::kBooted;
}

void BootTracker::fail(BootSession& s, std::string reason, Seconds at) {
  enter(s, BootState::kFailed, at);
  s.outcome = Outcome::kFailed;
  s.failure_reason = std::move(reason);
}

const BootSession& BootTracker::record(const BootEvent& e) {
  Seconds at = e.timestamp.value_or(clock_());
  auto id = resolve_client(e);
  auto it = current_.find(id);

  if (e.kind == EventKind::kDhcpDiscover) {
    if (it == current_.end() || !in_dhcp_phase(sessions_[it->second].state)) {
      return start_session(id, at);
    }
    return sessions_[it->second];  // retransmitted DISCOVER within the same boot
  }

  if (it == current_.end()) {
    BootSession s;
    s.client_id = id;
    s.inferred = true;
    s.state = inferred_state(e);
    s.transitions.push_back({s.state, at});
    sessions_.push_back(std::move(s));
    it = current_.emplace(id, sessions_.size() - 1).first;
  }
  BootSession& s = sessions_[it->second];
  if (is_terminal(s.state)) return s;

  if (e.manifest_version && !s.manifest_version) s.manifest_version = e.manifest_version;
  auto violation = [&] {
    fail(s,
         "protocol_violation: " + std::string(to_string(e.kind)) +
             (e.role ? "(" + std::string(store::to_string(*e.role)) + ")" : "") + " in " +
             std::string(to_string(s.state)),
         at);
  };

  switch (e.kind) {
    case EventKind::kDhcpDiscover: break;
    case EventKind::kDhcpOffer:
      if (s.state == BootState::kDiscovering) {
        enter(s, BootState::kOffered, at);
      } else if (!in_dhcp_phase(s.state)) {
        violation();
      }
      break;
    case EventKind::kDhcpRequest:
      if (s.state == BootState::kOffered) {
        enter(s, BootState::kRequested, at);
      } else if (s.state != BootState::kRequested && s.state != BootState::kAcked) {
        violation();
      }
      break;
    case EventKind::kDhcpAck:
      if (s.state == BootState::kRequested) {
        enter(s, BootState::kAcked, at);
      } else if (s.state != BootState::kAcked) {
        violation();
        break;
      }
      if (e.ip) {
        s.ip = e.ip;
        client_by_ip_[*e.ip] = id;
      }
      break;
    case EventKind::kTftpRrq: {
      auto role = e.role.value_or(AssetRole::kBootloader);
      switch (role) {
        case AssetRole::kBootloader:
          if (s.state == BootState::kAcked) {
            enter(s, BootState::kLoadingBootloader, at);
          } else if (s.state != BootState::kLoadingBootloader) {
            violation();
          }
          break;
        case AssetRole::kConfig:
          if (s.state != BootState::kLoadingBootloader) violation();
          break;
        case AssetRole::kKernel:
          if (s.state == BootState::kLoadingBootloader && has_role(s, AssetRole::kBootloader)) {
            enter(s, BootState::kLoadingKernel, at);
          } else if (s.state != BootState::kLoadingKernel) {
            violation();
          }
          break;
        case AssetRole::kInitrd:
          if (s.state == BootState::kLoadingKernel && has_role(s, AssetRole::kKernel)) {
            enter(s, BootState::kLoadingInitrd, at);
          } else if (s.state != BootState::kLoadingInitrd) {
            violation();
          }
          break;
        case AssetRole::kImage: break;
      }
      break;
    }
    case EventKind::kTftpComplete: {
      auto role = e.role.value_or(AssetRole::kBootloader);
      auto phase = phase_of(role);
      if (phase && *phase > s.state) {
        violation();
        break;
      }
      s.bytes_tftp += e.size.value_or(0);
      if (!has_role(s, role)) s.completed_roles.push_back(role);
      break;
    }
    case EventKind::kImageFirstByte:
      if (s.state == BootState::kLoadingInitrd && has_role(s, AssetRole::kInitrd)) {
        enter(s, BootState::kFetchingImage, at);
      } else if (s.state != BootState::kFetchingImage) {
        violation();
      }
      break;
    case EventKind::kImageComplete:
      if (s.state == BootState::kFetchingImage) {
        s.bytes_image += e.size.value_or(0);
        if (!has_role(s, AssetRole::kImage)) s.completed_roles.push_back(AssetRole::kImage);
        enter(s, BootState::kBooted, at);
      } else {
        violation();
      }
      break;
  }
  return s;
}

BootReport make_report(const std::vector<BootSession>& sessions) {
  BootReport r;
  r.sessions = sessions.size();
  std::vector<Seconds> durations;
  std::vector<double> throughput_mbps;
  for (const auto& s : sessions) {
    r.total_bytes += s.bytes_tftp + s.bytes_image;
    switch (s.outcome) {
      case Outcome::kBooted: ++r.booted; break;
      case Outcome::kFailed: ++r.failed; break;
      case Outcome::kInProgress: ++r.in_progress; break;
    }
    if (auto d = s.boot_duration()) {
      durations.push_back(*d);
      if (d->count() > 0) {
        double mbits = static_cast<double>(s.bytes_tftp + s.bytes_image) * 8.0 / 1e6;
        throughput_mbps.push_back(mbits / d->count());
      }
    }
  }
  r.p50 = nearest_rank(durations, 0.50);
  r.p95 = nearest_rank(durations, 0.95);
  r.median_throughput_mbps = nearest_rank(throughput_mbps, 0.50);
  return r;
}

nlohmann::json to_json(const BootReport& r) {
  nlohmann::json j;
  j["sessions"] = r.sessions;
  j["booted"] = r.booted;
  j["failed"] = r.failed;
  j["in_progress"] = r.in_progress;
  j["p50_seconds"] = r.p50 ? nlohmann::json(r.p50->count()) : nlohmann::json(nullptr);
  j["p95_seconds"] = r.p95 ? nlohmann::json(r.p95->count()) : nlohmann::json(nullptr);
  j["total_bytes"] = r.total_bytes;
  j["median_throughput_mbps"] =
      r.median_throughput_mbps ? nlohmann::json(*r.median_throughput_mbps) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const BootSession& s) {
  nlohmann::json j;
  j["client_id"] = s.client_id;
  j["ip"] = s.ip ? nlohmann::json(s.ip->to_string()) : nlohmann::json(nullptr);
  j["state"] = std::string(to_string(s.state));
  j["outcome"] = std::string(to_string(s.outcome));
  if (!s.failure_reason.empty()) j["failure_reason"] = s.failure_reason;
  j["inferred"] = s.inferred;
  j["bytes_tftp"] = s.bytes_tftp;
  j["bytes_image"] = s.bytes_image;
  j["manifest_version"] =
      s.manifest_version ? nlohmann::json(*s.manifest_version) : nlohmann::json(nullptr);
  auto& tr = j["transitions"] = nlohmann::json::array();
  for (const auto& t : s.transitions) {
    tr.push_back({{"state", std::string(to_string(t.state))}, {"t", t.at.count()}});
  }
  return j;
}

std::string render_table(const std::vector<BootSession>& sessions, const BootReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-19s %-15s %-18s %-8s %12s %12s %9s\n", "CLIENT", "IP",
                "STATE", "VERSION", "TFTP_BYTES", "IMAGE_BYTES", "SECONDS");
  out << line;
  for (const auto& s : sessions) {
    auto d = s.boot_duration();
    std::string secs = d ? std::to_string(d->count()).substr(0, 8) : "-";
    std::snprintf(line, sizeof line, "%-19s %-15s %-18s %-8s %12llu %12llu %9s\n",
                  s.client_id.c_str(), s.ip ? s.ip->to_string().c_str() : "-",
                  std::string(to_string(s.state)).c_str(),
                  s.manifest_version ? std::to_string(*s.manifest_version).c_str() : "-",
                  static_cast<unsigned long long>(s.bytes_tftp),
                  static_cast<unsigned long long>(s.bytes_image), secs.c_str());
    out << line;
  }
  out << report.sessions << " sessions, " << report.booted << " booted, " << report.failed
      << " failed, " << report.in_progress << " in progress";
  if (report.p50) out << "; p50 " << report.p50->count() << " s, p95 " << report.p95->count() << " s";
  if (report.median_throughput_mbps) out << "; " << *report.median_throughput_mbps << " Mbit/s";
  out << "\n";
  return out.str();
}

BootTracker replay_event_log(const std::filesystem::path& log) {
  BootTracker tracker([] { return Seconds(0); });
  std::ifstream in(log);
  if (!in) throw std::runtime_error("cannot read event log " + log.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      continue;  // a torn final line from a crashed writer
    }
    tracker.record(event_from_json(j));
  }
  return tracker;
}

EventFunnel::EventFunnel(BootTracker& tracker, std::optional<std::filesystem::path> event_log)
    : tracker_(tracker) {
  if (event_log) {
    log_.open(*event_log, std::ios::app);
    if (!log_) throw std::runtime_error("cannot open event log " + event_log->string());
  }
  worker_ = std::thread([this] { run(); });
}

EventFunnel::~EventFunnel() { stop(); }

void EventFunnel::submit(BootEvent event) {
  if (!event.timestamp) event.timestamp = tracker_.now();
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    queue_.push_back(std::move(event));
    ++submitted_;
  }
  wake_.notify_one();
}

EventSink EventFunnel::sink() {
  return [this](BootEvent e) { submit(std::move(e)); };
}

void EventFunnel::flush() {
  std::unique_lock lock(mutex_);
  auto target = submitted_;
  drained_.wait(lock, [&] { return applied_ >= target || !worker_.joinable(); });
}

std::vector<BootSession> EventFunnel::sessions() {
  std::lock_guard lock(tracker_mutex_);
  return tracker_.sessions();
}

BootReport EventFunnel::report() {
  std::lock_guard lock(tracker_mutex_);
  return tracker_.report();
}

void EventFunnel::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (worker_.joinable()) worker_.join();
  if (log_.is_open()) log_.flush();
  drained_.notify_all();
}

void EventFunnel::run() {
  std::unique_lock lock(mutex_);
  for (;;) {
    wake_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
    if (queue_.empty() && stopping_) return;
    auto event = std::move(queue_.front());
    queue_.pop_front();
    lock.unlock();
    {
      std::lock_guard tl(tracker_mutex_);
      tracker_.record(event);
    }
    if (log_.is_open()) {
      log_ << to_json(event).dump() << '\n';
      log_.flush();
    }
    lock.lock();
    ++applied_;
    drained_.notify_all();
  }
}

}  // namespace colaboot::session
