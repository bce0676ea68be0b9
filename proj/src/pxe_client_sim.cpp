// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
#include "colaboot/pxe_client_sim.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "colaboot/dhcp_message.hpp"
#include "colaboot/digest.hpp"
#include "colaboot/image_service.hpp"
#include "colaboot/tftp_packet.hpp"

namespace colaboot::sim {

namespace opt = netproto::dhcp_option;
using Clock = std::chrono::steady_clock;
using netproto::DhcpMessage;
using netproto::DhcpMessageType;

std::string_view to_string(SimErrc code) {
  switch (code) {
    case SimErrc::kPhaseTimeout: return "PhaseTimeout";
    case SimErrc::kDigestMismatch: return "DigestMismatch";
    case SimErrc::kOfferMissingBootfile: return "OfferMissingBootfile";
    case SimErrc::kTransferFailed: return "TransferFailed";
    case SimErrc::kProtocolError: return "ProtocolError";
  }
  return "SimError";
}

SimError::SimError(SimErrc code, std::string phase, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + "(" + phase + "): " + detail),
      code_(code),
      phase_(std::move(phase)) {}

LossyChannel::LossyChannel(UdpSocket socket, double loss_rate, std::mt19937_64& rng,
                           std::vector<std::string>* trace, std::string label)
    : socket_(std::move(socket)),
      loss_rate_(loss_rate),
      rng_(rng),
      trace_(trace),
      label_(std::move(label)) {
  if (!(loss_rate_ >= 0.0 && loss_rate_ < 1.0)) throw std::invalid_argument("loss_rate not in [0, 1)");
}

bool LossyChannel::drop() {
  if (loss_rate_ <= 0.0) return false;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < loss_rate_;
}

void LossyChannel::send_to(const UdpEndpoint& to, std::span<const std::uint8_t> bytes,
                           std::string_view what) {
  bool dropped = drop();
  if (trace_ != nullptr) {
    trace_->push_back(label_ + (dropped ? " drop tx " : " tx ") + std::string(what));
  }
  if (!dropped) socket_.send_to(to, bytes);
}

std::optional<Datagram> LossyChannel::receive(
    std::chrono::milliseconds timeout, const std::function<std::string(const Datagram&)>& describe) {
  auto deadline = Clock::now() + timeout;
  for (;;) {
    auto now = Clock::now();
    if (now >= deadline) return std::nullopt;
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now) +
                std::chrono::milliseconds(1);
    auto d = socket_.receive(left);
    if (!d) return std::nullopt;
    bool dropped = drop();
    if (trace_ != nullptr) {
      trace_->push_back(label_ + (dropped ? " drop rx " : " rx ") + describe(*d));
    }
    if (!dropped) return d;
  }
}

namespace {

std::string describe_dhcp(const Datagram& d) {
  try {
    auto msg = netproto::decode_dhcp(d.bytes);
    auto type = msg.message_type();
    return type ? std::string(netproto::to_string(*type)) : "BOOTP";
  } catch (const std::exception&) {
    return "malformed";
  }
}

std::string describe_tftp_packet(const netproto::TftpPacket& pkt) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, netproto::TftpRrq>) return "RRQ " + p.filename;
        if constexpr (std::is_same_v<T, netproto::TftpWrq>) return "WRQ " + p.filename;
        if constexpr (std::is_same_v<T, netproto::TftpData>) {
          return "DATA " + std::to_string(p.block) + " len " + std::to_string(p.payload.size());
        }
        if constexpr (std::is_same_v<T, netproto::TftpAck>) return "ACK " + std::to_string(p.block);
        if constexpr (std::is_same_v<T, netproto::TftpErrorPacket>) {
          return "ERROR " + std::to_string(p.code);
        }
        if constexpr (std::is_same_v<T, netproto::TftpOack>) return "OACK";
        return "?";
      },
      pkt);
}

std::string describe_tftp(const Datagram& d) {
  try {
    return describe_tftp_packet(netproto::decode_tftp(d.bytes));
  } catch (const std::exception&) {
    return "malformed";
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path;
};

ParsedUrl parse_http_url(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (!url.starts_with(kScheme)) {
    throw SimError(SimErrc::kProtocolError, "config", "image URL is not http: " + url);
  }
  auto rest = std::string_view(url).substr(kScheme.size());
  auto slash = rest.find('/');
  auto authority = rest.substr(0, slash);
  ParsedUrl out;
  out.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  auto colon = authority.rfind(':');
  out.host = std::string(authority.substr(0, colon));
  if (colon != std::string_view::npos) {
    auto port = authority.substr(colon + 1);
    auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), out.port);
    if (ec != std::errc{} || end != port.data() + port.size()) {
      throw SimError(SimErrc::kProtocolError, "config", "bad port in image URL: " + url);
    }
  }
  return out;
}

struct TftpFetch {
  std::uint64_t size = 0;
  std::string digest;
  std::vector<std::uint8_t> content;
};

class BootRun {
 public:
  BootRun(const SimClientConfig& cfg, const Endpoints& ep) : cfg_(cfg), ep_(ep), rng_(cfg.seed) {
    result_.mac = cfg.mac;
  }

  BootResult run() {
    auto started = Clock::now();
    try {
      boot();
      result_.ok = true;
    } catch (const SimError& e) {
      result_.error = e.code();
      result_.failed_phase = e.phase();
      result_.error_detail = e.what();
    } catch (const std::exception& e) {
      result_.error = SimErrc::kProtocolError;
      result_.failed_phase = phase_;
      result_.error_detail = e.what();
    }
    result_.total_seconds = std::chrono::duration<double>(Clock::now() - started).count();
    return std::move(result_);
  }

 private:
  void enter(std::string phase) {
    auto now = Clock::now();
    if (!phase_.empty()) {
      result_.durations.emplace_back(phase_,
                                     std::chrono::duration<double>(now - phase_started_).count());
    }
    phase_ = std::move(phase);
    phase_started_ = now;
    if (cfg_.on_phase && !phase_.empty()) cfg_.on_phase(phase_);
  }

  void boot() {
    dhcp();
    enter("bootloader");
    auto bootloader = tftp_get(result_.bootfile, false);
    if (!bootloader) throw SimError(SimErrc::kTransferFailed, phase_, "bootfile not found");
    record(store::AssetRole::kBootloader, result_.bootfile, *bootloader);

    enter("config");
    std::string config_path = "pxelinux.cfg/" + cfg_.mac.pxelinux_name();
    auto config = tftp_get(config_path, true);
    if (!config) {
      config_path = "pxelinux.cfg/default";
      config = tftp_get(config_path, true);
    }
    if (!config) throw SimError(SimErrc::kTransferFailed, phase_, "no bootloader config");
    record(store::AssetRole::kConfig, config_path, *config);
    auto boot_cfg = parse_bootloader_config(
        std::string_view(reinterpret_cast<const char*>(config->content.data()), config->content.size()));
    image_url_ = parse_http_url(boot_cfg.image_url);
    fetch_manifest();

    enter("kernel");
    auto kernel = tftp_get(boot_cfg.kernel, false);
    if (!kernel) throw SimError(SimErrc::kTransferFailed, phase_, "kernel not found");
    record(store::AssetRole::kKernel, boot_cfg.kernel, *kernel);

    enter("initrd");
    auto initrd = tftp_get(boot_cfg.initrd, false);
    if (!initrd) throw SimError(SimErrc::kTransferFailed, phase_, "initrd not found");
    record(store::AssetRole::kInitrd, boot_cfg.initrd, *initrd);

    enter("image");
    fetch_image();
    enter("");
    verify_all();
  }

  // --- DHCP -------------------------------------------------------------------------

  DhcpMessage base_message(DhcpMessageType type) {
    DhcpMessage m;
    m.xid = xid_;
    m.flags = DhcpMessage::kBroadcastFlag;
    m.set_client_mac(cfg_.mac);
    m.options.push_back({opt::kMessageType, {static_cast<std::uint8_t>(type)}});
    m.options.push_back({opt::kMaxMessageSize, {0x05, 0xC0}});
    m.options.push_back({opt::kClientArch, {static_cast<std::uint8_t>(cfg_.arch >> 8),
                                            static_cast<std::uint8_t>(cfg_.arch & 0xFF)}});
    m.options.push_back({opt::kClientNdi, {1, 2, 1}});
    std::vector<std::uint8_t> uuid(17, 0);
    for (std::size_t i = 1; i < uuid.size(); ++i) uuid[i] = uuid_[i - 1];
    m.options.push_back({opt::kClientUuid, uuid});
    char vendor[40];
    std::snprintf(vendor, sizeof vendor, "PXEClient:Arch:%05u:UNDI:002001", cfg_.arch);
    m.set_option(opt::kVendorClass, std::string_view(vendor));
    m.options.push_back({opt::kParameterList, {1, 3, 6, 43, 54, 60, 66, 67}});
    return m;
  }

  std::optional<DhcpMessage> await_reply(LossyChannel& ch, DhcpMessageType want) {
    auto deadline = Clock::now() + cfg_.dhcp_timeout;
    while (Clock::now() < deadline) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      auto d = ch.receive(left, describe_dhcp);
      if (!d) return std::nullopt;
      DhcpMessage m;
      try {
        m = netproto::decode_dhcp(d->bytes);
      } catch (const netproto::DhcpError&) {
        continue;
      }
      if (m.op != DhcpMessage::kBootReply || m.xid != xid_ || m.client_mac() != cfg_.mac) continue;
      auto type = m.message_type();
      if (type == DhcpMessageType::kNak) {
        throw SimError(SimErrc::kProtocolError, phase_, "server sent DHCPNAK");
      }
      if (type == want) return m;
    }
    return std::nullopt;
  }

  void dhcp() {
    xid_ = static_cast<std::uint32_t>(rng_());
    for (auto& b : uuid_) b = static_cast<std::uint8_t>(rng_());
    LossyChannel ch(UdpSocket::bind(ep_.client_bind, 0), cfg_.loss_rate, rng_, &result_.trace,
                    "dhcp");
    const UdpEndpoint server{ep_.server, ep_.dhcp_port};

    enter("discovering");
    std::optional<DhcpMessage> offer;
    auto discover = netproto::encode_dhcp(base_message(DhcpMessageType::kDiscover));
    for (unsigned i = 0; i < cfg_.dhcp_attempts && !offer; ++i) {
      ch.send_to(server, discover, "DISCOVER");
      offer = await_reply(ch, DhcpMessageType::kOffer);
    }
    if (!offer) throw SimError(SimErrc::kPhaseTimeout, phase_, "no DHCPOFFER");
    if (offer->file_string().empty() && !offer->find_option(opt::kBootfileName)) {
      throw SimError(SimErrc::kOfferMissingBootfile, phase_, "offer names no bootfile");
    }
    auto server_id = offer->option_address(opt::kServerId);
    if (!server_id) throw SimError(SimErrc::kProtocolError, phase_, "offer lacks server id");

    enter("requesting");
    auto req = base_message(DhcpMessageType::kRequest);
    req.options.insert(req.options.begin() + 1,
                       {opt::kRequestedIp, netproto::address_payload(offer->yiaddr)});
    req.options.insert(req.options.begin() + 2,
                       {opt::kServerId, netproto::address_payload(*server_id)});
    auto request = netproto::encode_dhcp(req);
    std::optional<DhcpMessage> ack;
    for (unsigned i = 0; i < cfg_.dhcp_attempts && !ack; ++i) {
      ch.send_to(server, request, "REQUEST");
      ack = await_reply(ch, DhcpMessageType::kAck);
    }
    if (!ack) throw SimError(SimErrc::kPhaseTimeout, phase_, "no DHCPACK");

    result_.lease = ack->yiaddr;
    next_server_ = ack->siaddr.is_unspecified() ? ep_.server : ack->siaddr;
    result_.bootfile = ack->file_string();
    if (result_.bootfile.empty()) {
      if (const auto* o = ack->find_option(opt::kBootfileName)) {
        result_.bootfile.assign(o->payload.begin(), o->payload.end());
      }
    }
    if (result_.bootfile.empty()) {
      throw SimError(SimErrc::kOfferMissingBootfile, phase_, "ack names no bootfile");
    }
    local_ = ep_.client_bind;
    if (cfg_.use_leased_address) {
      try {
        UdpSocket::bind(ack->yiaddr, 0);
        local_ = ack->yiaddr;
      } catch (const PortInUse&) {
        // Leased address not routable on this host; keep the pre-lease address.
      }
    }
  }

  // --- TFTP -------------------------------------------------------------------------

  std::optional<TftpFetch> tftp_get(const std::string& path, bool keep_content) {
    LossyChannel ch(UdpSocket::bind(local_, 0), cfg_.loss_rate, rng_, &result_.trace, "tftp");
    const UdpEndpoint server{next_server_, ep_.tftp_port};
    netproto::TftpRrq rrq{path, "octet", {}};
    if (cfg_.blksize_request) rrq.options.push_back({"blksize", std::to_string(*cfg_.blksize_request)});
    rrq.options.push_back({"tsize", "0"});
    const auto rrq_bytes = netproto::encode_tftp(rrq);

    auto send = [&](const UdpEndpoint& to, const netproto::TftpPacket& pkt) {
      ch.send_to(to, netproto::encode_tftp(pkt), describe_tftp_packet(pkt));
    };

    std::optional<UdpEndpoint> tid;
    std::uint16_t blksize = 512;
    std::uint16_t expected = 1;
    Sha256 hash;
    TftpFetch out;
    unsigned attempts = 1;
    ch.send_to(server, rrq_bytes, "RRQ " + path);
    auto last_progress = Clock::now();

    for (;;) {
      auto wait = tid ? cfg_.tftp_give_up -
                            std::chrono::duration_cast<std::chrono::milliseconds>(
                                Clock::now() - last_progress)
                      : cfg_.rrq_timeout;
      std::optional<Datagram> d;
      if (wait.count() > 0) d = ch.receive(wait, describe_tftp);
      if (!d) {
        if (tid) throw SimError(SimErrc::kPhaseTimeout, phase_, "transfer of " + path + " stalled");
        if (attempts++ >= cfg_.rrq_attempts) {
          throw SimError(SimErrc::kPhaseTimeout, phase_, "no answer to RRQ " + path);
        }
        ch.send_to(server, rrq_bytes, "RRQ " + path);
        continue;
      }
      if (d->from.address != server.address) continue;
      if (tid && d->from != *tid) {
        send(d->from, netproto::make_tftp_error(netproto::TftpErrorCode::kUnknownTransferId,
                                                "unknown transfer id"));
        continue;
      }
      netproto::TftpPacket pkt;
      try {
        pkt = netproto::decode_tftp(d->bytes);
      } catch (const netproto::TftpDecodeError&) {
        continue;
      }
      if (!tid) tid = d->from;

      if (const auto* err = std::get_if<netproto::TftpErrorPacket>(&pkt)) {
        if (err->code == static_cast<std::uint16_t>(netproto::TftpErrorCode::kFileNotFound) &&
            out.size == 0) {
          return std::nullopt;
        }
        throw SimError(SimErrc::kTransferFailed, phase_,
                       path + ": server error " + std::to_string(err->code) + " " + err->message);
      }
      if (const auto* oack = std::get_if<netproto::TftpOack>(&pkt)) {
        if (expected != 1 || out.size != 0) continue;
        if (const auto* b = netproto::find_tftp_option(oack->options, "blksize")) {
          unsigned v = 0;
          std::from_chars(b->value.data(), b->value.data() + b->value.size(), v);
          if (v < 8 || v > 65464 || (cfg_.blksize_request && v > *cfg_.blksize_request)) {
            throw SimError(SimErrc::kProtocolError, phase_, "unacceptable blksize " + b->value);
          }
          blksize = static_cast<std::uint16_t>(v);
        }
        send(*tid, netproto::TftpAck{0});
        last_progress = Clock::now();
        continue;
      }
      const auto* data = std::get_if<netproto::TftpData>(&pkt);
      if (data == nullptr) continue;
      if (data->block == expected) {
        hash.update(data->payload);
        if (keep_content) out.content.insert(out.content.end(), data->payload.begin(), data->payload.end());
        out.size += data->payload.size();
        send(*tid, netproto::TftpAck{data->block});
        last_progress = Clock::now();
        if (data->payload.size() < blksize) break;
        ++expected;
      } else if (data->block == static_cast<std::uint16_t>(expected - 1)) {
        send(*tid, netproto::TftpAck{data->block});  // our ACK was lost
      }
    }
    out.digest = hash.hex_digest();
    result_.tftp_bytes += out.size;
    return out;
  }

  void record(store::AssetRole role, const std::string& path, const TftpFetch& f) {
    result_.fetched[role] = FetchedAsset{path, f.size, f.digest};
  }

  // --- HTTP -------------------------------------------------------------------------

  httplib::Client& http() {
    if (!http_) {
      http_ = std::make_unique<httplib::Client>(image_url_.host, image_url_.port);
      http_->set_keep_alive(true);
      http_->set_connection_timeout(5, 0);
      http_->set_read_timeout(60, 0);
      if (cfg_.use_leased_address && local_ != ep_.client_bind) http_->set_interface(local_.to_string());
    }
    return *http_;
  }

  httplib::Headers hint_headers() const {
    return {{std::string(image::kClientHintHeader), cfg_.mac.to_string()}};
  }

  void fetch_manifest() {
    auto res = http().Get("/manifest", hint_headers());
    if (!res) {
      throw SimError(SimErrc::kPhaseTimeout, phase_,
                     "manifest fetch failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw SimError(SimErrc::kProtocolError, phase_, "manifest status " + std::to_string(res->status));
    }
    manifest_ = store::parse_manifest(res->body);
    result_.manifest_version = manifest_->version;
  }

  void fetch_image() {
    const auto* entry = manifest_->find_role(store::AssetRole::kImage);
    if (entry == nullptr) throw SimError(SimErrc::kProtocolError, phase_, "manifest has no image");
    const auto& path = image_url_.path;
    Sha256 hash;
    std::uint64_t received = 0;
    const std::uint64_t size = entry->size;
    const auto range = std::max<std::uint64_t>(1, cfg_.http_range_size);
    std::uint64_t offset = 0;
    do {
      auto headers = hint_headers();
      std::uint64_t want = size;
      if (size > 0) {
        auto last = std::min(offset + range, size) - 1;
        headers.emplace("Range", "bytes=" + std::to_string(offset) + "-" + std::to_string(last));
        want = last - offset + 1;
      }
      std::uint64_t got = 0;
      auto res = http().Get(path, headers, [&](const char* data, std::size_t n) {
        hash.update(std::span(reinterpret_cast<const std::uint8_t*>(data), n));
        got += n;
        return true;
      });
      if (!res) {
        throw SimError(SimErrc::kTransferFailed, phase_,
                       "image fetch failed: " + httplib::to_string(res.error()));
      }
      int expected_status = size > 0 ? 206 : 200;
      if (res->status != expected_status) {
        throw SimError(SimErrc::kProtocolError, phase_, "image status " + std::to_string(res->status));
      }
      auto version = res->get_header_value("X-Manifest-Version");
      if (version != std::to_string(manifest_->version)) {
        throw SimError(SimErrc::kProtocolError, phase_,
                       "manifest version changed mid-boot: " + version);
      }
      if (got != want) {
        throw SimError(SimErrc::kTransferFailed, phase_, "short image range");
      }
      received += got;
      offset += got;
    } while (offset < size);
    result_.image_bytes = received;
    result_.fetched[store::AssetRole::kImage] = FetchedAsset{entry->path, received, hash.hex_digest()};
  }

  void verify_all() {
    for (const auto& [role, f] : result_.fetched) {
      const auto* entry = manifest_->find(f.path);
      if (entry == nullptr || entry->digest != f.digest || entry->size != f.bytes) {
        throw SimError(SimErrc::kDigestMismatch, std::string(store::to_string(role)),
                       f.path + " does not match manifest version " +
                           std::to_string(manifest_->version));
      }
    }
  }

  const SimClientConfig& cfg_;
  const Endpoints& ep_;
  std::mt19937_64 rng_;
  BootResult result_;
  std::string phase_;
  Clock::time_point phase_started_;
  std::uint32_t xid_ = 0;
  std::array<std::uint8_t, 16> uuid_{};
  Ipv4Address next_server_;
  Ipv4Address local_;
  ParsedUrl image_url_;
  std::unique_ptr<httplib::Client> http_;
  std::optional<store::AssetManifest> manifest_;
};

}  // namespace

BootloaderConfig parse_bootloader_config(std::string_view text) {
  struct Label {
    std::string kernel;
    std::string append;
  };
  std::map<std::string, Label> labels;
  std::string default_label;
  std::string first_label;
  std::string current;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    std::istringstream words(line);
    std::string keyword;
    if (!(words >> keyword) || keyword.front() == '#') continue;
    keyword = lower(keyword);
    std::string rest;
    std::getline(words, rest);
    rest.erase(0, rest.find_first_not_of(" \t"));
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.pop_back();
    if (keyword == "default") {
      default_label = rest;
    } else if (keyword == "label") {
      current = rest;
      if (first_label.empty()) first_label = rest;
      labels[current];
    } else if (keyword == "kernel" && !current.empty()) {
      labels[current].kernel = rest;
    } else if (keyword == "append" && !current.empty()) {
      labels[current].append = rest;
    }
  }
  auto name = default_label.empty() ? first_label : default_label;
  auto it = labels.find(name);
  if (it == labels.end()) throw SimError(SimErrc::kProtocolError, "config", "no boot label");
  BootloaderConfig out;
  out.kernel = it->second.kernel;
  std::istringstream args(it->second.append);
  for (std::string arg; args >> arg;) {
    if (arg.starts_with("initrd=")) out.initrd = arg.substr(7);
    if (arg.starts_with("colaboot.image=")) out.image_url = arg.substr(15);
  }
  if (out.kernel.empty() || out.initrd.empty() || out.image_url.empty()) {
    throw SimError(SimErrc::kProtocolError, "config", "label lacks kernel, initrd or image URL");
  }
  return out;
}

nlohmann::json to_json(const BootResult& r) {
  nlohmann::json j;
  j["mac"] = r.mac.to_string();
  j["lease"] = r.lease ? nlohmann::json(r.lease->to_string()) : nlohmann::json(nullptr);
  j["bootfile"] = r.bootfile;
  j["manifest_version"] = r.manifest_version;
  j["ok"] = r.ok;
  auto fetched = nlohmann::json::object();
  for (const auto& [role, f] : r.fetched) {
    fetched[std::string(store::to_string(role))] = {{"path", f.path}, {"bytes", f.bytes}, {"digest", f.digest}};
  }
  j["fetched"] = fetched;
  auto durations = nlohmann::json::object();
  for (const auto& [phase, secs] : r.durations) durations[phase] = secs;
  j["durations"] = durations;
  j["total_seconds"] = r.total_seconds;
  j["tftp_bytes"] = r.tftp_bytes;
  j["image_bytes"] = r.image_bytes;
  if (r.error) {
    j["error"] = {{"kind", std::string(to_string(*r.error))},
                  {"phase", r.failed_phase},
                  {"detail", r.error_detail}};
  }
  std::string joined;
  for (const auto& line : r.trace) joined += line + "\n";
  j["trace_packets"] = r.trace.size();
  j["trace_sha256"] = sha256_hex(joined);
  return j;
}

MacAddress fleet_mac(std::uint32_t index) {
  auto n = index + 1;
  return MacAddress({0x02, 0xc0, 0x1b, static_cast<std::uint8_t>(n >> 16),
                     static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)});
}

BootResult run_boot(const SimClientConfig& cfg, const Endpoints& endpoints) {
  return BootRun(cfg, endpoints).run();
}

std::vector<BootResult> run_fleet(std::size_t n, const SimClientConfig& cfg,
                                  const Endpoints& endpoints) {
  if (n == 0) throw std::invalid_argument("fleet needs at least one client");
  std::vector<BootResult> results(n);
  std::vector<SimClientConfig> configs(n, cfg);
  {
    std::vector<std::jthread> threads;
    threads.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      configs[i].mac = fleet_mac(static_cast<std::uint32_t>(i));
      configs[i].seed = cfg.seed + i;
      threads.emplace_back([&, i] { results[i] = run_boot(configs[i], endpoints); });
    }
  }
  return results;
}

}  // namespace colaboot::sim
