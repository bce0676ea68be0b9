// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// colaboot: network boot server and tooling.
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "colaboot/boot_server.hpp"
#include "colaboot/config.hpp"
#include "colaboot/deploykit.hpp"
#include "colaboot/loopback_lab.hpp"
#include "colaboot/pxe_client_sim.hpp"
#include "colaboot/sync.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUnreachable = 2;

struct Globals {
  std::string config_path = "/etc/colaboot/colaboot.conf";
  bool json = false;
  bool verbose = false;
};

colaboot::ServerConfig load(const Globals& g) {
  return colaboot::load_config(g.config_path, colaboot::colaboot_environment());
}

void print(const Globals& g, const json& j, const std::string& human) {
  if (g.json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << human;
  }
}

int cmd_serve(const Globals& g) {
  auto cfg = load(g);
  // Block termination signals before any service thread exists so sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  colaboot::BootServer server(cfg);
  try {
    server.bind();
  } catch (const colaboot::PortInUse& e) {
    spdlog::error("cannot bind port {}: {}", e.port(), e.what());
    return kExitFailed;
  }
  server.start();
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("received signal {}, shutting down", sig);
  server.stop();
  return kExitOk;
}

int cmd_sync(const Globals& g) {
  auto cfg = load(g);
  if (cfg.sync_source.empty()) throw colaboot::ConfigInvalid("sync_source: required for sync");
  try {
    auto remote = colaboot::store::make_remote_source(cfg.sync_source);
    colaboot::store::AssetStore probe(cfg.store_root);
    if (!probe.exists()) colaboot::store::AssetStore::create(cfg.store_root);
    colaboot::store::AssetStore store(cfg.store_root);
    auto report = colaboot::store::sync_once(*remote, store);
    json j = {{"remote_version", report.remote_version},
              {"fetched", report.fetched},
              {"bytes", report.bytes},
              {"previous_version", report.previous_version ? json(*report.previous_version) : json()},
              {"new_version", report.new_version ? json(*report.new_version) : json()}};
    std::string human = report.new_version
                            ? "activated version " + std::to_string(*report.new_version) + " (" +
                                  std::to_string(report.fetched) + " objects, " +
                                  std::to_string(report.bytes) + " bytes)\n"
                            : "already up to date at version " +
                                  std::to_string(report.previous_version.value_or(0)) + "\n";
    print(g, j, human);
    return kExitOk;
  } catch (const colaboot::store::SyncError& e) {
    std::cerr << "sync failed: " << e.what() << "\n";
    return e.code() == colaboot::store::SyncErrc::kRemoteUnreachable ? kExitUnreachable
                                                                      : kExitFailed;
  }
}

int cmd_verify(const Globals& g) {
  auto cfg = load(g);
  colaboot::store::AssetStore store(cfg.store_root);
  auto snapshot = store.open_snapshot();
  auto report = colaboot::store::verify(snapshot.manifest(), store.objects_dir());
  json entries = json::array();
  std::string human = "version " + std::to_string(report.version) + "\n";
  for (const auto& e : report.entries) {
    entries.push_back({{"path", e.path}, {"status", colaboot::store::to_string(e.status)}});
    human += "  " + std::string(colaboot::store::to_string(e.status)) + "  " + e.path + "\n";
  }
  print(g, {{"version", report.version}, {"ok", report.ok()}, {"entries", entries}}, human);
  return report.ok() ? kExitOk : kExitFailed;
}

int cmd_status(const Globals& g) {
  auto cfg = load(g);
  colaboot::session::BootTracker tracker;
  if (!cfg.event_log.empty() && fs::exists(cfg.event_log)) {
    tracker = colaboot::session::replay_event_log(cfg.event_log);
  }
  auto sessions = tracker.sessions();
  auto report = colaboot::session::make_report(sessions);
  json list = json::array();
  for (const auto& s : sessions) list.push_back(colaboot::session::to_json(s));
  print(g, {{"report", colaboot::session::to_json(report)}, {"sessions", list}},
        colaboot::session::render_table(sessions, report));
  return kExitOk;
}

int cmd_gc(const Globals& g) {
  auto cfg = load(g);
  colaboot::store::AssetStore store(cfg.store_root);
  colaboot::store::AssetStore::Writer writer(store);
  auto report = writer.gc();
  print(g,
        {{"objects_removed", report.objects_removed},
         {"bytes_removed", report.bytes_removed},
         {"manifests_removed", report.manifests_removed}},
        "removed " + std::to_string(report.objects_removed) + " objects (" +
            std::to_string(report.bytes_removed) + " bytes) and " +
            std::to_string(report.manifests_removed) + " manifests\n");
  return kExitOk;
}

int cmd_generate(const Globals& g, const std::string& profile_path, const fs::path& out_dir) {
  std::ifstream in(profile_path);
  if (!in) throw std::runtime_error("cannot read profile " + profile_path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto parsed = colaboot::deploy::parse_profile(text);
  colaboot::deploy::BootAssets assets{parsed.bootfile_bios, parsed.bootfile_uefi};

  auto firewall = colaboot::deploy::generate_firewall_rules(parsed.profile);
  auto installer = colaboot::deploy::generate_installer_script(parsed.profile);
  auto config = colaboot::deploy::generate_server_config(parsed.profile, assets);
  colaboot::parse_config(config);  // must load back

  fs::create_directories(out_dir);
  auto installer_name = std::string(colaboot::deploy::installer_file_name(parsed.profile));
  std::ofstream(out_dir / "firewall.txt", std::ios::binary) << firewall;
  std::ofstream(out_dir / installer_name, std::ios::binary) << installer;
  std::ofstream(out_dir / "colaboot.conf", std::ios::binary) << config;
  json files = {"firewall.txt", installer_name, "colaboot.conf"};
  print(g, {{"out", out_dir.string()}, {"files", files}},
        "wrote firewall.txt, " + installer_name + ", colaboot.conf to " + out_dir.string() + "\n");
  return kExitOk;
}

struct SimulateOptions {
  std::size_t clients = 1;
  double loss = 0.0;
  std::uint64_t seed = 1;
  bool small = false;
  std::uint32_t tftp_timeout_ms = 0;
  std::string keep_dir;
};

int cmd_simulate(const Globals& g, const SimulateOptions& o) {
  colaboot::sim::LabOptions lab_options;
  if (o.small) lab_options.sizes = colaboot::sim::SyntheticSizes::small();
  lab_options.tftp_timeout_ms = o.tftp_timeout_ms > 0 ? o.tftp_timeout_ms : (o.loss > 0 ? 50 : 1000);
  lab_options.root = o.keep_dir;
  colaboot::sim::LoopbackLab lab(lab_options);

  colaboot::sim::SimClientConfig client;
  client.loss_rate = o.loss;
  client.seed = o.seed;
  if (o.loss > 0) {
    client.dhcp_timeout = std::chrono::milliseconds(200);
    client.rrq_timeout = std::chrono::milliseconds(10 * lab_options.tftp_timeout_ms);
    client.tftp_give_up = std::chrono::milliseconds(40 * lab_options.tftp_timeout_ms);
  }
  auto results = colaboot::sim::run_fleet(o.clients, client, lab.endpoints());
  lab.server().events().flush();
  auto report = lab.server().events().report();
  auto sessions = lab.server().events().sessions();
  lab.stop();

  std::size_t ok = 0;
  json list = json::array();
  for (const auto& r : results) {
    ok += r.ok;
    list.push_back(colaboot::sim::to_json(r));
  }
  if (g.json) {
    std::cout << json{{"results", list}, {"report", colaboot::session::to_json(report)}}.dump(2)
              << "\n";
  } else {
    std::printf("%zu/%zu clients booted\n", ok, results.size());
    for (const auto& r : results) {
      std::printf("  %s  %-15s  %-4s  %.2fs", r.mac.to_string().c_str(),
                  r.lease ? r.lease->to_string().c_str() : "-", r.ok ? "ok" : "FAIL",
                  r.total_seconds);
      if (!r.ok) std::printf("  %s", r.error_detail.c_str());
      std::printf("\n");
    }
    std::cout << colaboot::session::render_table(sessions, report);
  }
  return ok == results.size() ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"colaboot: PXE network boot server"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Server config file")->capture_default_str();
  app.add_flag("--json", g.json, "Machine-readable output");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");

  auto* serve = app.add_subcommand("serve", "Run DHCP, TFTP and image services");
  auto* sync = app.add_subcommand("sync", "Mirror sync_source into the store once");
  auto* verify = app.add_subcommand("verify", "Check the active version's objects");
  auto* status = app.add_subcommand("status", "Show boot sessions from the event log");
  auto* gc = app.add_subcommand("gc", "Remove objects no current or newer version uses");

  auto* generate = app.add_subcommand("generate", "Write firewall rules, installer and config");
  std::string profile;
  std::string out_dir = ".";
  generate->add_option("--profile", profile, "Deployment profile")->required();
  generate->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Boot simulated clients against a loopback server");
  SimulateOptions sim;
  simulate->add_option("--clients", sim.clients, "Concurrent clients")
      ->check(CLI::Range(1, 65535))
      ->capture_default_str();
  simulate->add_option("--loss", sim.loss, "Datagram loss probability")
      ->check(CLI::Range(0.0, 0.99))
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Base RNG seed")->capture_default_str();
  simulate->add_flag("--small", sim.small, "Use small synthetic assets");
  simulate->add_option("--tftp-timeout-ms", sim.tftp_timeout_ms, "Server TFTP retransmit timeout");
  simulate->add_option("--keep", sim.keep_dir, "Keep the lab directory here");

  CLI11_PARSE(app, argc, argv);
  if (g.verbose) {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(simulate->parsed() ? spdlog::level::warn : spdlog::level::info);
  }

  try {
    if (serve->parsed()) return cmd_serve(g);
    if (sync->parsed()) return cmd_sync(g);
    if (verify->parsed()) return cmd_verify(g);
    if (status->parsed()) return cmd_status(g);
    if (gc->parsed()) return cmd_gc(g);
    if (generate->parsed()) return cmd_generate(g, profile, out_dir);
    if (simulate->parsed()) return cmd_simulate(g, sim);
  } catch (const colaboot::ConfigInvalid& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitFailed;
}
