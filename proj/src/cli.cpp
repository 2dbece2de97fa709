#include "migrado/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "migrado/config.hpp"
#include "migrado/error.hpp"
#include "migrado/gateway.hpp"
#include "migrado/http_server.hpp"
#include "migrado/negotiation.hpp"
#include "migrado/regclient.hpp"
#include "migrado/sniff.hpp"
#include "migrado/store.hpp"

namespace migrado {

namespace {

namespace fs = std::filesystem;

struct Overrides {
  std::string config_path;
  std::optional<std::string> store;
  std::optional<std::string> listen;
  std::vector<std::string> obsolete;
  std::vector<std::string> registry_urls;
  std::vector<std::string> builtins;
  bool upstream = false;
  bool upstream_strict = false;
  bool strict_accept = false;
  bool permission_stub = false;
  std::optional<std::uint32_t> upstream_timeout_ms;
  std::optional<std::uint64_t> cache_bytes;
  std::optional<std::uint32_t> external_concurrency;
  std::optional<std::uint32_t> converter_timeout_ms;

  CLI::Option* obsolete_opt = nullptr;
  CLI::Option* registry_opt = nullptr;
  CLI::Option* builtins_opt = nullptr;
  CLI::Option* upstream_opt = nullptr;
  CLI::Option* upstream_strict_opt = nullptr;
  CLI::Option* strict_accept_opt = nullptr;
  CLI::Option* permission_opt = nullptr;
};

void add_config_flags(CLI::App& app, Overrides& o) {
  app.add_option("-c,--config", o.config_path, "JSON config file (default: $MIGRADO_CONFIG)");
  app.add_option("--store", o.store, "store directory");
  app.add_option("--listen", o.listen, "listen address host:port");
  o.obsolete_opt = app.add_option("--obsolete", o.obsolete, "media type that no longer matches wildcards");
  o.registry_opt = app.add_option("--registry-url", o.registry_urls, "converter registry manifest URL");
  o.builtins_opt = app.add_option("--builtins", o.builtins, "builtin converters to enable ('none' for none)")
                       ->delimiter(',');
  o.upstream_opt = app.add_flag("--upstream,!--no-upstream", o.upstream, "pass requests through to live origins");
  o.upstream_strict_opt = app.add_flag("--upstream-strict,!--no-upstream-strict", o.upstream_strict,
                                       "answer 502 when the origin fails and the URL is not archived");
  app.add_option("--upstream-timeout-ms", o.upstream_timeout_ms, "origin timeout");
  app.add_option("--cache-bytes", o.cache_bytes, "conversion cache capacity in bytes");
  app.add_option("--external-concurrency", o.external_concurrency, "concurrent external converters");
  app.add_option("--converter-timeout-ms", o.converter_timeout_ms, "external converter timeout");
  o.strict_accept_opt = app.add_flag("--strict-accept,!--lenient-accept", o.strict_accept,
                                     "reject requests with malformed Accept headers");
  o.permission_opt = app.add_flag("--permission-stub,!--no-permission-stub", o.permission_stub,
                                  "require <origin>/lockss-permission before fetching");
}

Config resolve_config(const Overrides& o) {
  Config c;
  std::string path = o.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("MIGRADO_CONFIG"); env != nullptr) path = env;
  }
  if (!path.empty()) c = load_config_file(path);
  if (o.store) c.store_path = *o.store;
  if (o.listen) c.listen_address = *o.listen;
  if (o.obsolete_opt->count()) c.obsolete_types = o.obsolete;
  if (o.registry_opt->count()) c.registry_urls = o.registry_urls;
  if (o.builtins_opt->count()) {
    c.builtin_converters.clear();
    for (const auto& b : o.builtins) {
      if (b != "none") c.builtin_converters.push_back(b);
    }
  }
  if (o.upstream_opt->count()) c.upstream_mode = o.upstream;
  if (o.upstream_strict_opt->count()) c.upstream_strict = o.upstream_strict;
  if (o.strict_accept_opt->count()) c.strict_accept_parsing = o.strict_accept;
  if (o.permission_opt->count()) c.permission_stub = o.permission_stub;
  if (o.upstream_timeout_ms) c.upstream_timeout_ms = *o.upstream_timeout_ms;
  if (o.cache_bytes) c.cache_bytes = *o.cache_bytes;
  if (o.external_concurrency) c.external_concurrency = *o.external_concurrency;
  if (o.converter_timeout_ms) c.converter_timeout_ms = *o.converter_timeout_ms;
  c.validate();
  return c;
}

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::storage_failure, "cannot read " + path.string());
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::storage_failure, "cannot write " + path.string());
}

bool is_remote(std::string_view item) { return item.starts_with("http://") || item.starts_with("https://"); }

// Strong magic first, then the file extension, then the text heuristic.
MediaType media_type_for_file(const fs::path& path, ByteView body) {
  auto sniffed = sniff_media_type(body);
  if (sniffed && sniffed->essence() != "text/plain") return *sniffed;
  if (auto by_ext = media_type_for_extension(path.string())) return *by_ext;
  if (sniffed) return *sniffed;
  return MediaType("application", "octet-stream");
}

int cmd_serve(const Config& config, std::ostream& out, std::ostream& err) {
  Store store(config.store_path);
  Registry registry;
  populate_registry(registry, config);
  HttpFetcher fetcher;
  for (const auto& url : config.registry_urls) {
    try {
      auto report = sync_registry(registry, fetcher, url);
      out << "registry " << url << " added=" << report.added << " replaced=" << report.replaced
          << " skipped=" << report.skipped << " failed=" << report.failed << "\n";
    } catch (const Error& e) {
      err << "warning: registry " << url << ": " << e.what() << "\n";
    }
  }
  ConverterRunner runner(config.runner_options());
  Gateway gateway(store, registry, runner, config.gateway_options(), &fetcher);
  HttpServer server(gateway);

  auto [host, port] = config.listen_endpoint();
  int bound = server.bind(host, port);
  if (bound < 0) throw Error(Errc::invalid_config, "cannot bind " + config.listen_address);

  // Signals are taken synchronously by a waiter thread; server threads
  // inherit the blocked mask.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&stop_signals, &sig);
    server.stop();
  });

  out << "listening on http://" << host << ":" << bound << std::endl;
  bool ok = server.listen_after_bind();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  out << "stopped" << std::endl;
  return ok ? kExitOk : kExitOperational;
}

int cmd_ingest(const Config& config, const std::vector<std::string>& items, const std::string& base_url,
               const std::string& explicit_url, std::ostream& out) {
  if (!explicit_url.empty() && items.size() != 1) {
    throw CLI::ValidationError("--url", "--url needs exactly one input");
  }
  Store store(config.store_path);
  HttpFetcher fetcher;
  FetchPolicy policy{config.permission_stub, std::chrono::milliseconds(10000)};
  for (const auto& item : items) {
    if (is_remote(item)) {
      auto digest = ingest_fetch(store, fetcher, item, policy);
      auto entry = store.entry(item);
      out << digest << " " << entry->media_type.to_string() << " " << entry->url << "\n";
      continue;
    }
    fs::path path(item);
    auto body = read_file(path);
    auto type = media_type_for_file(path, body);
    std::string url = explicit_url;
    if (url.empty()) {
      url = base_url;
      if (!url.ends_with("/")) url += "/";
      url += path.filename().string();
    }
    auto digest = store.ingest_bytes(url, type, body, now_utc(), ResourceSource::imported);
    out << digest << " " << type.to_string() << " " << *canonicalize_url(url) << "\n";
  }
  return kExitOk;
}

int cmd_negotiate(const Config& config, const std::string& type_text, const std::optional<std::string>& accept_text,
                  std::ostream& out) {
  auto type = MediaType::parse(type_text);
  auto mode = config.strict_accept_parsing ? AcceptParseMode::strict : AcceptParseMode::lenient;
  auto accept = accept_text ? AcceptHeader::parse(*accept_text, mode) : AcceptHeader::absent();
  Registry registry;
  populate_registry(registry, config);
  auto outcome = decide(type, accept, config.policy(), *registry.snapshot());
  out << "q=" << outcome.original_q.to_string() << " decision=" << to_string(outcome.decision);
  if (outcome.plan) out << " converter=" << outcome.plan->converter_id << " target=" << outcome.plan->target.to_string();
  out << "\n";
  return kExitOk;
}

int cmd_convert(const Config& config, const fs::path& source_file, const std::string& source_text,
                const std::string& target_text, std::string output, std::ostream& out) {
  auto source = MediaType::parse(source_text);
  auto target = MediaType::parse(target_text);
  Registry registry;
  populate_registry(registry, config);
  auto plan = registry.plan(source, AcceptHeader::of({MediaRange::exact(target)}), ObsolescencePolicy());
  if (!plan) {
    throw Error(Errc::conversion_failed, "no registered converter from " + source.to_string() + " to " +
                                             target.to_string());
  }
  auto descriptor = registry.find(plan->converter_id);
  ConverterRunner runner(config.runner_options());
  auto body = read_file(source_file);
  auto result = runner.run(*descriptor, source, body);

  if (output.empty()) {
    fs::path p = source_file;
    p.replace_extension(std::string(extension_for(result.media_type)));
    output = p.string();
  }
  write_file(output, result.body);
  out << "wrote " << output << " " << result.media_type.to_string() << " " << result.body.size() << " bytes"
      << " converter=" << descriptor->id << "\n";
  for (const auto& note : result.notes) out << "note: " << note << "\n";
  return kExitOk;
}

int cmd_verify(const Config& config, std::ostream& out) {
  Store store(config.store_path);
  auto report = store.verify();
  out << "total=" << report.total << " ok=" << report.ok << " failed=" << report.failed.size() << "\n";
  for (const auto& url : report.failed) out << "failed " << url << "\n";
  return report.failed.empty() ? kExitOk : kExitOperational;
}

int cmd_registry_sync(const Config& config, const std::vector<std::string>& urls, std::ostream& out) {
  fs::create_directories(config.store_path);
  Registry persisted;
  load_registry_file(persisted, config.registry_file());
  HttpFetcher fetcher;
  for (const auto& url : urls) {
    auto report = sync_registry(persisted, fetcher, url);
    out << url << " added=" << report.added << " replaced=" << report.replaced << " skipped=" << report.skipped
        << " failed=" << report.failed << "\n";
    for (const auto& f : report.failures) out << "failed " << f << "\n";
  }
  save_registry_file(persisted, config.registry_file());
  return kExitOk;
}

int cmd_converters(const Config& config, std::ostream& out) {
  Registry registry;
  populate_registry(registry, config);
  for (const auto& d : registry.list_converters()) {
    out << d.id << " " << d.input.to_string() << " -> " << d.output.to_string() << " cost=" << d.cost
        << " version=" << d.version << " kind=" << to_string(d.kind) << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"migrado: web archive dissemination with on-access format migration", "migrado"};
  app.require_subcommand(1);
  Overrides overrides;
  add_config_flags(app, overrides);

  auto* serve = app.add_subcommand("serve", "run the HTTP gateway");

  std::vector<std::string> ingest_items;
  std::string base_url = "http://localhost/";
  std::string explicit_url;
  auto* ingest = app.add_subcommand("ingest", "preserve local files or fetch URLs");
  ingest->add_option("items", ingest_items, "files or http(s) URLs")->required();
  ingest->add_option("--base-url", base_url, "URL prefix for imported files");
  ingest->add_option("--url", explicit_url, "URL for a single imported file");

  std::string negotiate_type;
  std::optional<std::string> negotiate_accept;
  auto* negotiate = app.add_subcommand("negotiate", "print q and decision for a media type and Accept header");
  negotiate->add_option("media_type", negotiate_type)->required();
  negotiate->add_option("accept", negotiate_accept, "Accept header value; omit for an absent header");

  std::string convert_file, convert_source, convert_target, convert_output;
  auto* convert = app.add_subcommand("convert", "convert a local file with the registered converters");
  convert->add_option("source_file", convert_file)->required()->check(CLI::ExistingFile);
  convert->add_option("source_type", convert_source)->required();
  convert->add_option("target_type", convert_target)->required();
  convert->add_option("-o,--output", convert_output, "output path");

  auto* verify = app.add_subcommand("verify", "re-hash every stored body");

  std::vector<std::string> sync_urls;
  auto* sync = app.add_subcommand("registry-sync", "fetch converter manifests into the local registry");
  sync->add_option("urls", sync_urls)->required();

  auto* converters = app.add_subcommand("converters", "list registered converters");
  auto* show_config = app.add_subcommand("config", "print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Config config = resolve_config(overrides);
    if (*serve) return cmd_serve(config, out, err);
    if (*ingest) return cmd_ingest(config, ingest_items, base_url, explicit_url, out);
    if (*negotiate) return cmd_negotiate(config, negotiate_type, negotiate_accept, out);
    if (*convert) return cmd_convert(config, convert_file, convert_source, convert_target, convert_output, out);
    if (*verify) return cmd_verify(config, out);
    if (*sync) return cmd_registry_sync(config, sync_urls, out);
    if (*converters) return cmd_converters(config, out);
    if (*show_config) {
      out << serialize_config(config);
      return kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return e.code() == Errc::invalid_config || e.code() == Errc::malformed_media_type ||
                   e.code() == Errc::malformed_accept
               ? kExitUsage
               : kExitOperational;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOperational;
  }
  return kExitUsage;
}

}  // namespace migrado
