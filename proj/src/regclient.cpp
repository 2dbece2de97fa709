#include "migrado/regclient.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "migrado/common.hpp"
#include "migrado/converters.hpp"
#include "migrado/error.hpp"

namespace migrado {

namespace {

nlohmann::ordered_json descriptor_object(const ConverterDescriptor& d) {
  nlohmann::ordered_json j;
  j["id"] = d.id;
  j["input"] = d.input.to_string();
  j["output"] = d.output.to_string();
  j["cost"] = d.cost;
  j["version"] = d.version;
  j["kind"] = to_string(d.kind);
  if (d.kind == ConverterKind::external_command) j["command"] = d.command;
  return j;
}

ConverterDescriptor descriptor_from(const nlohmann::json& j) {
  try {
    auto kind = parse_converter_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(Errc::invalid_descriptor, "unknown kind " + j.at("kind").dump());
    ConverterDescriptor d{j.at("id").get<std::string>(),
                          MediaType::parse(j.at("input").get<std::string>()),
                          MediaType::parse(j.at("output").get<std::string>()),
                          j.contains("cost") ? j.at("cost").get<std::uint32_t>() : 100u,
                          j.at("version").get<std::string>(),
                          *kind,
                          j.contains("command") ? j.at("command").get<std::vector<std::string>>()
                                                : std::vector<std::string>{}};
    d.validate();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_descriptor, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::invalid_descriptor) throw;
    throw Error(Errc::invalid_descriptor, e.what());
  }
}

}  // namespace

std::string canonical_descriptor_json(const ConverterDescriptor& d) { return descriptor_object(d).dump(); }

std::string descriptor_digest(const ConverterDescriptor& d) { return sha256_hex(canonical_descriptor_json(d)); }

std::string serialize_manifest(const std::vector<ConverterDescriptor>& converters, int version) {
  nlohmann::ordered_json doc;
  doc["version"] = version;
  doc["converters"] = nlohmann::ordered_json::array();
  for (const auto& d : converters) {
    auto record = descriptor_object(d);
    record["sha256"] = descriptor_digest(d);
    doc["converters"].push_back(std::move(record));
  }
  return doc.dump(2) + "\n";
}

SyncReport apply_manifest(Registry& registry, std::string_view manifest_json) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(manifest_json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_manifest, std::string("manifest is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer() ||
      !doc.contains("converters") || !doc["converters"].is_array()) {
    throw Error(Errc::malformed_manifest, "manifest needs an integer version and a converters array");
  }

  SyncReport report;
  std::set<std::string> seen;
  const auto& records = doc["converters"];
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& record = records[i];
    std::string label = "#" + std::to_string(i);
    auto fail = [&](const std::string& why) {
      ++report.failed;
      report.failures.push_back(label + ": " + why);
    };
    if (record.is_object() && record.contains("id") && record["id"].is_string()) {
      label = record["id"].get<std::string>();
    }

    std::optional<ConverterDescriptor> parsed;
    try {
      parsed = descriptor_from(record);
    } catch (const Error& e) {
      fail(std::string(errc_name(e.code())) + " " + e.what());
      continue;
    }
    auto& d = *parsed;
    if (!record.contains("sha256") || !record["sha256"].is_string() ||
        record["sha256"].get<std::string>() != descriptor_digest(d)) {
      fail(std::string(errc_name(Errc::digest_mismatch)));
      continue;
    }
    if (!seen.insert(d.id).second) {
      fail("DuplicateId within manifest");
      continue;
    }
    if (d.kind == ConverterKind::builtin && !is_builtin_id(d.id)) {
      ++report.skipped;  // not compiled into this binary
      continue;
    }
    try {
      auto outcome = registry.register_converter(std::move(d));
      ++(outcome == Registry::Outcome::added ? report.added : report.replaced);
    } catch (const Error& e) {
      if (e.code() == Errc::duplicate_id) {
        ++report.skipped;
      } else {
        fail(std::string(errc_name(e.code())) + " " + e.what());
      }
    }
  }
  return report;
}

SyncReport sync_registry(Registry& registry, const Fetcher& fetcher, std::string_view url,
                         std::chrono::milliseconds timeout) {
  auto response = fetcher.get(std::string(url), timeout);
  if (response.status != 200) {
    throw Error(Errc::fetch_failed, "GET " + std::string(url) + " answered " + std::to_string(response.status));
  }
  return apply_manifest(registry, response.body);
}

void load_registry_file(Registry& registry, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return;
  std::stringstream buf;
  buf << in.rdbuf();
  auto report = apply_manifest(registry, buf.str());
  if (report.failed != 0) {
    throw Error(Errc::malformed_manifest, path.string() + ": " + report.failures.front());
  }
}

void save_registry_file(const Registry& registry, const std::filesystem::path& path) {
  auto data = serialize_manifest(registry.list_converters());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::storage_failure, "cannot write " + tmp.string());
    out << data;
    if (!out) throw Error(Errc::storage_failure, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::storage_failure, "cannot rename onto " + path.string() + ": " + ec.message());
}

}  // namespace migrado
