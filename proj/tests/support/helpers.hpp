#pragma once

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "migrado/common.hpp"

namespace migrado::testing {

inline std::filesystem::path fixture_dir() { return MIGRADO_FIXTURE_DIR; }

inline Bytes read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline Bytes gif_fixture(const std::string& name) { return read_bytes(fixture_dir() / "gif" / name); }

/// Pillow-computed reference data for the GIF corpus.
inline const nlohmann::json& gif_expectations() {
  static const nlohmann::json j = [] {
    std::ifstream in(fixture_dir() / "gif" / "expected.json");
    return nlohmann::json::parse(in);
  }();
  return j;
}

inline std::vector<std::string> gif_corpus() {
  std::vector<std::string> names;
  for (const auto& [name, v] : gif_expectations().items()) names.push_back(name);
  return names;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("migrado-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

/// An httplib server on an ephemeral loopback port, running on its own thread.
class LocalServer {
 public:
  LocalServer() = default;
  ~LocalServer() { stop(); }

  httplib::Server& server() { return server_; }

  int start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }
  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }
  int port() const { return port_; }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

inline void flip_byte(const std::filesystem::path& p, std::size_t offset) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char c = 0;
  f.get(c);
  f.seekp(static_cast<std::streamoff>(offset));
  f.put(static_cast<char>(c ^ 0x01));
}

}  // namespace migrado::testing
