#pragma once

#include <memory>
#include <string>

#include "migrado/gateway.hpp"

namespace httplib {
class Server;
}

namespace migrado {

/// HTTP/1.1 front end for a Gateway. Every request, in origin form or
/// absolute (forward-proxy) form, goes to the same handler.
class HttpServer {
 public:
  explicit HttpServer(Gateway& gateway);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);

  /// Serves until stop(). Call after bind().
  bool listen_after_bind();

  void stop();
  void wait_until_ready() const;

 private:
  Gateway& gateway_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace migrado
