#include "migrado/http_server.hpp"

#include <httplib.h>

namespace migrado {

HttpServer::HttpServer(Gateway& gateway) : gateway_(gateway), server_(std::make_unique<httplib::Server>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request;
    request.method = req.method;
    request.target = req.target;
    for (const auto& [k, v] : req.headers) request.headers.emplace_back(k, v);

    auto response = gateway_.handle(request);
    res.status = response.status;
    for (const auto& [k, v] : response.headers) res.set_header(k, v);
    res.body = std::move(response.body);
  };
  const std::string any = R"(.*)";
  server_->Get(any, handler);  // also serves HEAD
  server_->Post(any, handler);
  server_->Put(any, handler);
  server_->Patch(any, handler);
  server_->Delete(any, handler);
  server_->Options(any, handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_->is_running()) server_->stop();
}

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace migrado
