// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// HTTP/JSON session service. Routes (all under /v1):
//   GET    /vocab                               alphabet manifest
//   GET    /sessions                            list sessions
//   POST   /sessions                            {"config":{...},"seed_index":0} -> 201
//   GET    /sessions/{id}                       status
//   POST   /sessions/{id}/advance               {"count":n}
//   POST   /sessions/{id}/pause
//   PUT    /sessions/{id}/breakpoint            {"iteration":i}
//   DELETE /sessions/{id}/breakpoint
//   GET    /sessions/{id}/breakpoints/{i}       alternatives at iteration i
//   POST   /sessions/{id}/override              {"iteration":i,"candidate":c}
//   GET    /sessions/{id}/trace                 line-delimited JSON trace
//   GET    /sessions/{id}/archive               branches displaced by overrides
//   GET    /sessions/{id}/report                ensemble report
//   GET    /sessions/{id}/series.csv            per-iteration series
// Errors: 400 invalid input, 404 unknown session or iteration, 409 when a
// command is already running on the session.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "bbrt/io.hpp"
#include "bbrt/session.hpp"

namespace bbrt {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

using ModelFactory =
    std::function<std::shared_ptr<ConditionalModel>(const ModelSpec& spec, const std::filesystem::path& base_dir)>;

// Sessions live in <store>/sessions/<id>/: session.json (config), a command
// log replayed on restart, and trace.jsonl. Relative model paths in posted
// configs resolve against the store root.
class SessionService {
 public:
  explicit SessionService(std::filesystem::path store_root, ModelFactory factory = load_model);
  ~SessionService();

  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  std::size_t session_count() const;

 private:
  struct Entry;

  std::shared_ptr<Entry> find(const std::string& id) const;
  std::shared_ptr<Entry> open_session(const std::string& id, const Json& config, std::size_t seed_index);
  HttpResponse create(std::string_view body);
  HttpResponse command(const std::shared_ptr<Entry>& e, const std::string& op, const Json& args);

  std::filesystem::path root_;
  ModelFactory factory_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mutex create_mutex_;
};

// Blocks serving `service` until stop() is called from another thread.
class HttpServer {
 public:
  explicit HttpServer(SessionService& service);
  ~HttpServer();

  // port 0 binds an ephemeral port; returns the bound port.
  int bind(const std::string& host, int port);
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bbrt
