// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/service.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <httplib.h>

#include "bbrt/error.hpp"

namespace fs = std::filesystem;

namespace bbrt {

namespace {

struct Snapshot {
  Json status;
  std::string trace;
  std::string report;
  std::string csv;
  std::vector<std::string> steps;  // step_to_json per iteration
  std::string archive;
};

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownIteration: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidCandidate:
    case ErrorCode::kUnknownToken:
    case ErrorCode::kEmptyInput: return 400;
    default: return 500;
  }
}

HttpResponse json_response(int status, const Json& j) { return HttpResponse{status, "application/json", j.dump()}; }

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
  return json_response(status, Json{{"error", std::string(code)}, {"message", std::string(message)}});
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const auto slash = path.find('/', pos);
    const auto end = slash == std::string_view::npos ? path.size() : slash;
    if (end > pos) out.emplace_back(path.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

std::size_t unsigned_arg(const Json& args, const char* key, std::optional<std::size_t> fallback = std::nullopt) {
  if (!args.contains(key)) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::kInvalidArgument, std::string("missing field '") + key + "'");
  }
  const Json& v = args.at(key);
  if (!v.is_number_unsigned()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::size_t parse_index(const std::string& s) {
  if (s.empty() || s.size() > 9 || s.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::kUnknownIteration, "bad iteration '" + s + "'");
  }
  return std::stoul(s);
}

Json apply_command(Session& s, const std::string& op, const Json& args) {
  if (op == "advance") {
    const std::size_t count = unsigned_arg(args, "count", 1);
    if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
    return Json{{"executed", s.advance(count)}};
  }
  if (op == "pause") {
    s.pause();
    return Json::object();
  }
  if (op == "set_breakpoint") {
    s.set_breakpoint(unsigned_arg(args, "iteration"));
    return Json::object();
  }
  if (op == "clear_breakpoint") {
    s.clear_breakpoint();
    return Json::object();
  }
  if (op == "override") {
    s.override_choice(unsigned_arg(args, "iteration"), unsigned_arg(args, "candidate"));
    return Json::object();
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown command '" + op + "'");
}

Json status_json(const Session& s) {
  return Json{{"id", s.id()},
              {"status", std::string(session_status_name(s.status()))},
              {"steps", s.trace().size()},
              {"iterations", s.config().iterations},
              {"seed_index", s.seed_index()},
              {"breakpoint", s.breakpoint() ? Json(*s.breakpoint()) : Json(nullptr)},
              {"truncated", s.truncated() ? Json(*s.truncated()) : Json(nullptr)},
              {"archived_branches", s.archive().size()}};
}

std::shared_ptr<const Snapshot> make_snapshot(const Session& s) {
  auto snap = std::make_shared<Snapshot>();
  snap->status = status_json(s);
  const SeedTrace t = s.as_seed_trace();
  snap->trace = format_trace(s.config(), std::span<const SeedTrace>(&t, 1));
  const EnsembleReport rep = build_report(s.config(), std::span<const SeedTrace>(&t, 1));
  snap->report = report_to_json(rep).dump();
  snap->csv = series_csv(rep);
  for (const auto& step : s.trace()) snap->steps.push_back(step_to_json(s.seed_index(), step).dump());
  Json archive = Json::array();
  for (const auto& b : s.archive()) {
    Json steps = Json::array();
    for (const auto& step : b.steps) steps.push_back(step_to_json(s.seed_index(), step));
    archive.push_back(Json{{"iteration", b.iteration}, {"steps", std::move(steps)}});
  }
  snap->archive = archive.dump();
  return snap;
}

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to '" + path.string() + "'");
  out << line << '\n';
}

}  // namespace

struct SessionService::Entry {
  std::string id;
  fs::path dir;
  std::unique_ptr<Session> session;
  std::mutex command_mutex;  // single writer
  mutable std::mutex snapshot_mutex;
  std::shared_ptr<const Snapshot> snapshot;

  std::shared_ptr<const Snapshot> read() const {
    std::lock_guard lock(snapshot_mutex);
    return snapshot;
  }
  void publish() {
    auto snap = make_snapshot(*session);
    write_text_file(dir / "trace.jsonl", snap->trace);
    std::lock_guard lock(snapshot_mutex);
    snapshot = std::move(snap);
  }
};

SessionService::SessionService(fs::path store_root, ModelFactory factory)
    : root_(std::move(store_root)), factory_(std::move(factory)) {
  fs::create_directories(root_ / "sessions");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root_ / "sessions")) {
    if (e.is_directory() && fs::exists(e.path() / "session.json")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const std::string id = dir.filename().string();
    try {
      const Json meta = read_json_file(dir / "session.json");
      auto entry = open_session(id, meta.at("config"), meta.at("seed_index").get<std::size_t>());
      entry->dir = dir;
      if (fs::exists(dir / "commands.jsonl")) {
        std::istringstream log(read_text_file(dir / "commands.jsonl"));
        std::string line;
        while (std::getline(log, line)) {
          if (line.empty()) continue;
          const Json cmd = Json::parse(line);
          apply_command(*entry->session, cmd.at("op").get<std::string>(), cmd.at("args"));
        }
      }
      entry->publish();
      sessions_[id] = std::move(entry);
    } catch (const std::exception& e) {
      std::cerr << "bbrt: skipping session " << id << ": " << e.what() << "\n";
    }
  }
}

SessionService::~SessionService() = default;

std::size_t SessionService::session_count() const {
  std::shared_lock lock(map_mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session '" + id + "'");
  return it->second;
}

std::shared_ptr<SessionService::Entry> SessionService::open_session(const std::string& id, const Json& config,
                                                                    std::size_t seed_index) {
  const ExperimentConfig exp = experiment_from_json(config, root_);
  auto entry = std::make_shared<Entry>();
  entry->id = id;
  entry->session = std::make_unique<Session>(id, exp.run, factory_(exp.model, root_), seed_index);
  return entry;
}

HttpResponse SessionService::create(std::string_view body) {
  const Json req = body.empty() ? Json::object() : Json::parse(body);
  if (!req.is_object() || !req.contains("config")) {
    throw Error(ErrorCode::kInvalidArgument, "body must be {\"config\": {...}, \"seed_index\": n}");
  }
  for (const auto& [k, v] : req.items()) {
    if (k != "config" && k != "seed_index") throw Error(ErrorCode::kInvalidArgument, "unknown field '" + k + "'");
  }
  const std::size_t seed_index = unsigned_arg(req, "seed_index", 0);
  std::lock_guard lock(create_mutex_);
  std::string id;
  for (int n = 1;; ++n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "s%04d", n);
    id = buf;
    if (!fs::exists(root_ / "sessions" / id)) break;
  }
  auto entry = open_session(id, req.at("config"), seed_index);
  entry->dir = root_ / "sessions" / id;
  fs::create_directories(entry->dir);
  write_text_file(entry->dir / "session.json",
                  Json{{"config", req.at("config")}, {"seed_index", seed_index}}.dump(2) + "\n");
  entry->publish();
  const Json status = entry->read()->status;
  {
    std::unique_lock map_lock(map_mutex_);
    sessions_[id] = std::move(entry);
  }
  return json_response(201, status);
}

HttpResponse SessionService::command(const std::shared_ptr<Entry>& e, const std::string& op, const Json& args) {
  std::unique_lock lock(e->command_mutex, std::try_to_lock);
  if (!lock.owns_lock()) {
    return error_response(409, "Conflict", "session '" + e->id + "' is busy with another command");
  }
  Json result = apply_command(*e->session, op, args);
  append_line(e->dir / "commands.jsonl", Json{{"op", op}, {"args", args}}.dump());
  e->publish();
  result["session"] = e->read()->status;
  return json_response(200, result);
}

HttpResponse SessionService::handle(std::string_view method, std::string_view path, std::string_view body) {
  try {
    if (const auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
    const auto segs = split_path(path);
    if (segs.empty() || segs[0] != "v1") return error_response(404, "NotFound", "unknown path");
    const bool get = method == "GET", post = method == "POST", put = method == "PUT", del = method == "DELETE";
    auto method_not_allowed = [] { return error_response(405, "MethodNotAllowed", "method not allowed"); };

    if (segs.size() == 2 && segs[1] == "vocab") {
      if (!get) return method_not_allowed();
      Json tokens = Json::array();
      for (std::size_t i = 0; i < alphabet_size(); ++i) tokens.push_back(render(Token{static_cast<std::uint8_t>(i)}));
      return json_response(200, Json{{"tokens", tokens}, {"eos_index", alphabet_size()}});
    }
    if (segs.size() < 2 || segs[1] != "sessions") return error_response(404, "NotFound", "unknown path");
    if (segs.size() == 2) {
      if (post) return create(body);
      if (!get) return method_not_allowed();
      Json list = Json::array();
      std::vector<std::shared_ptr<Entry>> entries;
      {
        std::shared_lock lock(map_mutex_);
        for (const auto& [id, e] : sessions_) entries.push_back(e);
      }
      for (const auto& e : entries) list.push_back(e->read()->status);
      return json_response(200, Json{{"sessions", list}});
    }

    const auto entry = find(segs[2]);
    const Json args = body.empty() ? Json::object() : Json::parse(body);
    if (!args.is_object()) throw Error(ErrorCode::kInvalidArgument, "body must be a JSON object");
    if (segs.size() == 3) {
      if (!get) return method_not_allowed();
      return json_response(200, entry->read()->status);
    }
    const std::string& leaf = segs[3];
    if (segs.size() == 4) {
      if (leaf == "advance" || leaf == "pause" || leaf == "override") {
        if (!post) return method_not_allowed();
        return command(entry, leaf, args);
      }
      if (leaf == "breakpoint") {
        if (put) return command(entry, "set_breakpoint", args);
        if (del) return command(entry, "clear_breakpoint", Json::object());
        return method_not_allowed();
      }
      if (!get) return method_not_allowed();
      const auto snap = entry->read();
      if (leaf == "trace") return HttpResponse{200, "application/x-ndjson", snap->trace};
      if (leaf == "report") return HttpResponse{200, "application/json", snap->report};
      if (leaf == "series.csv") return HttpResponse{200, "text/csv", snap->csv};
      if (leaf == "archive") return HttpResponse{200, "application/json", snap->archive};
    }
    if (segs.size() == 5 && leaf == "breakpoints") {
      if (!get) return method_not_allowed();
      const auto snap = entry->read();
      const std::size_t it = parse_index(segs[4]);
      if (it >= snap->steps.size()) {
        return error_response(404, "UnknownIteration",
                              "iteration " + segs[4] + " has not run (trace has " + std::to_string(snap->steps.size()) +
                                  " steps)");
      }
      return HttpResponse{200, "application/json", snap->steps[it]};
    }
    return error_response(404, "NotFound", "unknown path");
  } catch (const Json::exception& e) {
    return error_response(400, "BadRequest", std::string("malformed JSON: ") + e.what());
  } catch (const Error& e) {
    return error_response(status_for(e.code()), error_code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(SessionService& service) : impl_(std::make_unique<Impl>()) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type.c_str());
  };
  const std::string pattern = R"(/v1/.*)";
  impl_->server.Get(pattern, forward);
  impl_->server.Post(pattern, forward);
  impl_->server.Put(pattern, forward);
  impl_->server.Delete(pattern, forward);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace bbrt
