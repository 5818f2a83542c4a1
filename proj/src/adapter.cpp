// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/adapter.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "bbrt/error.hpp"

namespace bbrt {

using nlohmann::json;

namespace {

void ignore_sigpipe() {
  static const bool once = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, pid_t child) : read_fd_(read_fd), write_fd_(write_fd), child_(child) {}

  ~FdChannel() override {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (child_ > 0) {
      // Closing stdin asks the child to exit; give it a moment, then insist.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(child_, nullptr, WNOHANG) == child_) return;
        ::usleep(2000);
      }
      ::kill(child_, SIGTERM);
      ::waitpid(child_, nullptr, 0);
    }
  }

  void write_line(std::string_view line) override {
    std::string data(line);
    data += '\n';
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kProtocolError, std::string("write to model peer failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw Error(ErrorCode::kTimeout, "model peer did not reply in time");
      pollfd pfd{read_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kProtocolError, std::string("poll failed: ") + std::strerror(errno));
      }
      if (rc == 0) throw Error(ErrorCode::kTimeout, "model peer did not reply in time");
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kProtocolError, std::string("read from model peer failed: ") + std::strerror(errno));
      }
      if (n == 0) throw Error(ErrorCode::kProtocolError, "model peer closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int read_fd_;
  int write_fd_;
  pid_t child_;
  std::string buffer_;
};

std::unique_ptr<LineChannel> spawn_process(const std::string& command) {
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0) throw Error(ErrorCode::kIo, "pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw Error(ErrorCode::kIo, "pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::kIo, "fork failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
  return std::make_unique<FdChannel>(from_child[0], to_child[1], pid);
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorCode::kIo, "cannot resolve " + host + ":" + port + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot connect to " + host + ":" + port);
  return std::make_unique<FdChannel>(fd, fd, -1);
}

json tokens_to_json(std::span<const Token> tokens) {
  json arr = json::array();
  for (Token t : tokens) arr.push_back(render(t));
  return arr;
}

TokenSequence tokens_from_json(const json& arr) {
  if (!arr.is_array()) throw Error(ErrorCode::kProtocolError, "expected a token array");
  TokenSequence out;
  for (const auto& s : arr) {
    if (!s.is_string()) throw Error(ErrorCode::kProtocolError, "token entries must be strings");
    out.push_back(token(s.get<std::string>()));
  }
  return out;
}

json parse_reply(const std::string& line) {
  json reply;
  try {
    reply = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kProtocolError, std::string("malformed reply: ") + e.what());
  }
  if (!reply.is_object()) throw Error(ErrorCode::kProtocolError, "reply is not a JSON object");
  if (reply.contains("error")) throw Error(ErrorCode::kProtocolError, "peer error: " + reply["error"].dump());
  return reply;
}

}  // namespace

std::unique_ptr<LineChannel> open_channel(std::string_view endpoint) {
  ignore_sigpipe();
  if (endpoint.starts_with("exec:")) return spawn_process(std::string(endpoint.substr(5)));
  if (endpoint.starts_with("tcp:")) {
    const std::string_view rest = endpoint.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string_view::npos) throw Error(ErrorCode::kConfig, "tcp endpoint needs host:port");
    return connect_tcp(std::string(rest.substr(0, colon)), std::string(rest.substr(colon + 1)));
  }
  throw Error(ErrorCode::kConfig, "endpoint must start with exec: or tcp:");
}

ExternalModel::ExternalModel(std::unique_ptr<LineChannel> channel, ModelMode mode, AdapterOptions options)
    : channel_(std::move(channel)), mode_(mode), options_(options) {
  const json reply = parse_reply(round_trip(json{{"op", "hello"}}.dump()));
  if (!reply.contains("vocab")) throw Error(ErrorCode::kProtocolError, "hello reply lacks vocab");
  try {
    vocab_ = Vocabulary(tokens_from_json(reply["vocab"]));
  } catch (const UnknownTokenError& e) {
    throw Error(ErrorCode::kProtocolError, std::string("peer vocabulary: ") + e.what());
  }
}

std::unique_ptr<ExternalModel> ExternalModel::connect(std::string_view endpoint, ModelMode mode,
                                                      AdapterOptions options) {
  return std::make_unique<ExternalModel>(open_channel(endpoint), mode, options);
}

std::string ExternalModel::round_trip(const std::string& request) const {
  std::lock_guard lock(mutex_);
  channel_->write_line(request);
  return channel_->read_line(options_.timeout);
}

Distribution ExternalModel::next_token_dist(std::span<const Token> source, std::span<const Token> prefix) const {
  if (mode_ != ModelMode::kTokenLevel) {
    throw Error(ErrorCode::kModeMismatch, "next_token_dist on a sequence-level adapter");
  }
  const json req{{"op", "dist"}, {"source", tokens_to_json(source)}, {"prefix", tokens_to_json(prefix)}};
  const json reply = parse_reply(round_trip(req.dump()));
  if (!reply.contains("p") || !reply["p"].is_array()) throw Error(ErrorCode::kProtocolError, "dist reply lacks p");
  Distribution p;
  for (const auto& v : reply["p"]) {
    if (!v.is_number()) throw Error(ErrorCode::kProtocolError, "p entries must be numbers");
    p.push_back(v.get<double>());
  }
  check_distribution(p, vocab_.distribution_size(), 1e-6);
  double sum = 0.0;
  for (double v : p) sum += v;
  if (std::abs(sum - 1.0) > 1e-9) {
    for (double& v : p) v /= sum;
  }
  return p;
}

std::vector<std::string> ExternalModel::generate(std::span<const Token> source, std::size_t n,
                                                 std::uint64_t seed) const {
  if (mode_ != ModelMode::kSequenceLevel) throw Error(ErrorCode::kModeMismatch, "generate on a token-level adapter");
  const json req{{"op", "gen"}, {"source", tokens_to_json(source)}, {"n", n}, {"seed", seed}};
  const json reply = parse_reply(round_trip(req.dump()));
  if (!reply.contains("cands") || !reply["cands"].is_array()) {
    throw Error(ErrorCode::kProtocolError, "gen reply lacks cands");
  }
  if (reply["cands"].size() != n) {
    throw Error(ErrorCode::kProtocolError, "gen reply has " + std::to_string(reply["cands"].size()) +
                                               " candidates, expected " + std::to_string(n));
  }
  std::vector<std::string> out;
  for (const auto& cand : reply["cands"]) {
    if (!cand.is_array()) throw Error(ErrorCode::kProtocolError, "candidate must be a token array");
    std::string s;
    for (const auto& t : cand) {
      if (!t.is_string()) throw Error(ErrorCode::kProtocolError, "token entries must be strings");
      s += t.get<std::string>();
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string handle_protocol_line(const ConditionalModel& model, std::string_view line) {
  json reply;
  try {
    const json req = json::parse(line);
    const std::string op = req.at("op").get<std::string>();
    if (op == "hello") {
      reply = {{"op", "hello"},
               {"vocab", tokens_to_json(model.vocabulary().tokens())},
               {"mode", std::string(model_mode_name(model.mode()))}};
    } else if (op == "dist") {
      const auto source = tokens_from_json(req.at("source"));
      const auto prefix = tokens_from_json(req.at("prefix"));
      reply = {{"p", model.next_token_dist(source, prefix)}};
    } else if (op == "gen") {
      const auto source = tokens_from_json(req.at("source"));
      const auto n = req.at("n").get<std::size_t>();
      const auto seed = req.value("seed", std::uint64_t{0});
      json cands = json::array();
      for (const auto& s : model.generate(source, n, seed)) {
        json toks = json::array();
        // Split on ']' without validating, so peers may relay unknown symbols.
        std::size_t start = 0;
        while (start < s.size()) {
          const auto close = s.find(']', start);
          const auto end = close == std::string::npos ? s.size() : close + 1;
          toks.push_back(s.substr(start, end - start));
          start = end;
        }
        cands.push_back(std::move(toks));
      }
      reply = {{"cands", std::move(cands)}};
    } else {
      reply = {{"error", "unknown op '" + op + "'"}};
    }
  } catch (const std::exception& e) {
    reply = {{"error", e.what()}};
  }
  return reply.dump();
}

void serve_protocol(const ConditionalModel& model, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << handle_protocol_line(model, line) << '\n';
    out.flush();
  }
}

}  // namespace bbrt
