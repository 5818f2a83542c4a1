// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// Line-delimited JSON bridge to out-of-process translation models.
//
// One UTF-8 JSON object per line, request then reply:
//   {"op":"hello"}                                   -> {"op":"hello","vocab":["[C]",...],"mode":"token-level"}
//   {"op":"dist","source":[...],"prefix":[...]}      -> {"p":[...]}        (|vocab| + 1 entries, EOS last)
//   {"op":"gen","source":[...],"n":K,"seed":s}       -> {"cands":[[...],...]}
// Token lists carry bracketed surface symbols. A reply {"error":"..."} is
// surfaced as ProtocolError.

#pragma once

#include <chrono>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "bbrt/model.hpp"

namespace bbrt {

class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(std::string_view line) = 0;
  // Throws Timeout when no full line arrives in time, ProtocolError on EOF.
  virtual std::string read_line(std::chrono::milliseconds timeout) = 0;
};

// "exec:<shell command>" spawns a child speaking the protocol on stdio;
// "tcp:<host>:<port>" connects to a listening peer.
std::unique_ptr<LineChannel> open_channel(std::string_view endpoint);

struct AdapterOptions {
  std::chrono::milliseconds timeout{10000};
};

// Requests are serialized per connection. Distributions whose sum drifts
// from 1 by at most 1e-6 are renormalized; anything else is rejected with
// InvalidDistribution.
class ExternalModel final : public ConditionalModel {
 public:
  ExternalModel(std::unique_ptr<LineChannel> channel, ModelMode mode, AdapterOptions options = {});

  static std::unique_ptr<ExternalModel> connect(std::string_view endpoint, ModelMode mode,
                                                AdapterOptions options = {});

  const Vocabulary& vocabulary() const override { return vocab_; }
  ModelMode mode() const override { return mode_; }
  Distribution next_token_dist(std::span<const Token> source, std::span<const Token> prefix) const override;
  std::vector<std::string> generate(std::span<const Token> source, std::size_t n, std::uint64_t seed) const override;

 private:
  std::string round_trip(const std::string& request) const;

  std::unique_ptr<LineChannel> channel_;
  ModelMode mode_;
  AdapterOptions options_;
  Vocabulary vocab_;
  mutable std::mutex mutex_;
};

// Peer side: answer one request line for an in-process model.
std::string handle_protocol_line(const ConditionalModel& model, std::string_view line);
// Answers requests until EOF.
void serve_protocol(const ConditionalModel& model, std::istream& in, std::ostream& out);

}  // namespace bbrt
