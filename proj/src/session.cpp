// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/session.hpp"

#include <exception>

#include "bbrt/error.hpp"

namespace bbrt {

std::string_view session_status_name(SessionStatus s) noexcept {
  switch (s) {
    case SessionStatus::kRunning: return "running";
    case SessionStatus::kPaused: return "paused-at-breakpoint";
    case SessionStatus::kFinished: return "finished";
  }
  return "?";
}

Session::Session(std::string id, RunConfig config, std::shared_ptr<const ConditionalModel> model,
                 std::size_t seed_index)
    : id_(std::move(id)), config_(std::move(config)), model_(std::move(model)), seed_index_(seed_index) {
  config_.validate();
  if (!model_) throw Error(ErrorCode::kInvalidArgument, "session needs a model");
  if (seed_index_ >= config_.seeds.size()) {
    throw Error(ErrorCode::kInvalidArgument, "seed index " + std::to_string(seed_index_) + " out of range");
  }
  initial_ = morgan_fingerprint(decode(config_.seeds[seed_index_]), config_.radius);
}

SessionStatus Session::status() const noexcept {
  if (truncated_ || trace_.size() >= config_.iterations) return SessionStatus::kFinished;
  return paused_ ? SessionStatus::kPaused : SessionStatus::kRunning;
}

bool Session::step_once() {
  const std::size_t it = trace_.size();
  const TokenSequence& source = trace_.empty() ? config_.seeds[seed_index_] : trace_.back().winner().seq.tokens;
  try {
    trace_.push_back(TraceStep{bbrt_step(*model_, config_, source, initial_, seed_index_, it), Provenance::kAuto});
  } catch (const std::exception& e) {
    truncated_ = "iteration " + std::to_string(it) + ": " + e.what();
    return false;
  }
  return true;
}

std::size_t Session::advance(std::size_t count) {
  paused_ = false;
  std::size_t done = 0;
  while (done < count && status() != SessionStatus::kFinished) {
    if (!step_once()) break;
    ++done;
    if (breakpoint_ && trace_.size() == *breakpoint_ + 1) {
      breakpoint_.reset();
      paused_ = true;
      break;
    }
  }
  return done;
}

void Session::pause() {
  if (status() != SessionStatus::kFinished) paused_ = true;
}

void Session::set_breakpoint(std::size_t iteration) {
  if (iteration >= config_.iterations) {
    throw Error(ErrorCode::kUnknownIteration, "breakpoint beyond the last iteration " +
                                                  std::to_string(config_.iterations - 1));
  }
  breakpoint_ = iteration;
}

void Session::clear_breakpoint() { breakpoint_.reset(); }

const CandidateBatch& Session::breakpoint_list(std::size_t iteration) const {
  if (iteration >= trace_.size()) {
    throw Error(ErrorCode::kUnknownIteration, "iteration " + std::to_string(iteration) + " has not run (trace has " +
                                                  std::to_string(trace_.size()) + " steps)");
  }
  return trace_[iteration].batch;
}

void Session::override_choice(std::size_t iteration, std::size_t candidate) {
  const CandidateBatch& batch = breakpoint_list(iteration);
  if (candidate >= batch.candidates.size()) {
    throw Error(ErrorCode::kInvalidCandidate, "candidate " + std::to_string(candidate) + " out of range (batch has " +
                                                  std::to_string(batch.candidates.size()) + ")");
  }
  const std::size_t target = trace_.size();
  ArchivedBranch branch;
  branch.iteration = iteration;
  branch.steps.assign(trace_.begin() + static_cast<std::ptrdiff_t>(iteration), trace_.end());
  archive_.push_back(std::move(branch));

  trace_.resize(iteration + 1);
  trace_.back().batch.chosen = candidate;
  trace_.back().provenance = Provenance::kUserOverride;
  truncated_.reset();
  while (trace_.size() < target && step_once()) {
  }
}

SeedTrace Session::as_seed_trace() const {
  SeedTrace t;
  t.seed_index = seed_index_;
  t.seed = config_.seeds[seed_index_];
  t.steps = trace_;
  t.truncated = truncated_;
  for (const auto& s : trace_) {
    t.generations += s.batch.generated;
    t.dropped += s.batch.dropped;
  }
  return t;
}

}  // namespace bbrt
