// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// A step-at-a-time run of one seed that a user can pause, inspect and steer.
// Not thread-safe: callers serialize commands (the service does).

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbrt/engine.hpp"

namespace bbrt {

enum class SessionStatus { kRunning, kPaused, kFinished };
std::string_view session_status_name(SessionStatus s) noexcept;

// Steps displaced by an override, starting at the overridden iteration.
struct ArchivedBranch {
  std::size_t iteration = 0;
  std::vector<TraceStep> steps;
};

class Session {
 public:
  Session(std::string id, RunConfig config, std::shared_ptr<const ConditionalModel> model,
          std::size_t seed_index = 0);

  const std::string& id() const noexcept { return id_; }
  const RunConfig& config() const noexcept { return config_; }
  std::size_t seed_index() const noexcept { return seed_index_; }
  SessionStatus status() const noexcept;
  const std::vector<TraceStep>& trace() const noexcept { return trace_; }
  const std::vector<ArchivedBranch>& archive() const noexcept { return archive_; }
  std::optional<std::size_t> breakpoint() const noexcept { return breakpoint_; }
  // Set when a step failed; the session then counts as finished.
  const std::optional<std::string>& truncated() const noexcept { return truncated_; }

  // Runs up to `count` iterations. Stops after the breakpoint iteration,
  // which pauses the session and clears the breakpoint. Returns the number
  // of steps executed.
  std::size_t advance(std::size_t count = 1);
  void pause();
  // At most one breakpoint is pending; a new one replaces it.
  void set_breakpoint(std::size_t iteration);
  void clear_breakpoint();

  // Throws UnknownIteration.
  const CandidateBatch& breakpoint_list(std::size_t iteration) const;

  // Makes `candidate` the winner of `iteration`, archives the displaced
  // downstream steps and regenerates them from the new branch point up to
  // the previous trace length. Throws UnknownIteration / InvalidCandidate.
  void override_choice(std::size_t iteration, std::size_t candidate);

  SeedTrace as_seed_trace() const;

 private:
  bool step_once();

  std::string id_;
  RunConfig config_;
  std::shared_ptr<const ConditionalModel> model_;
  std::size_t seed_index_;
  Fingerprint initial_;
  std::vector<TraceStep> trace_;
  std::vector<ArchivedBranch> archive_;
  std::optional<std::size_t> breakpoint_;
  std::optional<std::string> truncated_;
  bool paused_ = false;
};

}  // namespace bbrt
