// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// Recursive generate / score / select loop and the ensemble built from it.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbrt/decoding.hpp"
#include "bbrt/metrics.hpp"
#include "bbrt/model.hpp"
#include "bbrt/mol_graph.hpp"
#include "bbrt/oracle.hpp"
#include "bbrt/selfies.hpp"

namespace bbrt {

enum class ScoringKind { kPenalizedLogp, kQed, kMaxDeltaSim, kMaxInitSim, kMinMolWt, kLogLikelihood };

std::string_view scoring_name(ScoringKind kind) noexcept;
ScoringKind parse_scoring_kind(std::string_view name);

struct ScoringFunction {
  ScoringKind kind = ScoringKind::kPenalizedLogp;
  std::optional<Fingerprint> initial;   // required by max-init-sim
  std::optional<Fingerprint> previous;  // required by max-delta-sim
};

// Property values carried by every candidate.
struct PropertyValues {
  double objective = 0.0;
  double logp = 0.0;
  double qed = 0.0;
  double mol_wt = 0.0;
  double sim_prev = 0.0;  // Tanimoto to the step's source
  double sim_init = 0.0;  // Tanimoto to the run's seed
};

struct Candidate {
  ScoredSequence seq;  // log_likelihood is NaN for sequence-level models
  MolGraph graph;
  Fingerprint fp;
  PropertyValues props;
};

struct CandidateBatch {
  std::size_t iteration = 0;
  TokenSequence source;
  std::vector<Candidate> candidates;
  std::size_t chosen = 0;
  std::size_t generated = 0;  // sequences the model produced for this step
  std::size_t dropped = 0;    // of those, rejected before scoring
};

// Per-candidate criterion values, oriented so larger is better
// (min-mol-wt is negated). Throws MissingReference.
std::vector<double> scoring_values(const CandidateBatch& batch, const ScoringFunction& s);
// Index of the largest value, lowest index on ties.
std::size_t argmax_lowest(std::span<const double> values);
// Throws EmptyBatch / MissingReference.
std::size_t score_candidates(const CandidateBatch& batch, const ScoringFunction& s);

enum class Provenance { kAuto, kUserOverride };
std::string_view provenance_name(Provenance p) noexcept;

struct TraceStep {
  CandidateBatch batch;
  Provenance provenance = Provenance::kAuto;

  const Candidate& winner() const { return batch.candidates.at(batch.chosen); }
};

struct RunConfig {
  std::size_t iterations = 10;
  // K: candidates requested per step. Token-level models split it across
  // `decoders`, whose budgets must add up to it; sequence-level models are
  // asked for K candidates directly.
  std::size_t samples = 20;
  std::vector<DecodeSpec> decoders{DecodeSpec{TopKSpec{5, 20}, kDefaultMaxSequenceLength}};
  ScoringKind scoring = ScoringKind::kPenalizedLogp;
  PropertyOracle objective = PropertyOracle::penalized_logp();
  PropertyOracle logp_oracle = PropertyOracle::penalized_logp();
  PropertyOracle qed_oracle = PropertyOracle::qed_surrogate();
  int radius = kDefaultFingerprintRadius;
  std::size_t max_length = kDefaultMaxSequenceLength;
  std::vector<TokenSequence> seeds;
  std::uint64_t rng_seed = 0;
  std::size_t top_m = 100;
  // Per-iteration diversity uses at most this many candidates (0: all),
  // taken as an evenly spaced subsample.
  std::size_t diversity_cap = 0;
  Execution execution = Execution::kParallel;

  // Every violated field, one message each.
  std::vector<std::string> violations() const;
  // Throws Config listing all violations.
  void validate() const;
  bool non_recursive() const noexcept { return iterations == 1; }
};

// n = 1 with every decoder budget (and K) multiplied by n: the single-pass
// comparison at equal generation count.
RunConfig non_recursive_baseline(const RunConfig& config);

// The mixed-decoder budget: n = 25, top-2 x 100, top-5 x 100, 20-beam x 20.
RunConfig full_budget_preset();

std::uint64_t step_seed(std::uint64_t run_seed, std::size_t seed_index, std::size_t iteration, std::size_t spec_index);

// One recursion step for seed `seed_index`. Throws EmptyBatch when every
// candidate was dropped; decoder errors propagate.
CandidateBatch bbrt_step(const ConditionalModel& model, const RunConfig& config, std::span<const Token> source,
                         const Fingerprint& initial, std::size_t seed_index, std::size_t iteration);

struct SeedTrace {
  std::size_t seed_index = 0;
  TokenSequence seed;
  std::vector<TraceStep> steps;
  std::optional<std::string> truncated;  // error that ended the seed early
  std::size_t generations = 0;
  std::size_t dropped = 0;
};

struct EnsembleEntry {
  TokenSequence tokens;
  PropertyValues props;
  std::size_t seed_index = 0;
  std::size_t iteration = 0;
};

struct IterationStats {
  std::size_t iteration = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  double max = 0.0;
  std::optional<double> diversity;  // absent with fewer than two candidates
};

struct EnsembleReport {
  bool non_recursive = false;
  std::optional<EnsembleEntry> best;
  std::vector<EnsembleEntry> top;  // distinct sequences, objective descending
  std::vector<IterationStats> series;
  std::size_t seeds = 0;
  std::size_t truncated_seeds = 0;
  std::size_t generations = 0;
  std::size_t dropped = 0;
};

struct RunResult {
  std::vector<SeedTrace> traces;
  EnsembleReport report;
};

// Runs the recursion for one seed; step errors end the seed early.
SeedTrace run_seed(const ConditionalModel& model, const RunConfig& config, std::size_t seed_index);

// Seeds run concurrently under Execution::kParallel with identical results.
RunResult bbrt_run(const RunConfig& config, const ConditionalModel& model);

// Every candidate of every step, in trace order.
std::vector<EnsembleEntry> ensemble_entries(const SeedTrace& trace);
// Highest objectives first (ties: earlier entries first); duplicates of a
// sequence keep only their first occurrence when `distinct`.
std::vector<EnsembleEntry> top_entries(std::vector<EnsembleEntry> entries, std::size_t m, bool distinct = true);
EnsembleReport build_report(const RunConfig& config, std::span<const SeedTrace> traces);

// Greedy MaxMin over Tanimoto distance from start_index; ties by lowest
// index. Throws CountTooLarge / InvalidArgument.
std::vector<std::size_t> maxmin_select(std::span<const Fingerprint> fps, std::size_t count, std::size_t start_index,
                                       Execution exec = Execution::kParallel);
std::vector<std::size_t> maxmin_select(std::span<const MolGraph> corpus, std::size_t count, std::size_t start_index,
                                       int radius = kDefaultFingerprintRadius);

}  // namespace bbrt
