// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <set>

#include "bbrt/error.hpp"
#include "bbrt/kernels.hpp"
#include "bbrt/rng.hpp"

namespace bbrt {

namespace {

constexpr std::pair<ScoringKind, std::string_view> kScoringNames[] = {
    {ScoringKind::kPenalizedLogp, "penalized-logp"}, {ScoringKind::kQed, "qed"},
    {ScoringKind::kMaxDeltaSim, "max-delta-sim"},    {ScoringKind::kMaxInitSim, "max-init-sim"},
    {ScoringKind::kMinMolWt, "min-mol-wt"},          {ScoringKind::kLogLikelihood, "log-likelihood"},
};

bool uses_parallel(const RunConfig& c) { return c.execution == Execution::kParallel; }

}  // namespace

std::string_view scoring_name(ScoringKind kind) noexcept {
  for (const auto& [k, name] : kScoringNames) {
    if (k == kind) return name;
  }
  return "?";
}

ScoringKind parse_scoring_kind(std::string_view name) {
  for (const auto& [k, n] : kScoringNames) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::kConfig, "unknown scoring function '" + std::string(name) + "'");
}

std::string_view provenance_name(Provenance p) noexcept {
  return p == Provenance::kAuto ? "auto" : "user-override";
}

std::vector<double> scoring_values(const CandidateBatch& batch, const ScoringFunction& s) {
  std::vector<double> v;
  v.reserve(batch.candidates.size());
  const Fingerprint* ref = nullptr;
  if (s.kind == ScoringKind::kMaxDeltaSim) {
    if (!s.previous) throw Error(ErrorCode::kMissingReference, "max-delta-sim needs the previous source fingerprint");
    ref = &*s.previous;
  } else if (s.kind == ScoringKind::kMaxInitSim) {
    if (!s.initial) throw Error(ErrorCode::kMissingReference, "max-init-sim needs the initial seed fingerprint");
    ref = &*s.initial;
  }
  for (const auto& c : batch.candidates) {
    switch (s.kind) {
      case ScoringKind::kPenalizedLogp: v.push_back(c.props.logp); break;
      case ScoringKind::kQed: v.push_back(c.props.qed); break;
      case ScoringKind::kMinMolWt: v.push_back(-c.props.mol_wt); break;
      case ScoringKind::kLogLikelihood:
        v.push_back(std::isnan(c.seq.log_likelihood) ? -std::numeric_limits<double>::infinity()
                                                     : c.seq.log_likelihood);
        break;
      case ScoringKind::kMaxDeltaSim:
      case ScoringKind::kMaxInitSim: v.push_back(tanimoto(c.fp, *ref)); break;
    }
  }
  return v;
}

std::size_t argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyBatch, "no candidates to rank");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t score_candidates(const CandidateBatch& batch, const ScoringFunction& s) {
  if (batch.candidates.empty()) throw Error(ErrorCode::kEmptyBatch, "no candidates to rank");
  const auto v = scoring_values(batch, s);
  return argmax_lowest(v);
}

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> out;
  if (iterations < 1) out.push_back("iterations: must be >= 1");
  if (samples < 1) out.push_back("samples: must be >= 1");
  if (decoders.empty()) {
    out.push_back("decoders: at least one decoder is required");
  } else {
    std::size_t total = 0;
    for (std::size_t i = 0; i < decoders.size(); ++i) {
      try {
        decoders[i].validate(alphabet_size() + 1);
      } catch (const Error& e) {
        out.push_back("decoders[" + std::to_string(i) + "]: " + e.what());
      }
      total += decoders[i].budget();
    }
    if (total != samples) {
      out.push_back("samples: decoder budgets add up to " + std::to_string(total) + ", not " + std::to_string(samples));
    }
  }
  if (logp_oracle.kind != OracleKind::kPenalizedLogp) out.push_back("logp_oracle: must be penalized-logp-surrogate");
  if (qed_oracle.kind != OracleKind::kQed) out.push_back("qed_oracle: must be qed-surrogate");
  for (const auto* o : {&objective, &logp_oracle, &qed_oracle}) {
    if (o->normalization && !(o->normalization->stddev > 0.0)) {
      out.push_back(std::string(oracle_name(o->kind)) + ": normalization stddev must be > 0");
    }
  }
  if (radius < 0 || radius > 4) out.push_back("radius: must be in [0, 4]");
  if (max_length < 1) out.push_back("max_length: must be >= 1");
  if (seeds.empty()) out.push_back("seeds: at least one seed is required");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (seeds[i].empty()) out.push_back("seeds[" + std::to_string(i) + "]: empty sequence");
    else if (seeds[i].size() > max_length) out.push_back("seeds[" + std::to_string(i) + "]: longer than max_length");
  }
  if (top_m < 1) out.push_back("top_m: must be >= 1");
  if (diversity_cap == 1) out.push_back("diversity_cap: must be 0 (all) or >= 2");
  return out;
}

void RunConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid run config:";
  for (const auto& s : v) msg += "\n  " + s;
  throw Error(ErrorCode::kConfig, msg);
}

RunConfig non_recursive_baseline(const RunConfig& config) {
  RunConfig out = config;
  const std::size_t n = config.iterations;
  out.iterations = 1;
  out.samples = config.samples * n;
  for (auto& d : out.decoders) {
    std::visit(
        [n](auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, GreedySpec>) {
            s.copies *= n;
          } else if constexpr (std::is_same_v<T, BeamSpec>) {
            s.width *= n;
            s.num_returned *= n;
          } else {
            s.num_samples *= n;
          }
        },
        d.strategy);
  }
  return out;
}

RunConfig full_budget_preset() {
  RunConfig c;
  c.iterations = 25;
  c.decoders = {DecodeSpec{TopKSpec{2, 100}, kDefaultMaxSequenceLength},
                DecodeSpec{TopKSpec{5, 100}, kDefaultMaxSequenceLength},
                DecodeSpec{BeamSpec{20, 20, false}, kDefaultMaxSequenceLength}};
  c.samples = 220;
  return c;
}

std::uint64_t step_seed(std::uint64_t run_seed, std::size_t seed_index, std::size_t iteration, std::size_t spec_index) {
  return derive_seed(run_seed, {seed_index, iteration, spec_index});
}

CandidateBatch bbrt_step(const ConditionalModel& model, const RunConfig& config, std::span<const Token> source,
                         const Fingerprint& initial, std::size_t seed_index, std::size_t iteration) {
  CandidateBatch batch;
  batch.iteration = iteration;
  batch.source.assign(source.begin(), source.end());

  std::vector<ScoredSequence> produced;
  if (model.mode() == ModelMode::kTokenLevel) {
    for (std::size_t i = 0; i < config.decoders.size(); ++i) {
      config.decoders[i].validate(model.vocabulary().distribution_size());
      auto out = run_decoder(model, source, config.decoders[i], step_seed(config.rng_seed, seed_index, iteration, i),
                             config.execution);
      batch.generated += out.size();
      for (auto& s : out) produced.push_back(std::move(s));
    }
  } else {
    if (config.scoring == ScoringKind::kLogLikelihood) {
      throw Error(ErrorCode::kInvalidArgument, "log-likelihood scoring needs a token-level model");
    }
    const auto strings = model.generate(source, config.samples, step_seed(config.rng_seed, seed_index, iteration, 0));
    batch.generated = strings.size();
    for (const auto& s : strings) {
      try {
        ScoredSequence seq{tokenize(s), std::numeric_limits<double>::quiet_NaN(), true};
        produced.push_back(std::move(seq));
      } catch (const Error&) {
        ++batch.dropped;
      }
    }
  }

  std::vector<ScoredSequence> kept;
  kept.reserve(produced.size());
  for (auto& s : produced) {
    if (s.tokens.empty() || s.tokens.size() > config.max_length) {
      ++batch.dropped;
    } else {
      kept.push_back(std::move(s));
    }
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kEmptyBatch, "iteration " + std::to_string(iteration) + ": all " +
                                            std::to_string(batch.generated) + " candidates were dropped");
  }

  std::vector<TokenSequence> seqs;
  seqs.reserve(kept.size());
  for (const auto& s : kept) seqs.push_back(s.tokens);
  const bool par = uses_parallel(config);
  auto graphs = par ? kernels::parallel::decode_all(seqs) : kernels::serial::decode_all(seqs);
  auto fps = par ? kernels::parallel::fingerprints(graphs, config.radius)
                 : kernels::serial::fingerprints(graphs, config.radius);
  const auto objective = par ? kernels::parallel::evaluate(config.objective, graphs)
                             : kernels::serial::evaluate(config.objective, graphs);
  const auto logp = par ? kernels::parallel::evaluate(config.logp_oracle, graphs)
                        : kernels::serial::evaluate(config.logp_oracle, graphs);
  const auto qed = par ? kernels::parallel::evaluate(config.qed_oracle, graphs)
                       : kernels::serial::evaluate(config.qed_oracle, graphs);
  const Fingerprint prev_fp = morgan_fingerprint(decode(source), config.radius);
  const auto sim_prev = par ? kernels::parallel::similarities_to(prev_fp, fps)
                            : kernels::serial::similarities_to(prev_fp, fps);
  const auto sim_init = par ? kernels::parallel::similarities_to(initial, fps)
                            : kernels::serial::similarities_to(initial, fps);

  batch.candidates.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    Candidate c;
    c.seq = std::move(kept[i]);
    c.props = PropertyValues{objective[i], logp[i], qed[i], molecular_weight(graphs[i]), sim_prev[i], sim_init[i]};
    c.graph = std::move(graphs[i]);
    c.fp = std::move(fps[i]);
    batch.candidates.push_back(std::move(c));
  }
  batch.chosen = score_candidates(batch, ScoringFunction{config.scoring, initial, prev_fp});
  return batch;
}

SeedTrace run_seed(const ConditionalModel& model, const RunConfig& config, std::size_t seed_index) {
  SeedTrace t;
  t.seed_index = seed_index;
  t.seed = config.seeds.at(seed_index);
  const Fingerprint initial = morgan_fingerprint(decode(t.seed), config.radius);
  TokenSequence source = t.seed;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    try {
      TraceStep step{bbrt_step(model, config, source, initial, seed_index, it), Provenance::kAuto};
      t.generations += step.batch.generated;
      t.dropped += step.batch.dropped;
      source = step.winner().seq.tokens;
      t.steps.push_back(std::move(step));
    } catch (const std::exception& e) {
      t.truncated = "iteration " + std::to_string(it) + ": " + e.what();
      break;
    }
  }
  return t;
}

RunResult bbrt_run(const RunConfig& config, const ConditionalModel& model) {
  config.validate();
  RunResult r;
  const std::size_t n = config.seeds.size();
  r.traces.resize(n);
  if (uses_parallel(config)) {
    // run_seed catches step errors itself, so nothing escapes the region.
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < n; ++i) r.traces[i] = run_seed(model, config, i);
  } else {
    for (std::size_t i = 0; i < n; ++i) r.traces[i] = run_seed(model, config, i);
  }
  r.report = build_report(config, r.traces);
  return r;
}

std::vector<EnsembleEntry> ensemble_entries(const SeedTrace& trace) {
  std::vector<EnsembleEntry> out;
  for (const auto& step : trace.steps) {
    for (const auto& c : step.batch.candidates) {
      out.push_back(EnsembleEntry{c.seq.tokens, c.props, trace.seed_index, step.batch.iteration});
    }
  }
  return out;
}

std::vector<EnsembleEntry> top_entries(std::vector<EnsembleEntry> entries, std::size_t m, bool distinct) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const EnsembleEntry& a, const EnsembleEntry& b) { return a.props.objective > b.props.objective; });
  std::vector<EnsembleEntry> out;
  std::set<TokenSequence> seen;
  for (auto& e : entries) {
    if (out.size() >= m) break;
    if (distinct && !seen.insert(e.tokens).second) continue;
    out.push_back(std::move(e));
  }
  return out;
}

EnsembleReport build_report(const RunConfig& config, std::span<const SeedTrace> traces) {
  EnsembleReport rep;
  rep.non_recursive = config.non_recursive();
  rep.seeds = traces.size();
  std::vector<EnsembleEntry> all;
  std::size_t max_steps = 0;
  for (const auto& t : traces) {
    if (t.truncated) ++rep.truncated_seeds;
    rep.generations += t.generations;
    rep.dropped += t.dropped;
    max_steps = std::max(max_steps, t.steps.size());
    auto e = ensemble_entries(t);
    all.insert(all.end(), std::make_move_iterator(e.begin()), std::make_move_iterator(e.end()));
  }
  rep.top = top_entries(all, config.top_m, true);
  if (!rep.top.empty()) rep.best = rep.top.front();

  const bool par = uses_parallel(config);
  for (std::size_t it = 0; it < max_steps; ++it) {
    IterationStats s;
    s.iteration = it;
    std::vector<const Fingerprint*> fps;
    double sum = 0.0;
    s.max = -std::numeric_limits<double>::infinity();
    for (const auto& t : traces) {
      if (it >= t.steps.size()) continue;
      for (const auto& c : t.steps[it].batch.candidates) {
        sum += c.props.objective;
        s.max = std::max(s.max, c.props.objective);
        fps.push_back(&c.fp);
        ++s.count;
      }
    }
    if (s.count == 0) continue;
    s.mean = sum / static_cast<double>(s.count);
    double sq = 0.0;
    for (const auto& t : traces) {
      if (it >= t.steps.size()) continue;
      for (const auto& c : t.steps[it].batch.candidates) sq += (c.props.objective - s.mean) * (c.props.objective - s.mean);
    }
    s.stddev = std::sqrt(sq / static_cast<double>(s.count));
    std::size_t take = fps.size();
    if (config.diversity_cap >= 2) take = std::min(take, config.diversity_cap);
    if (take >= 2) {
      std::vector<Fingerprint> sample;
      sample.reserve(take);
      for (std::size_t j = 0; j < take; ++j) sample.push_back(*fps[j * fps.size() / take]);
      const double pairs = static_cast<double>(take) * static_cast<double>(take - 1) / 2.0;
      const double total = par ? kernels::parallel::pairwise_distance_sum(sample)
                               : kernels::serial::pairwise_distance_sum(sample);
      s.diversity = total / pairs;
    }
    rep.series.push_back(s);
  }
  return rep;
}

std::vector<std::size_t> maxmin_select(std::span<const Fingerprint> fps, std::size_t count, std::size_t start_index,
                                       Execution exec) {
  const std::size_t n = fps.size();
  if (count > n) {
    throw Error(ErrorCode::kCountTooLarge,
                "cannot select " + std::to_string(count) + " items from " + std::to_string(n));
  }
  if (count == 0) return {};
  if (start_index >= n) throw Error(ErrorCode::kInvalidArgument, "start index out of range");
  std::vector<std::size_t> picked{start_index};
  std::vector<char> taken(n, 0);
  taken[start_index] = 1;
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  while (picked.size() < count) {
    if (exec == Execution::kParallel) {
      kernels::parallel::update_min_distance(fps[picked.back()], fps, min_dist);
    } else {
      kernels::serial::update_min_distance(fps[picked.back()], fps, min_dist);
    }
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i] && (best == n || min_dist[i] > min_dist[best])) best = i;
    }
    taken[best] = 1;
    picked.push_back(best);
  }
  return picked;
}

std::vector<std::size_t> maxmin_select(std::span<const MolGraph> corpus, std::size_t count, std::size_t start_index,
                                       int radius) {
  const auto fps = kernels::parallel::fingerprints(corpus, radius);
  return maxmin_select(fps, count, start_index, Execution::kParallel);
}

}  // namespace bbrt
