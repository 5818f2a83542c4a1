// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "bbrt/analysis.hpp"
#include "bbrt/decoding.hpp"
#include "bbrt/engine.hpp"
#include "bbrt/io.hpp"
#include "bbrt/kernels.hpp"
#include "bbrt/metrics.hpp"
#include "bbrt/session.hpp"
#include "bbrt/translator.hpp"
#include "test_support.hpp"

using namespace bbrt;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("criterion %d [%s] %s: %s\n", id, pass ? "PASS" : "FAIL", title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Fixture {
  std::vector<TokenSequence> corpus;
  std::vector<MolGraph> graphs;
  std::vector<TokenSequence> seeds;  // 10 MaxMin picks
};

Fixture load_fixture() {
  Fixture f;
  f.corpus = read_corpus(std::filesystem::path(BBRT_DATA_DIR) / "synthetic_corpus.selfies");
  f.graphs = kernels::parallel::decode_all(f.corpus);
  for (std::size_t i : maxmin_select(f.graphs, 10, 0)) f.seeds.push_back(f.corpus[i]);
  return f;
}

RunConfig topk_config(const std::vector<TokenSequence>& seeds, std::size_t n, std::size_t k, std::uint64_t rng) {
  RunConfig c;
  c.iterations = n;
  c.samples = k;
  c.decoders = {DecodeSpec{TopKSpec{5, k}, kDefaultMaxSequenceLength}};
  c.seeds = seeds;
  c.rng_seed = rng;
  return c;
}

double mean_top(const SeedTrace& t, std::size_t m) {
  const auto top = top_entries(ensemble_entries(t), m, true);
  double s = 0.0;
  for (const auto& e : top) s += e.props.objective;
  return top.empty() ? NAN : s / static_cast<double>(top.size());
}

// ---- 1 ---------------------------------------------------------------------------
void recursion_beats_single_pass(const Fixture& f) {
  const auto t0 = Clock::now();
  PairConstraint pc;  // tau 0.4 under the logP surrogate
  const auto pairs = build_pairs(f.corpus, pc, 20000, 1);
  const ReferenceTranslator model = train_reference(pairs, pc.oracle);
  const RunConfig bbrt_cfg = topk_config(f.seeds, 10, 20, 1);
  const RunConfig base_cfg = non_recursive_baseline(bbrt_cfg);
  const RunResult rec = bbrt_run(bbrt_cfg, model);
  const RunResult base = bbrt_run(base_cfg, model);
  std::size_t wins = 0;
  bool parity = true;
  double worst = INFINITY;
  for (std::size_t s = 0; s < f.seeds.size(); ++s) {
    parity &= rec.traces[s].generations == base.traces[s].generations;
    const double a = mean_top(rec.traces[s], 100), b = mean_top(base.traces[s], 100);
    const double rel = (a - b) / std::abs(b);
    worst = std::min(worst, rel);
    if (a - b >= 0.10 * std::abs(b)) ++wins;
  }
  const double secs = seconds_since(t0);
  report(1, "recursion beats single pass", wins >= 9 && parity && secs < 120.0,
         fmt("%zu/10 seeds with top-100 mean >= +10%% over the equal-budget baseline (worst %+.1f%%), "
             "budgets equal: %s, %zu training pairs, %.1f s",
             wins, 100.0 * worst, parity ? "yes" : "no", pairs.size(), secs));
}

// ---- 2 ---------------------------------------------------------------------------
void mean_objective_rises(const Fixture& f) {
  const auto t0 = Clock::now();
  const LocalEditModel model;
  const RunResult r = bbrt_run(topk_config(f.seeds, 15, 20, 2), model);
  std::vector<double> xs, ys;
  for (const auto& s : r.report.series) {
    xs.push_back(static_cast<double>(s.iteration));
    ys.push_back(s.mean);
  }
  const RankCorrelation rc = rank_correlation(xs, ys);
  const double secs = seconds_since(t0);
  report(2, "per-iteration mean objective increases", rc.rho > 0.8 && xs.size() == 15 && secs < 60.0,
         fmt("Spearman rho %.3f (p %.2g) over %zu iterations, mean %.2f -> %.2f, %.1f s", rc.rho, rc.p_value,
             xs.size(), ys.front(), ys.back(), secs));
}

// ---- 3 ---------------------------------------------------------------------------
double ensemble_mean(const RunResult& r) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& t : r.traces) {
    for (const auto& e : ensemble_entries(t)) {
      s += e.props.objective;
      ++n;
    }
  }
  return s / static_cast<double>(n);
}

void stochastic_beats_greedy(const Fixture& f) {
  const LocalEditModel model;
  std::size_t wins = 0;
  double min_margin = INFINITY;
  for (std::uint64_t run = 0; run < 10; ++run) {
    const RunConfig sampled = topk_config(f.seeds, 10, 20, 100 + run);
    RunConfig greedy = sampled;
    greedy.decoders = {DecodeSpec{GreedySpec{20}, kDefaultMaxSequenceLength}};
    const double a = ensemble_mean(bbrt_run(sampled, model));
    const double b = ensemble_mean(bbrt_run(greedy, model));
    min_margin = std::min(min_margin, a - b);
    if (a >= b) ++wins;
  }
  report(3, "stochastic decoding beats greedy", wins >= 8,
         fmt("top-5 ensemble mean >= greedy in %zu/10 runs at equal budget (smallest margin %+.3f)", wins,
             min_margin));
}

// ---- 4 ---------------------------------------------------------------------------
void diversity_decays(const Fixture& f) {
  const LocalEditModel model;
  const RunResult r = bbrt_run(topk_config(f.seeds, 25, 20, 4), model);
  const auto& series = r.report.series;
  const bool complete = series.size() == 25 && series.front().diversity && series.back().diversity;
  const double first = complete ? *series.front().diversity : NAN;
  const double last = complete ? *series.back().diversity : NAN;
  report(4, "diversity decays over recursion", complete && last <= first,
         fmt("candidate diversity %.3f after 1 iteration, %.3f after 25", first, last));
}

// ---- 5 ---------------------------------------------------------------------------
void decoders_exact() {
  std::size_t beam_mismatch = 0, collapse_mismatch = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const test::RandomTableModel m(4, seed);
    // Exhaustive argmax over every EOS-terminated sequence of length <= 3.
    double best = -INFINITY;
    TokenSequence best_seq;
    std::size_t enumerated = 0;
    std::function<void(TokenSequence&, double)> walk = [&](TokenSequence& prefix, double ll) {
      const Distribution p = m.next_token_dist({}, prefix);
      const double done = ll + std::log(p[m.vocabulary().eos()]);
      ++enumerated;
      if (done > best) {
        best = done;
        best_seq = prefix;
      }
      if (prefix.size() == 3) return;
      for (std::size_t v = 0; v < m.vocabulary().size(); ++v) {
        prefix.push_back(m.vocabulary().token_at(v));
        walk(prefix, ll + std::log(p[v]));
        prefix.pop_back();
      }
    };
    TokenSequence root;
    walk(root, 0.0);
    const auto beam = decode_beam(m, {}, 85, 1, 3);
    if (enumerated != 85 || beam.front().tokens != best_seq || std::abs(beam.front().log_likelihood - best) > 1e-12) {
      ++beam_mismatch;
    }

    const test::RandomTableModel g(6, 500 + seed, 0.3);
    const TokenSequence greedy = decode_greedy(g, {}, 12).tokens;
    const TokenSequence beam1 = decode_beam(g, {}, 1, 1, 12).front().tokens;
    const TokenSequence top1 = decode_topk(g, {}, 1, 1, 12, seed).front().tokens;
    if (greedy != beam1 || greedy != top1) ++collapse_mismatch;
  }

  test::TableModel freq_model(test::first_tokens(3), Distribution{0.0, 0.0, 0.0, 1.0});
  const Distribution first{0.45, 0.3, 0.15, 0.1};
  freq_model.set("", first);
  const std::size_t draws = 50000;
  const auto samples = decode_topk(freq_model, {}, 4, draws, 3, 2024);
  std::vector<double> counts(4, 0.0);
  for (const auto& s : samples) counts[s.tokens.empty() ? 3 : s.tokens.front().id] += 1.0;
  double worst_z = 0.0;
  for (std::size_t v = 0; v < 4; ++v) {
    const double mean = static_cast<double>(draws) * first[v];
    const double sigma = std::sqrt(static_cast<double>(draws) * first[v] * (1.0 - first[v]));
    worst_z = std::max(worst_z, std::abs(counts[v] - mean) / sigma);
  }
  report(5, "decoder exactness", beam_mismatch == 0 && collapse_mismatch == 0 && worst_z <= 3.0,
         fmt("beam vs exhaustive mismatches %zu/100, greedy/beam(1)/top-1 mismatches %zu/100, "
             "top-k frequency max |z| %.2f at %zu draws",
             beam_mismatch, collapse_mismatch, worst_z, draws));
}

// ---- 6 ---------------------------------------------------------------------------
double set_tanimoto(const Fingerprint& a, const Fingerprint& b) {
  std::set<std::uint32_t> sa(a.features.begin(), a.features.end()), sb(b.features.begin(), b.features.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (auto x : sa) inter += sb.count(x);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

void chemistry_substrate(const Fixture& f) {
  Rng rng(6);
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    TokenSequence s(1 + rng.below(60));
    for (Token& t : s) t = Token{static_cast<std::uint8_t>(rng.below(alphabet_size()))};
    if (!decode(s).check_invariants().empty()) ++violations;
  }

  double worst_sim = 0.0, worst_div = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Fingerprint> fps;
    const auto n = 2 + rng.below(19);
    for (std::uint64_t i = 0; i < n; ++i) fps.push_back(morgan_fingerprint(f.graphs[rng.below(f.graphs.size())]));
    double sum = 0.0;
    for (std::size_t i = 0; i < fps.size(); ++i) {
      for (std::size_t j = 0; j < fps.size(); ++j) {
        if (i == j) continue;
        const double s = set_tanimoto(fps[i], fps[j]);
        worst_sim = std::max(worst_sim, std::abs(s - tanimoto(fps[i], fps[j])));
        sum += 1.0 - s;
      }
    }
    const double brute = sum / static_cast<double>(fps.size() * (fps.size() - 1));
    worst_div = std::max(worst_div, std::abs(brute - diversity(fps)));
  }

  std::size_t axiom_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    auto seq = [&] {
      TokenSequence s(rng.below(12));
      for (Token& t : s) t = Token{static_cast<std::uint8_t>(rng.below(5))};
      return s;
    };
    const TokenSequence a = seq(), b = seq(), c = seq();
    const bool ok = levenshtein(a, a) == 0 && ((levenshtein(a, b) == 0) == (a == b)) &&
                    levenshtein(a, b) == levenshtein(b, a) &&
                    levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c);
    if (!ok) ++axiom_failures;
  }

  std::size_t maxmin_mismatch = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(11);
    std::vector<Fingerprint> fps;
    for (std::size_t i = 0; i < n; ++i) fps.push_back(morgan_fingerprint(f.graphs[rng.below(f.graphs.size())]));
    const std::size_t start = rng.below(n);
    std::size_t best = n;
    double best_d = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == start) continue;
      const double d = 1.0 - set_tanimoto(fps[start], fps[j]);
      if (d > best_d) {
        best_d = d;
        best = j;
      }
    }
    const auto picks = maxmin_select(fps, 2, start);
    if (picks != std::vector<std::size_t>{start, best}) ++maxmin_mismatch;
  }

  report(6, "chemistry substrate",
         violations == 0 && worst_sim <= 1e-12 && worst_div <= 1e-12 && axiom_failures == 0 && maxmin_mismatch == 0,
         fmt("valence violations %zu/10000, max tanimoto error %.1e, max diversity error %.1e, "
             "metric-axiom failures %zu/1000, MaxMin mismatches %zu/200",
             violations, worst_sim, worst_div, axiom_failures, maxmin_mismatch));
}

// ---- 7 ---------------------------------------------------------------------------
void secondary_property_ranking(const Fixture& f) {
  // Primary property QED, secondary logP; both read in corpus z-units.
  const PropertyOracle qed_z = fit_normalization(f.graphs, PropertyOracle::qed_surrogate());
  const PropertyOracle logp_z = fit_normalization(f.graphs, PropertyOracle::penalized_logp());
  const LocalEditModel model;
  std::size_t wins = 0;
  double min_gain = INFINITY, max_loss = -INFINITY;
  for (std::uint64_t run = 0; run < 10; ++run) {
    RunConfig by_primary = topk_config(f.seeds, 10, 20, 700 + run);
    by_primary.scoring = ScoringKind::kQed;
    by_primary.objective = qed_z;
    RunConfig by_secondary = by_primary;
    by_secondary.scoring = ScoringKind::kPenalizedLogp;
    const RunResult p = bbrt_run(by_primary, model);
    const RunResult s = bbrt_run(by_secondary, model);
    auto final_mean_logp = [&](const RunResult& r) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& t : r.traces) {
        for (const auto& c : t.steps.back().batch.candidates) {
          sum += logp_z.evaluate(c.graph);
          ++n;
        }
      }
      return sum / static_cast<double>(n);
    };
    auto max_qed = [&](const RunResult& r) { return r.report.best->props.objective; };
    const double gain = final_mean_logp(s) - final_mean_logp(p);
    const double loss = max_qed(p) - max_qed(s);
    min_gain = std::min(min_gain, gain);
    max_loss = std::max(max_loss, loss);
    if (gain > 0.0 && loss < gain) ++wins;
  }
  report(7, "secondary-property ranking", wins >= 8,
         fmt("%zu/10 runs where logP scoring raises final mean logP and QED max drops by less "
             "(smallest logP gain %.3f z, largest QED loss %.3f z)",
             wins, min_gain, max_loss));
}

// ---- 8 ---------------------------------------------------------------------------
void reproducible_traces(const Fixture& f) {
  const auto dir = std::filesystem::temp_directory_path() / ("bbrt-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const PairConstraint pc;
  const ReferenceTranslator reference = train_reference(build_pairs(f.corpus, pc, 4000, 8), pc.oracle);
  const LocalEditModel local;
  std::size_t identical = 0, total = 0;
  for (const ConditionalModel* m : {static_cast<const ConditionalModel*>(&reference),
                                    static_cast<const ConditionalModel*>(&local)}) {
    for (Execution ex : {Execution::kParallel, Execution::kSerial}) {
      RunConfig c = topk_config(f.seeds, 6, 20, 8);
      c.decoders.push_back(DecodeSpec{BeamSpec{5, 5}, kDefaultMaxSequenceLength});
      c.samples = 25;
      c.execution = ex;
      const auto a = dir / "a.jsonl", b = dir / "b.jsonl";
      write_text_file(a, format_trace(c, bbrt_run(c, *m).traces));
      write_text_file(b, format_trace(c, bbrt_run(c, *m).traces));
      ++total;
      if (read_text_file(a) == read_text_file(b)) ++identical;
    }
  }
  std::filesystem::remove_all(dir);
  report(8, "reproducibility", identical == total, fmt("%zu/%zu repeated runs wrote byte-identical traces", identical, total));
}

// ---- 9 ---------------------------------------------------------------------------
void breakpoint_idempotence(const Fixture& f) {
  const auto model = std::make_shared<LocalEditModel>();
  RunConfig c = topk_config(f.seeds, 8, 20, 9);
  std::size_t same = 0, rebranched = 0, checks = 0;
  for (std::size_t seed = 0; seed < 3; ++seed) {
    for (std::size_t at = 0; at < c.iterations; ++at) {
      Session s("acceptance", c, model, seed);
      s.advance(c.iterations);
      std::vector<std::string> before;
      for (std::size_t i = at + 1; i < s.trace().size(); ++i) before.push_back(trace_step_line(seed, s.trace()[i]));
      s.override_choice(at, s.trace()[at].batch.chosen);
      std::vector<std::string> after;
      for (std::size_t i = at + 1; i < s.trace().size(); ++i) after.push_back(trace_step_line(seed, s.trace()[i]));
      ++checks;
      if (before == after) ++same;

      const auto& batch = s.trace()[at].batch;
      const std::size_t other = (batch.chosen + 1) % batch.candidates.size();
      const TokenSequence picked = batch.candidates[other].seq.tokens;
      s.override_choice(at, other);
      if (at + 1 == c.iterations ? s.trace().size() == c.iterations : s.trace()[at + 1].batch.source == picked) {
        ++rebranched;
      }
    }
  }
  report(9, "breakpoint idempotence", same == checks && rebranched == checks,
         fmt("auto-choice overrides reproduced %zu/%zu downstream traces; other-candidate overrides "
             "re-sourced the next step in %zu/%zu",
             same, checks, rebranched, checks));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const Fixture f = load_fixture();
  std::printf("corpus %zu sequences, %d OpenMP threads\n", f.corpus.size(), kernels::max_threads());
  recursion_beats_single_pass(f);
  mean_objective_rises(f);
  stochastic_beats_greedy(f);
  diversity_decays(f);
  decoders_exact();
  chemistry_substrate(f);
  secondary_property_ranking(f);
  reproducible_traces(f);
  breakpoint_idempotence(f);
  std::printf("%d failed, %.1f s total\n", failures, seconds_since(t0));
  return failures;
}
