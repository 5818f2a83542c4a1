// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/translator.hpp"

#include <algorithm>
#include <cmath>

#include "bbrt/error.hpp"
#include "bbrt/kernels.hpp"
#include "bbrt/metrics.hpp"
#include "bbrt/rng.hpp"

namespace bbrt {

void PairConstraint::validate() const {
  if (tau && !(*tau > 0.0 && *tau < 1.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be in (0, 1)");
  if (!tau && !(source_band && target_band)) {
    throw Error(ErrorCode::kInvalidArgument, "a pair constraint needs tau or both property bands");
  }
  if (radius < 0 || radius > 4) throw Error(ErrorCode::kInvalidArgument, "fingerprint radius must be in [0, 4]");
}

namespace {

// Lazy Fisher-Yates over [0, n): each draw returns an index not returned
// before, touching O(draws) memory.
class SparseShuffle {
 public:
  SparseShuffle(std::uint64_t n, std::uint64_t seed) : remaining_(n), rng_(seed) {}

  bool done() const noexcept { return remaining_ == 0; }

  std::uint64_t next() {
    const std::uint64_t j = rng_.below(remaining_);
    const std::uint64_t last = remaining_ - 1;
    const std::uint64_t picked = lookup(j);
    swapped_[j] = lookup(last);
    swapped_.erase(last);
    --remaining_;
    return picked;
  }

 private:
  std::uint64_t lookup(std::uint64_t i) const {
    auto it = swapped_.find(i);
    return it == swapped_.end() ? i : it->second;
  }

  std::uint64_t remaining_;
  Rng rng_;
  std::unordered_map<std::uint64_t, std::uint64_t> swapped_;
};

}  // namespace

std::vector<TranslationPair> build_pairs(std::span<const TokenSequence> corpus, const PairConstraint& constraint,
                                         std::size_t budget, std::uint64_t seed, PairStats* stats) {
  constraint.validate();
  if (budget < 1) throw Error(ErrorCode::kInvalidArgument, "pair budget must be >= 1");
  std::vector<TranslationPair> out;
  PairStats local;
  const std::size_t n = corpus.size();
  if (n >= 2) {
    const auto graphs = kernels::parallel::decode_all(corpus);
    const auto fps = kernels::parallel::fingerprints(graphs, constraint.radius);
    const auto props = kernels::parallel::evaluate(constraint.oracle, graphs);

    SparseShuffle order(static_cast<std::uint64_t>(n) * (n - 1), seed);
    while (!order.done() && out.size() < budget) {
      const std::uint64_t k = order.next();
      const std::size_t i = static_cast<std::size_t>(k / (n - 1));
      std::size_t j = static_cast<std::size_t>(k % (n - 1));
      if (j >= i) ++j;
      ++local.examined;
      const double gain = props[j] - props[i];
      if (!(gain > 0.0)) continue;
      if (constraint.source_band && !constraint.source_band->contains(props[i])) continue;
      if (constraint.target_band && !constraint.target_band->contains(props[j])) continue;
      const double sim = tanimoto(fps[i], fps[j]);
      if (constraint.tau && !(sim > *constraint.tau)) continue;
      out.push_back({corpus[i], corpus[j], sim, gain});
    }
  }
  local.accepted = out.size();
  if (stats) *stats = local;
  if (out.empty()) throw Error(ErrorCode::kNoPairsFound, "no corpus pair satisfies the constraint");
  return out;
}

ReferenceTranslator::ReferenceTranslator(Vocabulary vocab, PropertyOracle oracle, std::vector<double> boundaries,
                                         double alpha, std::vector<std::uint32_t> counts)
    : vocab_(std::move(vocab)),
      oracle_(std::move(oracle)),
      boundaries_(std::move(boundaries)),
      alpha_(alpha),
      counts_(std::move(counts)) {
  if (!(alpha_ > 0.0)) throw Error(ErrorCode::kInvalidArgument, "smoothing alpha must be > 0");
  const std::size_t d = vocab_.distribution_size();
  if (counts_.size() != bucket_count() * d * d) {
    throw Error(ErrorCode::kInvalidArgument, "count table size does not match buckets x contexts x symbols");
  }
  if (!std::is_sorted(boundaries_.begin(), boundaries_.end())) {
    throw Error(ErrorCode::kInvalidArgument, "bucket boundaries must be sorted");
  }
}

ReferenceTranslator::ReferenceTranslator(const ReferenceTranslator& other)
    : vocab_(other.vocab_),
      oracle_(other.oracle_),
      boundaries_(other.boundaries_),
      alpha_(other.alpha_),
      counts_(other.counts_) {}

ReferenceTranslator::ReferenceTranslator(ReferenceTranslator&& other) noexcept
    : vocab_(std::move(other.vocab_)),
      oracle_(std::move(other.oracle_)),
      boundaries_(std::move(other.boundaries_)),
      alpha_(other.alpha_),
      counts_(std::move(other.counts_)) {}

std::size_t ReferenceTranslator::row_offset(std::size_t bucket, std::size_t prev) const noexcept {
  const std::size_t d = vocab_.distribution_size();
  return (bucket * d + prev) * d;
}

std::size_t ReferenceTranslator::bucket_of(double value) const noexcept {
  return static_cast<std::size_t>(std::lower_bound(boundaries_.begin(), boundaries_.end(), value) -
                                  boundaries_.begin());
}

std::size_t ReferenceTranslator::source_bucket(std::span<const Token> source) const {
  std::string key = render(source);
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = bucket_cache_.find(key); it != bucket_cache_.end()) return it->second;
  }
  const std::size_t b = bucket_of(oracle_.evaluate(decode(source)));
  std::lock_guard lock(cache_mutex_);
  if (bucket_cache_.size() > 4096) bucket_cache_.clear();
  bucket_cache_.emplace(std::move(key), b);
  return b;
}

std::uint32_t ReferenceTranslator::count(std::size_t bucket, std::size_t prev, std::size_t next) const {
  return counts_.at(row_offset(bucket, prev) + next);
}

Distribution ReferenceTranslator::context_dist(std::size_t bucket, std::size_t prev) const {
  const std::size_t d = vocab_.distribution_size();
  const std::uint32_t* row = counts_.data() + row_offset(bucket, prev);
  double total = 0.0;
  for (std::size_t v = 0; v < d; ++v) total += row[v];
  const double denom = total + alpha_ * static_cast<double>(d);
  Distribution p(d);
  for (std::size_t v = 0; v < d; ++v) p[v] = (row[v] + alpha_) / denom;
  return p;
}

Distribution ReferenceTranslator::next_token_dist(std::span<const Token> source, std::span<const Token> prefix) const {
  const std::size_t bucket = source_bucket(source);
  std::size_t prev = vocab_.size();  // start of sequence
  if (!prefix.empty()) {
    if (auto idx = vocab_.index_of(prefix.back())) prev = *idx;
  }
  return context_dist(bucket, prev);
}

ReferenceTranslator train_reference(std::span<const TranslationPair> pairs, const PropertyOracle& oracle,
                                    const ReferenceTrainingOptions& options) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyTraining, "no training pairs");
  if (!(options.alpha > 0.0)) throw Error(ErrorCode::kInvalidArgument, "smoothing alpha must be > 0");
  if (options.buckets < 1) throw Error(ErrorCode::kInvalidArgument, "bucket count must be >= 1");

  std::vector<double> source_values;
  source_values.reserve(pairs.size());
  for (const auto& p : pairs) source_values.push_back(oracle.evaluate(decode(p.source)));

  std::vector<double> sorted = source_values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> boundaries;
  const std::size_t n = sorted.size();
  for (std::size_t j = 1; j < options.buckets; ++j) {
    const std::size_t rank = (j * n + options.buckets - 1) / options.buckets;  // ceil(j n / B)
    boundaries.push_back(sorted[std::max<std::size_t>(rank, 1) - 1]);
  }

  Vocabulary vocab = Vocabulary::full();
  const std::size_t d = vocab.distribution_size();
  std::vector<std::uint32_t> counts((boundaries.size() + 1) * d * d, 0);
  auto bucket_of = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(boundaries.begin(), boundaries.end(), v) - boundaries.begin());
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::size_t b = bucket_of(source_values[i]);
    std::size_t prev = vocab.size();
    const auto& target = pairs[i].target;
    const std::size_t len = std::min(target.size(), options.max_length);
    for (std::size_t t = 0; t < len; ++t) {
      const std::size_t next = *vocab.index_of(target[t]);
      ++counts[(b * d + prev) * d + next];
      prev = next;
    }
    ++counts[(b * d + prev) * d + vocab.eos()];
  }
  return ReferenceTranslator(std::move(vocab), oracle, std::move(boundaries), options.alpha, std::move(counts));
}

LocalEditParams LocalEditParams::carbon_appender() {
  LocalEditParams p;
  const std::size_t n = alphabet_size();
  p.edit_weights.assign(n, 0.1);
  p.tail_weights.assign(n, 0.05);
  auto set = [&](std::vector<double>& w, std::string_view sym, double v) { w[token(sym).id] = v; };
  set(p.edit_weights, "C", 3.0);
  set(p.edit_weights, "N", 1.0);
  set(p.edit_weights, "O", 1.0);
  set(p.edit_weights, "S", 0.5);
  set(p.edit_weights, "F", 0.5);
  set(p.edit_weights, "=C", 0.5);
  set(p.edit_weights, "=O", 0.5);
  set(p.edit_weights, "Branch1", 0.5);
  set(p.edit_weights, "Ring5", 0.5);
  set(p.edit_weights, "Ring6", 0.5);
  set(p.tail_weights, "C", 10.0);
  set(p.tail_weights, "N", 0.5);
  set(p.tail_weights, "O", 0.5);
  set(p.tail_weights, "Branch1", 0.5);
  return p;
}

void LocalEditParams::validate() const {
  const std::size_t n = alphabet_size();
  if (edit_weights.size() != n || tail_weights.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "edit/tail weights must cover the alphabet");
  }
  auto positive_sum = [](const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w) {
      if (!(v >= 0.0) || !std::isfinite(v)) return -1.0;
      s += v;
    }
    return s;
  };
  if (!(positive_sum(edit_weights) > 0.0) || !(positive_sum(tail_weights) > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "edit/tail weights must be non-negative with positive sum");
  }
  if (copy_prob < 0.0 || early_stop < 0.0 || copy_prob + early_stop > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "copy_prob + early_stop must be within [0, 1]");
  }
  if (tail_stop < 0.0 || tail_stop > 1.0) throw Error(ErrorCode::kInvalidArgument, "tail_stop must be in [0, 1]");
}

LocalEditModel::LocalEditModel(LocalEditParams params) : vocab_(Vocabulary::full()), params_(std::move(params)) {
  params_.validate();
  auto normalized = [](const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w) s += v;
    Distribution out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] / s;
    return out;
  };
  edit_ = normalized(params_.edit_weights);
  tail_ = normalized(params_.tail_weights);
}

Distribution LocalEditModel::next_token_dist(std::span<const Token> source, std::span<const Token> prefix) const {
  const std::size_t d = vocab_.distribution_size();
  Distribution p(d, 0.0);
  const std::size_t t = prefix.size();
  if (t < source.size()) {
    const double edit_mass = 1.0 - params_.copy_prob - params_.early_stop;
    for (std::size_t v = 0; v < edit_.size(); ++v) p[v] = edit_mass * edit_[v];
    p[*vocab_.index_of(source[t])] += params_.copy_prob;
    p[vocab_.eos()] += params_.early_stop;
  } else {
    const double extend = 1.0 - params_.tail_stop;
    for (std::size_t v = 0; v < tail_.size(); ++v) p[v] = extend * tail_[v];
    p[vocab_.eos()] = params_.tail_stop;
  }
  return p;
}

std::vector<std::string> EchoModel::generate(std::span<const Token> source, std::size_t n, std::uint64_t) const {
  return std::vector<std::string>(n, render(source));
}

}  // namespace bbrt
