// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures: small hand-built graphs and synthetic models.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include "bbrt/error.hpp"
#include "bbrt/model.hpp"
#include "bbrt/mol_graph.hpp"
#include "bbrt/rng.hpp"
#include "bbrt/selfies.hpp"

namespace bbrt::test {

inline std::string repeat(std::string_view symbol, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += symbol;
  return out;
}

inline MolGraph chain(std::size_t n) { return decode(tokenize(repeat("[C]", n))); }

// Single cycle of n carbons built atom by atom.
inline MolGraph carbon_ring(std::size_t n) {
  MolGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_atom(Element::C);
  for (std::size_t i = 0; i < n; ++i) g.add_bond(i, (i + 1) % n, 1);
  return g;
}

// Vocabulary made of the first n alphabet tokens.
inline Vocabulary first_tokens(std::size_t n) {
  std::vector<Token> tokens;
  for (std::size_t i = 0; i < n; ++i) tokens.push_back(Token{static_cast<std::uint8_t>(i)});
  return Vocabulary(std::move(tokens));
}

// Token-level model whose next-token distribution is a fixed pseudo-random
// function of the prefix. Weights are continuous, so ties have probability 0.
class RandomTableModel final : public ConditionalModel {
 public:
  RandomTableModel(std::size_t vocab_size, std::uint64_t seed, double eos_weight = 1.0)
      : vocab_(first_tokens(vocab_size)), seed_(seed), eos_weight_(eos_weight) {}

  const Vocabulary& vocabulary() const override { return vocab_; }
  ModelMode mode() const override { return ModelMode::kTokenLevel; }

  Distribution next_token_dist(std::span<const Token>, std::span<const Token> prefix) const override {
    std::uint64_t h = derive_seed(seed_, {prefix.size()});
    for (Token t : prefix) h = derive_seed(h, {t.id});
    Rng rng(h);
    Distribution p(vocab_.distribution_size());
    for (double& x : p) x = 0.05 + rng.uniform();
    p[vocab_.eos()] *= eos_weight_;
    const double z = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& x : p) x /= z;
    return p;
  }

 private:
  Vocabulary vocab_;
  std::uint64_t seed_;
  double eos_weight_;
};

// Explicit table keyed by the rendered prefix, with a fallback row.
class TableModel final : public ConditionalModel {
 public:
  TableModel(Vocabulary vocab, Distribution fallback) : vocab_(std::move(vocab)), fallback_(std::move(fallback)) {}

  void set(const std::string& prefix, Distribution p) { rows_[prefix] = std::move(p); }

  const Vocabulary& vocabulary() const override { return vocab_; }
  ModelMode mode() const override { return ModelMode::kTokenLevel; }

  Distribution next_token_dist(std::span<const Token>, std::span<const Token> prefix) const override {
    const auto it = rows_.find(render(prefix));
    return it == rows_.end() ? fallback_ : it->second;
  }

 private:
  Vocabulary vocab_;
  Distribution fallback_;
  std::map<std::string, Distribution> rows_;
};

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("bbrt-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected a bbrt::Error");
}

}  // namespace bbrt::test
