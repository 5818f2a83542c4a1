// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// Restricted SELFIES alphabet and surface syntax.
//
// Surface strings are concatenations of bracketed symbols, e.g.
// "[C][Branch1][C][O]". Whitespace between tokens is ignored. The alphabet
// is fixed (see alphabet()); anything else is rejected at tokenization.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bbrt {

enum class Element : std::uint8_t { C, N, O, S, F, Cl, Br };

inline constexpr std::size_t kElementCount = 7;

int max_valence(Element e) noexcept;
double atomic_weight(Element e) noexcept;
std::string_view element_symbol(Element e) noexcept;

inline constexpr double kHydrogenWeight = 1.008;

enum class TokenKind : std::uint8_t { kAtom, kBranch, kRing };

struct TokenInfo {
  std::string_view symbol;  // without brackets
  TokenKind kind;
  Element element;     // kAtom only
  int bond_order;      // kAtom: requested order to the attachment point
  int branch_size;     // kBranch: number of following tokens forming the branch
  int ring_lookback;   // kRing: atom-index distance to the ring partner
};

struct Token {
  std::uint8_t id = 0;

  friend constexpr auto operator<=>(Token, Token) = default;
};

using TokenSequence = std::vector<Token>;

inline constexpr std::size_t kDefaultMaxSequenceLength = 120;

const std::vector<TokenInfo>& alphabet();
std::size_t alphabet_size() noexcept;
const TokenInfo& token_info(Token t);

std::optional<Token> find_token(std::string_view symbol) noexcept;

// Convenience for literals in code and tests; throws UnknownTokenError.
Token token(std::string_view symbol);

TokenSequence tokenize(std::string_view raw);

std::string render(Token t);
std::string render(std::span<const Token> tokens);

}  // namespace bbrt
