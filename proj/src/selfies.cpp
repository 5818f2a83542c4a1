// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/selfies.hpp"

#include <array>
#include <cctype>

#include "bbrt/error.hpp"

namespace bbrt {

namespace {

struct ElementData {
  std::string_view symbol;
  int max_valence;
  double weight;
};

constexpr std::array<ElementData, kElementCount> kElements{{
    {"C", 4, 12.011},
    {"N", 3, 14.007},
    {"O", 2, 15.999},
    {"S", 2, 32.06},
    {"F", 1, 18.998},
    {"Cl", 1, 35.45},
    {"Br", 1, 79.904},
}};

std::vector<TokenInfo> build_alphabet() {
  std::vector<TokenInfo> out;
  auto atom = [&](std::string_view sym, Element e, int order) {
    out.push_back({sym, TokenKind::kAtom, e, order, 0, 0});
  };
  atom("C", Element::C, 1);
  atom("N", Element::N, 1);
  atom("O", Element::O, 1);
  atom("S", Element::S, 1);
  atom("F", Element::F, 1);
  atom("Cl", Element::Cl, 1);
  atom("Br", Element::Br, 1);
  atom("=C", Element::C, 2);
  atom("=N", Element::N, 2);
  atom("=O", Element::O, 2);
  atom("=S", Element::S, 2);
  atom("#C", Element::C, 3);
  atom("#N", Element::N, 3);
  out.push_back({"Branch1", TokenKind::kBranch, Element::C, 0, 1, 0});
  out.push_back({"Branch2", TokenKind::kBranch, Element::C, 0, 2, 0});
  out.push_back({"Branch3", TokenKind::kBranch, Element::C, 0, 3, 0});
  static constexpr std::array<std::string_view, 9> kRings{
      "Ring1", "Ring2", "Ring3", "Ring4", "Ring5", "Ring6", "Ring7", "Ring8", "Ring9"};
  for (int i = 0; i < 9; ++i) out.push_back({kRings[i], TokenKind::kRing, Element::C, 1, 0, i + 1});
  return out;
}

}  // namespace

int max_valence(Element e) noexcept { return kElements[static_cast<std::size_t>(e)].max_valence; }
double atomic_weight(Element e) noexcept { return kElements[static_cast<std::size_t>(e)].weight; }
std::string_view element_symbol(Element e) noexcept { return kElements[static_cast<std::size_t>(e)].symbol; }

const std::vector<TokenInfo>& alphabet() {
  static const std::vector<TokenInfo> table = build_alphabet();
  return table;
}

std::size_t alphabet_size() noexcept { return alphabet().size(); }

const TokenInfo& token_info(Token t) { return alphabet().at(t.id); }

std::optional<Token> find_token(std::string_view symbol) noexcept {
  const auto& table = alphabet();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].symbol == symbol) return Token{static_cast<std::uint8_t>(i)};
  }
  return std::nullopt;
}

Token token(std::string_view symbol) {
  if (symbol.size() >= 2 && symbol.front() == '[' && symbol.back() == ']') {
    symbol = symbol.substr(1, symbol.size() - 2);
  }
  if (auto t = find_token(symbol)) return *t;
  throw UnknownTokenError(std::string(symbol), 0);
}

TokenSequence tokenize(std::string_view raw) {
  TokenSequence out;
  std::size_t i = 0;
  auto skip_space = [&] {
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
  };
  skip_space();
  if (i == raw.size()) throw Error(ErrorCode::kEmptyInput, "empty token string");
  while (i < raw.size()) {
    if (raw[i] != '[') {
      const std::size_t end = raw.find('[', i);
      throw UnknownTokenError(std::string(raw.substr(i, end - i)), out.size());
    }
    const std::size_t close = raw.find(']', i + 1);
    if (close == std::string_view::npos) {
      throw UnknownTokenError(std::string(raw.substr(i + 1)), out.size());
    }
    const std::string_view symbol = raw.substr(i + 1, close - i - 1);
    auto t = find_token(symbol);
    if (!t) throw UnknownTokenError(std::string(symbol), out.size());
    out.push_back(*t);
    i = close + 1;
    skip_space();
  }
  return out;
}

std::string render(Token t) {
  std::string s = "[";
  s += token_info(t).symbol;
  s += ']';
  return s;
}

std::string render(std::span<const Token> tokens) {
  std::string s;
  s.reserve(tokens.size() * 4);
  for (Token t : tokens) {
    s += '[';
    s += token_info(t).symbol;
    s += ']';
  }
  return s;
}

}  // namespace bbrt
