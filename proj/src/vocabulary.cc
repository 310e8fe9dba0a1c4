#include "ncc/vocabulary.hpp"

#include "ncc/errors.hpp"

namespace ncc {

std::vector<std::string> Compound::pieces() const {
  std::vector<std::string> out;
  out.reserve(components.size() + 1);
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (gap_index && *gap_index == i) out.emplace_back(kGapMarker);
    out.push_back(components[i]);
  }
  return out;
}

std::string Compound::surface() const {
  std::string out;
  for (const auto& piece : pieces()) {
    if (!out.empty()) out += kJoiner;
    out += piece;
  }
  return out;
}

Compound Compound::parse(std::string_view surface) {
  Compound c;
  std::size_t start = 0;
  while (start <= surface.size()) {
    std::size_t end = surface.find(kJoiner, start);
    if (end == std::string_view::npos) end = surface.size();
    std::string_view piece = surface.substr(start, end - start);
    if (piece.empty())
      throw ParseError("empty component in compound '" + std::string(surface) + "'");
    if (piece == kGapMarker) {
      if (c.gap_index || c.components.empty())
        throw ParseError("misplaced gap in compound '" + std::string(surface) + "'");
      c.gap_index = c.components.size();
    } else {
      c.components.emplace_back(piece);
    }
    start = end + 1;
  }
  if (c.components.size() < 2)
    throw ParseError("compound '" + std::string(surface) + "' needs two components");
  if (c.gap_index && *c.gap_index >= c.components.size())
    throw ParseError("trailing gap in compound '" + std::string(surface) + "'");
  return c;
}

TokenId Vocabulary::intern(std::string_view surface) {
  std::string key(surface);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  auto id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(Token{id, key, TokenKind::plain, {}, std::nullopt});
  pieces_.push_back({key});
  index_.emplace(std::move(key), id);
  return id;
}

TokenId Vocabulary::intern_fused(const Compound& compound) {
  std::string key = compound.surface();
  TokenId id;
  if (auto it = index_.find(key); it != index_.end()) {
    id = it->second;
  } else {
    id = static_cast<TokenId>(tokens_.size());
    tokens_.push_back(Token{id, key, TokenKind::plain, {}, std::nullopt});
    pieces_.emplace_back();
    index_.emplace(key, id);
  }
  // A surface first seen as plain text gets upgraded in place.
  Token& tok = tokens_[id];
  tok.kind = TokenKind::fused;
  tok.components = compound.components;
  tok.gap_index = compound.gap_index;
  pieces_[id] = compound.pieces();
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> defuse(const Token& token) {
  if (token.kind == TokenKind::plain) return {token.surface};
  return token.components;
}

std::vector<std::string> defuse_surface(std::string_view surface) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= surface.size()) {
    std::size_t end = surface.find(kJoiner, start);
    if (end == std::string_view::npos) end = surface.size();
    std::string_view piece = surface.substr(start, end - start);
    if (!piece.empty() && piece != kGapMarker) out.emplace_back(piece);
    start = end + 1;
  }
  if (out.empty()) out.emplace_back(surface);
  return out;
}

}  // namespace ncc
