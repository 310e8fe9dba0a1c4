#ifndef NCC_VOCABULARY_HPP_
#define NCC_VOCABULARY_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ncc {

using TokenId = std::uint32_t;

inline constexpr std::string_view kGapMarker = "<GAP>";
inline constexpr char kJoiner = '_';

enum class TokenKind : std::uint8_t { plain, fused };

// A fusion pattern: the plain words a compound is made of, plus the position
// of a retained gap (the gap sits immediately before components[gap_index]).
struct Compound {
  std::vector<std::string> components;
  std::optional<std::size_t> gap_index;

  // "make_up_<GAP>_mind"
  std::string surface() const;
  // Components with the gap marker spliced in.
  std::vector<std::string> pieces() const;
  // Inverse of surface(). Throws ParseError on malformed input.
  static Compound parse(std::string_view surface);

  friend bool operator==(const Compound&, const Compound&) = default;
};

struct Token {
  TokenId id = 0;
  std::string surface;
  TokenKind kind = TokenKind::plain;
  std::vector<std::string> components;  // empty for plain tokens
  std::optional<std::size_t> gap_index;
};

// Interned surfaces for one side of a bitext. Ids are dense and stable: a
// copy extended with new fused tokens keeps every existing id.
class Vocabulary {
 public:
  TokenId intern(std::string_view surface);
  TokenId intern_fused(const Compound& compound);

  std::optional<TokenId> find(std::string_view surface) const;
  const Token& token(TokenId id) const { return tokens_.at(id); }
  const std::string& surface(TokenId id) const { return tokens_.at(id).surface; }
  // Flattened pieces used when matching compounds: a plain token is its own
  // single piece, a fused token is its components with any gap marker.
  std::span<const std::string> pieces(TokenId id) const { return pieces_.at(id); }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<Token> tokens_;
  std::vector<std::vector<std::string>> pieces_;
  std::unordered_map<std::string, TokenId> index_;
};

// Components of a token in order with gap markers removed.
std::vector<std::string> defuse(const Token& token);
// Same, working from a surface string alone (splits on '_', drops "<GAP>").
std::vector<std::string> defuse_surface(std::string_view surface);

}  // namespace ncc

#endif  // NCC_VOCABULARY_HPP_
