#include "ncc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ncc/errors.hpp"

namespace ncc {

namespace {

bool is_punct_char(unsigned char ch) { return ch < 0x80 && std::ispunct(ch) && ch != kJoiner; }

bool read_lines(const std::filesystem::path& path, std::vector<std::string>& lines) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return true;
}

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string_view side_name(Side s) { return s == Side::source ? "E" : "F"; }

Side parse_side(std::string_view name) {
  if (name == "E" || name == "source") return Side::source;
  if (name == "F" || name == "target") return Side::target;
  throw ParseError("unknown side '" + std::string(name) + "'");
}

Bitext::Bitext(Mode mode, std::shared_ptr<const Vocabulary> source_vocab,
               std::shared_ptr<const Vocabulary> target_vocab, std::vector<SegmentPair> pairs,
               IngestReport report)
    : mode_(mode),
      source_vocab_(std::move(source_vocab)),
      target_vocab_(std::move(target_vocab)),
      pairs_(std::move(pairs)),
      report_(report) {}

Bitext Bitext::swapped() const {
  std::vector<SegmentPair> pairs;
  pairs.reserve(pairs_.size());
  for (const auto& p : pairs_) pairs.push_back(SegmentPair{p.index, p.target, p.source});
  return Bitext(mode_, target_vocab_, source_vocab_, std::move(pairs), report_);
}

Bitext Bitext::slice(std::size_t first, std::size_t last) const {
  last = std::min(last, pairs_.size());
  std::vector<SegmentPair> pairs;
  for (std::size_t i = first; i < last; ++i) {
    pairs.push_back(pairs_[i]);
    pairs.back().index = i - first;
  }
  return Bitext(mode_, source_vocab_, target_vocab_, std::move(pairs), {});
}

std::size_t Bitext::types_in_use(Side s) const {
  std::vector<bool> seen(vocab(s).size(), false);
  std::size_t n = 0;
  for (const auto& p : pairs_)
    for (TokenId id : p.side(s))
      if (!seen[id]) {
        seen[id] = true;
        ++n;
      }
  return n;
}

std::vector<std::string> tokenize(std::string_view line, const TokenizeOptions& opts) {
  std::vector<std::string> out;
  for (std::string word : split_ws(line)) {
    if (opts.lowercase)
      for (char& ch : word)
        if (static_cast<unsigned char>(ch) < 0x80) ch = static_cast<char>(std::tolower(ch));
    if (!opts.detach_punctuation || is_punctuation(word)) {
      out.push_back(std::move(word));
      continue;
    }
    std::size_t b = 0, e = word.size();
    while (b < e && is_punct_char(static_cast<unsigned char>(word[b]))) ++b;
    while (e > b && is_punct_char(static_cast<unsigned char>(word[e - 1]))) --e;
    for (std::size_t i = 0; i < b; ++i) out.emplace_back(1, word[i]);
    out.push_back(word.substr(b, e - b));
    for (std::size_t i = e; i < word.size(); ++i) out.emplace_back(1, word[i]);
  }
  return out;
}

std::vector<std::string> split_code_points(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    len = std::min(len, text.size() - i);
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

bool is_punctuation(std::string_view surface) {
  if (surface.empty()) return false;
  return std::all_of(surface.begin(), surface.end(), [](char ch) {
    auto u = static_cast<unsigned char>(ch);
    return u < 0x80 && std::ispunct(u);
  });
}

Bitext bitext_from_lines(std::span<const std::string> source_lines,
                         std::span<const std::string> target_lines, const TokenizeOptions& opts) {
  if (source_lines.size() != target_lines.size()) {
    std::size_t n = std::min(source_lines.size(), target_lines.size());
    throw AlignmentError("source has " + std::to_string(source_lines.size()) +
                         " lines, target has " + std::to_string(target_lines.size()) +
                         "; first unmatched line is " + std::to_string(n + 1));
  }
  auto sv = std::make_shared<Vocabulary>();
  auto tv = std::make_shared<Vocabulary>();
  std::vector<SegmentPair> pairs;
  IngestReport report;
  report.lines_read = source_lines.size();
  for (std::size_t i = 0; i < source_lines.size(); ++i) {
    auto s = tokenize(source_lines[i], opts);
    auto t = tokenize(target_lines[i], opts);
    if (s.empty() || t.empty()) {
      ++report.dropped_empty;
      continue;
    }
    SegmentPair p;
    p.index = pairs.size();
    for (const auto& w : s) p.source.push_back(sv->intern(w));
    for (const auto& w : t) p.target.push_back(tv->intern(w));
    pairs.push_back(std::move(p));
  }
  return Bitext(Mode::word, std::move(sv), std::move(tv), std::move(pairs), report);
}

Bitext parse_dictionary(std::istream& in) {
  auto sv = std::make_shared<Vocabulary>();
  auto tv = std::make_shared<Vocabulary>();
  std::vector<SegmentPair> pairs;
  IngestReport report;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++report.lines_read;
    if (split_ws(line).empty()) {
      ++report.dropped_empty;
      continue;
    }
    std::string spelling, phonemes;
    if (auto tab = line.find('\t'); tab != std::string::npos) {
      spelling = line.substr(0, tab);
      phonemes = line.substr(tab + 1);
    } else {
      auto fields = split_ws(line);
      spelling = fields.front();
      auto pos = line.find(spelling) + spelling.size();
      phonemes = line.substr(pos);
    }
    auto spell_fields = split_ws(spelling);
    auto phones = split_ws(phonemes);
    if (spell_fields.size() != 1 || phones.empty())
      throw ParseError("malformed dictionary row " + std::to_string(row) + ": '" + line + "'");
    SegmentPair p;
    p.index = pairs.size();
    for (const auto& letter : split_code_points(spell_fields.front()))
      p.source.push_back(sv->intern(letter));
    for (const auto& ph : phones) p.target.push_back(tv->intern(ph));
    pairs.push_back(std::move(p));
  }
  return Bitext(Mode::character, std::move(sv), std::move(tv), std::move(pairs), report);
}

Bitext load_word_bitext(const std::filesystem::path& source_path,
                        const std::filesystem::path& target_path, const TokenizeOptions& opts) {
  std::vector<std::string> src, tgt;
  if (!read_lines(source_path, src)) throw ParseError("cannot read " + source_path.string());
  if (!read_lines(target_path, tgt)) throw ParseError("cannot read " + target_path.string());
  return bitext_from_lines(src, tgt, opts);
}

Bitext load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  return parse_dictionary(in);
}

Bitext load_bitext(const std::filesystem::path& source_path,
                   const std::filesystem::path& target_path, Mode mode,
                   const TokenizeOptions& opts) {
  if (mode == Mode::character) return load_dictionary(source_path);
  return load_word_bitext(source_path, target_path, opts);
}

void write_side(const Bitext& bitext, Side side, std::ostream& out) {
  const Vocabulary& v = bitext.vocab(side);
  for (const auto& p : bitext.pairs()) {
    bool first = true;
    for (TokenId id : p.side(side)) {
      if (!first) out << ' ';
      out << v.surface(id);
      first = false;
    }
    out << '\n';
  }
}

void write_dictionary(const Bitext& bitext, std::ostream& out) {
  const Vocabulary& sv = bitext.vocab(Side::source);
  const Vocabulary& tv = bitext.vocab(Side::target);
  for (const auto& p : bitext.pairs()) {
    for (TokenId id : p.source) out << sv.surface(id);
    out << '\t';
    for (std::size_t i = 0; i < p.target.size(); ++i) out << (i ? " " : "") << tv.surface(p.target[i]);
    out << '\n';
  }
}

std::vector<std::string> side_lines(const Bitext& bitext, Side side) {
  std::ostringstream os;
  write_side(bitext, side, os);
  std::vector<std::string> lines;
  std::istringstream is(os.str());
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return lines;
}

std::unordered_set<std::string> FunctionWordSet::surfaces(const Vocabulary& vocab) const {
  std::unordered_set<std::string> out;
  for (TokenId id : members) out.insert(vocab.surface(id));
  return out;
}

FunctionWordSet function_words_top_k(const Bitext& bitext, Side side, std::size_t k) {
  const Vocabulary& v = bitext.vocab(side);
  std::vector<std::size_t> freq(v.size(), 0);
  for (const auto& p : bitext.pairs())
    for (TokenId id : p.side(side)) ++freq[id];
  std::vector<TokenId> ids;
  for (TokenId id = 0; id < v.size(); ++id)
    if (freq[id] > 0) ids.push_back(id);
  std::sort(ids.begin(), ids.end(), [&](TokenId a, TokenId b) {
    if (freq[a] != freq[b]) return freq[a] > freq[b];
    return v.surface(a) < v.surface(b);
  });
  FunctionWordSet out{side, {}, {}};
  for (std::size_t i = 0; i < std::min(k, ids.size()); ++i) out.members.insert(ids[i]);
  return out;
}

FunctionWordSet function_words_from_list(const Bitext& bitext, Side side,
                                         std::span<const std::string> surfaces) {
  FunctionWordSet out{side, {}, {}};
  const Vocabulary& v = bitext.vocab(side);
  for (const auto& s : surfaces) {
    if (auto id = v.find(s)) out.members.insert(*id);
    else out.warnings.push_back(s);
  }
  return out;
}

FunctionWordSet function_words_from_file(const Bitext& bitext, Side side,
                                         const std::filesystem::path& path) {
  std::vector<std::string> lines;
  if (!read_lines(path, lines)) throw ParseError("cannot read " + path.string());
  std::vector<std::string> words;
  for (const auto& l : lines)
    for (auto& w : split_ws(l)) words.push_back(std::move(w));
  return function_words_from_list(bitext, side, words);
}

void validate_compounds(std::span<const Compound> compounds) {
  std::map<std::vector<std::string>, std::size_t> seen;
  for (std::size_t i = 0; i < compounds.size(); ++i) {
    const Compound& c = compounds[i];
    if (c.components.size() < 2)
      throw FusionError("compound #" + std::to_string(i + 1) + " has fewer than two components");
    if (c.gap_index && (*c.gap_index == 0 || *c.gap_index >= c.components.size()))
      throw FusionError("compound '" + c.surface() + "' has its gap at an edge");
    for (std::size_t j = 0; j < c.components.size(); ++j) {
      const auto& piece = c.components[j];
      if (piece.empty() || piece.find(' ') != std::string::npos ||
          piece.find('\t') != std::string::npos)
        throw FusionError("compound #" + std::to_string(i + 1) + " has a malformed component");
      // A literal gap marker is only legal where gap_index puts one.
      if (piece == kGapMarker)
        throw FusionError("compound '" + c.surface() + "' spells out a gap marker");
    }
    auto [it, fresh] = seen.emplace(c.components, i);
    if (!fresh)
      throw FusionError("compounds #" + std::to_string(it->second + 1) + " and #" +
                        std::to_string(i + 1) + " both define '" + c.surface() + "'");
  }
}

Fuser::Fuser(std::span<const Compound> compounds, FuseOptions options)
    : compounds_(compounds.begin(), compounds.end()), options_(std::move(options)) {
  validate_compounds(compounds_);
  order_.resize(compounds_.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::vector<std::string> surfaces;
  for (const auto& c : compounds_) surfaces.push_back(c.surface());
  std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = compounds_[a];
    const auto& cb = compounds_[b];
    if (ca.components.size() != cb.components.size())
      return ca.components.size() > cb.components.size();
    if (ca.gap_index.has_value() != cb.gap_index.has_value()) return !ca.gap_index.has_value();
    return surfaces[a] < surfaces[b];
  });
  for (std::size_t idx : order_) by_first_[compounds_[idx].components.front()].push_back(idx);
}

namespace {

// Consumes whole tokens from pos whose pieces spell exactly want[0..n).
// Returns the end position, or npos.
std::size_t match_pieces(std::span<const std::string> want, std::span<const TokenId> tokens,
                         std::size_t pos, const Vocabulary& vocab) {
  std::size_t off = 0;
  while (off < want.size()) {
    if (pos >= tokens.size()) return std::string::npos;
    auto pieces = vocab.pieces(tokens[pos]);
    if (off + pieces.size() > want.size()) return std::string::npos;
    for (std::size_t k = 0; k < pieces.size(); ++k)
      if (pieces[k] != want[off + k]) return std::string::npos;
    off += pieces.size();
    ++pos;
  }
  return pos;
}

}  // namespace

bool Fuser::match_at(const Compound& c, std::span<const TokenId> tokens, std::size_t pos,
                     const Vocabulary& vocab, Match& m) const {
  const auto pieces = c.pieces();
  std::size_t end = match_pieces(pieces, tokens, pos, vocab);
  if (end != std::string::npos && end - pos >= 2) {
    m = Match{end, end, end};
    return true;
  }
  if (!c.gap_index) return false;
  const std::size_t g = *c.gap_index;
  std::span<const std::string> all(pieces);
  std::size_t mid = match_pieces(all.subspan(0, g), tokens, pos, vocab);
  if (mid == std::string::npos) return false;
  for (int width = 1; width <= options_.max_gap; ++width) {
    std::size_t fill_end = mid + static_cast<std::size_t>(width);
    if (fill_end > tokens.size()) return false;
    const TokenId last = tokens[fill_end - 1];
    if (options_.restrict_fillers && !options_.filler_words.contains(vocab.surface(last)))
      return false;
    std::size_t stop = match_pieces(all.subspan(g + 1), tokens, fill_end, vocab);
    if (stop != std::string::npos) {
      m = Match{stop, mid, fill_end};
      return true;
    }
  }
  return false;
}

std::vector<TokenId> Fuser::apply(std::span<const TokenId> tokens, Vocabulary& vocab,
                                  FuseStats* stats) const {
  if (stats && stats->occurrences.size() != compounds_.size())
    stats->occurrences.assign(compounds_.size(), 0);
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    Match m;
    bool hit = false;
    auto bucket = by_first_.find(vocab.pieces(tokens[pos]).front());
    if (bucket == by_first_.end()) {
      out.push_back(tokens[pos++]);
      continue;
    }
    for (std::size_t idx : bucket->second) {
      const Compound& c = compounds_[idx];
      if (!match_at(c, tokens, pos, vocab, m)) continue;
      out.push_back(vocab.intern_fused(c));
      for (std::size_t f = m.filler_begin; f < m.filler_end; ++f) out.push_back(tokens[f]);
      if (stats) {
        ++stats->occurrences[idx];
        ++stats->fusions;
        stats->tokens_consumed += (m.end - pos) - (m.filler_end - m.filler_begin);
        stats->components_fused += c.components.size();
      }
      pos = m.end;
      hit = true;
      break;
    }
    if (!hit) out.push_back(tokens[pos++]);
  }
  return out;
}

Bitext fuse_side(const Bitext& bitext, Side side, std::span<const Compound> compounds,
                 const FuseOptions& options, FuseStats* stats) {
  Fuser fuser(compounds, options);
  if (stats) stats->occurrences.assign(compounds.size(), 0);
  if (fuser.empty()) return bitext;
  auto vocab = std::make_shared<Vocabulary>(bitext.vocab(side));
  std::vector<SegmentPair> pairs = bitext.pairs();
  for (auto& p : pairs) {
    auto& seq = side == Side::source ? p.source : p.target;
    seq = fuser.apply(seq, *vocab, stats);
  }
  auto sv = side == Side::source ? std::shared_ptr<const Vocabulary>(vocab) : bitext.vocab_ptr(Side::source);
  auto tv = side == Side::target ? std::shared_ptr<const Vocabulary>(vocab) : bitext.vocab_ptr(Side::target);
  return Bitext(bitext.mode(), std::move(sv), std::move(tv), std::move(pairs), bitext.report());
}

}  // namespace ncc
