#include "snowclone/text.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace snowclone {

TokenSeq::TokenSeq(std::vector<std::string> tokens, std::vector<CharSpan> offsets)
    : tokens_(std::move(tokens)), offsets_(std::move(offsets)) {
  if (tokens_.size() != offsets_.size())
    throw std::invalid_argument("TokenSeq: token and offset counts differ");
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    if (offsets_[i].start >= offsets_[i].end)
      throw std::invalid_argument("TokenSeq: empty token span");
    if (i > 0 && offsets_[i].start < offsets_[i - 1].end)
      throw std::invalid_argument("TokenSeq: token spans out of order");
  }
}

TokenSeq TokenSeq::from_tokens(std::vector<std::string> tokens) {
  std::vector<CharSpan> offsets;
  offsets.reserve(tokens.size());
  std::size_t pos = 0;
  for (const auto& t : tokens) {
    if (t.empty()) throw std::invalid_argument("TokenSeq: empty token");
    offsets.push_back({pos, pos + t.size()});
    pos += t.size() + 1;
  }
  return TokenSeq(std::move(tokens), std::move(offsets));
}

CharSpan TokenSeq::source_span() const noexcept {
  if (offsets_.empty()) return {};
  return {offsets_.front().start, offsets_.back().end};
}

std::string TokenSeq::joined() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens_[i];
  }
  return out;
}

namespace {

enum class CharClass { Space, Word, Apostrophe, Punct };

struct Decoded {
  CharClass cls;
  std::size_t len;  // bytes consumed
};

// Classifies the (possibly multi-byte) character at text[i]. Anything that is
// not ASCII punctuation, whitespace, or a known Unicode punctuation block is a
// word character.
Decoded classify(std::string_view text, std::size_t i) {
  const auto c = static_cast<unsigned char>(text[i]);
  if (c < 0x80) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return {CharClass::Space, 1};
    if (c == '\'') return {CharClass::Apostrophe, 1};
    if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return {CharClass::Word, 1};
    return {CharClass::Punct, 1};
  }
  std::size_t len = 1;
  char32_t cp = 0;
  if ((c & 0xE0) == 0xC0) {
    len = 2;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    len = 3;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    len = 4;
    cp = c & 0x07;
  } else {
    return {CharClass::Punct, 1};  // stray continuation byte
  }
  if (i + len > text.size()) return {CharClass::Punct, text.size() - i};
  for (std::size_t k = 1; k < len; ++k) {
    const auto cc = static_cast<unsigned char>(text[i + k]);
    if ((cc & 0xC0) != 0x80) return {CharClass::Punct, 1};
    cp = (cp << 6) | (cc & 0x3F);
  }
  if (cp == 0x00A0 || cp == 0x2028 || cp == 0x2029 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x3000)
    return {CharClass::Space, len};
  if (cp == 0x2018 || cp == 0x2019) return {CharClass::Apostrophe, len};
  if ((cp >= 0x00A1 && cp <= 0x00BF) || cp == 0x00D7 || cp == 0x00F7 || (cp >= 0x2010 && cp <= 0x206F) ||
      (cp >= 0x3001 && cp <= 0x3003))
    return {CharClass::Punct, len};
  return {CharClass::Word, len};
}

char lower_ascii(char ch) { return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch; }

}  // namespace

TokenSeq tokenize(std::string_view text, std::size_t base_offset) {
  std::vector<std::string> tokens;
  std::vector<CharSpan> offsets;

  std::string cur;
  std::size_t cur_start = 0, cur_end = 0;
  bool pending_apostrophe = false;

  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      offsets.push_back({base_offset + cur_start, base_offset + cur_end});
    }
    cur.clear();
    pending_apostrophe = false;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const Decoded d = classify(text, i);
    switch (d.cls) {
      case CharClass::Space:
        flush();
        break;
      case CharClass::Apostrophe:
        // Only kept when it ends up between two word characters.
        pending_apostrophe = !cur.empty();
        break;
      case CharClass::Punct:
        pending_apostrophe = false;
        break;
      case CharClass::Word:
        if (cur.empty()) cur_start = i;
        if (pending_apostrophe) cur.push_back('\'');
        pending_apostrophe = false;
        for (std::size_t k = 0; k < d.len; ++k) cur.push_back(lower_ascii(text[i + k]));
        cur_end = i + d.len;
        break;
    }
    i += d.len;
  }
  flush();
  return TokenSeq(std::move(tokens), std::move(offsets));
}

std::string normalize_token(std::string_view raw) {
  const TokenSeq t = tokenize(raw);
  std::string out;
  for (const auto& tok : t.tokens()) out += tok;
  return out;
}

std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
  return edit_distance_by(a.size(), b.size(), [&](std::size_t i, std::size_t j) { return a[i] == b[j]; });
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  return lcs_length_by(a.size(), b.size(), [&](std::size_t i, std::size_t j) { return a[i] == b[j]; });
}

std::size_t longest_common_substring(std::span<const std::string> a, std::span<const std::string> b) {
  return longest_common_substring_by(a.size(), b.size(), [&](std::size_t i, std::size_t j) { return a[i] == b[j]; });
}

// ---------------------------------------------------------------------------

IdfTable::IdfTable(std::size_t doc_count, std::unordered_map<std::string, std::size_t> df)
    : doc_count_(doc_count), df_(std::move(df)) {
  if (doc_count_ == 0) throw IdfError("idf table needs at least one document");
  for (const auto& [tok, n] : df_) {
    if (n == 0 || n > doc_count_) throw IdfError("document frequency out of range for token '" + tok + "'");
  }
  default_idf_ = std::log(static_cast<double>(doc_count_ + 1)) + 1.0;

  std::vector<double> values;
  values.reserve(df_.size());
  for (const auto& [tok, n] : df_) values.push_back(idf(tok));
  std::sort(values.begin(), values.end());
  if (!values.empty()) {
    for (int q = 0; q < 3; ++q) {
      const auto rank = static_cast<std::size_t>(std::ceil(0.25 * (q + 1) * static_cast<double>(values.size())));
      const std::size_t idx = rank == 0 ? 0 : rank - 1;
      cut_[q] = values[idx];
    }
  } else {
    cut_[0] = cut_[1] = cut_[2] = default_idf_;
  }
}

double IdfTable::idf(const std::string& token) const {
  const auto it = df_.find(token);
  if (it == df_.end()) return default_idf_;
  return std::log(static_cast<double>(doc_count_ + 1) / static_cast<double>(it->second + 1)) + 1.0;
}

int IdfTable::quartile(const std::string& token) const {
  const double v = idf(token);
  // Ties at the top share bucket 4 so that rare words always land there.
  if (v >= cut_[2]) return 4;
  if (v > cut_[1]) return 3;
  if (v > cut_[0]) return 2;
  return 1;
}

void IdfTable::save(std::ostream& out) const {
  out << "snowclone-idf v1\tdoc_count=" << doc_count_ << '\n';
  std::vector<std::pair<std::string, std::size_t>> rows(df_.begin(), df_.end());
  std::sort(rows.begin(), rows.end());
  for (const auto& [tok, n] : rows) out << tok << '\t' << n << '\n';
}

IdfTable IdfTable::load(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("snowclone-idf v1\tdoc_count=", 0) != 0)
    throw IdfError("not an idf table (bad header)");
  const std::size_t doc_count = std::stoull(header.substr(header.find('=') + 1));
  std::unordered_map<std::string, std::size_t> df;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw IdfError("idf table line " + std::to_string(lineno) + ": missing tab");
    df.emplace(line.substr(0, tab), std::stoull(line.substr(tab + 1)));
  }
  return IdfTable(doc_count, std::move(df));
}

IdfTable build_idf(std::span<const TokenSeq> corpus) {
  if (corpus.empty()) throw IdfError("cannot build idf from an empty corpus");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    std::unordered_set<std::string> seen(doc.tokens().begin(), doc.tokens().end());
    for (const auto& t : seen) ++df[t];
  }
  return IdfTable(corpus.size(), std::move(df));
}

IdfTable build_idf(std::span<const std::string> documents) {
  std::vector<TokenSeq> docs;
  docs.reserve(documents.size());
  for (const auto& d : documents) docs.push_back(tokenize(d));
  return build_idf(std::span<const TokenSeq>(docs));
}

IdfTable build_idf(std::istream& corpus) {
  std::vector<TokenSeq> docs;
  std::string line;
  while (std::getline(corpus, line)) {
    TokenSeq t = tokenize(line);
    if (!t.empty()) docs.push_back(std::move(t));
  }
  return build_idf(std::span<const TokenSeq>(docs));
}

IdfStats idf_stats(const TokenSeq& s, const TokenSeq& c, const IdfTable& table) {
  if (s.empty()) throw std::invalid_argument("idf_stats: seed sentence is empty");
  std::unordered_set<std::string> s_set(s.tokens().begin(), s.tokens().end());
  std::unordered_set<std::string> c_set(c.tokens().begin(), c.tokens().end());

  // Sum in sorted order so results do not depend on hash iteration order.
  std::vector<std::string> ordered(s_set.begin(), s_set.end());
  std::sort(ordered.begin(), ordered.end());

  IdfStats st;
  double sum_shared = 0.0, sum_only = 0.0;
  std::size_t n_shared = 0, n_only = 0;
  for (const auto& t : ordered) {
    const double v = table.idf(t);
    if (c_set.count(t)) {
      sum_shared += v;
      st.max_shared = std::max(st.max_shared, v);
      ++n_shared;
    } else {
      sum_only += v;
      st.max_s_only = std::max(st.max_s_only, v);
      ++n_only;
    }
  }
  if (n_shared) st.mean_shared = sum_shared / static_cast<double>(n_shared);
  if (n_only) st.mean_s_only = sum_only / static_cast<double>(n_only);
  return st;
}

}  // namespace snowclone
