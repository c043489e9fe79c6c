#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace snowclone {

/// Half-open character range into a source string.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

/// Normalized token sequence for one sentence.
///
/// Tokens are lowercase and free of whitespace and punctuation (apostrophes
/// inside words survive). Each token keeps the character range it was cut
/// from, so downstream annotations can point back into the raw text.
class TokenSeq {
public:
  TokenSeq() = default;
  TokenSeq(std::vector<std::string> tokens, std::vector<CharSpan> offsets);

  /// Builds a sequence from already-normalized tokens. Offsets are laid out
  /// as if the tokens were joined by single spaces.
  static TokenSeq from_tokens(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<CharSpan>& offsets() const noexcept { return offsets_; }
  std::span<const std::string> view() const noexcept { return tokens_; }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  /// True for input without a single word character.
  bool degenerate() const noexcept { return tokens_.empty(); }

  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

  /// Character range covering all tokens; {0,0} when empty.
  CharSpan source_span() const noexcept;

  /// Tokens joined with single spaces.
  std::string joined() const;

  /// Token-wise equality; offsets are ignored.
  friend bool operator==(const TokenSeq& a, const TokenSeq& b) { return a.tokens_ == b.tokens_; }

private:
  std::vector<std::string> tokens_;
  std::vector<CharSpan> offsets_;
};

/// Lowercases, strips punctuation (keeping apostrophes between word
/// characters) and splits on whitespace. `base_offset` is added to every
/// reported character offset.
TokenSeq tokenize(std::string_view text, std::size_t base_offset = 0);

/// Normalizes a single token with the same rules; may return "".
std::string normalize_token(std::string_view raw);

// ---------------------------------------------------------------------------
// Sequence metrics over tokens.
//
// The generic forms take sequence lengths and an `eq(i, j)` predicate so that
// callers can plug in wildcard-aware equality. All are O(n*m) dynamic
// programs with O(m) memory.

template <class Eq>
std::size_t edit_distance_by(std::size_t n, std::size_t m, Eq&& eq) {
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (eq(i - 1, j - 1) ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

template <class Eq>
std::size_t lcs_length_by(std::size_t n, std::size_t m, Eq&& eq) {
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = 0;
    for (std::size_t j = 1; j <= m; ++j)
      cur[j] = eq(i - 1, j - 1) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[m];
}

template <class Eq>
std::size_t longest_common_substring_by(std::size_t n, std::size_t m, Eq&& eq) {
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = eq(i - 1, j - 1) ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b);
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);
std::size_t longest_common_substring(std::span<const std::string> a, std::span<const std::string> b);

inline std::size_t edit_distance(const TokenSeq& a, const TokenSeq& b) { return edit_distance(a.view(), b.view()); }
inline std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) { return lcs_length(a.view(), b.view()); }
inline std::size_t longest_common_substring(const TokenSeq& a, const TokenSeq& b) {
  return longest_common_substring(a.view(), b.view());
}

// ---------------------------------------------------------------------------
// Inverse document frequency.

class IdfError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Smoothed idf: idf(t) = ln((N + 1) / (df(t) + 1)) + 1, unseen tokens get
/// ln(N + 1) + 1.
class IdfTable {
public:
  IdfTable(std::size_t doc_count, std::unordered_map<std::string, std::size_t> df);

  std::size_t doc_count() const noexcept { return doc_count_; }
  const std::unordered_map<std::string, std::size_t>& df() const noexcept { return df_; }
  double default_idf() const noexcept { return default_idf_; }

  double idf(const std::string& token) const;

  /// Quartile bucket 1..4 of a token's idf relative to the vocabulary's idf
  /// distribution; unseen tokens fall in bucket 4.
  int quartile(const std::string& token) const;

  void save(std::ostream& out) const;
  static IdfTable load(std::istream& in);

private:
  std::size_t doc_count_;
  std::unordered_map<std::string, std::size_t> df_;
  double default_idf_;
  double cut_[3] = {0.0, 0.0, 0.0};
};

IdfTable build_idf(std::span<const TokenSeq> corpus);
IdfTable build_idf(std::span<const std::string> documents);
/// One document per line; blank lines are skipped.
IdfTable build_idf(std::istream& corpus);

struct IdfStats {
  double mean_shared = 0.0;
  double max_shared = 0.0;
  double mean_s_only = 0.0;
  double max_s_only = 0.0;
};

/// idf statistics over set(s) ∩ set(c) and set(s) \ set(c). Empty sets give 0.
IdfStats idf_stats(const TokenSeq& s, const TokenSeq& c, const IdfTable& table);

}  // namespace snowclone
