#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "snowclone/text.hpp"

namespace snowclone {

enum class Tag : std::uint8_t { Keep = 0, Wild = 1 };

/// Per-token wildcard decisions, aligned 1:1 with a TokenSeq.
using TagSeq = std::vector<Tag>;

/// Thrown when a pattern would consist of wildcards only.
class DegeneratePatternError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class PatternParseError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct PatternElement {
  bool wildcard = false;
  std::string literal;  // empty for wildcards

  static PatternElement wild() { return {true, {}}; }
  static PatternElement lit(std::string token) { return {false, std::move(token)}; }

  friend bool operator==(const PatternElement&, const PatternElement&) = default;
};

/// Token-level wildcard template such as `* is the new *`.
///
/// Invariants: at least one literal, no two adjacent wildcards. A wildcard
/// matches one or more tokens; matching is anchored at both ends.
class SnowclonePattern {
public:
  explicit SnowclonePattern(std::vector<PatternElement> elements, std::optional<TokenSeq> origin = std::nullopt);

  const std::vector<PatternElement>& elements() const noexcept { return elements_; }
  const std::optional<TokenSeq>& origin() const noexcept { return origin_; }

  std::size_t wildcard_count() const noexcept;
  std::size_t literal_count() const noexcept { return elements_.size() - wildcard_count(); }

  /// Literals and `*` joined by single spaces.
  std::string str() const;
  static SnowclonePattern parse(std::string_view text);

  /// Equality compares elements only.
  friend bool operator==(const SnowclonePattern& a, const SnowclonePattern& b) { return a.elements_ == b.elements_; }

private:
  std::vector<PatternElement> elements_;
  std::optional<TokenSeq> origin_;
};

/// Token range [begin, end) consumed by one wildcard.
struct WildcardBinding {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const WildcardBinding&, const WildcardBinding&) = default;
};

/// Merges wildcard runs without enforcing the at-least-one-literal rule.
std::vector<PatternElement> merged_elements(const TokenSeq& s, const TagSeq& tags);

/// KEEP -> literal, maximal WILD runs -> one wildcard.
SnowclonePattern from_tags(const TokenSeq& s, const TagSeq& tags);

/// Anchored match. On success returns one binding per wildcard, in order;
/// the leftmost-shortest assignment is reported when several exist.
std::optional<std::vector<WildcardBinding>> match(const SnowclonePattern& p, std::span<const std::string> c);

inline bool matches(const SnowclonePattern& p, const TokenSeq& c) { return match(p, c.view()).has_value(); }

/// Recovers a pattern from a seed and observed variants.
///
/// Instances are aligned to the seed in turn by a maximum-match token
/// alignment (ties prefer fewer edits), where only positions still literal
/// may match; what survives every alignment stays literal. If the resulting
/// pattern still fails to match an instance (insertions between adjacent literals, or a wildcard
/// run whose tokens were all deleted), the fewest literals needed to make
/// that instance match are demoted to wildcards.
SnowclonePattern induce_pattern(const TokenSeq& seed, std::span<const TokenSeq> instances);

/// Tags corresponding to `induce_pattern`, aligned with the seed.
TagSeq induce_tags(const TokenSeq& seed, std::span<const TokenSeq> instances);

// ---------------------------------------------------------------------------
// Annotator agreement.

/// One annotator's patterns (1 to 3) for one sentence.
struct AnnotationSet {
  TokenSeq sentence;
  std::vector<TagSeq> patterns;

  void validate() const;
};

/// Fraction of sentences where the two annotators share at least one pattern
/// (compared after wildcard merging).
double exact_match_agreement(std::span<const AnnotationSet> a, std::span<const AnnotationSet> b);

/// Mean over sentences of the best positionwise tag agreement between any
/// pattern of `a` and any pattern of `b`.
double relaxed_match_agreement(std::span<const AnnotationSet> a, std::span<const AnnotationSet> b);

}  // namespace snowclone
