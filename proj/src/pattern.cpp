#include "snowclone/pattern.hpp"

#include <algorithm>
#include <limits>

namespace snowclone {

SnowclonePattern::SnowclonePattern(std::vector<PatternElement> elements, std::optional<TokenSeq> origin)
    : elements_(std::move(elements)), origin_(std::move(origin)) {
  bool any_literal = false;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& e = elements_[i];
    if (e.wildcard) {
      if (i > 0 && elements_[i - 1].wildcard) throw std::invalid_argument("pattern has adjacent wildcards");
    } else {
      if (e.literal.empty() || normalize_token(e.literal) != e.literal)
        throw std::invalid_argument("pattern literal is not a normalized token: '" + e.literal + "'");
      any_literal = true;
    }
  }
  if (!any_literal) throw DegeneratePatternError("pattern has no literal token");
}

std::size_t SnowclonePattern::wildcard_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(elements_.begin(), elements_.end(), [](const auto& e) { return e.wildcard; }));
}

std::string SnowclonePattern::str() const {
  std::string out;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (i) out.push_back(' ');
    out += elements_[i].wildcard ? std::string("*") : elements_[i].literal;
  }
  return out;
}

SnowclonePattern SnowclonePattern::parse(std::string_view text) {
  std::vector<PatternElement> elements;
  std::size_t pos = 0;
  while (true) {
    const auto space = text.find(' ', pos);
    const std::string_view piece = text.substr(pos, space == std::string_view::npos ? std::string_view::npos : space - pos);
    if (piece.empty()) throw PatternParseError("pattern text must be single-space separated: '" + std::string(text) + "'");
    if (piece == "*") {
      if (!elements.empty() && elements.back().wildcard)
        throw PatternParseError("adjacent wildcards in pattern text: '" + std::string(text) + "'");
      elements.push_back(PatternElement::wild());
    } else {
      if (normalize_token(piece) != piece) throw PatternParseError("literal '" + std::string(piece) + "' is not normalized");
      elements.push_back(PatternElement::lit(std::string(piece)));
    }
    if (space == std::string_view::npos) break;
    pos = space + 1;
  }
  try {
    return SnowclonePattern(std::move(elements));
  } catch (const DegeneratePatternError& e) {
    throw PatternParseError(e.what());
  }
}

std::vector<PatternElement> merged_elements(const TokenSeq& s, const TagSeq& tags) {
  if (s.size() != tags.size())
    throw std::invalid_argument("tag sequence length " + std::to_string(tags.size()) + " does not match sentence length " +
                                std::to_string(s.size()));
  std::vector<PatternElement> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == Tag::Wild) {
      if (out.empty() || !out.back().wildcard) out.push_back(PatternElement::wild());
    } else {
      out.push_back(PatternElement::lit(s[i]));
    }
  }
  return out;
}

SnowclonePattern from_tags(const TokenSeq& s, const TagSeq& tags) {
  auto elements = merged_elements(s, tags);
  if (std::none_of(elements.begin(), elements.end(), [](const auto& e) { return !e.wildcard; }))
    throw DegeneratePatternError("all tokens tagged as wildcards");
  return SnowclonePattern(std::move(elements), s);
}

std::optional<std::vector<WildcardBinding>> match(const SnowclonePattern& p, std::span<const std::string> c) {
  const auto& el = p.elements();
  const std::size_t P = el.size(), N = c.size();
  // ok[e][i]: elements[e..] match tokens[i..]; tail[e][i]: ok[e][j] for some j >= i.
  std::vector<std::vector<char>> ok(P + 1, std::vector<char>(N + 1, 0));
  std::vector<std::vector<char>> tail(P + 1, std::vector<char>(N + 2, 0));
  ok[P][N] = 1;
  for (std::size_t e = P + 1; e-- > 0;) {
    if (e < P) {
      for (std::size_t i = 0; i <= N; ++i) {
        if (el[e].wildcard)
          ok[e][i] = (i + 1 <= N) && tail[e + 1][i + 1];
        else
          ok[e][i] = i < N && c[i] == el[e].literal && ok[e + 1][i + 1];
      }
    }
    for (std::size_t i = N + 1; i-- > 0;) tail[e][i] = ok[e][i] || tail[e][i + 1];
  }
  if (!ok[0][0]) return std::nullopt;

  std::vector<WildcardBinding> bindings;
  std::size_t i = 0;
  for (std::size_t e = 0; e < P; ++e) {
    if (el[e].wildcard) {
      std::size_t j = i + 1;
      while (!ok[e + 1][j]) ++j;
      bindings.push_back({i, j});
      i = j;
    } else {
      ++i;
    }
  }
  return bindings;
}

namespace {

// Allowed seed positions that a maximum-match alignment (ties: fewest edits)
// aligns as exact matches against `inst`.
std::vector<char> aligned_matches(const TokenSeq& seed, const TokenSeq& inst, const std::vector<char>& allowed) {
  const std::size_t n = seed.size(), m = inst.size();
  struct Cell {
    std::size_t cost;
    std::size_t matches;
    char move;  // 'd' diagonal, 'u' delete seed token, 'l' insert instance token
  };
  auto better = [](std::size_t c1, std::size_t m1, const Cell& cur) {
    return m1 > cur.matches || (m1 == cur.matches && c1 < cur.cost);
  };
  std::vector<std::vector<Cell>> t(n + 1, std::vector<Cell>(m + 1));
  t[0][0] = {0, 0, 0};
  for (std::size_t i = 1; i <= n; ++i) t[i][0] = {i, 0, 'u'};
  for (std::size_t j = 1; j <= m; ++j) t[0][j] = {j, 0, 'l'};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const bool eq = allowed[i - 1] && seed[i - 1] == inst[j - 1];
      Cell best{t[i - 1][j - 1].cost + (eq ? 0 : 1), t[i - 1][j - 1].matches + (eq ? 1 : 0), 'd'};
      if (better(t[i - 1][j].cost + 1, t[i - 1][j].matches, best)) best = {t[i - 1][j].cost + 1, t[i - 1][j].matches, 'u'};
      if (better(t[i][j - 1].cost + 1, t[i][j - 1].matches, best)) best = {t[i][j - 1].cost + 1, t[i][j - 1].matches, 'l'};
      t[i][j] = best;
    }
  }
  std::vector<char> matched(n, 0);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    switch (t[i][j].move) {
      case 'd':
        if (allowed[i - 1] && seed[i - 1] == inst[j - 1]) matched[i - 1] = 1;
        --i;
        --j;
        break;
      case 'u':
        --i;
        break;
      default:
        --j;
        break;
    }
  }
  return matched;
}

// Keeps the largest subset of the currently-literal seed positions such that
// the resulting tag sequence matches `inst`; every other position becomes WILD.
TagSeq repair_for_instance(const TokenSeq& seed, const TagSeq& tags, const TokenSeq& inst) {
  const std::size_t n = seed.size(), m = inst.size();
  constexpr int kNone = std::numeric_limits<int>::min() / 2;
  // state: 0 = after a literal (or at start), 1 = open wildcard run with no
  // token consumed yet, 2 = open wildcard run that consumed >= 1 token.
  std::vector<int> best((n + 1) * (m + 1) * 3, kNone);
  auto at = [&](std::size_t i, std::size_t j, int p) -> int& { return best[(i * (m + 1) + j) * 3 + p]; };

  for (std::size_t i = n + 1; i-- > 0;) {
    for (std::size_t j = m + 1; j-- > 0;) {
      for (int p = 0; p < 3; ++p) {
        int v = kNone;
        if (i == n && j == m && p != 1) v = 0;
        if (i < n && tags[i] == Tag::Keep && j < m && p != 1 && seed[i] == inst[j] && at(i + 1, j + 1, 0) != kNone)
          v = std::max(v, 1 + at(i + 1, j + 1, 0));
        if (i < n) v = std::max(v, at(i + 1, j, p == 0 ? 1 : p));
        if (p != 0 && j < m) v = std::max(v, at(i, j + 1, 2));
        at(i, j, p) = v;
      }
    }
  }
  TagSeq out(n, Tag::Wild);
  if (at(0, 0, 0) == kNone) return out;  // only when the instance is empty

  std::size_t i = 0, j = 0;
  int p = 0;
  while (i < n || j < m) {
    const int v = at(i, j, p);
    if (i < n && tags[i] == Tag::Keep && j < m && p != 1 && seed[i] == inst[j] && at(i + 1, j + 1, 0) != kNone &&
        1 + at(i + 1, j + 1, 0) == v) {
      out[i] = Tag::Keep;
      ++i;
      ++j;
      p = 0;
    } else if (i < n && at(i + 1, j, p == 0 ? 1 : p) == v) {
      p = p == 0 ? 1 : p;
      ++i;
    } else {
      ++j;
      p = 2;
    }
  }
  return out;
}

}  // namespace

TagSeq induce_tags(const TokenSeq& seed, std::span<const TokenSeq> instances) {
  if (instances.empty()) throw std::invalid_argument("induce_pattern needs at least one instance");
  if (seed.empty()) throw std::invalid_argument("induce_pattern: empty seed");
  for (const auto& inst : instances)
    if (inst.empty()) throw std::invalid_argument("induce_pattern: empty instance");

  std::vector<char> keep(seed.size(), 1);
  for (const auto& inst : instances) {
    const auto m = aligned_matches(seed, inst, keep);
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = keep[i] && m[i];
  }
  TagSeq tags(seed.size());
  for (std::size_t i = 0; i < tags.size(); ++i) tags[i] = keep[i] ? Tag::Keep : Tag::Wild;

  // Demoting a literal to a wildcard never breaks an existing match, so one
  // pass in instance order suffices.
  for (const auto& inst : instances) {
    const auto elements = merged_elements(seed, tags);
    if (std::none_of(elements.begin(), elements.end(), [](const auto& e) { return !e.wildcard; })) break;
    if (match(SnowclonePattern(elements), inst.view())) continue;
    tags = repair_for_instance(seed, tags, inst);
  }
  return tags;
}

SnowclonePattern induce_pattern(const TokenSeq& seed, std::span<const TokenSeq> instances) {
  return from_tags(seed, induce_tags(seed, instances));
}

// ---------------------------------------------------------------------------

void AnnotationSet::validate() const {
  if (patterns.empty() || patterns.size() > 3)
    throw std::invalid_argument("annotation set must hold 1 to 3 patterns, got " + std::to_string(patterns.size()));
  for (const auto& t : patterns)
    if (t.size() != sentence.size()) throw std::invalid_argument("annotation tags do not match sentence length");
}

namespace {

void check_aligned(std::span<const AnnotationSet> a, std::span<const AnnotationSet> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("annotators labelled different numbers of sentences (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  if (a.empty()) throw std::invalid_argument("no sentences to compare");
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i].validate();
    b[i].validate();
    if (a[i].sentence.size() != b[i].sentence.size())
      throw std::invalid_argument("sentence " + std::to_string(i) + " differs in length between annotators");
  }
}

}  // namespace

double exact_match_agreement(std::span<const AnnotationSet> a, std::span<const AnnotationSet> b) {
  check_aligned(a, b);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    bool shared = false;
    for (const auto& ta : a[s].patterns) {
      const auto ea = merged_elements(a[s].sentence, ta);
      for (const auto& tb : b[s].patterns) {
        if (ea == merged_elements(b[s].sentence, tb)) {
          shared = true;
          break;
        }
      }
      if (shared) break;
    }
    hits += shared ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(a.size());
}

double relaxed_match_agreement(std::span<const AnnotationSet> a, std::span<const AnnotationSet> b) {
  check_aligned(a, b);
  double total = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    const std::size_t len = a[s].sentence.size();
    std::size_t best = 0;
    for (const auto& ta : a[s].patterns) {
      for (const auto& tb : b[s].patterns) {
        std::size_t same = 0;
        for (std::size_t k = 0; k < len; ++k) same += ta[k] == tb[k] ? 1 : 0;
        best = std::max(best, same);
      }
    }
    total += len ? static_cast<double>(best) / static_cast<double>(len) : 1.0;
  }
  return total / static_cast<double>(a.size());
}

}  // namespace snowclone
