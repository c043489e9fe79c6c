#include "support.hpp"

#include <algorithm>
#include <functional>

using namespace snowclone;

namespace testing {

TokenSeq seq(const std::string& text) { return tokenize(text); }
TokenSeq seq(const Tokens& tokens) { return TokenSeq::from_tokens(tokens); }

TagSeq tags(const std::string& bits) {
  TagSeq out;
  for (char c : bits) out.push_back(c == '1' ? Tag::Wild : Tag::Keep);
  return out;
}

Tokens random_tokens(Rng& rng, std::size_t max_len, std::size_t vocab, std::size_t min_len) {
  const auto n = rng.between(min_len, max_len);
  Tokens out;
  for (std::uint64_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(rng.below(vocab)));
  return out;
}

std::size_t oracle_edit(const Tokens& a, const Tokens& b) {
  std::function<std::size_t(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    const std::size_t sub = rec(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    return std::min({sub, rec(i + 1, j) + 1, rec(i, j + 1) + 1});
  };
  return rec(0, 0);
}

namespace {

bool is_subsequence(const Tokens& sub, const Tokens& of) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < of.size() && j < sub.size(); ++i)
    if (of[i] == sub[j]) ++j;
  return j == sub.size();
}

}  // namespace

std::size_t oracle_lcs(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (mask & (1u << i)) sub.push_back(a[i]);
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

std::size_t oracle_substr(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      std::size_t k = 0;
      while (i + k < a.size() && j + k < b.size() && a[i + k] == b[j + k]) ++k;
      best = std::max(best, k);
    }
  return best;
}

int oracle_min_wildcards(const TokenSeq& seed, const std::vector<TokenSeq>& instances) {
  int best = -1;
  const std::size_t n = seed.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (mask == (1u << n) - 1) continue;
    TagSeq t(n, Tag::Keep);
    int wild = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        t[i] = Tag::Wild;
        ++wild;
      }
    if (best >= 0 && wild >= best) continue;
    const SnowclonePattern p = from_tags(seed, t);
    if (std::all_of(instances.begin(), instances.end(), [&](const TokenSeq& c) { return matches(p, c); })) best = wild;
  }
  return best;
}

TokenSeq substitute_wild(const TokenSeq& s, const TagSeq& t, Rng& rng) {
  Tokens out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (t[i] == Tag::Keep) {
      out.push_back(s[i]);
      continue;
    }
    if (i > 0 && t[i - 1] == Tag::Wild) continue;
    const auto n = rng.between(1, 3);
    for (std::uint64_t k = 0; k < n; ++k) out.push_back("x" + std::to_string(rng.below(50)));
  }
  return TokenSeq::from_tokens(out);
}

SynthModels train_synth(const SynthConfig& cfg, std::uint64_t split_seed, std::uint64_t train_seed) {
  SynthModels m;
  m.data = synth_generate(cfg);
  const SplitSpec spec{.split_seed = split_seed};
  m.tag_split = group_split(std::span<const TaggedExample>(m.data.tagged), spec);
  m.pair_split = group_split(std::span<const ReferencePair>(m.data.pairs), spec);
  const auto corpus = m.data.corpus();
  m.idf = std::make_shared<const IdfTable>(build_idf(std::span<const std::string>(corpus)));
  m.tagger = std::make_unique<TaggerModel>(
      train_tagger(m.tag_split.train, 10, train_seed, TaggerTrainOptions{.config = {}, .idf = m.idf}));
  std::vector<ReferencePair> det_train = m.pair_split.train;
  det_train.insert(det_train.end(), m.pair_split.dev.begin(), m.pair_split.dev.end());
  m.detector = std::make_unique<DetectorModel>(train_detector(det_train, *m.tagger, *m.idf, train_seed));
  for (const auto& p : m.data.patterns) m.seeds.push_back({p.id, p.seed, "Film " + p.id, ""});
  return m;
}

}  // namespace testing
