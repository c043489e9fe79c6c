#pragma once

#include <memory>
#include <string>
#include <vector>

#include "snowclone/datasets.hpp"
#include "snowclone/detector.hpp"
#include "snowclone/pattern.hpp"
#include "snowclone/random.hpp"
#include "snowclone/service.hpp"
#include "snowclone/tagger.hpp"
#include "snowclone/text.hpp"

namespace testing {

using Tokens = std::vector<std::string>;

snowclone::TokenSeq seq(const std::string& text);
snowclone::TokenSeq seq(const Tokens& tokens);
snowclone::TagSeq tags(const std::string& bits);  // "0011" -> KEEP KEEP WILD WILD

Tokens random_tokens(snowclone::Rng& rng, std::size_t max_len, std::size_t vocab, std::size_t min_len = 0);

// Exponential reference implementations.
std::size_t oracle_edit(const Tokens& a, const Tokens& b);
std::size_t oracle_lcs(const Tokens& a, const Tokens& b);
std::size_t oracle_substr(const Tokens& a, const Tokens& b);
// Fewest-wildcard tagging of `seed` whose pattern matches every instance;
// returns the wildcard count or -1 if none exists.
int oracle_min_wildcards(const snowclone::TokenSeq& seed, const std::vector<snowclone::TokenSeq>& instances);

// Replaces every WILD run of `s` with 1-3 fresh tokens.
snowclone::TokenSeq substitute_wild(const snowclone::TokenSeq& s, const snowclone::TagSeq& t, snowclone::Rng& rng);

struct SynthModels {
  snowclone::SynthData data;
  snowclone::Split<snowclone::TaggedExample> tag_split;
  snowclone::Split<snowclone::ReferencePair> pair_split;
  std::shared_ptr<const snowclone::IdfTable> idf;
  std::unique_ptr<snowclone::TaggerModel> tagger;
  std::unique_ptr<snowclone::DetectorModel> detector;
  std::vector<snowclone::SeedEntry> seeds;
};

// Generates synthetic data, splits it by group and trains both models on the
// train portions.
SynthModels train_synth(const snowclone::SynthConfig& cfg = {}, std::uint64_t split_seed = 11,
                        std::uint64_t train_seed = 3);

}  // namespace testing
