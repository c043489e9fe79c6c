#include "snowclone/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace snowclone {

using nlohmann::json;

namespace {

std::vector<std::string> string_array(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array()) throw std::invalid_argument(std::string("missing array '") + field + "'");
  std::vector<std::string> out;
  for (const auto& v : j[field]) {
    if (!v.is_string()) throw std::invalid_argument(std::string("'") + field + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string string_field(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) throw std::invalid_argument(std::string("missing string '") + field + "'");
  std::string s = j[field].get<std::string>();
  if (s.empty()) throw std::invalid_argument(std::string("'") + field + "' is empty");
  return s;
}

int binary_value(const json& v, const char* what) {
  if (!v.is_number_integer()) throw std::invalid_argument(std::string(what) + " must be 0 or 1");
  const auto x = v.get<long long>();
  if (x != 0 && x != 1) throw std::invalid_argument(std::string(what) + " must be 0 or 1, got " + std::to_string(x));
  return static_cast<int>(x);
}

TokenSeq retokenize(const std::vector<std::string>& raw) {
  std::string text;
  for (const auto& t : raw) {
    if (!text.empty()) text.push_back(' ');
    text += t;
  }
  return tokenize(text);
}

template <class T, class Parse>
LoadResult<T> read_ndjson(std::istream& in, bool strict, Parse parse) {
  LoadResult<T> result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      result.items.push_back(parse(json::parse(line)));
    } catch (const std::exception& e) {
      if (strict) throw DatasetError(lineno, e.what());
      result.rejected.push_back({lineno, e.what()});
    }
  }
  if (result.items.empty() && result.rejected.empty()) result.warnings.emplace_back("dataset is empty");
  if (!result.rejected.empty())
    result.warnings.push_back(std::to_string(result.rejected.size()) + " record(s) rejected");
  return result;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(0, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

LoadResult<TaggedExample> read_pattern_dataset(std::istream& in, bool strict) {
  return read_ndjson<TaggedExample>(in, strict, [](const json& j) {
    if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
    const auto raw = string_array(j, "tokens");
    if (!j.contains("tags") || !j["tags"].is_array()) throw std::invalid_argument("missing array 'tags'");
    const auto& tags = j["tags"];
    if (tags.size() != raw.size())
      throw std::invalid_argument("tags length " + std::to_string(tags.size()) + " does not match tokens length " +
                                  std::to_string(raw.size()));
    std::vector<std::string> tokens;
    TagSeq gold;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const int t = binary_value(tags[i], "tag");
      std::string norm = normalize_token(raw[i]);
      if (norm.empty()) continue;
      tokens.push_back(std::move(norm));
      gold.push_back(t ? Tag::Wild : Tag::Keep);
    }
    if (tokens.empty()) throw std::invalid_argument("record has no usable tokens");
    TaggedExample ex{TokenSeq::from_tokens(std::move(tokens)), std::move(gold), string_field(j, "group")};
    ex.validate();
    return ex;
  });
}

LoadResult<TaggedExample> load_pattern_dataset(const std::filesystem::path& path, bool strict) {
  auto in = open_or_throw(path);
  return read_pattern_dataset(in, strict);
}

LoadResult<ReferencePair> read_reference_dataset(std::istream& in, bool strict) {
  return read_ndjson<ReferencePair>(in, strict, [](const json& j) {
    if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
    if (!j.contains("label")) throw std::invalid_argument("missing 'label'");
    ReferencePair p;
    p.seed = retokenize(string_array(j, "seed"));
    p.candidate = retokenize(string_array(j, "candidate"));
    p.label = binary_value(j["label"], "label") ? Label::Reference : Label::NonReference;
    p.seed_id = string_field(j, "seed_id");
    p.validate();
    return p;
  });
}

LoadResult<ReferencePair> load_reference_dataset(const std::filesystem::path& path, bool strict) {
  auto in = open_or_throw(path);
  return read_reference_dataset(in, strict);
}

void write_pattern_dataset(std::ostream& out, std::span<const TaggedExample> items) {
  for (const auto& ex : items) {
    json tags = json::array();
    for (const Tag t : ex.gold) tags.push_back(t == Tag::Wild ? 1 : 0);
    json j;
    j["tokens"] = ex.sentence.tokens();
    j["tags"] = std::move(tags);
    j["group"] = ex.group_id;
    out << j.dump() << '\n';
  }
}

void write_reference_dataset(std::ostream& out, std::span<const ReferencePair> items) {
  for (const auto& p : items) {
    json j;
    j["seed"] = p.seed.tokens();
    j["candidate"] = p.candidate.tokens();
    j["label"] = p.label == Label::Reference ? 1 : 0;
    j["seed_id"] = p.seed_id;
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------

void SplitSpec::validate() const {
  if (!(train > 0.0 && dev > 0.0 && test > 0.0)) throw std::invalid_argument("split ratios must be positive");
  if (std::abs(train + dev + test - 1.0) > 1e-9) throw std::invalid_argument("split ratios must sum to 1");
}

SplitIndices group_split(std::span<const std::string> group_ids, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::string> groups;
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < group_ids.size(); ++i) {
    auto [it, inserted] = members.try_emplace(group_ids[i]);
    if (inserted) groups.push_back(group_ids[i]);
    it->second.push_back(i);
  }
  if (groups.size() < 3)
    throw std::invalid_argument("group split needs at least 3 distinct groups, got " + std::to_string(groups.size()));

  Rng rng(spec.split_seed);
  rng.shuffle(groups);

  const double n = static_cast<double>(group_ids.size());
  const double target[3] = {spec.train * n, spec.dev * n, spec.test * n};
  double filled[3] = {0.0, 0.0, 0.0};
  SplitIndices out;
  std::vector<std::size_t>* parts[3] = {&out.train, &out.dev, &out.test};
  for (const auto& g : groups) {
    int pick = 0;
    for (int s = 1; s < 3; ++s)
      if (target[s] - filled[s] > target[pick] - filled[pick]) pick = s;
    const auto& idx = members.at(g);
    parts[pick]->insert(parts[pick]->end(), idx.begin(), idx.end());
    filled[pick] += static_cast<double>(idx.size());
  }
  for (auto* p : parts) std::sort(p->begin(), p->end());
  return out;
}

namespace {

template <class T, class GroupOf>
Split<T> split_items(std::span<const T> items, const SplitSpec& spec, GroupOf group_of) {
  std::vector<std::string> ids;
  ids.reserve(items.size());
  for (const auto& it : items) ids.push_back(group_of(it));
  const SplitIndices idx = group_split(ids, spec);
  Split<T> out;
  for (const auto k : idx.train) out.train.push_back(items[k]);
  for (const auto k : idx.dev) out.dev.push_back(items[k]);
  for (const auto k : idx.test) out.test.push_back(items[k]);
  return out;
}

}  // namespace

Split<TaggedExample> group_split(std::span<const TaggedExample> items, const SplitSpec& spec) {
  return split_items(items, spec, [](const TaggedExample& e) { return e.group_id; });
}

Split<ReferencePair> group_split(std::span<const ReferencePair> items, const SplitSpec& spec) {
  return split_items(items, spec, [](const ReferencePair& p) { return p.seed_id; });
}

// ---------------------------------------------------------------------------

void SynthConfig::validate() const {
  if (n_patterns == 0 || instances_per_pattern == 0 || pairs_per_pattern == 0 || scaffold_vocab == 0 || slot_vocab == 0)
    throw std::invalid_argument("synthetic config counts must be positive");
  if (min_length < 3 || max_length < min_length) throw std::invalid_argument("pattern lengths must satisfy 3 <= min <= max");
  if (max_slots == 0) throw std::invalid_argument("max_slots must be positive");
  if (scaffold_vocab < max_length) throw std::invalid_argument("scaffold vocabulary smaller than a pattern");
  if (!(negative_rate >= 0.0 && negative_rate < 1.0)) throw std::invalid_argument("negative_rate must be in [0, 1)");
  if (n_patterns < 2 && negative_rate > 0.0) throw std::invalid_argument("negatives need at least two patterns");
}

std::vector<std::string> SynthData::corpus() const {
  std::vector<std::string> out;
  for (const auto& p : patterns) out.push_back(p.seed.joined());
  for (const auto& ex : tagged) out.push_back(ex.sentence.joined());
  for (const auto& p : pairs)
    if (p.label == Label::NonReference) out.push_back(p.candidate.joined());
  return out;
}

namespace {

std::vector<std::string> make_words(std::size_t count, Rng& rng, std::unordered_set<std::string>& taken) {
  static const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "ch", "sh", "br", "tr"};
  static const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  std::vector<std::string> out;
  while (out.size() < count) {
    const auto syllables = rng.between(2, 3);
    std::string w;
    for (std::uint64_t s = 0; s < syllables; ++s) {
      w += kOnsets[rng.below(std::size(kOnsets))];
      w += kVowels[rng.below(std::size(kVowels))];
    }
    if (is_stopword(w) || !taken.insert(w).second) continue;
    out.push_back(std::move(w));
  }
  return out;
}

SynthPattern make_pattern(std::size_t idx, const SynthConfig& cfg, std::span<const std::string> scaffold_words, Rng& rng) {
  const auto len = static_cast<std::size_t>(rng.between(cfg.min_length, cfg.max_length));
  // Slots are non-adjacent and leave at least two scaffold words.
  const std::size_t max_slots = std::min(cfg.max_slots, (len - 1) / 2);
  const auto n_slots = static_cast<std::size_t>(rng.between(1, std::max<std::size_t>(1, max_slots)));
  std::vector<char> slot(len, 0);
  std::size_t placed = 0, attempts = 0;
  while (placed < n_slots) {
    if (++attempts % 256 == 0) {
      std::fill(slot.begin(), slot.end(), 0);
      placed = 0;
    }
    const auto pos = static_cast<std::size_t>(rng.below(len));
    if (slot[pos] || (pos > 0 && slot[pos - 1]) || (pos + 1 < len && slot[pos + 1])) continue;
    slot[pos] = 1;
    ++placed;
  }
  std::vector<std::size_t> pick(scaffold_words.size());
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  SynthPattern p;
  p.id = "p" + std::to_string(idx);
  for (std::size_t i = 0, w = 0; i < len; ++i) {
    if (slot[i]) {
      p.scaffold.emplace_back();
    } else {
      // Partial Fisher-Yates keeps scaffold words distinct within a pattern.
      const auto j = w + static_cast<std::size_t>(rng.below(pick.size() - w));
      std::swap(pick[w], pick[j]);
      p.scaffold.push_back(scaffold_words[pick[w++]]);
    }
  }
  return p;
}

TokenSeq shuffled_distractor(const TokenSeq& seed, Rng& rng, bool& ok) {
  std::vector<std::string> toks = seed.tokens();
  const std::size_t need = (seed.size() + 1) / 2;
  for (int attempt = 0; attempt < 20; ++attempt) {
    rng.shuffle(toks);
    TokenSeq cand = TokenSeq::from_tokens(toks);
    if (edit_distance(seed, cand) >= need) {
      ok = true;
      return cand;
    }
  }
  ok = false;
  return seed;
}

}  // namespace

TaggedExample instantiate(const SynthPattern& p, std::span<const std::string> slot_words, Rng& rng) {
  std::vector<std::string> tokens;
  TagSeq tags;
  for (const auto& w : p.scaffold) {
    if (!w.empty()) {
      tokens.push_back(w);
      tags.push_back(Tag::Keep);
      continue;
    }
    const std::size_t fill = rng.bernoulli(0.25) ? 2 : 1;
    for (std::size_t f = 0; f < fill; ++f) {
      tokens.push_back(slot_words[rng.below(slot_words.size())]);
      tags.push_back(Tag::Wild);
    }
  }
  return {TokenSeq::from_tokens(std::move(tokens)), std::move(tags), p.id};
}

SynthData synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.rng_seed);
  SynthData data;
  std::unordered_set<std::string> taken;
  data.scaffold_words = make_words(cfg.scaffold_vocab, rng, taken);
  data.slot_words = make_words(cfg.slot_vocab, rng, taken);

  for (std::size_t i = 0; i < cfg.n_patterns; ++i) {
    SynthPattern p = make_pattern(i, cfg, data.scaffold_words, rng);
    p.seed = instantiate(p, data.slot_words, rng).sentence;
    data.patterns.push_back(std::move(p));
  }
  for (const auto& p : data.patterns)
    for (std::size_t k = 0; k < cfg.instances_per_pattern; ++k) data.tagged.push_back(instantiate(p, data.slot_words, rng));

  const auto n_neg = static_cast<std::size_t>(std::llround(cfg.negative_rate * static_cast<double>(cfg.pairs_per_pattern)));
  const std::size_t n_pos = cfg.pairs_per_pattern - n_neg;
  for (std::size_t i = 0; i < data.patterns.size(); ++i) {
    const auto& p = data.patterns[i];
    std::vector<ReferencePair> group;
    for (std::size_t k = 0; k < n_pos; ++k) {
      TokenSeq cand = k == 0 ? p.seed : instantiate(p, data.slot_words, rng).sentence;
      group.push_back({p.seed, std::move(cand), Label::Reference, p.id});
    }
    for (std::size_t k = 0; k < n_neg; ++k) {
      bool ok = false;
      TokenSeq cand;
      if (k % 2 == 1) cand = shuffled_distractor(p.seed, rng, ok);
      if (!ok) {
        auto other = static_cast<std::size_t>(rng.below(data.patterns.size() - 1));
        if (other >= i) ++other;
        cand = instantiate(data.patterns[other], data.slot_words, rng).sentence;
      }
      group.push_back({p.seed, std::move(cand), Label::NonReference, p.id});
    }
    rng.shuffle(group);
    for (auto& g : group) data.pairs.push_back(std::move(g));
  }
  return data;
}

}  // namespace snowclone
