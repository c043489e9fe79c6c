#include "snowclone/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "snowclone/random.hpp"

namespace snowclone {

std::vector<std::string> shingle(const TokenSeq& s) {
  std::vector<std::string> out;
  out.reserve(2 * s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.push_back(s[i]);
    if (i + 1 < s.size()) out.push_back(s[i] + "_" + s[i + 1]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct HashFamily {
  std::vector<std::uint64_t> mul, add;
};

HashFamily make_family(std::size_t k, std::uint64_t seed) {
  HashFamily f;
  f.mul.resize(k);
  f.add.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    f.mul[i] = mix64(seed ^ (0x243f6a8885a308d3ULL + 2 * i)) | 1ULL;
    f.add[i] = mix64(seed ^ (0x13198a2e03707344ULL + 2 * i + 1));
  }
  return f;
}

}  // namespace

MinHashSignature minhash_signature(std::span<const std::string> shingles, std::size_t k, std::uint64_t hash_seed) {
  if (shingles.empty()) throw IndexError("cannot sign an empty shingle set");
  if (k == 0) throw IndexError("signature length must be positive");
  const HashFamily fam = make_family(k, hash_seed);
  MinHashSignature sig;
  sig.hash_seed = hash_seed;
  sig.values.assign(k, std::numeric_limits<std::uint64_t>::max());
  for (const auto& sh : shingles) {
    const std::uint64_t x = mix64(fnv1a(sh));
    for (std::size_t i = 0; i < k; ++i) sig.values[i] = std::min(sig.values[i], fam.mul[i] * x + fam.add[i]);
  }
  return sig;
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.k() != b.k() || a.hash_seed != b.hash_seed) throw IndexError("signatures were built with different parameters");
  if (a.k() == 0) throw IndexError("empty signature");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.k(); ++i) same += a.values[i] == b.values[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.k());
}

double exact_jaccard(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

void LshParams::validate() const {
  if (k == 0 || bands == 0 || rows == 0) throw IndexError("LSH parameters must be positive");
  if (bands * rows != k)
    throw IndexError("LSH bands*rows (" + std::to_string(bands) + "*" + std::to_string(rows) + ") must equal k (" +
                     std::to_string(k) + ")");
}

double LshParams::threshold() const {
  return std::pow(1.0 / static_cast<double>(bands), 1.0 / static_cast<double>(rows));
}

double LshParams::collision_probability(double j) const {
  return 1.0 - std::pow(1.0 - std::pow(j, static_cast<double>(rows)), static_cast<double>(bands));
}

std::uint64_t LshIndex::band_key(const MinHashSignature& sig, std::size_t band) const {
  std::uint64_t h = mix64(0x6a09e667f3bcc909ULL ^ band);
  for (std::size_t r = 0; r < params_.rows; ++r) h = mix64(h ^ sig.values[band * params_.rows + r]);
  return h;
}

void LshIndex::insert(std::size_t entry) {
  for (std::size_t band = 0; band < params_.bands; ++band)
    buckets_[band][band_key(entries_[entry].signature, band)].push_back(entry);
}

LshIndex LshIndex::build_from_signatures(std::span<const std::pair<std::string, MinHashSignature>> seeds,
                                         const LshParams& params) {
  params.validate();
  LshIndex ix;
  ix.params_ = params;
  ix.buckets_.resize(params.bands);
  std::unordered_set<std::string> seen;
  for (const auto& [id, sig] : seeds) {
    if (id.empty()) throw IndexError("seed id must be non-empty");
    if (!seen.insert(id).second) throw IndexError("duplicate seed id '" + id + "'");
    if (sig.k() != params.k || sig.hash_seed != params.hash_seed)
      throw IndexError("signature for '" + id + "' does not match index parameters");
    ix.entries_.push_back({id, TokenSeq{}, sig});
    ix.insert(ix.entries_.size() - 1);
  }
  return ix;
}

LshIndex LshIndex::build(std::span<const std::pair<std::string, TokenSeq>> seeds, const LshParams& params) {
  params.validate();
  std::vector<std::pair<std::string, MinHashSignature>> sigs;
  sigs.reserve(seeds.size());
  for (const auto& [id, tokens] : seeds) {
    if (tokens.empty()) throw IndexError("seed '" + id + "' has no tokens");
    const auto sh = shingle(tokens);
    sigs.emplace_back(id, minhash_signature(sh, params.k, params.hash_seed));
  }
  LshIndex ix = build_from_signatures(sigs, params);
  for (std::size_t i = 0; i < seeds.size(); ++i) ix.entries_[i].tokens = seeds[i].second;
  return ix;
}

MinHashSignature LshIndex::signature_of(const TokenSeq& s) const {
  const auto sh = shingle(s);
  return minhash_signature(sh, params_.k, params_.hash_seed);
}

std::vector<std::size_t> LshIndex::query_signature(const MinHashSignature& sig) const {
  if (sig.k() != params_.k || sig.hash_seed != params_.hash_seed)
    throw IndexError("query signature does not match index parameters");
  std::vector<std::size_t> hits;
  for (std::size_t band = 0; band < params_.bands; ++band) {
    const auto it = buckets_[band].find(band_key(sig, band));
    if (it != buckets_[band].end()) hits.insert(hits.end(), it->second.begin(), it->second.end());
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

std::vector<std::string> LshIndex::query(const TokenSeq& c) const {
  if (c.empty()) return {};
  std::vector<std::string> ids;
  for (const std::size_t e : query_signature(signature_of(c))) ids.push_back(entries_[e].id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::size_t LshIndex::bucket_memberships(std::size_t entry) const {
  std::size_t n = 0;
  for (const auto& band : buckets_)
    for (const auto& [key, members] : band) n += static_cast<std::size_t>(std::count(members.begin(), members.end(), entry));
  return n;
}

}  // namespace snowclone
