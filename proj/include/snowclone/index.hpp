#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "snowclone/text.hpp"

namespace snowclone {

/// Word unigrams plus `a_b` bigrams, sorted and deduplicated.
std::vector<std::string> shingle(const TokenSeq& s);

class IndexError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct MinHashSignature {
  std::vector<std::uint64_t> values;
  std::uint64_t hash_seed = 0;

  std::size_t k() const noexcept { return values.size(); }
  friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;
};

/// k seeded 64-bit multiply-add hashes over the shingles' base hashes;
/// slot i holds the minimum of hash i.
MinHashSignature minhash_signature(std::span<const std::string> shingles, std::size_t k, std::uint64_t hash_seed);

/// Fraction of agreeing slots. Signatures must share k and hash_seed.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

/// Exact Jaccard of two sorted, deduplicated sets.
double exact_jaccard(std::span<const std::string> a, std::span<const std::string> b);

struct LshParams {
  std::size_t k = 128;
  std::size_t bands = 64;
  std::size_t rows = 2;
  std::uint64_t hash_seed = 0x5eed5eedULL;

  void validate() const;
  /// Similarity at which collision probability 1-(1-J^r)^b crosses ~0.5,
  /// approximated as (1/b)^(1/r).
  double threshold() const;
  /// Probability that a pair with Jaccard j shares at least one band.
  double collision_probability(double j) const;
};

/// Banded MinHash index over seed sentences. Immutable after build.
class LshIndex {
public:
  struct Entry {
    std::string id;
    TokenSeq tokens;
    MinHashSignature signature;
  };

  static LshIndex build(std::span<const std::pair<std::string, TokenSeq>> seeds, const LshParams& params);
  static LshIndex build_from_signatures(std::span<const std::pair<std::string, MinHashSignature>> seeds,
                                        const LshParams& params);

  const LshParams& params() const noexcept { return params_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  MinHashSignature signature_of(const TokenSeq& s) const;

  /// Entry positions sharing at least one band bucket with `sig`, ascending.
  std::vector<std::size_t> query_signature(const MinHashSignature& sig) const;
  /// Seed ids sharing at least one band bucket with `c`, sorted.
  std::vector<std::string> query(const TokenSeq& c) const;

  /// Number of buckets an entry was inserted into (always `bands`).
  std::size_t bucket_memberships(std::size_t entry) const;

private:
  LshIndex() = default;
  void insert(std::size_t entry);
  std::uint64_t band_key(const MinHashSignature& sig, std::size_t band) const;

  LshParams params_;
  std::vector<Entry> entries_;
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::size_t>>> buckets_;
};

}  // namespace snowclone
