#include "snowclone/kernels.hpp"

#include <cstdint>

#ifdef SNOWCLONE_HAVE_OPENMP
#include <omp.h>
#endif

namespace snowclone::kernels {

int thread_count() {
#ifdef SNOWCLONE_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<DetectorFeatures> pair_features_serial(std::span<const ReferencePair> pairs, const TaggerModel& tagger,
                                                   const IdfTable& idf) {
  std::vector<DetectorFeatures> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(extract_features(p.seed, p.candidate, tagger, idf));
  return out;
}

std::vector<DetectorFeatures> pair_features_parallel(std::span<const ReferencePair> pairs, const TaggerModel& tagger,
                                                     const IdfTable& idf) {
  // Exceptions cannot leave an OpenMP region; reject bad input up front.
  for (const auto& p : pairs) p.validate();
  std::vector<DetectorFeatures> out(pairs.size());
  const auto n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) out[i] = extract_features(pairs[i].seed, pairs[i].candidate, tagger, idf);
  return out;
}

std::vector<MinHashSignature> signatures_serial(std::span<const TokenSeq> sentences, std::size_t k,
                                                std::uint64_t hash_seed) {
  std::vector<MinHashSignature> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    const auto sh = shingle(s);
    out.push_back(minhash_signature(sh, k, hash_seed));
  }
  return out;
}

std::vector<MinHashSignature> signatures_parallel(std::span<const TokenSeq> sentences, std::size_t k,
                                                  std::uint64_t hash_seed) {
  if (k == 0) throw IndexError("signature length must be positive");
  for (const auto& s : sentences)
    if (s.empty()) throw IndexError("cannot sign an empty sentence");
  std::vector<MinHashSignature> out(sentences.size());
  const auto n = static_cast<std::int64_t>(sentences.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto sh = shingle(sentences[i]);
    out[i] = minhash_signature(sh, k, hash_seed);
  }
  return out;
}

std::vector<double> scores_serial(const DetectorModel& d, std::span<const DetectorFeatures> features) {
  std::vector<double> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(d.score(f));
  return out;
}

std::vector<double> scores_parallel(const DetectorModel& d, std::span<const DetectorFeatures> features) {
  std::vector<double> out(features.size());
  const auto n = static_cast<std::int64_t>(features.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = d.score(features[i]);
  return out;
}

}  // namespace snowclone::kernels
