#pragma once

// Batch kernels behind training, evaluation and scanning. Each has a serial
// reference version and an OpenMP version that must agree with it bit for
// bit; the tests and the benchmark compare the two.

#include <span>
#include <vector>

#include "snowclone/detector.hpp"
#include "snowclone/index.hpp"

namespace snowclone::kernels {

/// Threads the parallel kernels will use (1 without OpenMP).
int thread_count();

std::vector<DetectorFeatures> pair_features_serial(std::span<const ReferencePair> pairs, const TaggerModel& tagger,
                                                   const IdfTable& idf);
std::vector<DetectorFeatures> pair_features_parallel(std::span<const ReferencePair> pairs, const TaggerModel& tagger,
                                                     const IdfTable& idf);

std::vector<MinHashSignature> signatures_serial(std::span<const TokenSeq> sentences, std::size_t k,
                                                std::uint64_t hash_seed);
std::vector<MinHashSignature> signatures_parallel(std::span<const TokenSeq> sentences, std::size_t k,
                                                  std::uint64_t hash_seed);

std::vector<double> scores_serial(const DetectorModel& d, std::span<const DetectorFeatures> features);
std::vector<double> scores_parallel(const DetectorModel& d, std::span<const DetectorFeatures> features);

}  // namespace snowclone::kernels
