#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "snowclone/pattern.hpp"
#include "snowclone/tagger.hpp"
#include "snowclone/text.hpp"

namespace snowclone {

enum class Label : std::uint8_t { NonReference = 0, Reference = 1 };

/// A (seed, candidate) pair with a reference judgement. Pairs that share a
/// seed share `seed_id`.
struct ReferencePair {
  TokenSeq seed;
  TokenSeq candidate;
  Label label = Label::NonReference;
  std::string seed_id;

  void validate() const;
};

inline constexpr std::size_t kBaseFeatureCount = 10;
inline constexpr std::size_t kExpandedFeatureCount = 286;  // monomials of degree <= 3 in 10 variables

/// Structural similarity of a candidate to a seed.
///
/// g1: seed vs candidate. g2: the same metrics against the seed's snowclone
/// form, where a wildcard position matches any single token. g3: idf of the
/// words the two share and of the seed words the candidate dropped.
struct DetectorFeatures {
  double g1_edit = 0.0;    // edit / max(|s|,|c|)
  double g1_lcs = 0.0;     // lcs / min(|s|,|c|)
  double g1_substr = 0.0;  // substring / min(|s|,|c|)
  double g2_edit = 0.0;
  double g2_lcs = 0.0;
  double g2_substr = 0.0;
  double g3_mean_shared = 0.0;
  double g3_max_shared = 0.0;
  double g3_mean_sonly = 0.0;
  double g3_max_sonly = 0.0;
  /// Set when the tagger turned every seed token into a wildcard and g2
  /// fell back to the g1 values.
  bool g2_fallback = false;

  std::array<double, kBaseFeatureCount> values() const noexcept;
};

/// `seed_tags` is the unmerged per-token tagging of `s`.
DetectorFeatures extract_features_with_tags(const TokenSeq& s, const TokenSeq& c, const TagSeq& seed_tags,
                                            const IdfTable& idf);

DetectorFeatures extract_features(const TokenSeq& s, const TokenSeq& c, const TaggerModel& tagger, const IdfTable& idf);

using ExpandedFeatures = std::array<double, kExpandedFeatureCount>;

/// Explicit feature map of the degree-3 polynomial kernel (1 + a.b)^3.
///
/// Slots hold every monomial of total degree <= 3 in canonical order
/// (constant, then x_i, then x_i x_j for i <= j, then x_i x_j x_k for
/// i <= j <= k), each scaled by the square root of its multinomial
/// coefficient so that dot(expand(a), expand(b)) == (1 + a.b)^3.
ExpandedFeatures poly_expand(const std::array<double, kBaseFeatureCount>& x);
inline ExpandedFeatures poly_expand(const DetectorFeatures& f) { return poly_expand(f.values()); }

class DetectorError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct DetectorTrainOptions {
  double reg_C = 0.5;
  std::size_t epochs = 60;
  double initial_step = 0.05;
};

struct Classification {
  Label label = Label::NonReference;
  double score = 0.0;
};

/// Linear SVM over standardized expanded features.
class DetectorModel {
public:
  static constexpr int kExpansionDegree = 3;

  double threshold() const noexcept { return threshold_; }
  double bias() const noexcept { return bias_; }
  double reg_C() const noexcept { return reg_C_; }
  std::uint64_t train_seed() const noexcept { return train_seed_; }
  const ExpandedFeatures& weights() const noexcept { return weights_; }
  const ExpandedFeatures& mean() const noexcept { return mean_; }
  const ExpandedFeatures& scale() const noexcept { return scale_; }

  /// Margin w.z + b of standardized expanded features z.
  double score(const DetectorFeatures& f) const noexcept;
  Classification decide(const DetectorFeatures& f) const noexcept;

  DetectorModel with_threshold(double t) const;

  void save(std::ostream& out) const;
  static DetectorModel load(std::istream& in);

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;

private:
  friend class DetectorTrainer;

  ExpandedFeatures mean_{};
  ExpandedFeatures scale_{};
  ExpandedFeatures weights_{};
  double bias_ = 0.0;
  double threshold_ = 0.0;
  double reg_C_ = 0.5;
  std::uint64_t train_seed_ = 0;
  std::size_t epochs_ = 0;
};

struct DetectorTrainReport {
  /// Objective after each epoch; non-increasing.
  std::vector<double> objective;
  double train_accuracy = 0.0;
};

/// Minimizes lambda*|w|^2 + mean hinge loss, lambda = 1/(2*C*n), by seeded
/// stochastic subgradient passes. A pass that would raise the objective is
/// discarded and the step size halved. The decision threshold is then set
/// to maximize F1 on the training pairs.
DetectorModel train_detector_on_features(std::span<const DetectorFeatures> features, std::span<const Label> labels,
                                         std::uint64_t train_seed, const DetectorTrainOptions& options = {},
                                         DetectorTrainReport* report = nullptr);

DetectorModel train_detector(std::span<const ReferencePair> train, const TaggerModel& tagger, const IdfTable& idf,
                             std::uint64_t train_seed, const DetectorTrainOptions& options = {},
                             DetectorTrainReport* report = nullptr);

Classification classify(const DetectorModel& d, const TokenSeq& s, const TokenSeq& c, const TaggerModel& tagger,
                        const IdfTable& idf);

struct BinaryMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // 1.0 when nothing is predicted positive
  double recall = 0.0;     // 0.0 when there are no gold positives
  std::size_t total = 0;
  std::size_t gold_positive = 0;
  std::size_t predicted_positive = 0;
};

BinaryMetrics binary_metrics(std::span<const Label> gold, std::span<const Label> predicted);

BinaryMetrics eval_detector(const DetectorModel& d, std::span<const ReferencePair> test, const TaggerModel& tagger,
                            const IdfTable& idf);

/// Metrics of the always-non-reference predictor.
BinaryMetrics majority_baseline(std::span<const ReferencePair> test);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

struct CrossValidationResult {
  std::vector<BinaryMetrics> per_split;
  MeanStd accuracy, precision, recall;
};

/// Trains and tests on `n_splits` group-respecting train/test splits, each
/// drawn with split seed `split_seed + i`. Dev portions are folded into
/// training.
CrossValidationResult cross_validate_detector(std::span<const ReferencePair> pairs, const TaggerModel& tagger,
                                              const IdfTable& idf, std::size_t n_splits, std::uint64_t split_seed,
                                              std::uint64_t train_seed, const DetectorTrainOptions& options = {});

}  // namespace snowclone
