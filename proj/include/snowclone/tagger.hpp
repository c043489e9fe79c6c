#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "snowclone/pattern.hpp"
#include "snowclone/text.hpp"

namespace snowclone {

/// A sentence with gold wildcard tags and the id of the pattern it
/// instantiates. Variants of one pattern share a group id.
struct TaggedExample {
  TokenSeq sentence;
  TagSeq gold;
  std::string group_id;

  void validate() const;
};

/// Feature families the tagger may use.
struct FeatureConfig {
  bool token = true;     // tok=
  bool context = true;   // prev= / next=
  bool position = true;  // pos=first|middle|last
  bool idf = true;       // idfq=1..4 (needs an idf table)
  bool stopword = true;  // stop=0|1
  bool length = true;    // len= bucket

  std::string str() const;
  static FeatureConfig parse(const std::string& text);

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

bool is_stopword(const std::string& token);

/// Observation features for token i. Tag-conditioning is added by the model.
std::vector<std::string> token_features(const TokenSeq& s, std::size_t i, const IdfTable* idf,
                                        const FeatureConfig& config = {});

class TaggerError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// First-order linear chain over {KEEP, WILD} with averaged perceptron
/// weights. Immutable once trained; tagging is safe from many threads.
class TaggerModel {
public:
  static constexpr int kStart = 2;  // previous-tag slot for position 0

  TaggerModel(FeatureConfig config, std::uint64_t train_seed, std::shared_ptr<const IdfTable> idf);

  const FeatureConfig& config() const noexcept { return config_; }
  std::uint64_t train_seed() const noexcept { return train_seed_; }
  double wild_bias() const noexcept { return wild_bias_; }
  const IdfTable* idf() const noexcept { return idf_.get(); }
  const std::shared_ptr<const IdfTable>& idf_ptr() const noexcept { return idf_; }

  /// Copy with a different decoding bias added to every WILD emission.
  TaggerModel with_wild_bias(double bias) const;

  /// Emission weight of a feature for a tag; 0 if unseen.
  double emission(const std::string& feature, Tag t) const;
  /// Transition weight; `prev` is 0 (KEEP), 1 (WILD) or kStart.
  double transition(int prev, Tag cur) const { return trans_[prev][static_cast<int>(cur)]; }

  std::size_t feature_count() const noexcept { return weights_.size(); }
  bool all_zero() const noexcept;

  /// Text format: header line, then `feature|K` / `feature|W` / `trans=...`
  /// names, a tab, and the weight.
  void save(std::ostream& out) const;
  static TaggerModel load(std::istream& in, std::shared_ptr<const IdfTable> idf);

  friend bool operator==(const TaggerModel& a, const TaggerModel& b) {
    return a.config_ == b.config_ && a.train_seed_ == b.train_seed_ && a.wild_bias_ == b.wild_bias_ &&
           a.weights_ == b.weights_ && a.trans_ == b.trans_;
  }

private:
  friend class TaggerTrainer;

  FeatureConfig config_;
  std::uint64_t train_seed_;
  double wild_bias_ = 0.0;
  std::shared_ptr<const IdfTable> idf_;
  std::unordered_map<std::string, std::array<double, 2>> weights_;
  std::array<std::array<double, 2>, 3> trans_{};
};

struct TaggerTrainOptions {
  FeatureConfig config{};
  std::shared_ptr<const IdfTable> idf;
};

/// Averaged structured perceptron; each epoch visits the examples in an
/// order shuffled by `train_seed`. epochs == 0 yields an all-zero model.
TaggerModel train_tagger(std::span<const TaggedExample> train, std::size_t epochs, std::uint64_t train_seed,
                         const TaggerTrainOptions& options = {});

/// Viterbi decoding; ties resolve to KEEP.
TagSeq tag(const TaggerModel& m, const TokenSeq& s);

struct TagMetrics {
  double accuracy = 0.0;
  double wild_recall = 0.0;     // 0.0 when there are no gold WILD tokens
  double wild_precision = 0.0;  // 1.0 when nothing is predicted WILD
  std::size_t tokens = 0;
  std::size_t gold_wild = 0;
  std::size_t predicted_wild = 0;
};

/// Token-level micro metrics of `predicted` against the examples' gold tags.
TagMetrics score_tags(std::span<const TaggedExample> gold, std::span<const TagSeq> predicted);

TagMetrics eval_tagger(const TaggerModel& m, std::span<const TaggedExample> test);

/// Metrics of the constant all-KEEP predictor.
TagMetrics naive_baseline(std::span<const TaggedExample> test);

/// Picks the WILD bias from `grid` maximizing (accuracy + recall) / 2 on dev;
/// ties go to the bias nearest 0.
double tune_wild_bias(const TaggerModel& m, std::span<const TaggedExample> dev, std::span<const double> grid);

}  // namespace snowclone
