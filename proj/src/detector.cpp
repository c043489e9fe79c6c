#include "snowclone/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "numfmt.hpp"
#include "snowclone/datasets.hpp"
#include "snowclone/kernels.hpp"
#include "snowclone/random.hpp"

namespace snowclone {

void ReferencePair::validate() const {
  if (seed.empty() || candidate.empty()) throw std::invalid_argument("reference pair with an empty sentence");
  if (seed_id.empty()) throw std::invalid_argument("reference pair with an empty seed id");
}

std::array<double, kBaseFeatureCount> DetectorFeatures::values() const noexcept {
  return {g1_edit, g1_lcs, g1_substr, g2_edit, g2_lcs, g2_substr, g3_mean_shared, g3_max_shared, g3_mean_sonly,
          g3_max_sonly};
}

DetectorFeatures extract_features_with_tags(const TokenSeq& s, const TokenSeq& c, const TagSeq& seed_tags,
                                            const IdfTable& idf) {
  if (s.empty() || c.empty()) throw std::invalid_argument("extract_features: empty sentence");
  if (seed_tags.size() != s.size()) throw std::invalid_argument("extract_features: seed tags differ in length from seed");
  const std::size_t n = s.size(), m = c.size();
  const double longer = static_cast<double>(std::max(n, m));
  const double shorter = static_cast<double>(std::min(n, m));

  DetectorFeatures f;
  auto plain = [&](std::size_t i, std::size_t j) { return s[i] == c[j]; };
  f.g1_edit = static_cast<double>(edit_distance_by(n, m, plain)) / longer;
  f.g1_lcs = static_cast<double>(lcs_length_by(n, m, plain)) / shorter;
  f.g1_substr = static_cast<double>(longest_common_substring_by(n, m, plain)) / shorter;

  if (std::all_of(seed_tags.begin(), seed_tags.end(), [](Tag t) { return t == Tag::Wild; })) {
    f.g2_edit = f.g1_edit;
    f.g2_lcs = f.g1_lcs;
    f.g2_substr = f.g1_substr;
    f.g2_fallback = true;
  } else {
    auto wild = [&](std::size_t i, std::size_t j) { return seed_tags[i] == Tag::Wild || s[i] == c[j]; };
    f.g2_edit = static_cast<double>(edit_distance_by(n, m, wild)) / longer;
    f.g2_lcs = static_cast<double>(lcs_length_by(n, m, wild)) / shorter;
    f.g2_substr = static_cast<double>(longest_common_substring_by(n, m, wild)) / shorter;
  }

  const IdfStats st = idf_stats(s, c, idf);
  f.g3_mean_shared = st.mean_shared;
  f.g3_max_shared = st.max_shared;
  f.g3_mean_sonly = st.mean_s_only;
  f.g3_max_sonly = st.max_s_only;
  return f;
}

DetectorFeatures extract_features(const TokenSeq& s, const TokenSeq& c, const TaggerModel& tagger, const IdfTable& idf) {
  return extract_features_with_tags(s, c, tag(tagger, s), idf);
}

ExpandedFeatures poly_expand(const std::array<double, kBaseFeatureCount>& x) {
  constexpr std::size_t d = kBaseFeatureCount;
  static const double kSqrt3 = std::sqrt(3.0), kSqrt6 = std::sqrt(6.0);
  ExpandedFeatures out{};
  std::size_t k = 0;
  out[k++] = 1.0;
  for (std::size_t i = 0; i < d; ++i) out[k++] = kSqrt3 * x[i];
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) out[k++] = (i == j ? kSqrt3 : kSqrt6) * x[i] * x[j];
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j)
      for (std::size_t l = j; l < d; ++l) {
        double coef = kSqrt6;  // x_i x_j x_l, all distinct
        if (i == j && j == l) coef = 1.0;
        else if (i == j || j == l) coef = kSqrt3;
        out[k++] = coef * x[i] * x[j] * x[l];
      }
  return out;
}

// ---------------------------------------------------------------------------

double DetectorModel::score(const DetectorFeatures& f) const noexcept {
  const ExpandedFeatures phi = poly_expand(f);
  double s = bias_;
  for (std::size_t k = 0; k < kExpandedFeatureCount; ++k) s += weights_[k] * ((phi[k] - mean_[k]) / scale_[k]);
  return s;
}

Classification DetectorModel::decide(const DetectorFeatures& f) const noexcept {
  const double s = score(f);
  return {s >= threshold_ ? Label::Reference : Label::NonReference, s};
}

DetectorModel DetectorModel::with_threshold(double t) const {
  if (!std::isfinite(t)) throw DetectorError("threshold must be finite");
  DetectorModel m = *this;
  m.threshold_ = t;
  return m;
}

namespace {

void write_vector(std::ostream& out, const char* name, const ExpandedFeatures& v) {
  out << name;
  for (const double x : v) out << '\t' << detail::fmt_double(x);
  out << '\n';
}

ExpandedFeatures read_vector(const std::string& line, const char* name) {
  std::stringstream ss(line);
  std::string field;
  if (!std::getline(ss, field, '\t') || field != name) throw DetectorError(std::string("expected '") + name + "' row");
  ExpandedFeatures v{};
  std::size_t k = 0;
  while (std::getline(ss, field, '\t')) {
    if (k >= v.size()) throw DetectorError(std::string("too many values in '") + name + "' row");
    v[k] = detail::parse_double(field);
    if (!std::isfinite(v[k])) throw DetectorError(std::string("non-finite value in '") + name + "' row");
    ++k;
  }
  if (k != v.size()) throw DetectorError(std::string("too few values in '") + name + "' row");
  return v;
}

}  // namespace

void DetectorModel::save(std::ostream& out) const {
  out << "snowclone-detector v1\n";
  out << "expansion_degree=" << kExpansionDegree << '\n';
  out << "reg_C=" << detail::fmt_double(reg_C_) << '\n';
  out << "train_seed=" << train_seed_ << '\n';
  out << "epochs=" << epochs_ << '\n';
  out << "threshold=" << detail::fmt_double(threshold_) << '\n';
  out << "bias=" << detail::fmt_double(bias_) << '\n';
  out << "dim=" << kExpandedFeatureCount << '\n';
  write_vector(out, "mean", mean_);
  write_vector(out, "scale", scale_);
  write_vector(out, "weights", weights_);
}

DetectorModel DetectorModel::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "snowclone-detector v1") throw DetectorError("not a detector model file");
  DetectorModel m;
  auto read_kv = [&](const char* key) {
    if (!std::getline(in, line)) throw DetectorError(std::string("missing '") + key + "'");
    const std::string prefix = std::string(key) + "=";
    if (line.rfind(prefix, 0) != 0) throw DetectorError(std::string("expected '") + key + "', got '" + line + "'");
    return line.substr(prefix.size());
  };
  try {
    if (detail::parse_u64(read_kv("expansion_degree")) != kExpansionDegree)
      throw DetectorError("unsupported expansion degree");
    m.reg_C_ = detail::parse_double(read_kv("reg_C"));
    m.train_seed_ = detail::parse_u64(read_kv("train_seed"));
    m.epochs_ = detail::parse_u64(read_kv("epochs"));
    m.threshold_ = detail::parse_double(read_kv("threshold"));
    m.bias_ = detail::parse_double(read_kv("bias"));
    if (detail::parse_u64(read_kv("dim")) != kExpandedFeatureCount) throw DetectorError("unexpected dimension");
  } catch (const std::invalid_argument& e) {
    throw DetectorError(std::string("detector model: ") + e.what());
  }
  std::getline(in, line);
  m.mean_ = read_vector(line, "mean");
  std::getline(in, line);
  m.scale_ = read_vector(line, "scale");
  std::getline(in, line);
  m.weights_ = read_vector(line, "weights");
  for (const double s : m.scale_)
    if (!(s > 0.0)) throw DetectorError("standardization scale must be positive");
  if (!std::isfinite(m.bias_) || !std::isfinite(m.threshold_)) throw DetectorError("non-finite bias or threshold");
  return m;
}

// ---------------------------------------------------------------------------

class DetectorTrainer {
public:
  static DetectorModel run(std::span<const DetectorFeatures> features, std::span<const Label> labels,
                           std::uint64_t seed, const DetectorTrainOptions& opt, DetectorTrainReport* report) {
    const std::size_t n = features.size();
    if (n == 0) throw DetectorError("cannot train a detector on an empty training set");
    if (labels.size() != n) throw DetectorError("label count does not match feature count");
    const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Reference));
    if (n_pos == 0 || n_pos == n) throw DetectorError("detector training data must contain both classes");
    if (!(opt.reg_C > 0.0)) throw DetectorError("reg_C must be positive");

    constexpr std::size_t D = kExpandedFeatureCount;
    DetectorModel model;
    model.reg_C_ = opt.reg_C;
    model.train_seed_ = seed;
    model.epochs_ = opt.epochs;

    // Standardize the expanded features.
    std::vector<ExpandedFeatures> z(n);
    for (std::size_t k = 0; k < n; ++k) z[k] = poly_expand(features[k]);
    for (std::size_t d = 0; d < D; ++d) {
      double sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) sum += z[k][d];
      const double mu = sum / static_cast<double>(n);
      double sq = 0.0;
      for (std::size_t k = 0; k < n; ++k) sq += (z[k][d] - mu) * (z[k][d] - mu);
      const double sd = std::sqrt(sq / static_cast<double>(n));
      model.mean_[d] = mu;
      model.scale_[d] = sd > 1e-12 ? sd : 1.0;
    }
    for (auto& row : z)
      for (std::size_t d = 0; d < D; ++d) row[d] = (row[d] - model.mean_[d]) / model.scale_[d];

    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) y[k] = labels[k] == Label::Reference ? 1.0 : -1.0;

    const double lambda = 1.0 / (2.0 * opt.reg_C * static_cast<double>(n));
    auto objective = [&](const ExpandedFeatures& w, double b) {
      double reg = 0.0;
      for (const double v : w) reg += v * v;
      double loss = 0.0;
      for (std::size_t k = 0; k < n; ++k) loss += std::max(0.0, 1.0 - y[k] * (dot(w, z[k]) + b));
      return lambda * reg + loss / static_cast<double>(n);
    };

    ExpandedFeatures w{};
    double b = 0.0;
    double current = objective(w, b);
    double step = opt.initial_step;
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> trace;

    for (std::size_t e = 0; e < opt.epochs; ++e) {
      const double eta = step / std::sqrt(1.0 + static_cast<double>(e));
      ExpandedFeatures cw = w;
      double cb = b;
      rng.shuffle(order);
      for (const std::size_t k : order) {
        const bool violated = y[k] * (dot(cw, z[k]) + cb) < 1.0;
        const double shrink = 1.0 - 2.0 * lambda * eta;
        for (std::size_t d = 0; d < D; ++d) cw[d] = shrink * cw[d] + (violated ? eta * y[k] * z[k][d] : 0.0);
        if (violated) cb += eta * y[k];
      }
      const double candidate = objective(cw, cb);
      if (candidate <= current) {
        w = cw;
        b = cb;
        current = candidate;
      } else {
        step *= 0.5;
      }
      trace.push_back(current);
    }
    model.weights_ = w;
    model.bias_ = b;

    std::vector<double> scores(n);
    for (std::size_t k = 0; k < n; ++k) scores[k] = dot(w, z[k]) + b;
    model.threshold_ = best_f1_threshold(scores, labels);

    if (report != nullptr) {
      report->objective = std::move(trace);
      std::size_t correct = 0;
      for (std::size_t k = 0; k < n; ++k)
        correct += ((scores[k] >= model.threshold_) == (labels[k] == Label::Reference)) ? 1 : 0;
      report->train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    }
    return model;
  }

private:
  static double dot(const ExpandedFeatures& a, const ExpandedFeatures& b) noexcept {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) s += a[d] * b[d];
    return s;
  }

  // Cut between consecutive distinct scores that maximizes F1. Among equally
  // good cuts the one nearest the SVM boundary (score 0) wins.
  static double best_f1_threshold(const std::vector<double>& scores, std::span<const Label> labels) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto total_pos =
        static_cast<double>(std::count(labels.begin(), labels.end(), Label::Reference));

    double best_f1 = -1.0, best_t = 0.0;
    double tp = 0.0, fp = 0.0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      (labels[idx[r]] == Label::Reference ? tp : fp) += 1.0;
      const bool group_end = r + 1 == idx.size() || scores[idx[r + 1]] < scores[idx[r]];
      if (!group_end) continue;
      const double lower = r + 1 == idx.size() ? scores[idx[r]] - 1.0 : scores[idx[r + 1]];
      const double t = 0.5 * (scores[idx[r]] + lower);
      const double f1 = 2.0 * tp / (tp + fp + total_pos);
      if (f1 > best_f1 + 1e-12 || (std::abs(f1 - best_f1) <= 1e-12 && std::abs(t) < std::abs(best_t))) {
        best_f1 = f1;
        best_t = t;
      }
    }
    return best_t;
  }
};

DetectorModel train_detector_on_features(std::span<const DetectorFeatures> features, std::span<const Label> labels,
                                         std::uint64_t train_seed, const DetectorTrainOptions& options,
                                         DetectorTrainReport* report) {
  return DetectorTrainer::run(features, labels, train_seed, options, report);
}

DetectorModel train_detector(std::span<const ReferencePair> train, const TaggerModel& tagger, const IdfTable& idf,
                             std::uint64_t train_seed, const DetectorTrainOptions& options,
                             DetectorTrainReport* report) {
  for (const auto& p : train) p.validate();
  const auto features = kernels::pair_features_parallel(train, tagger, idf);
  std::vector<Label> labels;
  labels.reserve(train.size());
  for (const auto& p : train) labels.push_back(p.label);
  return train_detector_on_features(features, labels, train_seed, options, report);
}

Classification classify(const DetectorModel& d, const TokenSeq& s, const TokenSeq& c, const TaggerModel& tagger,
                        const IdfTable& idf) {
  return d.decide(extract_features(s, c, tagger, idf));
}

BinaryMetrics binary_metrics(std::span<const Label> gold, std::span<const Label> predicted) {
  if (gold.empty()) throw DetectorError("cannot evaluate on an empty test set");
  if (gold.size() != predicted.size()) throw DetectorError("prediction count does not match test set");
  BinaryMetrics m;
  m.total = gold.size();
  std::size_t correct = 0, tp = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    const bool g = gold[k] == Label::Reference, p = predicted[k] == Label::Reference;
    correct += g == p ? 1 : 0;
    m.gold_positive += g ? 1 : 0;
    m.predicted_positive += p ? 1 : 0;
    tp += (g && p) ? 1 : 0;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  m.precision = m.predicted_positive ? static_cast<double>(tp) / static_cast<double>(m.predicted_positive) : 1.0;
  m.recall = m.gold_positive ? static_cast<double>(tp) / static_cast<double>(m.gold_positive) : 0.0;
  return m;
}

namespace {

std::vector<Label> gold_labels(std::span<const ReferencePair> pairs) {
  std::vector<Label> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.label);
  return out;
}

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  for (const double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  double sq = 0.0;
  for (const double x : v) sq += (x - r.mean) * (x - r.mean);
  r.stddev = std::sqrt(sq / static_cast<double>(v.size()));
  return r;
}

}  // namespace

BinaryMetrics eval_detector(const DetectorModel& d, std::span<const ReferencePair> test, const TaggerModel& tagger,
                            const IdfTable& idf) {
  const auto features = kernels::pair_features_parallel(test, tagger, idf);
  std::vector<Label> pred;
  pred.reserve(features.size());
  for (const auto& f : features) pred.push_back(d.decide(f).label);
  return binary_metrics(gold_labels(test), pred);
}

BinaryMetrics majority_baseline(std::span<const ReferencePair> test) {
  const std::vector<Label> pred(test.size(), Label::NonReference);
  return binary_metrics(gold_labels(test), pred);
}

CrossValidationResult cross_validate_detector(std::span<const ReferencePair> pairs, const TaggerModel& tagger,
                                              const IdfTable& idf, std::size_t n_splits, std::uint64_t split_seed,
                                              std::uint64_t train_seed, const DetectorTrainOptions& options) {
  if (n_splits == 0) throw DetectorError("need at least one split");
  const auto features = kernels::pair_features_parallel(pairs, tagger, idf);
  const auto labels = gold_labels(pairs);
  std::vector<std::string> groups;
  groups.reserve(pairs.size());
  for (const auto& p : pairs) groups.push_back(p.seed_id);

  CrossValidationResult result;
  std::vector<double> acc, prec, rec;
  for (std::size_t s = 0; s < n_splits; ++s) {
    const SplitIndices split = group_split(groups, SplitSpec{.split_seed = split_seed + s});
    std::vector<DetectorFeatures> train_f, test_f;
    std::vector<Label> train_y, test_y;
    for (const auto* part : {&split.train, &split.dev}) {
      for (const std::size_t k : *part) {
        train_f.push_back(features[k]);
        train_y.push_back(labels[k]);
      }
    }
    for (const std::size_t k : split.test) {
      test_f.push_back(features[k]);
      test_y.push_back(labels[k]);
    }
    const DetectorModel model = train_detector_on_features(train_f, train_y, train_seed, options);
    std::vector<Label> pred;
    pred.reserve(test_f.size());
    for (const auto& f : test_f) pred.push_back(model.decide(f).label);
    const BinaryMetrics m = binary_metrics(test_y, pred);
    result.per_split.push_back(m);
    acc.push_back(m.accuracy);
    prec.push_back(m.precision);
    rec.push_back(m.recall);
  }
  result.accuracy = mean_std(acc);
  result.precision = mean_std(prec);
  result.recall = mean_std(rec);
  return result;
}

}  // namespace snowclone
