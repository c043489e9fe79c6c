#include "snowclone/tagger.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "numfmt.hpp"
#include "snowclone/random.hpp"

namespace snowclone {

void TaggedExample::validate() const {
  if (sentence.empty()) throw std::invalid_argument("tagged example has no tokens");
  if (gold.size() != sentence.size()) throw std::invalid_argument("tagged example: tags and tokens differ in length");
  if (group_id.empty()) throw std::invalid_argument("tagged example: empty group id");
}

std::string FeatureConfig::str() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out.push_back(',');
    out += name;
  };
  add(token, "token");
  add(context, "context");
  add(position, "position");
  add(idf, "idf");
  add(stopword, "stopword");
  add(length, "length");
  return out.empty() ? "none" : out;
}

FeatureConfig FeatureConfig::parse(const std::string& text) {
  FeatureConfig c{false, false, false, false, false, false};
  if (text == "none") return c;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "token") c.token = true;
    else if (item == "context") c.context = true;
    else if (item == "position") c.position = true;
    else if (item == "idf") c.idf = true;
    else if (item == "stopword") c.stopword = true;
    else if (item == "length") c.length = true;
    else throw TaggerError("unknown feature family '" + item + "'");
  }
  return c;
}

bool is_stopword(const std::string& token) {
  static const std::unordered_set<std::string> kStopwords = {
      "a",    "an",   "the",  "and",  "or",    "but",   "if",   "of",   "in",    "on",    "at",   "to",   "for",
      "with", "by",   "from", "as",   "is",    "are",   "was",  "were", "be",    "been",  "am",   "do",   "does",
      "did",  "not",  "no",   "i",    "you",   "he",    "she",  "it",   "we",    "they",  "me",   "him",  "her",
      "us",   "them", "my",   "your", "his",   "its",   "our",  "their", "this", "that",  "these", "those", "there",
      "so",   "than", "too",  "very", "can",   "will",  "just", "into", "what",  "who",   "have", "has",  "had"};
  return kStopwords.count(token) > 0;
}

std::vector<std::string> token_features(const TokenSeq& s, std::size_t i, const IdfTable* idf,
                                        const FeatureConfig& config) {
  if (i >= s.size()) throw std::out_of_range("token_features: index past end of sentence");
  std::vector<std::string> f;
  f.reserve(10);
  f.emplace_back("bias");
  const std::string& tok = s[i];
  if (config.token) f.push_back("tok=" + tok);
  if (config.context) {
    f.push_back("prev=" + (i == 0 ? std::string("<s>") : s[i - 1]));
    f.push_back("next=" + (i + 1 == s.size() ? std::string("</s>") : s[i + 1]));
  }
  if (config.position) {
    if (i == 0) f.emplace_back("pos=first");
    if (i + 1 == s.size()) f.emplace_back("pos=last");
    if (i != 0 && i + 1 != s.size()) f.emplace_back("pos=middle");
  }
  if (config.idf && idf != nullptr) {
    const double v = idf->idf(tok);
    f.push_back("idfq=" + std::to_string(idf->quartile(tok)));
    f.push_back("idfb=" + std::to_string(static_cast<int>(std::floor(2.0 * v))));
    double mean = 0.0;
    for (const auto& t : s.tokens()) mean += idf->idf(t);
    mean /= static_cast<double>(s.size());
    f.emplace_back(v > mean ? "idfrel=hi" : "idfrel=lo");
  }
  if (config.stopword) f.emplace_back(is_stopword(tok) ? "stop=1" : "stop=0");
  if (config.length) {
    const char* bucket = tok.size() <= 2 ? "s" : tok.size() <= 5 ? "m" : "l";
    f.push_back(std::string("len=") + bucket);
  }
  return f;
}

// ---------------------------------------------------------------------------

TaggerModel::TaggerModel(FeatureConfig config, std::uint64_t train_seed, std::shared_ptr<const IdfTable> idf)
    : config_(config), train_seed_(train_seed), idf_(std::move(idf)) {}

TaggerModel TaggerModel::with_wild_bias(double bias) const {
  if (!std::isfinite(bias)) throw TaggerError("wild bias must be finite");
  TaggerModel m = *this;
  m.wild_bias_ = bias;
  return m;
}

double TaggerModel::emission(const std::string& feature, Tag t) const {
  const auto it = weights_.find(feature);
  return it == weights_.end() ? 0.0 : it->second[static_cast<int>(t)];
}

bool TaggerModel::all_zero() const noexcept {
  for (const auto& [name, w] : weights_)
    if (w[0] != 0.0 || w[1] != 0.0) return false;
  for (const auto& row : trans_)
    if (row[0] != 0.0 || row[1] != 0.0) return false;
  return true;
}

namespace {

const char* kPrevNames[3] = {"K", "W", "^"};
const char* kTagNames[2] = {"K", "W"};

// Viterbi over {KEEP, WILD}. `emit[i][t]` holds emission scores; ties keep
// the KEEP path.
TagSeq viterbi(const std::vector<std::array<double, 2>>& emit, const std::array<std::array<double, 2>, 3>& trans) {
  const std::size_t n = emit.size();
  TagSeq out(n, Tag::Keep);
  if (n == 0) return out;
  std::vector<std::array<double, 2>> score(n);
  std::vector<std::array<int, 2>> back(n);
  for (int t = 0; t < 2; ++t) score[0][t] = trans[TaggerModel::kStart][t] + emit[0][t];
  for (std::size_t i = 1; i < n; ++i) {
    for (int t = 0; t < 2; ++t) {
      int best_prev = 0;
      double best = score[i - 1][0] + trans[0][t];
      const double alt = score[i - 1][1] + trans[1][t];
      if (alt > best) {
        best = alt;
        best_prev = 1;
      }
      score[i][t] = best + emit[i][t];
      back[i][t] = best_prev;
    }
  }
  int cur = score[n - 1][1] > score[n - 1][0] ? 1 : 0;
  for (std::size_t i = n; i-- > 0;) {
    out[i] = static_cast<Tag>(cur);
    if (i > 0) cur = back[i][cur];
  }
  return out;
}

}  // namespace

void TaggerModel::save(std::ostream& out) const {
  out << "snowclone-tagger v1\tfeatures=" << config_.str() << "\ttrain_seed=" << train_seed_
      << "\twild_bias=" << detail::fmt_double(wild_bias_) << '\n';
  for (int p = 0; p < 3; ++p)
    for (int t = 0; t < 2; ++t)
      out << "trans=" << kPrevNames[p] << '>' << kTagNames[t] << '\t' << detail::fmt_double(trans_[p][t]) << '\n';
  std::vector<std::string> names;
  names.reserve(weights_.size());
  for (const auto& [name, w] : weights_) names.push_back(name);
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    const auto& w = weights_.at(name);
    for (int t = 0; t < 2; ++t)
      if (w[t] != 0.0) out << name << '|' << kTagNames[t] << '\t' << detail::fmt_double(w[t]) << '\n';
  }
}

TaggerModel TaggerModel::load(std::istream& in, std::shared_ptr<const IdfTable> idf) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("snowclone-tagger v1\t", 0) != 0)
    throw TaggerError("not a tagger model file (bad header)");
  FeatureConfig config;
  std::uint64_t seed = 0;
  double bias = 0.0;
  {
    std::stringstream ss(header.substr(std::string("snowclone-tagger v1\t").size()));
    std::string field;
    while (std::getline(ss, field, '\t')) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw TaggerError("malformed header field '" + field + "'");
      const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
      if (key == "features") config = FeatureConfig::parse(value);
      else if (key == "train_seed") seed = detail::parse_u64(value);
      else if (key == "wild_bias") bias = detail::parse_double(value);
      else throw TaggerError("unknown header field '" + key + "'");
    }
  }
  TaggerModel m(config, seed, std::move(idf));
  m.wild_bias_ = bias;

  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw TaggerError("model line " + std::to_string(lineno) + ": missing tab");
    const std::string name = line.substr(0, tab);
    double w = 0.0;
    try {
      w = detail::parse_double(std::string_view(line).substr(tab + 1));
    } catch (const std::invalid_argument& e) {
      throw TaggerError("model line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!std::isfinite(w)) throw TaggerError("model line " + std::to_string(lineno) + ": non-finite weight");
    if (name.rfind("trans=", 0) == 0 && name.size() == 9 && name[7] == '>') {
      const int p = name[6] == 'K' ? 0 : name[6] == 'W' ? 1 : name[6] == '^' ? 2 : -1;
      const int t = name[8] == 'K' ? 0 : name[8] == 'W' ? 1 : -1;
      if (p < 0 || t < 0) throw TaggerError("model line " + std::to_string(lineno) + ": bad transition '" + name + "'");
      m.trans_[p][t] = w;
      continue;
    }
    if (name.size() < 3 || name[name.size() - 2] != '|')
      throw TaggerError("model line " + std::to_string(lineno) + ": feature name lacks tag suffix");
    const char t = name.back();
    if (t != 'K' && t != 'W') throw TaggerError("model line " + std::to_string(lineno) + ": bad tag suffix");
    m.weights_[name.substr(0, name.size() - 2)][t == 'K' ? 0 : 1] = w;
  }
  return m;
}

// ---------------------------------------------------------------------------

class TaggerTrainer {
public:
  TaggerTrainer(std::span<const TaggedExample> train, const TaggerTrainOptions& options)
      : train_(train), options_(options) {
    feats_.reserve(train.size());
    for (const auto& ex : train) {
      ex.validate();
      std::vector<std::vector<std::size_t>> per_token;
      per_token.reserve(ex.sentence.size());
      for (std::size_t i = 0; i < ex.sentence.size(); ++i) {
        std::vector<std::size_t> ids;
        for (auto& f : token_features(ex.sentence, i, options.idf.get(), options.config)) ids.push_back(intern(f));
        per_token.push_back(std::move(ids));
      }
      feats_.push_back(std::move(per_token));
    }
    w_.assign(names_.size(), {0.0, 0.0});
    u_.assign(names_.size(), {0.0, 0.0});
  }

  TaggerModel run(std::size_t epochs, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> order(train_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t e = 0; e < epochs; ++e) {
      rng.shuffle(order);
      for (const std::size_t k : order) {
        step(k);
        ++c_;
      }
    }

    TaggerModel m(options_.config, seed, options_.idf);
    for (std::size_t f = 0; f < names_.size(); ++f) {
      std::array<double, 2> avg{w_[f][0] - u_[f][0] / c_, w_[f][1] - u_[f][1] / c_};
      if (avg[0] != 0.0 || avg[1] != 0.0) m.weights_.emplace(names_[f], avg);
    }
    for (int p = 0; p < 3; ++p)
      for (int t = 0; t < 2; ++t) m.trans_[p][t] = tw_[p][t] - tu_[p][t] / c_;
    return m;
  }

private:
  std::size_t intern(const std::string& name) {
    const auto [it, inserted] = ids_.emplace(name, names_.size());
    if (inserted) names_.push_back(name);
    return it->second;
  }

  void step(std::size_t k) {
    const auto& ex = train_[k];
    const auto& tf = feats_[k];
    std::vector<std::array<double, 2>> emit(tf.size());
    for (std::size_t i = 0; i < tf.size(); ++i) {
      emit[i] = {0.0, 0.0};
      for (const auto f : tf[i]) {
        emit[i][0] += w_[f][0];
        emit[i][1] += w_[f][1];
      }
    }
    const TagSeq pred = viterbi(emit, tw_);
    if (pred == ex.gold) return;
    for (std::size_t i = 0; i < tf.size(); ++i) {
      const int g = static_cast<int>(ex.gold[i]), p = static_cast<int>(pred[i]);
      const int gp = i == 0 ? TaggerModel::kStart : static_cast<int>(ex.gold[i - 1]);
      const int pp = i == 0 ? TaggerModel::kStart : static_cast<int>(pred[i - 1]);
      if (g != p) {
        for (const auto f : tf[i]) {
          bump(w_[f][g], u_[f][g], +1.0);
          bump(w_[f][p], u_[f][p], -1.0);
        }
      }
      if (g != p || gp != pp) {
        bump(tw_[gp][g], tu_[gp][g], +1.0);
        bump(tw_[pp][p], tu_[pp][p], -1.0);
      }
    }
  }

  void bump(double& w, double& u, double delta) const {
    w += delta;
    u += static_cast<double>(c_) * delta;
  }

  std::span<const TaggedExample> train_;
  TaggerTrainOptions options_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::vector<std::size_t>>> feats_;
  std::vector<std::array<double, 2>> w_, u_;
  std::array<std::array<double, 2>, 3> tw_{}, tu_{};
  std::size_t c_ = 1;
};

TaggerModel train_tagger(std::span<const TaggedExample> train, std::size_t epochs, std::uint64_t train_seed,
                         const TaggerTrainOptions& options) {
  if (train.empty()) throw TaggerError("cannot train a tagger on an empty training set");
  return TaggerTrainer(train, options).run(epochs, train_seed);
}

TagSeq tag(const TaggerModel& m, const TokenSeq& s) {
  std::vector<std::array<double, 2>> emit(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    emit[i] = {0.0, m.wild_bias()};
    for (const auto& f : token_features(s, i, m.idf(), m.config())) {
      emit[i][0] += m.emission(f, Tag::Keep);
      emit[i][1] += m.emission(f, Tag::Wild);
    }
  }
  std::array<std::array<double, 2>, 3> trans{};
  for (int p = 0; p < 3; ++p)
    for (int t = 0; t < 2; ++t) trans[p][t] = m.transition(p, static_cast<Tag>(t));
  return viterbi(emit, trans);
}

TagMetrics score_tags(std::span<const TaggedExample> gold, std::span<const TagSeq> predicted) {
  if (gold.empty()) throw TaggerError("cannot evaluate on an empty test set");
  if (gold.size() != predicted.size()) throw TaggerError("prediction count does not match test set");
  TagMetrics m;
  std::size_t correct = 0, true_wild = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    const auto& g = gold[k].gold;
    const auto& p = predicted[k];
    if (g.size() != p.size()) throw TaggerError("predicted tags differ in length from gold tags");
    for (std::size_t i = 0; i < g.size(); ++i) {
      ++m.tokens;
      correct += g[i] == p[i] ? 1 : 0;
      m.gold_wild += g[i] == Tag::Wild ? 1 : 0;
      m.predicted_wild += p[i] == Tag::Wild ? 1 : 0;
      true_wild += (g[i] == Tag::Wild && p[i] == Tag::Wild) ? 1 : 0;
    }
  }
  if (m.tokens == 0) throw TaggerError("test set has no tokens");
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.tokens);
  m.wild_recall = m.gold_wild ? static_cast<double>(true_wild) / static_cast<double>(m.gold_wild) : 0.0;
  m.wild_precision = m.predicted_wild ? static_cast<double>(true_wild) / static_cast<double>(m.predicted_wild) : 1.0;
  return m;
}

TagMetrics eval_tagger(const TaggerModel& m, std::span<const TaggedExample> test) {
  std::vector<TagSeq> pred;
  pred.reserve(test.size());
  for (const auto& ex : test) pred.push_back(tag(m, ex.sentence));
  return score_tags(test, pred);
}

TagMetrics naive_baseline(std::span<const TaggedExample> test) {
  std::vector<TagSeq> pred;
  pred.reserve(test.size());
  for (const auto& ex : test) pred.emplace_back(ex.sentence.size(), Tag::Keep);
  return score_tags(test, pred);
}

double tune_wild_bias(const TaggerModel& m, std::span<const TaggedExample> dev, std::span<const double> grid) {
  if (grid.empty()) throw TaggerError("empty bias grid");
  double best_bias = grid.front();
  double best = -1.0;
  for (const double b : grid) {
    const TagMetrics r = eval_tagger(m.with_wild_bias(b), dev);
    const double objective = 0.5 * (r.accuracy + r.wild_recall);
    // Ties go to the smallest adjustment.
    if (objective > best || (objective == best && std::abs(b) < std::abs(best_bias))) {
      best = objective;
      best_bias = b;
    }
  }
  return best_bias;
}

}  // namespace snowclone
