#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "support.hpp"

using namespace snowclone;
using namespace testing;

namespace {

bool has(const std::vector<std::string>& f, const std::string& x) { return std::find(f.begin(), f.end(), x) != f.end(); }

SynthData small_synth() {
  SynthConfig cfg;
  cfg.n_patterns = 10;
  cfg.instances_per_pattern = 20;
  return synth_generate(cfg);
}

}  // namespace

TEST_CASE("token_features") {
  const TokenSeq s = seq("one does not simply walk into mordor");
  const std::vector<std::string> corpus{"one does not", "does not walk", "not into the", "walk the one", "one does mordor"};
  const IdfTable idf = build_idf(std::span<const std::string>(corpus));

  const auto f0 = token_features(s, 0, &idf);
  CHECK(has(f0, "pos=first"));
  CHECK(has(f0, "tok=one"));
  CHECK(has(f0, "prev=<s>"));
  CHECK(has(f0, "next=does"));
  CHECK(has(f0, "bias"));
  const auto last = token_features(s, s.size() - 1, &idf);
  CHECK(has(last, "pos=last"));
  CHECK(has(last, "next=</s>"));
  CHECK(has(last, "idfq=4"));
  CHECK(has(token_features(s, 3, &idf), "pos=middle"));
  CHECK(has(token_features(s, 2, &idf), "stop=1"));
  CHECK(has(token_features(s, 3, &idf), "stop=0"));
  CHECK(has(token_features(s, 0, &idf), "len=m"));
  CHECK(has(token_features(seq("i am"), 0, nullptr), "len=s"));
  CHECK(has(token_features(s, 3, &idf), "len=l"));
  CHECK_THROWS_AS(token_features(s, 7, &idf), std::out_of_range);

  FeatureConfig none = FeatureConfig::parse("none");
  CHECK(token_features(s, 3, &idf, none) == std::vector<std::string>{"bias"});
  FeatureConfig c;
  c.idf = false;
  CHECK(FeatureConfig::parse(c.str()) == c);
  CHECK_THROWS_AS(FeatureConfig::parse("token,bogus"), TaggerError);
  CHECK(is_stopword("the"));
  CHECK_FALSE(is_stopword("mordor"));
}

TEST_CASE("untrained model keeps everything") {
  const SynthData d = small_synth();
  const TaggerModel m = train_tagger(d.tagged, 0, 1);
  CHECK(m.all_zero());
  for (const auto& ex : d.tagged) {
    const TagSeq t = tag(m, ex.sentence);
    REQUIRE(t.size() == ex.sentence.size());
    REQUIRE(std::all_of(t.begin(), t.end(), [](Tag x) { return x == Tag::Keep; }));
  }
  CHECK_THROWS_AS(train_tagger({}, 3, 1), TaggerError);
}

TEST_CASE("training is deterministic and separates synthetic data") {
  const SynthData d = small_synth();
  const auto idf = std::make_shared<const IdfTable>(build_idf(std::span<const std::string>(d.corpus())));
  const TaggerTrainOptions opt{.config = {}, .idf = idf};
  const TaggerModel a = train_tagger(d.tagged, 10, 42, opt);
  const TaggerModel b = train_tagger(d.tagged, 10, 42, opt);
  CHECK(a == b);
  CHECK_FALSE(a == train_tagger(d.tagged, 10, 43, opt));

  const TagMetrics train = eval_tagger(a, d.tagged);
  CHECK(train.accuracy == 1.0);
  CHECK(train.wild_recall == 1.0);
  for (const auto& ex : d.tagged) REQUIRE(tag(a, ex.sentence) == ex.gold);

  SUBCASE("training error reaches zero within ten epochs") {
    std::size_t prev_errors = ~std::size_t{0};
    bool reached = false;
    for (std::size_t e = 1; e <= 10 && !reached; ++e) {
      const TagMetrics m = eval_tagger(train_tagger(d.tagged, e, 42, opt), d.tagged);
      const auto errors = static_cast<std::size_t>(std::llround((1.0 - m.accuracy) * static_cast<double>(m.tokens)));
      CHECK(errors <= prev_errors + m.tokens / 100);
      prev_errors = errors;
      reached = errors == 0;
    }
    CHECK(reached);
  }
}

TEST_CASE("metrics") {
  const SynthData d = small_synth();
  std::size_t tokens = 0, wild = 0;
  for (const auto& ex : d.tagged) {
    tokens += ex.gold.size();
    wild += static_cast<std::size_t>(std::count(ex.gold.begin(), ex.gold.end(), Tag::Wild));
  }
  const TagMetrics naive = naive_baseline(d.tagged);
  CHECK(naive.accuracy == 1.0 - static_cast<double>(wild) / static_cast<double>(tokens));
  CHECK(naive.wild_recall == 0.0);
  CHECK(naive.wild_precision == 1.0);

  std::vector<TagSeq> perfect, all_wild;
  for (const auto& ex : d.tagged) {
    perfect.push_back(ex.gold);
    all_wild.emplace_back(ex.gold.size(), Tag::Wild);
  }
  const TagMetrics p = score_tags(d.tagged, perfect);
  CHECK(p.accuracy == 1.0);
  CHECK(p.wild_recall == 1.0);
  CHECK(p.wild_precision == 1.0);
  const TagMetrics w = score_tags(d.tagged, all_wild);
  CHECK(w.wild_recall == 1.0);
  CHECK(w.accuracy == doctest::Approx(static_cast<double>(wild) / static_cast<double>(tokens)));

  const std::vector<TaggedExample> no_wild{{seq("a b c"), tags("000"), "g"}};
  CHECK(naive_baseline(no_wild).accuracy == 1.0);
  CHECK(naive_baseline(no_wild).wild_recall == 0.0);
  CHECK_THROWS_AS(naive_baseline({}), TaggerError);
  CHECK_THROWS_AS(eval_tagger(train_tagger(no_wild, 1, 1), {}), TaggerError);
}

TEST_CASE("wild bias") {
  const SynthData d = small_synth();
  const TaggerModel m = train_tagger(d.tagged, 5, 1);
  const TaggerModel eager = m.with_wild_bias(1e6);
  for (const auto& ex : d.tagged) {
    const TagSeq t = tag(eager, ex.sentence);
    REQUIRE(std::all_of(t.begin(), t.end(), [](Tag x) { return x == Tag::Wild; }));
  }
  const std::vector<double> grid{-1.0, 0.0, 1.0};
  const double b = tune_wild_bias(m, d.tagged, grid);
  CHECK(std::find(grid.begin(), grid.end(), b) != grid.end());
  CHECK_THROWS_AS(tune_wild_bias(m, d.tagged, {}), TaggerError);
}

TEST_CASE("save and load") {
  const SynthData d = small_synth();
  const auto idf = std::make_shared<const IdfTable>(build_idf(std::span<const std::string>(d.corpus())));
  const TaggerModel m = train_tagger(d.tagged, 3, 8, {.config = {}, .idf = idf}).with_wild_bias(0.25);
  std::stringstream buf;
  m.save(buf);
  const TaggerModel back = TaggerModel::load(buf, idf);
  CHECK(back == m);
  for (const auto& ex : d.tagged) REQUIRE(tag(back, ex.sentence) == tag(m, ex.sentence));

  std::istringstream bad("snowclone-tagger v1\tfeatures=token\ttrain_seed=1\twild_bias=0\nfoo\t1\n");
  CHECK_THROWS_AS(TaggerModel::load(bad, idf), TaggerError);
  std::istringstream junk("hello\n");
  CHECK_THROWS_AS(TaggerModel::load(junk, idf), TaggerError);
}

TEST_CASE("TaggedExample validation") {
  CHECK_THROWS(TaggedExample{seq("a b"), tags("0"), "g"}.validate());
  CHECK_THROWS(TaggedExample{seq("a b"), tags("01"), ""}.validate());
  CHECK_NOTHROW(TaggedExample{seq("a b"), tags("01"), "g"}.validate());
}
