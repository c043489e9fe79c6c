#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace snowclone;
using namespace testing;

namespace {

bool no_adjacent_wildcards(const SnowclonePattern& p) {
  const auto& el = p.elements();
  for (std::size_t i = 1; i < el.size(); ++i)
    if (el[i].wildcard && el[i - 1].wildcard) return false;
  return true;
}

AnnotationSet ann(const std::string& sentence, std::vector<std::string> bits) {
  AnnotationSet a{seq(sentence), {}};
  for (const auto& b : bits) a.patterns.push_back(tags(b));
  return a;
}

}  // namespace

TEST_CASE("from_tags") {
  const TokenSeq mordor = seq("one does not simply walk into mordor");
  CHECK(from_tags(mordor, tags("0000111")).str() == "one does not simply *");
  CHECK(from_tags(mordor, tags("0000000")).str() == mordor.joined());
  CHECK(from_tags(seq("the pavement was his enemy"), tags("01001")).str() == "the * was his *");
  CHECK(from_tags(mordor, tags("0000111")).origin() == mordor);

  CHECK_THROWS_AS(from_tags(mordor, tags("0101")), std::invalid_argument);
  CHECK_THROWS_AS(from_tags(mordor, tags("1111111")), DegeneratePatternError);
}

TEST_CASE("pattern text form") {
  for (const char* text : {"one does not simply *", "* is the new *", "a", "* x * y *"}) {
    const SnowclonePattern p = SnowclonePattern::parse(text);
    CHECK(p.str() == text);
    CHECK(SnowclonePattern::parse(p.str()) == p);
  }
  CHECK(SnowclonePattern::parse("* is the new *").wildcard_count() == 2);
  CHECK(SnowclonePattern::parse("* is the new *").literal_count() == 3);
  CHECK_THROWS_AS(SnowclonePattern::parse("* *"), PatternParseError);
  CHECK_THROWS_AS(SnowclonePattern::parse("*"), PatternParseError);
  CHECK_THROWS_AS(SnowclonePattern::parse("a  b"), PatternParseError);
  CHECK_THROWS_AS(SnowclonePattern::parse(""), PatternParseError);
  CHECK_THROWS_AS(SnowclonePattern::parse("Capital"), PatternParseError);
  CHECK_THROWS_AS(SnowclonePattern({PatternElement::wild(), PatternElement::wild()}), std::invalid_argument);
}

TEST_CASE("match") {
  const SnowclonePattern p = SnowclonePattern::parse("* is the new *");
  const auto b = match(p, seq("orange is the new black").view());
  REQUIRE(b);
  CHECK(*b == std::vector<WildcardBinding>{{0, 1}, {4, 5}});
  CHECK_FALSE(matches(p, seq("thirty is the old forty")));
  CHECK_FALSE(matches(p, seq("is the new black")));  // wildcard needs a token
  CHECK(matches(p, seq("forty five is the new thirty five")));

  const SnowclonePattern lit = SnowclonePattern::parse("i love lamp");
  CHECK(matches(lit, seq("i love lamp")));
  CHECK_FALSE(matches(lit, seq("i love lamp too")));
  CHECK_FALSE(matches(lit, seq("i love")));

  SUBCASE("leftmost-shortest bindings") {
    const auto r = match(SnowclonePattern::parse("a * b *"), seq("a x b b y").view());
    REQUIRE(r);
    CHECK(*r == std::vector<WildcardBinding>{{1, 2}, {3, 5}});
  }
}

TEST_CASE("round trip over generated tags") {
  Rng rng(5);
  for (int it = 0; it < 500; ++it) {
    const TokenSeq s = seq(random_tokens(rng, 10, 6, 1));
    TagSeq t(s.size());
    for (auto& x : t) x = rng.bernoulli(0.4) ? Tag::Wild : Tag::Keep;
    if (std::all_of(t.begin(), t.end(), [](Tag x) { return x == Tag::Wild; })) t[rng.below(t.size())] = Tag::Keep;
    const SnowclonePattern p = from_tags(s, t);
    REQUIRE(no_adjacent_wildcards(p));
    REQUIRE(matches(p, s));
    for (int v = 0; v < 3; ++v) REQUIRE(matches(p, substitute_wild(s, t, rng)));
  }
}

TEST_CASE("induce_pattern examples") {
  const TokenSeq seed = seq("i love the smell of napalm in the morning");
  const std::vector<TokenSeq> inst{seq("i love the smell of bureaucracy in the morning")};
  CHECK(induce_pattern(seed, inst).str() == "i love the smell of * in the morning");

  const std::vector<TokenSeq> self{seed};
  CHECK(induce_pattern(seed, self).str() == seed.joined());

  const std::vector<TokenSeq> abc{seq("a x c"), seq("a y c")};
  CHECK(induce_pattern(seq("a b c"), abc).str() == "a * c");
  CHECK(oracle_min_wildcards(seq("a b c"), abc) == 1);

  const std::vector<TokenSeq> nothing{seq("x y z")};
  CHECK_THROWS_AS(induce_pattern(seq("a b c"), nothing), DegeneratePatternError);
  CHECK_THROWS_AS(induce_pattern(seed, std::span<const TokenSeq>{}), std::invalid_argument);
}

TEST_CASE("induce_pattern matches its evidence and is minimal on small cases") {
  Rng rng(9);
  int compared = 0;
  for (int it = 0; it < 400; ++it) {
    const TokenSeq s = seq(random_tokens(rng, 7, 5, 2));
    std::vector<TokenSeq> inst;
    const auto n = rng.between(1, 3);
    for (std::uint64_t k = 0; k < n; ++k) {
      TagSeq t(s.size());
      for (auto& x : t) x = rng.bernoulli(0.3) ? Tag::Wild : Tag::Keep;
      inst.push_back(substitute_wild(s, t, rng));
    }
    const int best = oracle_min_wildcards(s, inst);
    std::optional<SnowclonePattern> p;
    try {
      p = induce_pattern(s, inst);
    } catch (const DegeneratePatternError&) {
    }
    if (best < 0) {
      CHECK_FALSE(p.has_value());
      continue;
    }
    if (!p) continue;  // alignment kept nothing even though some pattern exists
    REQUIRE(no_adjacent_wildcards(*p));
    REQUIRE(matches(*p, s));
    for (const auto& c : inst) REQUIRE(matches(*p, c));
    const TagSeq t = induce_tags(s, inst);
    const int wild = static_cast<int>(std::count(t.begin(), t.end(), Tag::Wild));
    CHECK(wild >= best);
    ++compared;
  }
  CHECK(compared > 300);
}

TEST_CASE("agreement measures") {
  const std::vector<AnnotationSet> a{ann("x y z", {"001", "100"}), ann("p q", {"01"})};
  CHECK(exact_match_agreement(a, a) == 1.0);
  CHECK(relaxed_match_agreement(a, a) == 1.0);

  const std::vector<AnnotationSet> one{ann("x y z", {"001"})}, two{ann("x y z", {"011"})};
  CHECK(relaxed_match_agreement(one, two) == doctest::Approx(2.0 / 3.0));
  CHECK(exact_match_agreement(one, two) == 0.0);

  const std::vector<AnnotationSet> keep{ann("x y z", {"000"})}, wild{ann("x y z", {"111"})};
  CHECK(relaxed_match_agreement(keep, wild) == 0.0);

  SUBCASE("half the sentences share a pattern") {
    std::vector<AnnotationSet> p, q;
    for (int i = 0; i < 20; ++i) {
      p.push_back(ann("a b c d", {"0010", "0001"}));
      q.push_back(ann("a b c d", {i < 10 ? "0001" : "1000"}));
    }
    CHECK(exact_match_agreement(p, q) == doctest::Approx(0.5));
  }
  SUBCASE("wildcard runs are merged before comparison") {
    const std::vector<AnnotationSet> merged{ann("a a b", {"110"})};
    const std::vector<AnnotationSet> split{ann("a a b", {"010"})};
    CHECK(exact_match_agreement(merged, split) == 0.0);
    const std::vector<AnnotationSet> x{ann("a b b c", {"0110"})}, y{ann("a b b c", {"0110"})};
    CHECK(exact_match_agreement(x, y) == 1.0);
  }
  SUBCASE("symmetry") {
    Rng rng(4);
    for (int it = 0; it < 100; ++it) {
      std::vector<AnnotationSet> p, q;
      for (int s = 0; s < 5; ++s) {
        const TokenSeq sent = seq(random_tokens(rng, 6, 3, 1));
        AnnotationSet x{sent, {}}, y{sent, {}};
        for (auto* set : {&x, &y}) {
          const auto n = rng.between(1, 3);
          for (std::uint64_t k = 0; k < n; ++k) {
            TagSeq t(sent.size());
            for (auto& v : t) v = rng.bernoulli(0.5) ? Tag::Wild : Tag::Keep;
            set->patterns.push_back(t);
          }
        }
        p.push_back(x);
        q.push_back(y);
      }
      REQUIRE(exact_match_agreement(p, q) == exact_match_agreement(q, p));
      REQUIRE(relaxed_match_agreement(p, q) == relaxed_match_agreement(q, p));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS(exact_match_agreement(one, a));
    const std::vector<AnnotationSet> four{ann("x y z", {"0", "000", "000", "000"})};
    CHECK_THROWS(relaxed_match_agreement(four, four));
    const std::vector<AnnotationSet> none{ann("x y z", {})};
    CHECK_THROWS(exact_match_agreement(none, none));
  }
}
