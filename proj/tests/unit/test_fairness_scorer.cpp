#include <doctest.h>

#include <cmath>

#include "fairprobe/error.hpp"
#include "fairprobe/scorer.hpp"
#include "fairprobe/trainer.hpp"
#include "synthetic.hpp"

using namespace fairprobe;

namespace {

StructuredDataset uniform_labels(std::size_t rows, std::uint64_t seed) {
  return fptest::planted_dataset(rows, seed, [](const FeatureVector&, Rng& r) { return r.uniform_index(2); });
}

class ShortOracle final : public StructuredOracle {
public:
  std::vector<Label> predict_batch(std::span<const FeatureVector> samples) override {
    return std::vector<Label>(samples.size() / 2, "1");
  }
};

} // namespace

TEST_CASE("margin of error") {
  CHECK(margin_of_error(0.3, 1000, 1.96) == doctest::Approx(1.96 * std::sqrt(0.21 / 1000)).epsilon(1e-14));
  CHECK(margin_of_error(0.0, 50, 1.96) == 0.0);
  CHECK(margin_of_error(1.0, 50, 1.96) == 0.0);
  // widest at one half, shrinking with more samples
  CHECK(margin_of_error(0.5, 100, 1.96) > margin_of_error(0.4, 100, 1.96));
  CHECK(margin_of_error(0.4, 100, 1.96) == doctest::Approx(margin_of_error(0.6, 100, 1.96)));
  double previous = 1.0;
  for (std::size_t n = 10; n < 100000; n *= 3) {
    const double m = margin_of_error(0.3, n, 1.96);
    CHECK(m < previous);
    previous = m;
  }
}

TEST_CASE("reports compose the two margins") {
  const auto schema = fptest::planted_schema();
  const RuleSet rs({Rule::categorical(schema, 0, {0})});
  ScorerConfig c;
  c.z = 2.5;
  c.confidence = 0.99;
  const auto r = make_report(rs, 100, 400, 500, c, false);
  CHECK(r.phi_inside == 0.2);
  CHECK(r.phi_outside == 0.8);
  CHECK(r.score == doctest::Approx(0.6));
  CHECK(r.margin_inside == doctest::Approx(2.5 * std::sqrt(0.16 / 500)));
  CHECK(r.margin_outside == doctest::Approx(r.margin_inside));
  CHECK(r.margin == doctest::Approx(r.margin_inside + r.margin_outside));
  CHECK(r.confidence == doctest::Approx(0.9801));
  CHECK_FALSE(r.converged);
}

TEST_CASE("the margin is only checked after the sample threshold") {
  const auto data = uniform_labels(500, 1);
  const auto rules = fptest::planted_rule_set(data.schema());
  const StructuredSampler sampler(data, rules, {});
  fptest::CountingOracle constant([](const FeatureVector&) { return Label("1"); });
  ScorerConfig c;
  c.sample_threshold = 37;
  c.block_size = 10;
  const auto r = group_fairness_score(constant, sampler, "1", c);
  CHECK(r.samples == 38);
  CHECK(r.converged);
  CHECK(r.score == 0);
  CHECK(r.margin == 0);
  CHECK(constant.samples >= 76);
}

TEST_CASE("stopping happens at the first pair within the threshold") {
  const auto data = uniform_labels(1000, 2);
  const auto rules = fptest::planted_rule_set(data.schema());
  const StructuredSampler sampler(data, rules, {});
  MlpOracle oracle(initialize_mlp(data.schema(), Architecture{}, 11), data.schema());
  ScorerConfig c;
  c.sample_threshold = 50;
  const auto r = group_fairness_score(oracle, sampler, "1", c);
  REQUIRE(r.converged);
  CHECK(r.margin <= c.error_threshold);
  REQUIRE(r.samples > 51);
  // the same streams capped one pair earlier must not have converged
  c.max_samples = r.samples - 1;
  const auto before = group_fairness_score(oracle, sampler, "1", c);
  CHECK_FALSE(before.converged);
  CHECK(before.margin > c.error_threshold);
}

TEST_CASE("estimates land near the true rates") {
  const auto data = uniform_labels(1000, 2);
  const auto rules = fptest::planted_rule_set(data.schema());
  const StructuredSampler sampler(data, rules, {});
  fptest::BernoulliOracle oracle(rules, 0.3, 0.6, 17);
  ScorerConfig c;
  c.sample_threshold = 50;
  const auto r = group_fairness_score(oracle, sampler, "1", c);
  CHECK(r.converged);
  CHECK(std::abs(r.phi_inside - 0.3) < r.margin_inside * 1.5);
  CHECK(std::abs(r.phi_outside - 0.6) < r.margin_outside * 1.5);
}

TEST_CASE("max samples ends unconverged") {
  const auto data = uniform_labels(400, 3);
  const auto rules = fptest::planted_rule_set(data.schema());
  const StructuredSampler sampler(data, rules, {});
  fptest::BernoulliOracle oracle(rules, 0.5, 0.5, 1);
  ScorerConfig c;
  c.sample_threshold = 100;
  c.max_samples = 300;
  c.error_threshold = 0.01;
  const auto r = group_fairness_score(oracle, sampler, "1", c);
  CHECK(r.samples == 300);
  CHECK_FALSE(r.converged);
  CHECK(r.margin > 0.01);
}

TEST_CASE("scores are reproducible and independent of block size") {
  const auto data = uniform_labels(800, 4);
  const auto rules = fptest::planted_rule_set(data.schema());
  const StructuredSampler sampler(data, rules, {});
  MlpOracle oracle(initialize_mlp(data.schema(), Architecture{}, 5), data.schema());
  ScorerConfig c;
  c.sample_threshold = 200;
  const auto base = group_fairness_score(oracle, sampler, "1", c);
  for (std::size_t block : {1u, 7u, 1000u}) {
    c.block_size = block;
    CHECK(group_fairness_score(oracle, sampler, "1", c) == base);
  }
  c.seed = 99;
  const auto reseeded = group_fairness_score(oracle, sampler, "1", c);
  CHECK(reseeded.rule_set == base.rule_set);
  CHECK(reseeded.favorable_inside + reseeded.favorable_outside != base.favorable_inside + base.favorable_outside);
}

TEST_CASE("text scoring") {
  const auto data = fptest::small_corpus(400, 6);
  const auto& lex = data.lexicon();
  const RuleSet rs({Rule::term(lex, "muslim")});
  const TextSampler sampler(data, rs);
  FunctionOracle<TokenSequence> oracle([&](const TokenSequence& t) {
    return Label(contains_term(t, "muslim", lex) ? "negative" : "positive");
  });
  ScorerConfig c;
  c.sample_threshold = 20;
  const auto r = group_fairness_score(oracle, sampler, "positive", c);
  CHECK(r.phi_inside == 0);
  CHECK(r.phi_outside == 1);
  CHECK(r.score == 1);
  CHECK(r.samples == 21);
}

TEST_CASE("oracle failures carry progress") {
  const auto data = uniform_labels(200, 5);
  const auto rules = fptest::planted_rule_set(data.schema());
  const StructuredSampler sampler(data, rules, {});
  std::size_t calls = 0;
  FunctionOracle<FeatureVector> flaky([&](const FeatureVector&) -> Label {
    if (++calls > 602) {
      throw OracleError("connection lost");
    }
    return calls % 2 ? "1" : "0";
  });
  ScorerConfig c;
  c.sample_threshold = 100;
  c.error_threshold = 0.01;
  c.block_size = 100;
  CHECK_THROWS_WITH_AS(group_fairness_score(flaky, sampler, "1", c),
                       doctest::Contains("failed after 301 sample pairs"), OracleError);
  ShortOracle short_oracle;
  CHECK_THROWS_WITH_AS(group_fairness_score(short_oracle, sampler, "1", c), doctest::Contains("wrong number"),
                       OracleError);
}

TEST_CASE("scorer configuration is validated") {
  auto bad = [](auto edit) {
    ScorerConfig c;
    edit(c);
    return c;
  };
  CHECK_NOTHROW(ScorerConfig{}.validate());
  CHECK_THROWS_AS(bad([](ScorerConfig& c) { c.error_threshold = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ScorerConfig& c) { c.z = -1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ScorerConfig& c) { c.confidence = 1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ScorerConfig& c) { c.sample_threshold = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ScorerConfig& c) { c.max_samples = 10; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ScorerConfig& c) { c.block_size = 0; }).validate(), ConfigError);
}

TEST_CASE("ranking orders by score, breaks ties canonically and flags above tolerance") {
  const auto schema = fptest::planted_schema();
  const RuleSet a({Rule::categorical(schema, 0, {0})});
  const RuleSet b({Rule::categorical(schema, 0, {1})});
  const RuleSet d({Rule::categorical(schema, 1, {0})});
  const ScorerConfig c;
  std::vector<FairnessReport> reports{make_report(d, 50, 40, 100, c, true), make_report(b, 30, 10, 100, c, true),
                                      make_report(a, 10, 30, 100, c, true), make_report(a, 50, 45, 100, c, true)};
  const auto ranking = rank_rule_sets(reports, 0.1, 2);
  REQUIRE(ranking.ranked.size() == 4);
  CHECK(ranking.ranked[0].report.rule_set == a);
  CHECK(ranking.ranked[1].report.rule_set == b);
  CHECK(ranking.ranked[0].report.score == ranking.ranked[1].report.score);
  CHECK(ranking.ranked[2].report.rule_set == d);
  CHECK(ranking.ranked[2].report.score == doctest::Approx(0.1));
  CHECK_FALSE(ranking.ranked[2].discriminatory);
  CHECK(ranking.ranked[3].report.score == doctest::Approx(0.05));
  CHECK(ranking.top().size() == 2);
  CHECK(ranking.flagged().size() == 2);
  CHECK(rank_rule_sets({}, 0.05, 3).ranked.empty());
}
