// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fairprobe/mining.hpp"
#include "fairprobe/mitigation.hpp"
#include "fairprobe/sampler.hpp"
#include "fairprobe/scorer.hpp"
#include "fairprobe/trainer.hpp"
#include "synthetic.hpp"

using namespace fptest;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Counts 283/1000 and 91/1000 at z = 1.96.
Outcome worked_example() {
  const auto schema = planted_schema();
  const RuleSet rules({Rule::categorical(schema, 0, {0})});
  ScorerConfig config;
  const auto r = make_report(rules, 283, 91, 1000, config, true);
  bool ok = std::abs(r.margin_inside - 0.028) <= 0.0005 && std::abs(r.margin_outside - 0.018) <= 0.0005 &&
            std::abs(r.margin - 0.046) <= 0.0005 && std::abs(r.score - 0.192) <= 1e-12 &&
            std::abs(r.confidence - 0.9025) <= 1e-12;

  // the same counts reached through the sampling loop with a scripted oracle
  const auto data = planted_dataset(2000, 1, [](const FeatureVector&, Rng&) { return std::size_t{0}; });
  std::size_t seen_in = 0;
  std::size_t seen_out = 0;
  FunctionOracle<FeatureVector> scripted([&](const FeatureVector& x) {
    if (rules.satisfied_by(x)) {
      return Label(seen_in++ < 283 ? "1" : "0");
    }
    return Label(seen_out++ < 91 ? "1" : "0");
  });
  config.sample_threshold = 999;
  const StructuredSampler sampler(data, rules, SamplerConfig{});
  const auto looped = group_fairness_score(scripted, sampler, "1", config);
  ok = ok && looped.samples == 1000 && looped.favorable_inside == 283 && looped.favorable_outside == 91 &&
       looped.converged && looped.margin == r.margin;
  return {ok, fmt("eps_r=%.5f eps_not_r=%.5f eps=%.5f score=%.3f confidence=%.4f loop_samples=%zu", r.margin_inside,
                  r.margin_outside, r.margin, r.score, r.confidence, looped.samples)};
}

Outcome rule_combinatorics() {
  const FeatureSchema schema({{"race", CategoricalDomain{{"a", "b", "c", "d", "e"}}, true},
                              {"gender", CategoricalDomain{{"female", "male"}}, true},
                              {"age", ContinuousDomain{0, 100, true}, true}},
                             {"0", "1"}, "1");
  const auto race = single_feature_rules(schema, 0);
  const auto gender = single_feature_rules(schema, 1);
  RuleGenerationOptions single{.bins = 10, .interval_mode = IntervalMode::single_bin, .max_rules_per_feature = {}};
  const auto age = single_feature_rules(schema, 2, single);
  const std::vector<std::vector<Rule>> groups = {gender, {race.begin(), race.begin() + 5}, age};
  const std::vector<std::size_t> sizes = {2, 5, 10};
  const auto counted = count_candidate_rule_sets(sizes);
  const auto listed = candidate_rule_sets(groups).size();
  const bool ok = race.size() == 30 && gender.size() == 2 && age.size() == 10 && counted == 197 && listed == 197;
  return {ok, fmt("5-value rules=%zu candidates(2,5,10)=%llu enumerated=%zu", race.size(),
                  static_cast<unsigned long long>(counted), listed)};
}

Outcome support_equivalence() {
  Rng rng(20240601);
  std::size_t checked_sets = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto data = random_small_dataset(rng, 20 + rng.uniform_index(181));
    MiningOptions options;
    options.theta = 0.02 + 0.3 * rng.uniform01();
    options.rules.bins = 3 + rng.uniform_index(2);
    options.rules.interval_mode = rng.bernoulli(0.5) ? IntervalMode::bin_union : IntervalMode::single_bin;
    const auto mined = frequent_rule_sets(data, options);

    std::map<RuleSet, std::size_t> expected;
    for (const auto& rs : candidate_rule_sets(rule_groups(data.schema(), options.rules))) {
      std::size_t count = 0;
      for (const auto& row : data.rows()) {
        bool all = true;
        for (const auto& rule : rs.rules()) {
          all = all && rule.satisfied_by(row.features);
        }
        count += all ? 1 : 0;
      }
      if (static_cast<double>(count) / static_cast<double>(data.size()) >= options.theta && count < data.size()) {
        expected.emplace(rs, count);
      }
    }
    if (expected.size() != mined.frequent.size()) {
      return {false, fmt("trial %d: pruned found %zu, naive %zu", trial, mined.frequent.size(), expected.size())};
    }
    for (const auto& f : mined.frequent) {
      auto it = expected.find(f.rule_set);
      if (it == expected.end() || it->second != f.satisfying || f.total != data.size() ||
          f.support != static_cast<double>(it->second) / static_cast<double>(data.size())) {
        return {false, fmt("trial %d: mismatch on %s", trial, f.rule_set.render().c_str())};
      }
      ++checked_sets;
    }
  }
  return {true, fmt("100 datasets, %zu frequent rule sets matched", checked_sets)};
}

Outcome theorem_coverage() {
  const auto data = planted_dataset(6000, 2, [](const FeatureVector&, Rng&) { return std::size_t{0}; });
  const auto rules = planted_rule_set(data.schema());
  const StructuredSampler sampler(data, rules, SamplerConfig{});
  std::string detail;
  bool ok = true;
  for (auto [pr, pn] : {std::pair{0.3, 0.1}, std::pair{0.5, 0.5}, std::pair{0.9, 0.2}}) {
    std::size_t covered = 0;
    for (std::uint64_t run = 0; run < 500; ++run) {
      BernoulliOracle oracle(rules, pr, pn, derive_seed(run, {0xbe}));
      ScorerConfig config;
      config.seed = run;
      const auto r = group_fairness_score(oracle, sampler, "1", config);
      covered += std::abs(r.score - std::abs(pr - pn)) <= r.margin ? 1 : 0;
    }
    const double coverage = static_cast<double>(covered) / 500.0;
    ok = ok && coverage >= 0.8725;
    detail += fmt("(%.1f,%.1f)=%.3f ", pr, pn, coverage);
  }
  return {ok, detail + "min 0.8725"};
}

Outcome planted_end_to_end() {
  const auto data = planted_dataset(6000, 3, [](const FeatureVector&, Rng&) { return std::size_t{0}; });
  const auto planted = planted_rule_set(data.schema());
  FunctionOracle<FeatureVector> oracle(threshold_rule(data.schema(), 0.2, 0.5));
  const auto mined = frequent_rule_sets(data, MiningOptions{});
  std::vector<FairnessReport> reports;
  for (const auto& f : mined.frequent) {
    const StructuredSampler sampler(data, f.rule_set, SamplerConfig{});
    reports.push_back(group_fairness_score(oracle, sampler, "1", ScorerConfig{}));
  }
  const auto ranking = rank_rule_sets(std::move(reports), 0.05, 3);
  if (ranking.ranked.empty()) {
    return {false, "no findings"};
  }
  const auto& top = ranking.ranked.front().report;
  const bool ok = top.rule_set == planted && std::abs(top.score - 0.30) <= top.margin;
  return {ok, fmt("%zu rule sets scored; top-1 %s score=%.4f eps=%.4f", mined.frequent.size(),
                  top.rule_set.render().c_str(), top.score, top.margin)};
}

Outcome mitigation_property() {
  const auto data = planted_dataset(6000, 4, [](const FeatureVector& x, Rng& rng) {
    const bool group = x[0] == 0 && x[1] == 1 && x[2] == 0;
    const double logit = 3.0 * (x[3] + x[4] - 1.0) - (group ? 1.2 : 0.0);
    return static_cast<std::size_t>(rng.bernoulli(1.0 / (1.0 + std::exp(-logit))) ? 1 : 0);
  });
  const auto& schema = data.schema();
  const auto planted = planted_rule_set(schema);
  TrainerConfig trainer{.learning_rate = 0.005, .epochs = 40, .batch_size = 32, .seed = 5, .validation_fraction = 0};
  const auto trained = train_mlp(data, Architecture{{8}, Activation::relu}, trainer);
  MlpOracle oracle(trained.model, schema);
  const StructuredSampler sampler(data, planted, SamplerConfig{});
  const auto before = group_fairness_score(oracle, sampler, "1", ScorerConfig{});

  MitigationConfig config;
  config.trainer.seed = 5;
  const auto result = mitigate(trained.model, data, before, config, ScorerConfig{}, SamplerConfig{});
  const double reduction = (result.before.score - result.after.score) / result.before.score;
  const double drop = result.accuracy_before - result.accuracy_after;
  const bool ok = result.chosen_round && reduction >= 0.5 && drop <= 0.02;
  return {ok, fmt("score %.4f -> %.4f (%.0f%% lower), held-out accuracy %.4f -> %.4f, %zu counter samples",
                  result.before.score, result.after.score, reduction * 100.0, result.accuracy_before,
                  result.accuracy_after, result.augmentation.size())};
}

Outcome sampler_invariants() {
  const auto schema = mixed_schema();
  Rng rng(6);
  std::vector<LabeledRow> rows;
  for (int i = 0; i < 3000; ++i) {
    rows.push_back({{static_cast<double>(rng.uniform_index(2)), static_cast<double>(rng.uniform_index(4)),
                     static_cast<double>(18 + rng.uniform_index(63)), std::round(rng.uniform01() * 100) / 100,
                     std::round(rng.uniform01() * 100) / 100},
                    rng.uniform_index(2)});
  }
  const StructuredDataset data(schema, rows);
  auto binning = std::make_shared<const Binning>(make_binning(schema.feature(2), 10));
  const RuleSet rules({Rule::categorical(schema, 0, {0}), Rule::interval(schema, 2, binning, 2, 5)});

  // rows keyed by everything except one feature -> the values seen there
  std::vector<std::map<FeatureVector, std::vector<double>>> index(schema.size());
  for (std::size_t f : {3u, 4u}) {
    for (const auto& row : rows) {
      auto key = row.features;
      key[f] = 0;
      index[f][key].push_back(row.features[f]);
    }
  }
  const SamplerConfig config;
  const StructuredSampler sampler(data, rules, config);
  std::size_t structured = 0;
  for (auto side : {Side::inside, Side::outside}) {
    Rng draw_rng(sampler_stream_seed(9, rules, side));
    for (int i = 0; i < 10000; ++i) {
      const auto x = sampler.draw(side, draw_rng);
      if (rules.satisfied_by(x) != (side == Side::inside) || !schema.conforms(x)) {
        return {false, "group membership or domain violated"};
      }
      bool traced = false;
      for (std::size_t f : {3u, 4u}) {
        auto key = x;
        key[f] = 0;
        auto it = index[f].find(key);
        if (it == index[f].end()) {
          continue;
        }
        for (double v : it->second) {
          traced = traced || std::abs(v - x[f]) <= config.decimal_step + 1e-9;
        }
      }
      if (!traced) {
        return {false, "sample is not a one-step perturbation of a seed row"};
      }
      ++structured;
    }
  }

  const auto corpus = small_corpus(600, 7);
  const auto& lexicon = corpus.lexicon();
  std::size_t text = 0;
  for (const auto& terms : std::vector<std::vector<std::string>>{{"gay"}, {"muslim", "lesbian"}, {"african american"}}) {
    std::vector<Rule> rs;
    for (const auto& t : terms) {
      rs.push_back(Rule::term(lexicon, t));
    }
    const RuleSet rule_set(rs);
    const TextSampler ts(corpus, rule_set);
    Rng text_rng(11);
    for (int i = 0; i < 1000 / 3 + 1; ++i) {
      const auto doc = ts.draw(Side::inside, text_rng);
      for (const auto& rule : rule_set.rules()) {
        const auto& term = std::get<ContainsTerm>(rule.payload());
        if (!contains_term(doc, term.term, lexicon)) {
          return {false, "replacement lacks '" + term.term + "'"};
        }
        for (const auto& m : find_terms(doc, lexicon)) {
          if (m.category == term.category && m.term != term.term) {
            return {false, "replacement kept '" + m.term + "'"};
          }
        }
      }
      ++text;
    }
  }
  const RuleSet gay({Rule::term(lexicon, "gay")});
  const auto replaced = TextSampler::replace_terms(tokenize("She is a lesbian"), gay, lexicon);
  const bool lesbian_ok = replaced == TokenSequence{"she", "is", "a", "gay"};
  return {lesbian_ok, fmt("%zu structured samples, %zu text replacements, lesbian->gay %s", structured, text,
                          lesbian_ok ? "ok" : "wrong")};
}

} // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"worked-example arithmetic", 1, worked_example},
      {"rule combinatorics", 1, rule_combinatorics},
      {"support oracle equivalence", 30, support_equivalence},
      {"theorem-1 coverage", 300, theorem_coverage},
      {"planted-bias end-to-end", 300, planted_end_to_end},
      {"mitigation property", 600, mitigation_property},
      {"sampler invariants", 30, sampler_invariants},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = out.pass && seconds < c.limit_seconds;
    failures += pass ? 0 : 1;
    std::printf("%s  %-28s %s [%.2fs, limit %.0fs]\n", pass ? "PASS" : "FAIL", c.name, out.detail.c_str(), seconds,
                c.limit_seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
